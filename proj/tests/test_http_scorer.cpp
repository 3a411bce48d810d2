#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <thread>

#include "clamp/decoder.hpp"
#include "clamp/error.hpp"
#include "support/error_code.hpp"

using namespace clamp;
using namespace clamp::decoding;
using testsupport::code_of;

namespace {

// Local scorer service on an ephemeral port, torn down with the fixture.
struct Service {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> calls{0};
  std::string last_body;

  Service() {
    server.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      last_body = req.body;
      auto body = nlohmann::json::parse(req.body);
      const auto prefix = body.at("prefix").get<std::vector<int>>();
      // Prefer `a` for the first two tokens, then eos.
      std::vector<double> scores{-1.0, -2.0, -3.0};
      if (prefix.size() >= 2) scores = {-3.0, -2.0, -0.5};
      res.set_content(nlohmann::json{{"scores", scores}}.dump(), "application/json");
    });
    server.Post("/fail", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    server.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"scores\": [1, 2", "application/json");
    });
    server.Post("/wrong-key", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"logits\": [0, 0, 0]}", "application/json");
    });
    server.Post("/short", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"scores\": [0, 0]}", "application/json");
    });
    server.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(600));
      res.set_content("{\"scores\": [0, 0, 0]}", "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~Service() {
    server.stop();
    thread.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port) + path; }
};

}  // namespace

TEST_CASE("scores round-trip over HTTP") {
  Service svc;
  HttpScorer s(svc.url("/score"), 3);
  const std::vector<TokenId> prefix{0, 1};
  CHECK(s.score("hello \"there\"", prefix) == std::vector<double>{-3.0, -2.0, -0.5});
  auto sent = nlohmann::json::parse(svc.last_body);
  CHECK(sent.at("conditioning") == "hello \"there\"");
  CHECK(sent.at("prefix") == nlohmann::json::array({0, 1}));
}

TEST_CASE("decode through a remote scorer") {
  Service svc;
  HttpScorer s(svc.url("/score"), 3);
  auto g = std::make_shared<const Grammar>(parse_grammar("S -> \"a\" S \"b\" | \"\"\n"));
  TokenTrie trie(Vocabulary({"a", "b", ""}, 2));
  auto results = decode(s, g, trie, {2, 6, true, LengthHandling::kNone}, "x");
  REQUIRE_FALSE(results.empty());
  for (const auto& r : results) CHECK(recognize(*g, r.text));
  CHECK(svc.calls > 0);
}

TEST_CASE("scorer failures are errors, not masks") {
  Service svc;
  CHECK(code_of([&] { HttpScorer(svc.url("/fail"), 3).score("", {}); }) == ErrorCode::kScorer);
  CHECK(code_of([&] { HttpScorer(svc.url("/garbage"), 3).score("", {}); }) == ErrorCode::kScorer);
  CHECK(code_of([&] { HttpScorer(svc.url("/wrong-key"), 3).score("", {}); }) == ErrorCode::kScorer);
  CHECK(code_of([&] { HttpScorer(svc.url("/short"), 3).score("", {}); }) == ErrorCode::kScorer);
  CHECK(code_of([&] { HttpScorer(svc.url("/missing"), 3).score("", {}); }) == ErrorCode::kScorer);
  CHECK(code_of([&] { HttpScorer(svc.url("/slow"), 3, std::chrono::milliseconds(100)).score("", {}); }) ==
        ErrorCode::kScorer);
  CHECK(HttpScorer(svc.url("/slow"), 3, std::chrono::milliseconds(3000)).score("", {}).size() == 3);

  auto g = std::make_shared<const Grammar>(parse_grammar("S -> \"a\"\n"));
  TokenTrie trie(Vocabulary({"a", ""}, 1));
  HttpScorer broken(svc.url("/fail"), 2);
  CHECK(code_of([&] { decode(broken, g, trie, {}, ""); }) == ErrorCode::kScorer);
}

TEST_CASE("unreachable service and bad urls") {
  int port;
  {
    Service gone;
    port = gone.port;
  }
  HttpScorer s("http://127.0.0.1:" + std::to_string(port) + "/score", 3, std::chrono::milliseconds(500));
  CHECK(code_of([&] { s.score("", {}); }) == ErrorCode::kScorer);
  CHECK(code_of([] { HttpScorer("ftp://x/score", 3); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { HttpScorer("localhost:80/score", 3); }) == ErrorCode::kInvalidArgument);
}
