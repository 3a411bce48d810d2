#include <httplib.h>

#include <json.hpp>

#include "clamp/decoder.hpp"
#include "clamp/error.hpp"

namespace clamp::decoding {

HttpScorer::HttpScorer(std::string url, std::size_t vocab_size, std::chrono::milliseconds timeout)
    : vocab_size_(vocab_size), timeout_(timeout) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0)
    throw Error(ErrorCode::kInvalidArgument, "scorer url must start with http://: " + url);
  const auto path_begin = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_begin);
  path_ = path_begin == std::string::npos ? "/" : url.substr(path_begin);
}

std::vector<double> HttpScorer::score(std::string_view conditioning, std::span<const TokenId> prefix) const {
  nlohmann::json req;
  req["conditioning"] = std::string(conditioning);
  req["prefix"] = std::vector<TokenId>(prefix.begin(), prefix.end());

  httplib::Client client(host_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  auto res = client.Post(path_, req.dump(), "application/json");
  if (!res) throw Error(ErrorCode::kScorer, "scorer request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(ErrorCode::kScorer, "scorer returned HTTP " + std::to_string(res->status));

  std::vector<double> scores;
  try {
    auto body = nlohmann::json::parse(res->body);
    scores = body.at("scores").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kScorer, std::string("malformed scorer response: ") + e.what());
  }
  if (scores.size() != vocab_size_)
    throw Error(ErrorCode::kScorer, "scorer returned " + std::to_string(scores.size()) + " scores, expected " +
                                        std::to_string(vocab_size_));
  return scores;
}

}  // namespace clamp::decoding
