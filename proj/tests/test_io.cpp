#include <doctest.h>

#include <filesystem>

#include "clamp/error.hpp"
#include "clamp/io.hpp"
#include "support/error_code.hpp"

using namespace clamp;
using testsupport::code_of;

namespace {

std::string message_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("vocabulary files") {
  Vocabulary v = io::parse_vocabulary("{\"id\": 1, \"text\": \"b\"}\n\n{\"id\": 0, \"text\": \"a\"}\n{\"eos\": 2}\n");
  CHECK(v.size() == 3);
  CHECK(v.eos() == 2);
  CHECK(v.text(0) == "a");
  CHECK(io::parse_vocabulary("{\"id\": 0, \"text\": \"\", \"eos\": 0}\n{\"id\": 1, \"text\": \"x\"}").eos() == 0);

  CHECK(code_of([] { io::parse_vocabulary("{\"id\": 0, \"text\": \"a\"}"); }) == ErrorCode::kData);
  CHECK(code_of([] { io::parse_vocabulary("{\"id\": 0, \"text\": \"a\"}\n{\"id\": 2, \"text\": \"b\"}\n{\"eos\": 3}"); }) ==
        ErrorCode::kData);
  CHECK(code_of([] { io::parse_vocabulary("{\"id\": 0, \"text\": \"a\"}\n{\"id\": 0, \"text\": \"b\"}\n{\"eos\": 1}"); }) ==
        ErrorCode::kData);
  CHECK(code_of([] { io::parse_vocabulary("{\"id\": 0, \"text\": \"\"}\n{\"eos\": 1}"); }) == ErrorCode::kData);
  CHECK(message_of([] { io::parse_vocabulary("{\"id\": 0, \"text\": \"a\"}\n{\"id\": 1 \"text\"}\n"); })
            .starts_with("line 2:"));
}

TEST_CASE("the example vocabulary") {
  Vocabulary v = io::load_vocabulary(CLAMP_SOURCE_DIR "/data/examples/anbn_vocab.jsonl");
  CHECK(v.size() == 5);
  CHECK(v.eos() == 4);
  CHECK(v.text(2) == "ab");
}

TEST_CASE("signature files") {
  auto t = io::parse_signatures(
      "{\"symbol\": \"f\", \"args\": [\"Int\"], \"result\": \"Str\"}\n"
      "{\"symbol\": \"one\", \"result\": \"Int\"}\n"
      "{\"literal\": \"N\", \"class\": \"[0-9] | [0-9] $\"}\n");
  REQUIRE(t.find("f"));
  CHECK(t.find("f")->args == std::vector<std::string>{"Int"});
  CHECK(t.find("one")->args.empty());
  REQUIRE(t.literal("N"));
  CHECK(code_of([] { io::parse_signatures("{\"symbol\": \"f\", \"args\": [\"Missing\"], \"result\": \"A\"}"); }) ==
        ErrorCode::kData);
  CHECK(code_of([] { io::parse_signatures("{\"symbol\": \"f\"}"); }) == ErrorCode::kData);
  CHECK(message_of([] { io::parse_signatures("{\"symbol\": \"a\", \"result\": \"A\"}\n{\"symbol\": \"a\", \"result\": \"A\"}"); })
            .starts_with("line 2:"));
  auto cal = io::load_signatures(CLAMP_SOURCE_DIR "/data/examples/calflow_signatures.jsonl");
  CHECK(cal.find("Yield"));
  CHECK(cal.literal("String"));
}

TEST_CASE("schemas round-trip") {
  auto s = io::parse_schema(io::read_file(CLAMP_SOURCE_DIR "/data/examples/spider_head_schema.json"));
  REQUIRE(s.tables.size() == 2);
  CHECK(s.tables[0].columns[2].name == "born_state");
  CHECK(s.tables[0].columns[2].values.size() == 4);
  CHECK(io::schema_json(io::parse_schema(io::schema_json(s))) == io::schema_json(s));
  CHECK(io::parse_schema("{\"tables\": [{\"name\": \"t\", \"columns\": [{\"name\": \"c\", \"values\": [1, 2.5]}]}]}")
            .tables[0]
            .columns[0]
            .values == std::vector<std::string>{"1", "2.5"});
  CHECK(code_of([] { io::parse_schema("{\"tables\": [{\"name\": \"t\"}, {\"name\": \"t\"}]}"); }) == ErrorCode::kData);
  CHECK(code_of([] { io::parse_schema("{"); }) == ErrorCode::kData);
}

TEST_CASE("datasets round-trip") {
  auto d = io::load_dataset(CLAMP_SOURCE_DIR "/data/examples/calflow.jsonl");
  REQUIRE(d.size() == 4);
  CHECK(d[0].dialogue_id == "d1");
  CHECK(d[3].split == "dev");
  const std::string once = io::dataset_jsonl(d);
  CHECK(io::dataset_jsonl(io::parse_dataset(once)) == once);

  auto numeric = io::parse_dataset("{\"id\": 7, \"gold\": \"x\", \"schema\": {\"tables\": [{\"name\": \"t\"}]}}");
  CHECK(numeric[0].id == "7");
  CHECK(numeric[0].split == "train");
  REQUIRE(numeric[0].schema);
  CHECK(io::dataset_jsonl(io::parse_dataset(io::dataset_jsonl(numeric))) == io::dataset_jsonl(numeric));
  CHECK(code_of([] { io::parse_dataset("{\"id\": 1}"); }) == ErrorCode::kData);
}

TEST_CASE("predictions") {
  auto p = io::parse_predictions("{\"id\": \"a\", \"prediction\": \"(x)\"}\n{\"id\": 3, \"prediction\": \"\"}\n");
  REQUIRE(p.size() == 2);
  CHECK(p[1].id == "3");
  CHECK(code_of([] { io::parse_predictions("{\"id\": \"a\"}"); }) == ErrorCode::kData);
}

TEST_CASE("files") {
  CHECK(code_of([] { io::read_file("/nonexistent/clamp/file"); }) == ErrorCode::kIo);
  CHECK(code_of([] { io::write_file("/nonexistent/clamp/file", "x"); }) == ErrorCode::kIo);
  const auto path = (std::filesystem::temp_directory_path() / "clamp_io_test.txt").string();
  io::write_file(path, std::string("a\0b\n", 4));
  CHECK(io::read_file(path) == std::string("a\0b\n", 4));
  std::filesystem::remove(path);
}
