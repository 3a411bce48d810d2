#include "clamp/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "clamp/error.hpp"

namespace clamp::io {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << contents;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

namespace {

template <typename F>
void for_each_record(std::string_view jsonl, F&& f) {
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin < jsonl.size()) {
    std::size_t end = jsonl.find('\n', begin);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kData, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

sql::DbSchema schema_from(const json& j) {
  sql::DbSchema s;
  for (const auto& t : j.at("tables")) {
    sql::Table table;
    table.name = t.at("name").get<std::string>();
    for (const auto& c : t.value("columns", json::array())) {
      sql::Column col;
      col.name = c.at("name").get<std::string>();
      col.type = c.value("type", "");
      for (const auto& v : c.value("values", json::array()))
        col.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      table.columns.push_back(std::move(col));
    }
    s.tables.push_back(std::move(table));
  }
  s.validate();
  return s;
}

json schema_to(const sql::DbSchema& s) {
  json tables = json::array();
  for (const auto& t : s.tables) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"type", c.type}, {"values", c.values}});
    tables.push_back({{"name", t.name}, {"columns", std::move(cols)}});
  }
  return {{"tables", std::move(tables)}};
}

}  // namespace

Vocabulary parse_vocabulary(std::string_view jsonl) {
  std::map<long long, std::string> entries;
  long long eos = -1;
  for_each_record(jsonl, [&](const json& r) {
    if (r.contains("eos")) {
      if (eos >= 0) throw Error(ErrorCode::kData, "second eos record");
      eos = r.at("eos").get<long long>();
      if (!r.contains("id")) return;
    }
    long long id = r.at("id").get<long long>();
    if (id < 0) throw Error(ErrorCode::kData, "negative token id");
    if (!entries.emplace(id, r.at("text").get<std::string>()).second)
      throw Error(ErrorCode::kData, "duplicate token id " + std::to_string(id));
  });
  if (eos < 0) throw Error(ErrorCode::kData, "vocabulary has no {\"eos\": id} record");
  entries.emplace(eos, "");
  std::vector<std::string> dense;
  for (auto& [id, text] : entries) {
    if (id != static_cast<long long>(dense.size()))
      throw Error(ErrorCode::kData, "token ids are not dense: missing id " + std::to_string(dense.size()));
    dense.push_back(std::move(text));
  }
  try {
    return Vocabulary(std::move(dense), static_cast<TokenId>(eos));
  } catch (const Error& e) {
    throw Error(ErrorCode::kData, e.what());
  }
}

Vocabulary load_vocabulary(const std::string& path) { return parse_vocabulary(read_file(path)); }

induction::SignatureTable parse_signatures(std::string_view jsonl) {
  induction::SignatureTable table;
  for_each_record(jsonl, [&](const json& r) {
    if (r.contains("literal")) {
      table.add_literal(r.at("literal").get<std::string>(), r.at("class").get<std::string>());
      return;
    }
    induction::Signature sig;
    sig.args = r.value("args", std::vector<std::string>{});
    sig.result = r.at("result").get<std::string>();
    table.add_symbol(r.at("symbol").get<std::string>(), std::move(sig));
  });
  table.validate();
  return table;
}

induction::SignatureTable load_signatures(const std::string& path) { return parse_signatures(read_file(path)); }

sql::DbSchema parse_schema(std::string_view text) {
  try {
    return schema_from(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kData, std::string("schema: ") + e.what());
  }
}

std::string schema_json(const sql::DbSchema& schema) { return schema_to(schema).dump(); }

std::vector<splits::DatasetExample> parse_dataset(std::string_view jsonl) {
  std::vector<splits::DatasetExample> out;
  for_each_record(jsonl, [&](const json& r) {
    splits::DatasetExample ex;
    const json& id = r.at("id");
    ex.id = id.is_string() ? id.get<std::string>() : id.dump();
    ex.dialogue_id = r.value("dialogue_id", "");
    ex.turn_index = r.value("turn_index", std::size_t{0});
    ex.utterance = r.value("utterance", "");
    ex.last_user_utt = r.value("last_user_utt", "");
    ex.last_agent_utt = r.value("last_agent_utt", "");
    ex.prior_interactions = r.value("prior_interactions", std::vector<std::string>{});
    if (r.contains("schema") && !r.at("schema").is_null()) ex.schema = schema_from(r.at("schema"));
    ex.gold = r.at("gold").get<std::string>();
    ex.split = r.value("split", "train");
    out.push_back(std::move(ex));
  });
  return out;
}

std::vector<splits::DatasetExample> load_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

std::string dataset_jsonl(std::span<const splits::DatasetExample> dataset) {
  std::string out;
  for (const auto& ex : dataset) {
    json r{{"id", ex.id},
           {"dialogue_id", ex.dialogue_id},
           {"turn_index", ex.turn_index},
           {"utterance", ex.utterance},
           {"last_user_utt", ex.last_user_utt},
           {"last_agent_utt", ex.last_agent_utt},
           {"prior_interactions", ex.prior_interactions},
           {"gold", ex.gold},
           {"split", ex.split}};
    if (ex.schema) r["schema"] = schema_to(*ex.schema);
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::vector<splits::Prediction> parse_predictions(std::string_view jsonl) {
  std::vector<splits::Prediction> out;
  for_each_record(jsonl, [&](const json& r) {
    const json& id = r.at("id");
    out.push_back({id.is_string() ? id.get<std::string>() : id.dump(), r.at("prediction").get<std::string>()});
  });
  return out;
}

std::vector<splits::Prediction> load_predictions(const std::string& path) {
  return parse_predictions(read_file(path));
}

}  // namespace clamp::io
