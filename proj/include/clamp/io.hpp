#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clamp/induction.hpp"
#include "clamp/splits.hpp"
#include "clamp/sql.hpp"
#include "clamp/tokens.hpp"

// Readers for the on-disk formats. Every function throws clamp::Error with
// kIo for unreadable files and kData for malformed content; JSON Lines
// errors name the offending line.
namespace clamp::io {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// JSON Lines: {"id": int, "text": string} per token plus one {"eos": int}
// record. The eos id may be listed with an empty text or left out.
Vocabulary parse_vocabulary(std::string_view jsonl);
Vocabulary load_vocabulary(const std::string& path);

// JSON Lines: {"symbol": s, "args": [types], "result": type} and
// {"literal": type, "class": snippet}.
induction::SignatureTable parse_signatures(std::string_view jsonl);
induction::SignatureTable load_signatures(const std::string& path);

// {"tables": [{"name": s, "columns": [{"name": s, "type": s, "values": [...]}]}]}
sql::DbSchema parse_schema(std::string_view json);
std::string schema_json(const sql::DbSchema& schema);

// JSON Lines of DatasetExample fields. `id` and `gold` are required; a
// `schema` field holds an inline schema object.
std::vector<splits::DatasetExample> parse_dataset(std::string_view jsonl);
std::vector<splits::DatasetExample> load_dataset(const std::string& path);
std::string dataset_jsonl(std::span<const splits::DatasetExample> dataset);

// JSON Lines: {"id": s, "prediction": s}.
std::vector<splits::Prediction> parse_predictions(std::string_view jsonl);
std::vector<splits::Prediction> load_predictions(const std::string& path);

}  // namespace clamp::io
