#pragma once

#include <string>
#include <vector>

#include "clamp/grammar.hpp"

namespace clamp::sql {

struct Column {
  std::string name;
  std::string type;
  std::vector<std::string> values;  // optional samples, rendered into inputs only
};

struct Table {
  std::string name;
  std::vector<Column> columns;
};

struct DbSchema {
  std::vector<Table> tables;

  // Unique nonempty table names; unique nonempty column names per table.
  void validate() const;
};

inline constexpr const char* kTableNonterminal = "TABLE_NAME";
inline constexpr const char* kColumnNonterminal = "COLUMN_NAME";

// Replaces the TABLE_NAME and COLUMN_NAME rules of `base` with one literal
// per schema table and one per column (bare and `table.column`), then
// reduces. Throws kInvalidArgument when either nonterminal is missing and
// kEmptyLanguage when the schema leaves no query derivable.
Grammar specialize_sql_grammar(const Grammar& base, const DbSchema& schema);

// `table : col1 , col2 | table2 : ...`; with values, each column is followed
// by up to three samples as `col (v1, v2, v3)`.
std::string render_schema(const DbSchema& schema, bool with_values);

}  // namespace clamp::sql
