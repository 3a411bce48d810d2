#include "clamp/sql.hpp"

#include <algorithm>
#include <set>

#include "clamp/error.hpp"

namespace clamp::sql {

void DbSchema::validate() const {
  std::set<std::string> tables_seen;
  for (const auto& t : tables) {
    if (t.name.empty()) throw Error(ErrorCode::kData, "schema table with an empty name");
    if (!tables_seen.insert(t.name).second) throw Error(ErrorCode::kData, "duplicate table '" + t.name + "'");
    std::set<std::string> cols;
    for (const auto& c : t.columns) {
      if (c.name.empty()) throw Error(ErrorCode::kData, "table '" + t.name + "' has a column with an empty name");
      if (!cols.insert(c.name).second)
        throw Error(ErrorCode::kData, "duplicate column '" + c.name + "' in table '" + t.name + "'");
    }
  }
}

Grammar specialize_sql_grammar(const Grammar& base, const DbSchema& schema) {
  schema.validate();
  for (const char* nt : {kTableNonterminal, kColumnNonterminal})
    if (!base.find_nonterminal(nt))
      throw Error(ErrorCode::kInvalidArgument, std::string("base grammar has no ") + nt + " nonterminal");

  std::vector<Production> prods;
  for (const auto& p : base.productions())
    if (p.lhs != kTableNonterminal && p.lhs != kColumnNonterminal) prods.push_back(p);

  bool any_column = false;
  for (const auto& t : schema.tables) {
    prods.push_back({kTableNonterminal, {Symbol::terminal(t.name)}});
    for (const auto& c : t.columns) {
      prods.push_back({kColumnNonterminal, {Symbol::terminal(c.name)}});
      prods.push_back({kColumnNonterminal, {Symbol::terminal(t.name + "." + c.name)}});
      any_column = true;
    }
  }
  // A nonterminal left without names keeps a self-loop so it stays defined
  // but unproductive; reduction then drops it or reports an empty language.
  if (schema.tables.empty())
    prods.push_back({kTableNonterminal, {Symbol::nonterminal(kTableNonterminal)}});
  if (!any_column)
    prods.push_back({kColumnNonterminal, {Symbol::nonterminal(kColumnNonterminal)}});

  return reduce(Grammar(base.start(), std::move(prods), base.version_tag()));
}

std::string render_schema(const DbSchema& schema, bool with_values) {
  std::string out;
  for (std::size_t i = 0; i < schema.tables.size(); ++i) {
    const Table& t = schema.tables[i];
    if (i) out += " | ";
    out += t.name + " :";
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      const Column& c = t.columns[j];
      out += j ? " , " : " ";
      out += c.name;
      if (with_values && !c.values.empty()) {
        out += " (";
        const std::size_t n = std::min<std::size_t>(3, c.values.size());
        for (std::size_t k = 0; k < n; ++k) {
          if (k) out += ", ";
          out += c.values[k];
        }
        out += ')';
      }
    }
  }
  return out;
}

}  // namespace clamp::sql
