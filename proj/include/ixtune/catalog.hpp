#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ixtune {

/// Canonical (table, column) reference. Instances produced by
/// resolve_column carry the catalog's stored spelling, so plain string
/// equality is sufficient downstream.
struct ColumnRef {
  std::string table;
  std::string column;

  auto operator<=>(const ColumnRef&) const = default;
  std::string str() const { return table + "." + column; }
};

struct ColumnDef {
  std::string name;
  std::string type;  // opaque tag, only rendered into DDL/schema text
  bool operator==(const ColumnDef&) const = default;
};

struct TableDef {
  std::string name;
  std::uint64_t row_count = 0;
  std::vector<ColumnDef> columns;

  const ColumnDef* find_column(std::string_view column) const;
  bool operator==(const TableDef&) const = default;
};

struct ViewDef {
  std::string name;
  std::string definition;  // opaque SQL text, never parsed
  bool operator==(const ViewDef&) const = default;
};

/// One secondary index: ordered key columns plus an unordered set of
/// included (leaf payload) columns, all on a single base table.
struct IndexDefinition {
  std::string table;
  std::string name;
  std::vector<std::string> key_columns;
  std::vector<std::string> included_columns;  // canonical form is sorted

  /// Case-folded "table|keys|sorted includes" string; two definitions are
  /// the same index iff their structural keys match, regardless of name.
  std::string structural_key() const;
  std::string digest8() const;
  bool structurally_equal(const IndexDefinition& other) const;

  /// Sorts included columns into canonical order.
  void normalize();

  bool operator==(const IndexDefinition&) const = default;
};

struct Catalog {
  std::vector<TableDef> tables;
  std::vector<ViewDef> views;
  std::vector<IndexDefinition> preexisting_indexes;

  const TableDef* find_table(std::string_view name) const;
  const ViewDef* find_view(std::string_view name) const;
  std::vector<const IndexDefinition*> indexes_on(std::string_view table) const;

  bool operator==(const Catalog&) const = default;
};

/// Parses and semantically validates a catalog document. Throws InputError
/// naming the offending entity on duplicate tables, indexes over unknown
/// tables/columns, or indexes on views.
Catalog load_catalog(const std::string& text);
Catalog catalog_from_json(const nlohmann::json& doc);

nlohmann::json catalog_to_json(const Catalog& catalog);
std::string render_catalog(const Catalog& catalog);

/// Canonicalizes (table, column) against the catalog; views are not
/// resolvable targets. Throws InputError when either name is unknown.
ColumnRef resolve_column(const Catalog& catalog, std::string_view table,
                         std::string_view column);

/// Total check: returns every rule the index breaks (empty means valid).
std::vector<std::string> validate_index(const Catalog& catalog,
                                        const IndexDefinition& index);

nlohmann::json index_to_json(const IndexDefinition& index);
IndexDefinition index_from_json(const nlohmann::json& doc);

/// CREATE NONCLUSTERED INDEX statement; INCLUDE clause omitted when empty.
std::string index_ddl(const IndexDefinition& index);

}  // namespace ixtune
