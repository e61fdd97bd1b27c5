#include "ixtune/catalog.hpp"

#include <algorithm>

#include "ixtune/errors.hpp"
#include "ixtune/util.hpp"

namespace ixtune {

using nlohmann::json;
namespace u = util;

const ColumnDef* TableDef::find_column(std::string_view column) const {
  for (const auto& c : columns)
    if (u::ieq(c.name, column)) return &c;
  return nullptr;
}

const TableDef* Catalog::find_table(std::string_view name) const {
  for (const auto& t : tables)
    if (u::ieq(t.name, name)) return &t;
  return nullptr;
}

const ViewDef* Catalog::find_view(std::string_view name) const {
  for (const auto& v : views)
    if (u::ieq(v.name, name)) return &v;
  return nullptr;
}

std::vector<const IndexDefinition*> Catalog::indexes_on(std::string_view table) const {
  std::vector<const IndexDefinition*> out;
  for (const auto& idx : preexisting_indexes)
    if (u::ieq(idx.table, table)) out.push_back(&idx);
  return out;
}

std::string IndexDefinition::structural_key() const {
  std::vector<std::string> includes;
  includes.reserve(included_columns.size());
  for (const auto& c : included_columns) includes.push_back(u::to_lower(c));
  std::sort(includes.begin(), includes.end());

  std::string key = u::to_lower(table);
  key += '|';
  for (const auto& c : key_columns) {
    key += u::to_lower(c);
    key += ',';
  }
  key += '|';
  for (const auto& c : includes) {
    key += c;
    key += ',';
  }
  return key;
}

std::string IndexDefinition::digest8() const {
  return u::to_hex(u::fnv1a64(structural_key()), 8);
}

bool IndexDefinition::structurally_equal(const IndexDefinition& other) const {
  return structural_key() == other.structural_key();
}

void IndexDefinition::normalize() {
  std::sort(included_columns.begin(), included_columns.end(),
            [](const std::string& a, const std::string& b) { return u::iless(a, b); });
}

namespace {

std::string get_identifier(const json& node, const char* field, const std::string& context) {
  if (!node.contains(field) || !node[field].is_string())
    throw InputError(std::string("catalog: missing or non-string '") + field + "' in " + context);
  std::string value = u::trim(node[field].get<std::string>());
  if (value.empty())
    throw InputError(std::string("catalog: empty '") + field + "' in " + context);
  return value;
}

}  // namespace

IndexDefinition index_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("index: expected a JSON object");
  IndexDefinition idx;
  idx.table = get_identifier(doc, "table", "index");
  if (doc.contains("name") && doc["name"].is_string())
    idx.name = u::trim(doc["name"].get<std::string>());
  if (!doc.contains("key_columns") || !doc["key_columns"].is_array())
    throw InputError("index: missing 'key_columns' array");
  for (const auto& k : doc["key_columns"]) {
    if (!k.is_string()) throw InputError("index: key column must be a string");
    idx.key_columns.push_back(u::trim(k.get<std::string>()));
  }
  if (doc.contains("included_columns")) {
    if (!doc["included_columns"].is_array())
      throw InputError("index: 'included_columns' must be an array");
    for (const auto& c : doc["included_columns"]) {
      if (!c.is_string()) throw InputError("index: included column must be a string");
      idx.included_columns.push_back(u::trim(c.get<std::string>()));
    }
  }
  idx.normalize();
  return idx;
}

json index_to_json(const IndexDefinition& index) {
  IndexDefinition canon = index;
  canon.normalize();
  return json{{"table", canon.table},
              {"name", canon.name},
              {"key_columns", canon.key_columns},
              {"included_columns", canon.included_columns}};
}

Catalog catalog_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("catalog: expected a JSON object");
  Catalog cat;

  for (const auto& t : doc.value("tables", json::array())) {
    TableDef table;
    table.name = get_identifier(t, "name", "table");
    if (cat.find_table(table.name))
      throw InputError("catalog: duplicate table '" + table.name + "'");
    if (!t.contains("row_count") || !t["row_count"].is_number_integer() ||
        t["row_count"].get<std::int64_t>() < 0)
      throw InputError("catalog: table '" + table.name + "' needs a non-negative integer row_count");
    table.row_count = t["row_count"].get<std::uint64_t>();
    for (const auto& c : t.value("columns", json::array())) {
      ColumnDef col;
      col.name = get_identifier(c, "name", "column of table " + table.name);
      col.type = c.value("type", "");
      if (table.find_column(col.name))
        throw InputError("catalog: duplicate column '" + col.name + "' in table '" + table.name + "'");
      table.columns.push_back(std::move(col));
    }
    cat.tables.push_back(std::move(table));
  }

  for (const auto& v : doc.value("views", json::array())) {
    ViewDef view;
    view.name = get_identifier(v, "name", "view");
    if (cat.find_table(view.name) || cat.find_view(view.name))
      throw InputError("catalog: view name '" + view.name + "' collides with an existing table or view");
    view.definition = v.value("definition", "");
    cat.views.push_back(std::move(view));
  }

  for (const auto& i : doc.value("indexes", json::array())) {
    IndexDefinition idx = index_from_json(i);
    auto violations = validate_index(cat, idx);
    if (!violations.empty())
      throw InputError("catalog: invalid index '" + (idx.name.empty() ? idx.digest8() : idx.name) +
                       "': " + u::join(violations, "; "));
    cat.preexisting_indexes.push_back(std::move(idx));
  }
  return cat;
}

Catalog load_catalog(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw InputError("catalog: malformed JSON document");
  return catalog_from_json(doc);
}

json catalog_to_json(const Catalog& catalog) {
  json tables = json::array();
  for (const auto& t : catalog.tables) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"type", c.type}});
    tables.push_back({{"name", t.name}, {"row_count", t.row_count}, {"columns", cols}});
  }
  json views = json::array();
  for (const auto& v : catalog.views)
    views.push_back({{"name", v.name}, {"definition", v.definition}});
  json indexes = json::array();
  for (const auto& i : catalog.preexisting_indexes) indexes.push_back(index_to_json(i));
  return json{{"tables", tables}, {"views", views}, {"indexes", indexes}};
}

std::string render_catalog(const Catalog& catalog) {
  return catalog_to_json(catalog).dump(2) + "\n";
}

ColumnRef resolve_column(const Catalog& catalog, std::string_view table,
                         std::string_view column) {
  const std::string t = u::trim(table), c = u::trim(column);
  const TableDef* def = catalog.find_table(t);
  if (!def) {
    if (catalog.find_view(t))
      throw InputError("unknown table '" + t + "' (views are not indexable targets)");
    throw InputError("unknown table '" + t + "'");
  }
  const ColumnDef* col = def->find_column(c);
  if (!col) throw InputError("unknown column '" + c + "' in table '" + def->name + "'");
  return ColumnRef{def->name, col->name};
}

std::vector<std::string> validate_index(const Catalog& catalog,
                                        const IndexDefinition& index) {
  std::vector<std::string> violations;
  if (catalog.find_view(index.table)) {
    violations.push_back("indexes on views are prohibited: '" + index.table + "' is a view");
    return violations;
  }
  const TableDef* table = catalog.find_table(index.table);
  if (!table) {
    violations.push_back("unknown table '" + index.table + "'");
    return violations;
  }
  if (index.key_columns.empty())
    violations.push_back("key column list is empty");
  for (const auto& k : index.key_columns)
    if (!table->find_column(k))
      violations.push_back("key column '" + k + "' does not exist in table '" + table->name + "'");
  for (const auto& c : index.included_columns) {
    if (!table->find_column(c))
      violations.push_back("included column '" + c + "' does not exist in table '" + table->name + "'");
    for (const auto& k : index.key_columns)
      if (u::ieq(k, c))
        violations.push_back("column '" + c + "' appears in both key and included lists");
  }
  // duplicate key columns
  for (size_t i = 0; i < index.key_columns.size(); ++i)
    for (size_t j = i + 1; j < index.key_columns.size(); ++j)
      if (u::ieq(index.key_columns[i], index.key_columns[j]))
        violations.push_back("duplicate key column '" + index.key_columns[i] + "'");
  return violations;
}

std::string index_ddl(const IndexDefinition& index) {
  IndexDefinition canon = index;
  canon.normalize();
  std::string ddl = "CREATE NONCLUSTERED INDEX " +
                    (canon.name.empty() ? "ix_" + canon.table + "_" + canon.digest8() : canon.name) +
                    " ON " + canon.table + " (" + u::join(canon.key_columns, ", ") + ")";
  if (!canon.included_columns.empty())
    ddl += " INCLUDE (" + u::join(canon.included_columns, ", ") + ")";
  ddl += ";";
  return ddl;
}

}  // namespace ixtune
