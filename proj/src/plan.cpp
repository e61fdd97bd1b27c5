#include "ixtune/plan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>

#include "ixtune/errors.hpp"
#include "ixtune/util.hpp"

namespace ixtune {

using nlohmann::json;
namespace u = util;

namespace {

struct OpName {
  OpKind kind;
  std::string_view name;
};
constexpr OpName kOpNames[] = {
    {OpKind::Scan, "Scan"},       {OpKind::IndexSeek, "IndexSeek"},
    {OpKind::Filter, "Filter"},   {OpKind::Join, "Join"},
    {OpKind::GroupBy, "GroupBy"}, {OpKind::OrderBy, "OrderBy"},
    {OpKind::Other, "Other"},
};

constexpr double kCostTolerance = 1e-6;  // relative, with unit floor

bool cost_identity_holds(const PlanNode& node) {
  double children = 0.0;
  for (const auto& c : node.children) children += c.subtree_cost;
  const double expected = node.self_cost + children;
  const double scale = std::max(std::abs(node.subtree_cost), 1.0);
  return std::abs(node.subtree_cost - expected) <= kCostTolerance * scale;
}

ColumnRef parse_column_ref(const std::string& text, const Catalog& catalog,
                           int node_id) {
  const auto dot = text.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == text.size())
    throw InputError("plan: node " + std::to_string(node_id) +
                     ": column reference '" + text + "' is not of the form table.column");
  try {
    return resolve_column(catalog, text.substr(0, dot), text.substr(dot + 1));
  } catch (const InputError& e) {
    throw InputError("plan: node " + std::to_string(node_id) + ": " + e.what());
  }
}

std::vector<ColumnRef> parse_role_list(const json& cols, const char* role,
                                       const Catalog& catalog, int node_id) {
  std::vector<ColumnRef> out;
  if (!cols.contains(role)) return out;
  if (!cols[role].is_array())
    throw InputError("plan: node " + std::to_string(node_id) + ": cols." + role +
                     " must be an array");
  for (const auto& entry : cols[role]) {
    if (!entry.is_string())
      throw InputError("plan: node " + std::to_string(node_id) + ": cols." + role +
                       " entries must be strings");
    ColumnRef ref = parse_column_ref(entry.get<std::string>(), catalog, node_id);
    if (std::find(out.begin(), out.end(), ref) != out.end())
      throw InputError("plan: node " + std::to_string(node_id) + ": duplicate column '" +
                       ref.str() + "' in cols." + role);
    out.push_back(std::move(ref));
  }
  return out;
}

void validate_node(const PlanNode& node, std::set<int>& seen_ids) {
  if (!seen_ids.insert(node.node_id).second)
    throw InputError("plan: duplicate node id " + std::to_string(node.node_id));
  if (node.self_cost < 0 || node.subtree_cost < 0 || node.est_rows < 0)
    throw InputError("plan: node " + std::to_string(node.node_id) +
                     ": costs and row estimates must be non-negative");
  if ((node.op == OpKind::Scan || node.op == OpKind::IndexSeek) && !node.table)
    throw InputError("plan: node " + std::to_string(node.node_id) + ": " +
                     std::string(op_kind_name(node.op)) + " node has no table");
  if (!cost_identity_holds(node))
    throw InputError("plan: node " + std::to_string(node.node_id) +
                     ": subtree_cost does not equal self_cost plus children subtree costs");
  for (const auto& child : node.children) validate_node(child, seen_ids);
}

}  // namespace

std::string_view op_kind_name(OpKind op) {
  for (const auto& e : kOpNames)
    if (e.kind == op) return e.name;
  return "Other";
}

std::optional<OpKind> op_kind_from(std::string_view name) {
  for (const auto& e : kOpNames)
    if (u::ieq(e.name, name)) return e.kind;
  return std::nullopt;
}

void validate_plan(const PlanTree& plan) {
  std::set<int> ids;
  validate_node(plan.root, ids);
}

PlanTree plan_from_json(const json& doc, const Catalog& catalog) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
    throw InputError("plan: document must be an object with a 'nodes' array");
  if (!doc.contains("query_id") || !doc["query_id"].is_string())
    throw InputError("plan: missing 'query_id'");
  const auto& nodes = doc["nodes"];
  if (nodes.empty()) throw InputError("plan: 'nodes' is empty");

  struct Raw {
    PlanNode node;
    std::optional<int> parent;
  };
  std::map<int, Raw> by_id;
  std::vector<int> order;  // document order, drives child ordering
  std::optional<int> root_id;

  for (const auto& n : nodes) {
    if (!n.contains("id") || !n["id"].is_number_integer())
      throw InputError("plan: every node needs an integer 'id'");
    const int id = n["id"].get<int>();
    if (by_id.count(id)) throw InputError("plan: duplicate node id " + std::to_string(id));

    Raw raw;
    raw.node.node_id = id;
    if (!n.contains("op") || !n["op"].is_string())
      throw InputError("plan: node " + std::to_string(id) + ": missing 'op'");
    const auto kind = op_kind_from(n["op"].get<std::string>());
    if (!kind)
      throw InputError("plan: node " + std::to_string(id) + ": unknown operator kind '" +
                       n["op"].get<std::string>() + "'");
    raw.node.op = *kind;
    raw.node.detail = n.value("detail", "");
    raw.node.est_rows = n.value("est_rows", 0.0);
    raw.node.self_cost = n.value("self_cost", 0.0);
    raw.node.subtree_cost = n.value("subtree_cost", 0.0);

    if (n.contains("table") && !n["table"].is_null()) {
      if (!n["table"].is_string())
        throw InputError("plan: node " + std::to_string(id) + ": 'table' must be a string");
      const std::string t = u::trim(n["table"].get<std::string>());
      const TableDef* def = catalog.find_table(t);
      if (!def) {
        if (catalog.find_view(t))
          throw InputError("plan: node " + std::to_string(id) + ": '" + t +
                           "' is a view, not a base table");
        throw InputError("plan: node " + std::to_string(id) + ": unknown table '" + t + "'");
      }
      raw.node.table = def->name;
    }

    const json cols = n.value("cols", json::object());
    for (const auto& ref : parse_role_list(cols, "all_ref", catalog, id))
      raw.node.all_ref_cols.insert(ref);
    raw.node.seek_cols = parse_role_list(cols, "seek", catalog, id);
    raw.node.predicate_cols = parse_role_list(cols, "predicate", catalog, id);
    raw.node.group_by_cols = parse_role_list(cols, "group_by", catalog, id);
    raw.node.order_by_cols = parse_role_list(cols, "order_by", catalog, id);
    raw.node.join_key_cols = parse_role_list(cols, "join_key", catalog, id);

    if (n.contains("parent") && !n["parent"].is_null()) {
      if (!n["parent"].is_number_integer())
        throw InputError("plan: node " + std::to_string(id) + ": 'parent' must be an integer or null");
      raw.parent = n["parent"].get<int>();
    } else {
      if (root_id)
        throw InputError("plan: multiple root nodes (" + std::to_string(*root_id) + " and " +
                         std::to_string(id) + ")");
      root_id = id;
    }
    order.push_back(id);
    by_id.emplace(id, std::move(raw));
  }
  if (!root_id) throw InputError("plan: no root node (every node has a parent)");

  std::map<int, std::vector<int>> children_of;
  for (int id : order) {
    const auto& raw = by_id.at(id);
    if (!raw.parent) continue;
    if (!by_id.count(*raw.parent))
      throw InputError("plan: node " + std::to_string(id) + ": dangling parent reference " +
                       std::to_string(*raw.parent));
    if (*raw.parent == id)
      throw InputError("plan: node " + std::to_string(id) + " is its own parent");
    children_of[*raw.parent].push_back(id);
  }

  // Assemble depth-first from the root; anything left unvisited sits on a
  // parent cycle disconnected from the root.
  size_t visited = 0;
  std::function<PlanNode(int)> build = [&](int id) -> PlanNode {
    ++visited;
    PlanNode node = std::move(by_id.at(id).node);
    for (int child : children_of[id]) node.children.push_back(build(child));
    return node;
  };
  PlanTree tree;
  tree.query_id = doc["query_id"].get<std::string>();
  tree.root = build(*root_id);
  if (visited != by_id.size())
    throw InputError("plan: " + std::to_string(by_id.size() - visited) +
                     " node(s) unreachable from the root (parent cycle)");

  validate_plan(tree);
  return tree;
}

PlanTree parse_plan(const std::string& text, const Catalog& catalog) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw InputError("plan: malformed JSON document");
  return plan_from_json(doc, catalog);
}

namespace {

void collect_rows(const PlanNode& node, int depth,
                  std::vector<std::vector<std::string>>& rows) {
  std::string op = std::string(2 * static_cast<size_t>(depth), ' ');
  op += op_kind_name(node.op);
  rows.push_back({std::to_string(node.node_id), std::move(op), node.detail,
                  u::format_number(node.est_rows), u::format_number(node.self_cost),
                  u::format_number(node.subtree_cost)});
  for (const auto& child : node.children) collect_rows(child, depth + 1, rows);
}

}  // namespace

std::string render_plan_table(const PlanTree& plan) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"id", "operator", "detail", "est_rows", "self_cost", "subtree_cost"});
  collect_rows(plan.root, 0, rows);

  std::array<size_t, 6> width{};
  for (const auto& row : rows)
    for (size_t i = 0; i < 6; ++i) width[i] = std::max(width[i], row[i].size());

  std::string out;
  for (const auto& row : rows) {
    for (size_t i = 0; i < 6; ++i) {
      if (i) out += " | ";
      out += row[i];
      if (i + 1 < 6) out.append(width[i] - row[i].size(), ' ');
    }
    out += "\n";
  }
  return out;
}

namespace {

void append_node_json(const PlanNode& node, std::optional<int> parent, json& nodes) {
  auto refs = [](const std::vector<ColumnRef>& list) {
    json arr = json::array();
    for (const auto& r : list) arr.push_back(r.str());
    return arr;
  };
  json all_ref = json::array();
  for (const auto& r : node.all_ref_cols) all_ref.push_back(r.str());

  json n{{"id", node.node_id},
         {"parent", parent ? json(*parent) : json(nullptr)},
         {"op", std::string(op_kind_name(node.op))},
         {"table", node.table ? json(*node.table) : json(nullptr)},
         {"detail", node.detail},
         {"est_rows", node.est_rows},
         {"self_cost", node.self_cost},
         {"subtree_cost", node.subtree_cost},
         {"cols",
          {{"all_ref", all_ref},
           {"seek", refs(node.seek_cols)},
           {"predicate", refs(node.predicate_cols)},
           {"group_by", refs(node.group_by_cols)},
           {"order_by", refs(node.order_by_cols)},
           {"join_key", refs(node.join_key_cols)}}}};
  nodes.push_back(std::move(n));
  for (const auto& child : node.children) append_node_json(child, node.node_id, nodes);
}

}  // namespace

json plan_to_json(const PlanTree& plan) {
  json nodes = json::array();
  append_node_json(plan.root, std::nullopt, nodes);
  return json{{"query_id", plan.query_id}, {"nodes", nodes}};
}

std::string render_plan_json(const PlanTree& plan) {
  return plan_to_json(plan).dump(2) + "\n";
}

double total_cost(const PlanTree& plan) { return plan.root.subtree_cost; }

namespace {
void collect_tables(const PlanNode& node, std::set<std::string>& out) {
  if ((node.op == OpKind::Scan || node.op == OpKind::IndexSeek) && node.table)
    out.insert(*node.table);
  for (const auto& child : node.children) collect_tables(child, out);
}
}  // namespace

std::set<std::string> referenced_tables(const PlanTree& plan) {
  return referenced_tables(plan.root);
}

std::set<std::string> referenced_tables(const PlanNode& root) {
  std::set<std::string> out;
  collect_tables(root, out);
  return out;
}

}  // namespace ixtune
