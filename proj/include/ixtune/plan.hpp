#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ixtune/catalog.hpp"

namespace ixtune {

enum class OpKind { Scan, IndexSeek, Filter, Join, GroupBy, OrderBy, Other };

std::string_view op_kind_name(OpKind op);
std::optional<OpKind> op_kind_from(std::string_view name);

/// One physical operator. self_cost excludes children; subtree_cost is
/// inclusive and must equal self_cost plus the children's subtree costs.
struct PlanNode {
  int node_id = 0;
  OpKind op = OpKind::Other;
  std::string detail;
  double self_cost = 0.0;
  double subtree_cost = 0.0;
  double est_rows = 0.0;
  std::optional<std::string> table;  // required for Scan and IndexSeek
  std::set<ColumnRef> all_ref_cols;  // populated for Scan/IndexSeek
  std::vector<ColumnRef> seek_cols;
  std::vector<ColumnRef> predicate_cols;
  std::vector<ColumnRef> group_by_cols;
  std::vector<ColumnRef> order_by_cols;
  std::vector<ColumnRef> join_key_cols;
  std::vector<PlanNode> children;  // ordered, visited left to right

  bool operator==(const PlanNode&) const = default;
};

struct PlanTree {
  std::string query_id;
  PlanNode root;

  bool operator==(const PlanTree&) const = default;
};

/// Parses the flat node-list document into a tree, resolving every column
/// against the catalog and enforcing structural invariants (single root,
/// no cycles, cost identity, no duplicate columns within a role list).
PlanTree parse_plan(const std::string& text, const Catalog& catalog);
PlanTree plan_from_json(const nlohmann::json& doc, const Catalog& catalog);

/// Checks the invariants parse_plan guarantees; for trees built in memory.
void validate_plan(const PlanTree& plan);

/// Deterministic aligned table, one row per operator in pre-order with
/// depth-indented operator names.
std::string render_plan_table(const PlanTree& plan);

nlohmann::json plan_to_json(const PlanTree& plan);
std::string render_plan_json(const PlanTree& plan);

double total_cost(const PlanTree& plan);

/// Every table named by a Scan or IndexSeek node.
std::set<std::string> referenced_tables(const PlanTree& plan);
std::set<std::string> referenced_tables(const PlanNode& root);

}  // namespace ixtune
