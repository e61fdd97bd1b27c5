#include "ixtune/rule_tuner.hpp"

#include <algorithm>

#include "ixtune/errors.hpp"
#include "ixtune/util.hpp"

namespace ixtune {

namespace {

void append_if_not_exists(std::vector<ColumnRef>& keys, const ColumnRef& column) {
  if (std::find(keys.begin(), keys.end(), column) == keys.end())
    keys.push_back(column);
}

void append_keys(const std::vector<ColumnRef>& role, AccumulatorMap& acc) {
  for (const auto& column : role) {
    auto it = acc.find(column.table);
    if (it == acc.end())
      throw InternalError("rule tuner: column '" + column.str() +
                          "' references a table with no accumulator (plan/catalog mismatch)");
    append_if_not_exists(it->second.key_columns, column);
  }
}

}  // namespace

void traverse(const PlanNode& node, AccumulatorMap& accumulators) {
  for (const auto& child : node.children) traverse(child, accumulators);

  if (node.op == OpKind::Scan || node.op == OpKind::IndexSeek) {
    auto it = accumulators.find(node.table.value_or(""));
    if (it == accumulators.end())
      throw InternalError("rule tuner: access node " + std::to_string(node.node_id) +
                          " targets a table with no accumulator");
    it->second.access_cost += node.self_cost;
    it->second.referenced_columns.insert(node.all_ref_cols.begin(), node.all_ref_cols.end());
  }

  append_keys(node.seek_cols, accumulators);
  append_keys(node.predicate_cols, accumulators);
  append_keys(node.group_by_cols, accumulators);
  append_keys(node.order_by_cols, accumulators);
  append_keys(node.join_key_cols, accumulators);
}

std::vector<IndexDefinition> simple_index_recommendation(const PlanNode& root,
                                                         const TunerParams& params) {
  if (!params.valid())
    throw InputError("rule tuner: alpha must satisfy 0 <= alpha < 1");

  AccumulatorMap accumulators;
  for (const auto& table : referenced_tables(root))
    accumulators.emplace(table, TableAccumulator{});
  traverse(root, accumulators);

  const double threshold = params.alpha * root.subtree_cost;
  std::vector<IndexDefinition> result;
  for (const auto& [table, acc] : accumulators) {
    if (!(acc.access_cost > threshold)) continue;
    if (acc.key_columns.empty()) continue;  // no selective or ordering access

    IndexDefinition index;
    index.table = table;
    for (const auto& key : acc.key_columns) index.key_columns.push_back(key.column);
    for (const auto& col : acc.referenced_columns) {
      const bool is_key = std::find(acc.key_columns.begin(), acc.key_columns.end(), col) !=
                          acc.key_columns.end();
      if (!is_key) index.included_columns.push_back(col.column);
    }
    index.normalize();
    index.name = "rt_" + table + "_" + index.digest8();
    result.push_back(std::move(index));
  }
  // std::map iteration already orders by table name; keep it explicit.
  std::sort(result.begin(), result.end(),
            [](const IndexDefinition& a, const IndexDefinition& b) {
              return util::iless(a.table, b.table);
            });
  return result;
}

std::vector<IndexDefinition> recommend_for_plan(const PlanTree& plan,
                                                const TunerParams& params) {
  return simple_index_recommendation(plan.root, params);
}

}  // namespace ixtune
