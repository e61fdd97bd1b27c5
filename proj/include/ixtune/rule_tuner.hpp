#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ixtune/catalog.hpp"
#include "ixtune/plan.hpp"

namespace ixtune {

/// Per-table state collected while walking a plan: key columns in first-
/// access order, every referenced column, and accumulated access cost.
struct TableAccumulator {
  std::vector<ColumnRef> key_columns;       // ordered, duplicate-free
  std::set<ColumnRef> referenced_columns;
  double access_cost = 0.0;
};

using AccumulatorMap = std::map<std::string, TableAccumulator>;

struct TunerParams {
  double alpha = 0.0;  // table cost threshold as a fraction of total plan cost

  bool valid() const { return alpha >= 0.0 && alpha < 1.0; }
};

/// Post-order walk: base-table access nodes (Scan, IndexSeek) add their
/// cost and referenced columns; selective and ordering roles append key
/// columns in the order seek, predicate, group-by, order-by, join-key.
/// Every table in the map must be pre-initialized; a column whose table
/// has no accumulator signals a plan/catalog mismatch.
void traverse(const PlanNode& node, AccumulatorMap& accumulators);

/// One covering index per table whose accumulated access cost exceeds
/// alpha times the total plan cost; key columns in first-access order,
/// remaining referenced columns included. Tables that never hit a
/// selective or ordering operator (empty key list) are skipped. Output is
/// sorted by table name.
std::vector<IndexDefinition> simple_index_recommendation(const PlanNode& root,
                                                         const TunerParams& params);

std::vector<IndexDefinition> recommend_for_plan(const PlanTree& plan,
                                                const TunerParams& params);

}  // namespace ixtune
