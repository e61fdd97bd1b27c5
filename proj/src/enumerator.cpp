#include "ixtune/enumerator.hpp"

#include <algorithm>
#include <limits>

#include "ixtune/errors.hpp"
#include "ixtune/util.hpp"

namespace ixtune {

using nlohmann::json;
namespace u = util;

namespace {

// Relative slack below which a cost decrease is treated as float noise.
constexpr double kImprovementEpsilon = 1e-9;

bool strictly_better(double candidate, double incumbent) {
  return candidate < incumbent * (1.0 - kImprovementEpsilon);
}

bool pool_order_less(const CandidatePool::Entry& a, const CandidatePool::Entry& b) {
  if (!u::ieq(a.index.table, b.index.table)) return u::iless(a.index.table, b.index.table);
  return a.index.digest8() < b.index.digest8();
}

}  // namespace

void CandidatePool::add(IndexDefinition index, const std::string& source) {
  index.normalize();
  const std::string key = index.structural_key();
  for (auto& entry : entries) {
    if (entry.index.structural_key() == key) {
      entry.sources.insert(source);
      return;
    }
  }
  entries.push_back(Entry{std::move(index), {source}});
}

json CandidatePool::to_json() const {
  json arr = json::array();
  for (const auto& entry : entries) {
    json item = index_to_json(entry.index);
    item["sources"] = entry.sources;
    arr.push_back(std::move(item));
  }
  return arr;
}

CandidatePool CandidatePool::from_json(const json& doc, const std::string& default_source) {
  if (!doc.is_array()) throw InputError("candidate pool: expected a JSON array");
  CandidatePool pool;
  for (const auto& item : doc) {
    IndexDefinition index = index_from_json(item);
    if (item.contains("sources") && item["sources"].is_array() && !item["sources"].empty()) {
      for (const auto& s : item["sources"]) pool.add(index, s.get<std::string>());
    } else {
      pool.add(std::move(index), default_source);
    }
  }
  return pool;
}

CandidatePool merge_pools(const std::vector<CandidatePool>& pools) {
  CandidatePool merged;
  for (const auto& pool : pools)
    for (const auto& entry : pool.entries)
      for (const auto& source : entry.sources) merged.add(entry.index, source);
  std::sort(merged.entries.begin(), merged.entries.end(), pool_order_less);
  return merged;
}

namespace {

/// One greedy pass over `pool` rooted at `base`, evaluated by `cost_of`.
/// Returns the selected indexes in pick order.
template <typename CostFn>
std::vector<IndexDefinition> greedy_pick(const CandidatePool& pool, Configuration base,
                                         int cap, CostFn cost_of) {
  std::vector<IndexDefinition> picked;
  std::vector<bool> used(pool.entries.size(), false);
  double incumbent = cost_of(base);

  while (static_cast<int>(picked.size()) < cap) {
    double best_cost = std::numeric_limits<double>::infinity();
    size_t best_at = pool.entries.size();
    for (size_t i = 0; i < pool.entries.size(); ++i) {
      if (used[i]) continue;
      Configuration trial = base;
      trial.add(pool.entries[i].index);
      if (trial.indexes.size() == base.indexes.size()) continue;  // structural dup of member
      const double cost = cost_of(trial);
      if (cost < best_cost) {  // ties keep the earlier pool entry
        best_cost = cost;
        best_at = i;
      }
    }
    if (best_at == pool.entries.size() || !strictly_better(best_cost, incumbent)) break;
    used[best_at] = true;
    picked.push_back(pool.entries[best_at].index);
    base.add(pool.entries[best_at].index);
    incumbent = best_cost;
  }
  return picked;
}

}  // namespace

std::vector<IndexDefinition> query_level_best(const CandidatePool& pool,
                                              const std::string& query,
                                              const WhatIfOracle& oracle,
                                              int per_query_cap) {
  if (per_query_cap < 1) throw InputError("enumerator: per-query cap must be >= 1");
  Configuration base;
  base.constraint_k = per_query_cap;
  return greedy_pick(pool, std::move(base), per_query_cap, [&](const Configuration& c) {
    return oracle.estimate_query(c, query).estimated_cost;
  });
}

Configuration greedy_select(const CandidatePool& pool,
                            const std::vector<std::string>& workload, int k,
                            const WhatIfOracle& oracle, GreedyOptions options) {
  if (k < 1) throw InputError("enumerator: k must be >= 1");

  CandidatePool seed;
  if (options.phase2_full_pool) {
    seed = pool;
  } else {
    // Phase 1: per-query winners form the workload-level search space.
    for (const auto& query : workload) {
      for (const auto& index : query_level_best(pool, query, oracle, k)) {
        for (const auto& entry : pool.entries) {
          if (entry.index.structurally_equal(index)) {
            for (const auto& source : entry.sources) seed.add(index, source);
            break;
          }
        }
      }
    }
    std::sort(seed.entries.begin(), seed.entries.end(), pool_order_less);
  }

  // Phase 2: workload-level greedy over the seed.
  Configuration result;
  result.constraint_k = k;
  const auto picked =
      greedy_pick(seed, Configuration{{}, k}, k, [&](const Configuration& c) {
        return estimate_workload(oracle, c, workload);
      });
  for (const auto& index : picked) result.add(index);
  return result;
}

}  // namespace ixtune
