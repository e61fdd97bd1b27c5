#pragma once

#include <set>
#include <string>
#include <vector>

#include "ixtune/configuration.hpp"
#include "ixtune/cost_oracle.hpp"

namespace ixtune {

/// Candidate indexes merged from any number of advisors, structurally
/// deduplicated with provenance tags unioned per candidate.
struct CandidatePool {
  struct Entry {
    IndexDefinition index;
    std::set<std::string> sources;
  };
  std::vector<Entry> entries;

  /// Adds a candidate; a structural duplicate only unions its source tag.
  void add(IndexDefinition index, const std::string& source);
  bool empty() const { return entries.empty(); }
  size_t size() const { return entries.size(); }

  nlohmann::json to_json() const;
  static CandidatePool from_json(const nlohmann::json& doc, const std::string& default_source);
};

/// Union of pools with structural dedup, provenance union, and a stable
/// order (table name, then structural digest).
CandidatePool merge_pools(const std::vector<CandidatePool>& pools);

/// Greedy forward selection for one query: repeatedly add the candidate
/// with the largest strict decrease in estimated cost, stopping at the cap
/// or when no candidate helps. Ties go to the lowest resulting estimate,
/// then to the earlier pool position.
std::vector<IndexDefinition> query_level_best(const CandidatePool& pool,
                                              const std::string& query,
                                              const WhatIfOracle& oracle,
                                              int per_query_cap);

struct GreedyOptions {
  /// Seed the workload-level phase with the whole pool instead of the
  /// union of per-query winners.
  bool phase2_full_pool = false;
};

/// Two-phase selection under a max-count constraint: per-query winners
/// first, then workload-level greedy over their union until k indexes or
/// no strict improvement remains.
Configuration greedy_select(const CandidatePool& pool,
                            const std::vector<std::string>& workload, int k,
                            const WhatIfOracle& oracle, GreedyOptions options = {});

}  // namespace ixtune
