#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ixtune/configuration.hpp"

namespace ixtune {

struct CostEstimate {
  std::string query_id;
  std::string config_digest;
  double estimated_cost = 0.0;  // optimizer cost units
};

/// One base-table access of a synthetic query. error_factor skews only the
/// estimated channel; the true-time channel always sees 1.
struct TableAccess {
  std::string table;
  std::uint64_t rows = 0;
  double selectivity = 0.0;  // fraction of rows surviving the access
  std::vector<std::string> needed_columns;
  std::optional<std::string> seek_column;
  double error_factor = 1.0;
};

struct QuerySpec {
  std::string id;
  std::vector<TableAccess> accesses;
};

struct SyntheticWorkloadSpec {
  double time_per_unit_ms = 1.0;
  std::vector<QuerySpec> queries;

  const QuerySpec* find(std::string_view query_id) const;

  static SyntheticWorkloadSpec from_json(const nlohmann::json& doc);
  static SyntheticWorkloadSpec load(const std::string& text);
  nlohmann::json to_json() const;
};

/// Hypothetical-configuration cost estimation: deterministic, pure, and
/// never materializes anything.
class WhatIfOracle {
 public:
  virtual ~WhatIfOracle() = default;
  virtual CostEstimate estimate_query(const Configuration& config,
                                      const std::string& query_id) const = 0;
};

double estimate_workload(const WhatIfOracle& oracle, const Configuration& config,
                         const std::vector<std::string>& workload);

/// Closed-form cost model over SyntheticWorkloadSpec with separable
/// estimated and true channels. Per access the optimizer-style choice is
/// the cheapest of: full scan (rows), covering seek (log2(rows+1) +
/// selectivity*rows) when some index's first key matches the seek column
/// and its columns cover the needed set, or a seek plus lookups
/// (log2(rows+1) + 3*selectivity*rows) when the key matches but coverage
/// is incomplete. The estimated channel multiplies each access by its
/// error factor; the true channel uses the raw units scaled by
/// time_per_unit_ms.
class SyntheticOracle final : public WhatIfOracle {
 public:
  explicit SyntheticOracle(SyntheticWorkloadSpec spec);

  CostEstimate estimate_query(const Configuration& config,
                              const std::string& query_id) const override;

  double true_time_ms(const Configuration& config, const std::string& query_id) const;
  double true_workload_ms(const Configuration& config,
                          const std::vector<std::string>& workload) const;

  const SyntheticWorkloadSpec& spec() const { return spec_; }

 private:
  double access_units(const TableAccess& access, const Configuration& config) const;

  SyntheticWorkloadSpec spec_;
};

}  // namespace ixtune
