#include "ixtune/cost_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "ixtune/errors.hpp"
#include "ixtune/util.hpp"

namespace ixtune {

using nlohmann::json;
namespace u = util;

const QuerySpec* SyntheticWorkloadSpec::find(std::string_view query_id) const {
  for (const auto& q : queries)
    if (q.id == query_id) return &q;
  return nullptr;
}

SyntheticWorkloadSpec SyntheticWorkloadSpec::from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("workload spec: expected a JSON object");
  SyntheticWorkloadSpec spec;
  spec.time_per_unit_ms = doc.value("time_per_unit_ms", 1.0);
  if (spec.time_per_unit_ms <= 0)
    throw InputError("workload spec: time_per_unit_ms must be positive");
  for (const auto& q : doc.value("queries", json::array())) {
    QuerySpec query;
    if (!q.contains("id") || !q["id"].is_string())
      throw InputError("workload spec: every query needs a string 'id'");
    query.id = q["id"].get<std::string>();
    if (spec.find(query.id))
      throw InputError("workload spec: duplicate query id '" + query.id + "'");
    for (const auto& a : q.value("accesses", json::array())) {
      TableAccess access;
      if (!a.contains("table") || !a["table"].is_string())
        throw InputError("workload spec: access in query '" + query.id + "' needs a 'table'");
      access.table = u::trim(a["table"].get<std::string>());
      if (!a.contains("rows") || !a["rows"].is_number_integer() || a["rows"].get<std::int64_t>() < 0)
        throw InputError("workload spec: access on '" + access.table +
                         "' needs a non-negative integer 'rows'");
      access.rows = a["rows"].get<std::uint64_t>();
      access.selectivity = a.value("selectivity", 1.0);
      if (access.selectivity < 0.0 || access.selectivity > 1.0)
        throw InputError("workload spec: selectivity must be in [0,1] on '" + access.table + "'");
      for (const auto& c : a.value("needed", json::array()))
        access.needed_columns.push_back(u::trim(c.get<std::string>()));
      if (a.contains("seek_col") && !a["seek_col"].is_null())
        access.seek_column = u::trim(a["seek_col"].get<std::string>());
      access.error_factor = a.value("eps", 1.0);
      if (!(access.error_factor > 0.0))
        throw InputError("workload spec: eps must be positive on '" + access.table + "'");
      query.accesses.push_back(std::move(access));
    }
    spec.queries.push_back(std::move(query));
  }
  return spec;
}

SyntheticWorkloadSpec SyntheticWorkloadSpec::load(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw InputError("workload spec: malformed JSON document");
  return from_json(doc);
}

json SyntheticWorkloadSpec::to_json() const {
  json queries_json = json::array();
  for (const auto& q : queries) {
    json accesses = json::array();
    for (const auto& a : q.accesses) {
      accesses.push_back({{"table", a.table},
                          {"rows", a.rows},
                          {"selectivity", a.selectivity},
                          {"needed", a.needed_columns},
                          {"seek_col", a.seek_column ? json(*a.seek_column) : json(nullptr)},
                          {"eps", a.error_factor}});
    }
    queries_json.push_back({{"id", q.id}, {"accesses", accesses}});
  }
  return json{{"time_per_unit_ms", time_per_unit_ms}, {"queries", queries_json}};
}

double estimate_workload(const WhatIfOracle& oracle, const Configuration& config,
                         const std::vector<std::string>& workload) {
  double total = 0.0;
  for (const auto& query_id : workload)
    total += oracle.estimate_query(config, query_id).estimated_cost;
  return total;
}

SyntheticOracle::SyntheticOracle(SyntheticWorkloadSpec spec) : spec_(std::move(spec)) {}

double SyntheticOracle::access_units(const TableAccess& access,
                                     const Configuration& config) const {
  const double rows = static_cast<double>(access.rows);
  double best = rows;  // full scan is always available
  if (!access.seek_column) return best;

  const double seek = std::log2(rows + 1.0);
  for (const auto& index : config.indexes) {
    if (!u::ieq(index.table, access.table)) continue;
    if (index.key_columns.empty() || !u::ieq(index.key_columns.front(), *access.seek_column))
      continue;
    const bool covering = std::all_of(
        access.needed_columns.begin(), access.needed_columns.end(), [&](const std::string& need) {
          const auto matches = [&](const std::string& col) { return u::ieq(col, need); };
          return std::any_of(index.key_columns.begin(), index.key_columns.end(), matches) ||
                 std::any_of(index.included_columns.begin(), index.included_columns.end(), matches);
        });
    const double cost =
        covering ? seek + access.selectivity * rows      // index-only access
                 : seek + access.selectivity * rows * 3; // per-row lookups
    best = std::min(best, cost);
  }
  return best;
}

CostEstimate SyntheticOracle::estimate_query(const Configuration& config,
                                             const std::string& query_id) const {
  const QuerySpec* query = spec_.find(query_id);
  if (!query) throw InputError("oracle: unknown query id '" + query_id + "'");
  double units = 0.0;
  for (const auto& access : query->accesses)
    units += access.error_factor * access_units(access, config);
  return CostEstimate{query_id, config.digest(), units};
}

double SyntheticOracle::true_time_ms(const Configuration& config,
                                     const std::string& query_id) const {
  const QuerySpec* query = spec_.find(query_id);
  if (!query) throw InputError("oracle: unknown query id '" + query_id + "'");
  double units = 0.0;
  for (const auto& access : query->accesses) units += access_units(access, config);
  return units * spec_.time_per_unit_ms;
}

double SyntheticOracle::true_workload_ms(const Configuration& config,
                                         const std::vector<std::string>& workload) const {
  double total = 0.0;
  for (const auto& query_id : workload) total += true_time_ms(config, query_id);
  return total;
}

}  // namespace ixtune
