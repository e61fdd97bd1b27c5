#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ixtune/configuration.hpp"
#include "ixtune/cost_oracle.hpp"
#include "ixtune/errors.hpp"

namespace ixtune {

struct RunResult {
  double elapsed_ms = 0.0;
  bool timed_out = false;
};

/// Materialization and execution surface. create/drop are idempotent per
/// index name; run_query must not exceed the timeout beyond scheduling
/// slack. set_enabled controls which created indexes the next runs see,
/// which lets a session keep every index materialized while evaluating
/// configurations that use only a subset.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual double create_index(const IndexDefinition& index) = 0;  // elapsed ms
  virtual double drop_index(const std::string& name) = 0;         // elapsed ms
  virtual void set_enabled(const std::vector<std::string>& index_names) = 0;
  virtual RunResult run_query(const std::string& query_id, double timeout_ms) = 0;
};

/// Deterministic executor over the synthetic cost model. Index creation
/// time scales with the indexed table's row count.
class SimulatedExecutor final : public Executor {
 public:
  SimulatedExecutor(const Catalog& catalog, SyntheticWorkloadSpec spec,
                    double create_ms_per_row = 0.001);

  double create_index(const IndexDefinition& index) override;
  double drop_index(const std::string& name) override;
  void set_enabled(const std::vector<std::string>& index_names) override;
  RunResult run_query(const std::string& query_id, double timeout_ms) override;

 private:
  const Catalog& catalog_;
  SyntheticOracle oracle_;
  double create_ms_per_row_;
  std::vector<IndexDefinition> created_;
  std::vector<std::string> enabled_;
};

/// Thrown when the executor dies mid-measurement; carries what completed.
struct ExecutorFailure : Error {
  ExecutorFailure(const std::string& message, std::vector<double> partial)
      : Error(message), partial_runs_ms(std::move(partial)) {}
  std::vector<double> partial_runs_ms;
};

struct Measurement {
  std::string query_id;
  std::array<double, 5> runs_ms{};
  double median_ms = 0.0;  // 3rd order statistic of the five runs
  bool capped = false;     // some run hit the cap
};

/// Five sequential isolated runs, each truncated at the cap; capped runs
/// record the cap itself as their elapsed time.
Measurement measure_query(Executor& executor, const std::string& query_id, double cap_ms);

struct EventRecord {
  std::string ts;  // ISO 8601, session-accounting clock
  std::string kind;  // create | drop | run | tune
  std::string subject;
  double elapsed_ms = 0.0;
};

/// Append-only accounting log; the timestamp clock advances by each
/// event's elapsed time, so equal sessions produce identical logs.
class EventLog {
 public:
  void append(const std::string& kind, const std::string& subject, double elapsed_ms);
  const std::vector<EventRecord>& events() const { return events_; }
  double total_ms() const;
  double total_ms(std::string_view kind) const;
  double total_ms(std::string_view kind, std::string_view subject) const;

  std::string to_jsonl() const;
  static EventLog from_jsonl(const std::string& text);

 private:
  std::vector<EventRecord> events_;
  double clock_ms_ = 0.0;
};

/// Build/enable plan for a validation session: every structurally distinct
/// index appears exactly once in `creations`, assigned to the first
/// configuration that needs it; evaluation order is preserved.
struct ValidationSchedule {
  std::vector<IndexDefinition> creations;
  std::vector<std::vector<size_t>> create_before_config;  // indexes into creations
  std::vector<std::vector<std::string>> enabled_per_config;
};

ValidationSchedule plan_validation(const std::vector<Configuration>& configs);

struct ConfigEvaluation {
  std::string id;
  Configuration config;
  double cap_applied_ms = 0.0;
  double creation_ms = 0.0;
  double total_workload_ms = 0.0;  // sum of per-query medians
  std::vector<Measurement> measurements;
  std::optional<std::string> error;
};

struct TuneTimes {
  double rule_ms = 0.0;
  double advisor_ms = 0.0;
};

struct ValidationReport {
  std::vector<ConfigEvaluation> configs;
  std::string winner;  // empty when every configuration failed
  double tuner_rule_ms = 0.0;
  double tuner_advisor_ms = 0.0;
  double index_creation_ms = 0.0;
  double query_execution_ms = 0.0;  // every run of every configuration
  EventLog log;

  double total_ms() const {
    return tuner_rule_ms + tuner_advisor_ms + index_creation_ms + query_execution_ms;
  }
  nlohmann::json to_json() const;
};

/// Evaluates configurations in the given order (baseline first by
/// convention). Each distinct index is created once; after every
/// configuration the run cap tightens to the smallest observed workload
/// time. Executor failures are recorded per configuration and the session
/// continues.
ValidationReport validate_configurations(
    const std::vector<std::pair<std::string, Configuration>>& configs,
    const std::vector<std::string>& workload, Executor& executor,
    double initial_cap_ms = 300000.0, TuneTimes tune_times = {});

nlohmann::json breakdown_json(const ValidationReport& report);
std::string breakdown_text(const ValidationReport& report);

}  // namespace ixtune
