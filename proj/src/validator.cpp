#include "ixtune/validator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "ixtune/errors.hpp"
#include "ixtune/util.hpp"

namespace ixtune {

using nlohmann::json;
namespace u = util;

SimulatedExecutor::SimulatedExecutor(const Catalog& catalog, SyntheticWorkloadSpec spec,
                                     double create_ms_per_row)
    : catalog_(catalog), oracle_(std::move(spec)), create_ms_per_row_(create_ms_per_row) {}

double SimulatedExecutor::create_index(const IndexDefinition& index) {
  for (const auto& existing : created_)
    if (existing.name == index.name) return 0.0;  // idempotent
  const TableDef* table = catalog_.find_table(index.table);
  if (!table)
    throw InputError("executor: index '" + index.name + "' targets unknown table '" +
                     index.table + "'");
  created_.push_back(index);
  return static_cast<double>(table->row_count) * create_ms_per_row_;
}

double SimulatedExecutor::drop_index(const std::string& name) {
  created_.erase(std::remove_if(created_.begin(), created_.end(),
                                [&](const IndexDefinition& i) { return i.name == name; }),
                 created_.end());
  return 0.0;
}

void SimulatedExecutor::set_enabled(const std::vector<std::string>& index_names) {
  enabled_ = index_names;
}

RunResult SimulatedExecutor::run_query(const std::string& query_id, double timeout_ms) {
  Configuration active;
  active.constraint_k = std::max<int>(1, static_cast<int>(enabled_.size()));
  for (const auto& index : created_) {
    if (std::find(enabled_.begin(), enabled_.end(), index.name) != enabled_.end())
      active.add(index);
  }
  const double true_ms = oracle_.true_time_ms(active, query_id);
  if (true_ms > timeout_ms) return RunResult{timeout_ms, true};
  return RunResult{true_ms, false};
}

Measurement measure_query(Executor& executor, const std::string& query_id, double cap_ms) {
  if (!(cap_ms > 0)) throw InputError("measurement cap must be positive");
  Measurement m;
  m.query_id = query_id;
  std::vector<double> done;
  for (int run = 0; run < 5; ++run) {
    RunResult r;
    try {
      r = executor.run_query(query_id, cap_ms);
    } catch (const std::exception& e) {
      throw ExecutorFailure("query '" + query_id + "' run " + std::to_string(run + 1) +
                                " failed: " + e.what(),
                            done);
    }
    m.runs_ms[static_cast<size_t>(run)] = r.elapsed_ms;
    m.capped = m.capped || r.timed_out;
    done.push_back(r.elapsed_ms);
  }
  auto sorted = m.runs_ms;
  std::sort(sorted.begin(), sorted.end());
  m.median_ms = sorted[2];
  return m;
}

namespace {

// Accounting clock origin; only deltas matter.
constexpr std::time_t kEpochSeconds = 1735689600;  // 2025-01-01T00:00:00Z

std::string format_ts(double offset_ms) {
  const auto whole_ms = static_cast<long long>(std::llround(offset_ms));
  std::time_t secs = kEpochSeconds + whole_ms / 1000;
  const int millis = static_cast<int>(whole_ms % 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
  return buf;
}

}  // namespace

void EventLog::append(const std::string& kind, const std::string& subject,
                      double elapsed_ms) {
  events_.push_back(EventRecord{format_ts(clock_ms_), kind, subject, elapsed_ms});
  clock_ms_ += elapsed_ms;
}

double EventLog::total_ms() const {
  double total = 0.0;
  for (const auto& e : events_) total += e.elapsed_ms;
  return total;
}

double EventLog::total_ms(std::string_view kind) const {
  double total = 0.0;
  for (const auto& e : events_)
    if (e.kind == kind) total += e.elapsed_ms;
  return total;
}

double EventLog::total_ms(std::string_view kind, std::string_view subject) const {
  double total = 0.0;
  for (const auto& e : events_)
    if (e.kind == kind && e.subject == subject) total += e.elapsed_ms;
  return total;
}

std::string EventLog::to_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += json{{"ts", e.ts}, {"kind", e.kind}, {"subject", e.subject}, {"elapsed_ms", e.elapsed_ms}}
               .dump();
    out += "\n";
  }
  return out;
}

EventLog EventLog::from_jsonl(const std::string& text) {
  EventLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (u::trim(line).empty()) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) throw InputError("event log: malformed JSON line: " + line);
    log.events_.push_back(EventRecord{doc.value("ts", ""), doc.value("kind", ""),
                                      doc.value("subject", ""), doc.value("elapsed_ms", 0.0)});
    log.clock_ms_ += log.events_.back().elapsed_ms;
  }
  return log;
}

ValidationSchedule plan_validation(const std::vector<Configuration>& configs) {
  ValidationSchedule schedule;
  schedule.create_before_config.resize(configs.size());
  schedule.enabled_per_config.resize(configs.size());

  const auto name_taken = [&](const std::string& name) {
    return std::any_of(schedule.creations.begin(), schedule.creations.end(),
                       [&](const IndexDefinition& i) { return i.name == name; });
  };

  for (size_t c = 0; c < configs.size(); ++c) {
    for (const auto& index : configs[c].indexes) {
      const std::string key = index.structural_key();
      size_t at = schedule.creations.size();
      for (size_t i = 0; i < schedule.creations.size(); ++i) {
        if (schedule.creations[i].structural_key() == key) {
          at = i;
          break;
        }
      }
      if (at == schedule.creations.size()) {
        IndexDefinition creation = index;
        // Executors address indexes by name, so every creation needs a
        // unique one even if the input definitions collide or are blank.
        if (creation.name.empty()) creation.name = "ix_" + creation.table;
        if (name_taken(creation.name))
          creation.name += "_" + creation.digest8();
        schedule.creations.push_back(std::move(creation));
        schedule.create_before_config[c].push_back(at);
      }
      schedule.enabled_per_config[c].push_back(schedule.creations[at].name);
    }
  }
  return schedule;
}

ValidationReport validate_configurations(
    const std::vector<std::pair<std::string, Configuration>>& configs,
    const std::vector<std::string>& workload, Executor& executor, double initial_cap_ms,
    TuneTimes tune_times) {
  if (!(initial_cap_ms > 0)) throw InputError("validation: initial cap must be positive");

  ValidationReport report;
  report.log.append("tune", "rule", tune_times.rule_ms);
  report.log.append("tune", "advisor", tune_times.advisor_ms);

  std::vector<Configuration> bare;
  bare.reserve(configs.size());
  for (const auto& [id, config] : configs) bare.push_back(config);
  const ValidationSchedule schedule = plan_validation(bare);

  double cap_ms = initial_cap_ms;
  std::vector<bool> created(schedule.creations.size(), false);
  for (size_t c = 0; c < configs.size(); ++c) {
    ConfigEvaluation eval;
    eval.id = configs[c].first;
    eval.config = configs[c].second;
    eval.cap_applied_ms = cap_ms;

    try {
      // Build whatever this configuration needs that is not materialized
      // yet. Nominally that is the first-need schedule; it also re-attempts
      // creations whose owning configuration failed before reaching them.
      for (const auto& name : schedule.enabled_per_config[c]) {
        for (size_t i = 0; i < schedule.creations.size(); ++i) {
          if (created[i] || schedule.creations[i].name != name) continue;
          const double elapsed = executor.create_index(schedule.creations[i]);
          created[i] = true;
          report.log.append("create", name, elapsed);
          eval.creation_ms += elapsed;
        }
      }
      executor.set_enabled(schedule.enabled_per_config[c]);

      for (const auto& query_id : workload) {
        Measurement m;
        try {
          m = measure_query(executor, query_id, cap_ms);
        } catch (const ExecutorFailure& failure) {
          for (double run_ms : failure.partial_runs_ms)
            report.log.append("run", eval.id + "/" + query_id, run_ms);
          throw;
        }
        for (double run_ms : m.runs_ms) report.log.append("run", eval.id + "/" + query_id, run_ms);
        eval.total_workload_ms += m.median_ms;
        eval.measurements.push_back(std::move(m));
      }
      // The cheapest workload seen so far bounds every later run.
      cap_ms = std::min(cap_ms, eval.total_workload_ms);
    } catch (const std::exception& e) {
      eval.error = e.what();
    }
    report.configs.push_back(std::move(eval));
  }

  const ConfigEvaluation* best = nullptr;
  for (const auto& eval : report.configs) {
    if (eval.error) continue;
    if (!best || eval.total_workload_ms < best->total_workload_ms) best = &eval;
  }
  if (best) report.winner = best->id;

  report.tuner_rule_ms = report.log.total_ms("tune", "rule");
  report.tuner_advisor_ms = report.log.total_ms("tune", "advisor");
  report.index_creation_ms = report.log.total_ms("create");
  report.query_execution_ms = report.log.total_ms("run");
  return report;
}

json ValidationReport::to_json() const {
  json configs_json = json::array();
  for (const auto& eval : configs) {
    json measurements = json::array();
    for (const auto& m : eval.measurements) {
      measurements.push_back({{"query_id", m.query_id},
                              {"runs_ms", m.runs_ms},
                              {"median_ms", m.median_ms},
                              {"capped", m.capped}});
    }
    json entry{{"id", eval.id},
               {"cap_applied_ms", eval.cap_applied_ms},
               {"creation_ms", eval.creation_ms},
               {"total_workload_ms", eval.total_workload_ms},
               {"measurements", measurements},
               {"indexes", eval.config.to_json()["indexes"]}};
    if (eval.error) entry["error"] = *eval.error;
    configs_json.push_back(std::move(entry));
  }
  return json{{"winner", winner},
              {"configs", configs_json},
              {"breakdown",
               {{"tuner_rule_ms", tuner_rule_ms},
                {"tuner_advisor_ms", tuner_advisor_ms},
                {"index_creation_ms", index_creation_ms},
                {"query_execution_ms", query_execution_ms},
                {"total_ms", total_ms()}}}};
}

json breakdown_json(const ValidationReport& report) {
  // Recomputed from the event log, the single source of truth.
  const double rule = report.log.total_ms("tune", "rule");
  const double advisor = report.log.total_ms("tune", "advisor");
  const double create = report.log.total_ms("create");
  const double run = report.log.total_ms("run");
  return json{{"tuner_rule_ms", rule},
              {"tuner_advisor_ms", advisor},
              {"index_creation_ms", create},
              {"query_execution_ms", run},
              {"total_ms", rule + advisor + create + run}};
}

std::string breakdown_text(const ValidationReport& report) {
  const json b = breakdown_json(report);
  const double total = b["total_ms"].get<double>();
  const auto pct = [&](double v) {
    return total > 0 ? u::format_number(100.0 * v / total) : std::string("0");
  };
  struct Row {
    const char* label;
    double ms;
  };
  const Row rows[] = {
      {"rule tuner", b["tuner_rule_ms"].get<double>()},
      {"advisor", b["tuner_advisor_ms"].get<double>()},
      {"index creation", b["index_creation_ms"].get<double>()},
      {"query execution", b["query_execution_ms"].get<double>()},
  };
  size_t label_w = 5, ms_w = 8;
  for (const auto& row : rows) {
    label_w = std::max(label_w, std::string(row.label).size());
    ms_w = std::max(ms_w, u::format_number(row.ms).size());
  }
  std::string out;
  char line[160];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof(line), "%-*s %*s ms %6s%%\n", static_cast<int>(label_w),
                  row.label, static_cast<int>(ms_w), u::format_number(row.ms).c_str(),
                  pct(row.ms).c_str());
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-*s %*s ms\n", static_cast<int>(label_w), "total",
                static_cast<int>(ms_w), u::format_number(total).c_str());
  out += line;
  return out;
}

}  // namespace ixtune
