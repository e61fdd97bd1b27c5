#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "doctest.h"
#include "ixtune/errors.hpp"
#include "ixtune/util.hpp"
#include "ixtune/validator.hpp"
#include "support/plan_generator.hpp"
#include "support/test_paths.hpp"

using namespace ixtune;

namespace {

// Executor that replays scripted run times and never materializes anything.
class ScriptedExecutor final : public Executor {
 public:
  // run times per query id, consumed in order (last value repeats)
  std::map<std::string, std::vector<double>> script;
  // alternative: time as a function of the enabled set
  std::map<std::string, std::map<std::string, double>> by_enabled_key;
  int fail_on_run = -1;  // 1-based global run counter

  double create_index(const IndexDefinition&) override { return 5.0; }
  double drop_index(const std::string&) override { return 0.0; }
  void set_enabled(const std::vector<std::string>& names) override {
    enabled_ = names;
    std::sort(enabled_.begin(), enabled_.end());
  }
  RunResult run_query(const std::string& query_id, double timeout_ms) override {
    ++runs_;
    if (runs_ == fail_on_run) throw std::runtime_error("scripted failure");
    double t = 0.0;
    if (!by_enabled_key.empty()) {
      t = by_enabled_key.at(query_id).at(util::join(enabled_, ","));
    } else {
      auto& seq = script.at(query_id);
      t = seq.empty() ? 0.0 : (cursor_ < seq.size() ? seq[cursor_] : seq.back());
      ++cursor_;
    }
    if (t > timeout_ms) return RunResult{timeout_ms, true};
    return RunResult{t, false};
  }

 private:
  std::vector<std::string> enabled_;
  size_t cursor_ = 0;
  int runs_ = 0;
};

IndexDefinition ix(const std::string& table, const std::string& name,
                   std::vector<std::string> keys) {
  return IndexDefinition{table, name, std::move(keys), {}};
}

Configuration config_with(std::vector<IndexDefinition> indexes, int k = 10) {
  Configuration c;
  c.constraint_k = k;
  for (auto& i : indexes) c.add(std::move(i));
  return c;
}

}  // namespace

TEST_CASE("median of five is the third order statistic") {
  ScriptedExecutor exec;
  exec.script["q"] = {1000, 2000, 3000, 4000, 5000};
  const Measurement m = measure_query(exec, "q", 300000);
  CHECK(m.median_ms == 3000);
  CHECK(!m.capped);
}

TEST_CASE("a capped run records the cap and sets the flag") {
  ScriptedExecutor exec;
  exec.script["q"] = {1000, 1000, 1000, 1000, 400000};
  const Measurement m = measure_query(exec, "q", 300000);
  CHECK(m.median_ms == 1000);
  CHECK(m.capped);
  CHECK(m.runs_ms[4] == 300000);  // cap value itself is recorded
}

TEST_CASE("a constant-time executor yields that constant as median") {
  ScriptedExecutor exec;
  exec.script["q"] = {123.5};
  const Measurement m = measure_query(exec, "q", 300000);
  CHECK(m.median_ms == 123.5);
  for (double r : m.runs_ms) CHECK(r == 123.5);
}

TEST_CASE("median matches a sort-based oracle on random run vectors") {
  testgen::Rng rng(73);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> runs;
    for (int i = 0; i < 5; ++i)
      runs.push_back(testgen::rand_int(rng, 0, 400000));
    const double cap = 300000;

    ScriptedExecutor exec;
    exec.script["q"] = runs;
    const Measurement m = measure_query(exec, "q", cap);

    std::vector<double> capped = runs;
    bool any_capped = false;
    for (double& r : capped) {
      if (r > cap) {
        r = cap;
        any_capped = true;
      }
    }
    std::sort(capped.begin(), capped.end());
    CHECK(m.median_ms == capped[2]);
    CHECK(m.capped == any_capped);
  }
}

TEST_CASE("executor failure mid-measurement preserves partial data") {
  ScriptedExecutor exec;
  exec.script["q"] = {10, 10, 10, 10, 10};
  exec.fail_on_run = 3;
  try {
    measure_query(exec, "q", 1000);
    FAIL("expected ExecutorFailure");
  } catch (const ExecutorFailure& e) {
    CHECK(e.partial_runs_ms == std::vector<double>{10, 10});
  }
}

TEST_CASE("validation schedules create each distinct index once") {
  const auto i1 = ix("T", "i1", {"a"});
  const auto i2 = ix("T", "i2", {"b"});
  const auto shared = ix("U", "s", {"x"});

  SUBCASE("shared index appears once") {
    const auto schedule = plan_validation({config_with({i1, shared}), config_with({i2, shared})});
    CHECK(schedule.creations.size() == 3);
  }
  SUBCASE("disjoint configs create everything") {
    const auto schedule = plan_validation({config_with({i1}), config_with({i2})});
    CHECK(schedule.creations.size() == 2);
  }
  SUBCASE("random configs create exactly the union") {
    testgen::Rng rng(79);
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<IndexDefinition> candidates;
      for (int i = 0; i < 8; ++i)
        candidates.push_back(ix("T" + std::to_string(i % 3), "cand" + std::to_string(i),
                                {"c" + std::to_string(i)}));
      std::vector<Configuration> configs;
      std::set<std::string> expected;
      for (int c = 0; c < 5; ++c) {
        Configuration config;
        config.constraint_k = 8;
        for (const auto& cand : candidates) {
          if (testgen::rand_int(rng, 0, 1)) {
            config.add(cand);
            expected.insert(cand.structural_key());
          }
        }
        configs.push_back(std::move(config));
      }
      const auto schedule = plan_validation(configs);
      CHECK(schedule.creations.size() == expected.size());
    }
  }
}

TEST_CASE("unnamed or colliding index names are made unique for the executor") {
  IndexDefinition unnamed{"T", "", {"a"}, {}};
  IndexDefinition clash1{"T", "same", {"b"}, {}};
  IndexDefinition clash2{"T", "same", {"c"}, {}};
  const auto schedule =
      plan_validation({config_with({unnamed, clash1, clash2})});
  REQUIRE(schedule.creations.size() == 3);
  std::set<std::string> names;
  for (const auto& c : schedule.creations) {
    CHECK(!c.name.empty());
    names.insert(c.name);
  }
  CHECK(names.size() == 3);
}

TEST_CASE("adaptive cap follows the smallest observed workload time") {
  // totals by enabled set: {} -> 100, {i1} -> 40, {i2} -> 70
  ScriptedExecutor exec;
  exec.by_enabled_key["q"] = {{"", 100.0}, {"i1", 40.0}, {"i2", 70.0}};

  const std::vector<std::pair<std::string, Configuration>> configs = {
      {"baseline", config_with({})},
      {"cfg_b", config_with({ix("T", "i1", {"a"})})},
      {"cfg_c", config_with({ix("T", "i2", {"b"})})},
  };
  const ValidationReport report = validate_configurations(configs, {"q"}, exec, 300000.0);

  REQUIRE(report.configs.size() == 3);
  CHECK(report.configs[0].cap_applied_ms == 300000.0);
  CHECK(report.configs[1].cap_applied_ms == 100.0);
  CHECK(report.configs[2].cap_applied_ms == 40.0);
  CHECK(report.configs[0].total_workload_ms == 100.0);
  CHECK(report.configs[1].total_workload_ms == 40.0);
  CHECK(report.configs[2].total_workload_ms == 40.0);  // capped at 40
  CHECK(report.configs[2].measurements[0].capped);
  CHECK(report.winner == "cfg_b");  // ties go to the earlier evaluation

  // caps never increase
  double last = std::numeric_limits<double>::infinity();
  for (const auto& eval : report.configs) {
    CHECK(eval.cap_applied_ms <= last);
    last = eval.cap_applied_ms;
  }
}

TEST_CASE("a single configuration never tightens its own cap") {
  ScriptedExecutor exec;
  exec.script["q"] = {50};
  const ValidationReport report =
      validate_configurations({{"only", config_with({})}}, {"q"}, exec, 300000.0);
  CHECK(report.configs[0].cap_applied_ms == 300000.0);
  CHECK(report.winner == "only");
}

TEST_CASE("a configuration identical to the baseline measures identically") {
  Catalog cat = load_catalog(util::read_file(testpaths::fixture("catalog_tpch.json")));
  SyntheticWorkloadSpec spec =
      SyntheticWorkloadSpec::load(util::read_file(testpaths::fixture("tpch_sim.json")));
  std::vector<std::string> workload;
  for (const auto& q : spec.queries) workload.push_back(q.id);

  SimulatedExecutor exec(cat, spec);
  const Configuration same = config_with({ix("orders", "io", {"o_orderdate"})});
  const ValidationReport report = validate_configurations(
      {{"one", same}, {"two", same}}, workload, exec, 300000.0);
  CHECK(report.configs[0].total_workload_ms == report.configs[1].total_workload_ms);
  CHECK(report.winner == "one");
}

TEST_CASE("accounting identity: breakdown equals event log replay") {
  ScriptedExecutor exec;
  exec.by_enabled_key["q1"] = {{"", 10.0}, {"i1", 5.0}};
  exec.by_enabled_key["q2"] = {{"", 20.0}, {"i1", 6.0}};

  const ValidationReport report = validate_configurations(
      {{"base", config_with({})}, {"tuned", config_with({ix("T", "i1", {"a"})})}},
      {"q1", "q2"}, exec, 300000.0, TuneTimes{123.0, 456.0});

  CHECK(report.tuner_rule_ms == 123.0);
  CHECK(report.tuner_advisor_ms == 456.0);
  CHECK(report.index_creation_ms == 5.0);  // one creation at 5 ms
  // 2 configs x 2 queries x 5 runs
  double run_total = 0.0;
  int run_events = 0;
  for (const auto& event : report.log.events()) {
    if (event.kind == "run") {
      run_total += event.elapsed_ms;
      ++run_events;
    }
  }
  CHECK(run_events == 20);
  CHECK(report.query_execution_ms == run_total);
  CHECK(report.total_ms() == doctest::Approx(report.log.total_ms()).epsilon(1e-12));

  const auto b = breakdown_json(report);
  CHECK(b["total_ms"].get<double>() ==
        doctest::Approx(123.0 + 456.0 + 5.0 + run_total).epsilon(1e-12));
}

TEST_CASE("executor failures are recorded per configuration and the session continues") {
  ScriptedExecutor exec;
  exec.script["q"] = {10, 10, 10, 10, 10, 10, 10, 10, 10, 10};
  exec.fail_on_run = 2;  // fails during the first configuration

  const ValidationReport report = validate_configurations(
      {{"bad", config_with({})}, {"good", config_with({})}}, {"q"}, exec, 300000.0);
  REQUIRE(report.configs.size() == 2);
  CHECK(report.configs[0].error.has_value());
  CHECK(!report.configs[1].error.has_value());
  CHECK(report.winner == "good");
  // the one completed run before the failure still appears in the log
  int bad_runs = 0;
  for (const auto& event : report.log.events())
    if (event.kind == "run" && event.subject.rfind("bad/", 0) == 0) ++bad_runs;
  CHECK(bad_runs == 1);
}

TEST_CASE("a failed creation is retried by the next configuration that needs it") {
  class FlakyCreate final : public Executor {
   public:
    double create_index(const IndexDefinition&) override {
      if (++create_calls_ == 1) throw std::runtime_error("disk hiccup");
      return 2.0;
    }
    double drop_index(const std::string&) override { return 0; }
    void set_enabled(const std::vector<std::string>& names) override {
      enabled_ = names.size();
    }
    RunResult run_query(const std::string&, double) override {
      return RunResult{enabled_ ? 5.0 : 10.0, false};
    }

   private:
    int create_calls_ = 0;
    size_t enabled_ = 0;
  };

  FlakyCreate exec;
  const Configuration shared = config_with({ix("T", "s", {"a"})});
  const ValidationReport report = validate_configurations(
      {{"first", shared}, {"second", shared}}, {"q"}, exec, 300000.0);
  CHECK(report.configs[0].error.has_value());
  CHECK(!report.configs[1].error.has_value());
  CHECK(report.winner == "second");
  int creates = 0;
  for (const auto& event : report.log.events())
    if (event.kind == "create") ++creates;
  CHECK(creates == 1);  // only the successful creation is an event
  CHECK(report.configs[1].total_workload_ms == 5.0);  // the index took effect
}

TEST_CASE("event log round-trips through jsonl") {
  EventLog log;
  log.append("tune", "rule", 12.5);
  log.append("create", "ix_a", 100.0);
  log.append("run", "cfg/q1", 7.25);
  const EventLog back = EventLog::from_jsonl(log.to_jsonl());
  REQUIRE(back.events().size() == 3);
  CHECK(back.events()[1].subject == "ix_a");
  CHECK(back.total_ms() == log.total_ms());
  CHECK(back.events()[0].ts == "2025-01-01T00:00:00.000Z");
  CHECK(back.events()[1].ts == "2025-01-01T00:00:00.013Z");  // clock advanced by 12.5, rounded
}

TEST_CASE("simulated executor creates once, charges by rows, and honors enablement") {
  Catalog cat = load_catalog(R"({
    "tables": [{"name":"T","row_count":100000,
                "columns":[{"name":"k","type":"INT"},{"name":"v","type":"INT"}]}]
  })");
  SyntheticWorkloadSpec spec;
  spec.time_per_unit_ms = 0.01;
  spec.queries.push_back(QuerySpec{"q", {TableAccess{"T", 100000, 0.001, {"k", "v"}, "k", 1.0}}});

  SimulatedExecutor exec(cat, spec, 0.001);
  const IndexDefinition index{"T", "cov", {"k"}, {"v"}};

  CHECK(exec.create_index(index) == doctest::Approx(100.0));  // 100000 rows * 0.001
  CHECK(exec.create_index(index) == 0.0);                     // idempotent

  exec.set_enabled({});
  const double scan_ms = exec.run_query("q", 1e9).elapsed_ms;
  CHECK(scan_ms == doctest::Approx(1000.0));  // full scan: 100000 units * 0.01

  exec.set_enabled({"cov"});
  const double seek_ms = exec.run_query("q", 1e9).elapsed_ms;
  CHECK(seek_ms < scan_ms / 5);

  // an enabled name that was never created is simply not there
  exec.set_enabled({"ghost"});
  CHECK(exec.run_query("q", 1e9).elapsed_ms == doctest::Approx(scan_ms));

  // dropping removes the index even if still named as enabled
  exec.drop_index("cov");
  exec.set_enabled({"cov"});
  CHECK(exec.run_query("q", 1e9).elapsed_ms == doctest::Approx(scan_ms));

  // timeout truncation
  exec.set_enabled({});
  const RunResult capped = exec.run_query("q", 10.0);
  CHECK(capped.elapsed_ms == 10.0);
  CHECK(capped.timed_out);

  CHECK_THROWS_AS(exec.create_index(IndexDefinition{"Nope", "x", {"k"}, {}}), InputError);
}

TEST_CASE("breakdown percentages follow the category totals") {
  ValidationReport report;
  report.log.append("tune", "rule", 2.0);
  report.log.append("tune", "advisor", 10.0);
  report.log.append("create", "a", 30.0);
  report.log.append("run", "c/q", 58.0);
  report.tuner_rule_ms = 2.0;
  report.tuner_advisor_ms = 10.0;
  report.index_creation_ms = 30.0;
  report.query_execution_ms = 58.0;

  const auto b = breakdown_json(report);
  CHECK(b["total_ms"].get<double>() == 100.0);
  const std::string text = breakdown_text(report);
  CHECK(text.find("2%") != std::string::npos);
  CHECK(text.find("10%") != std::string::npos);
  CHECK(text.find("30%") != std::string::npos);
  CHECK(text.find("58%") != std::string::npos);

  ValidationReport zeros;
  const auto zb = breakdown_json(zeros);
  CHECK(zb["total_ms"].get<double>() == 0.0);
}

TEST_CASE("invalid caps are rejected") {
  ScriptedExecutor exec;
  CHECK_THROWS_AS(measure_query(exec, "q", 0.0), InputError);
  CHECK_THROWS_AS(validate_configurations({}, {}, exec, -1.0), InputError);
}
