// Command-line front end: recommend indexes from plans, enumerate workload
// configurations, render advisor prompts, collect advisor responses, and
// validate configurations against the simulated executor.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ixtune/advisor_client.hpp"
#include "ixtune/catalog.hpp"
#include "ixtune/cost_oracle.hpp"
#include "ixtune/enumerator.hpp"
#include "ixtune/errors.hpp"
#include "ixtune/plan.hpp"
#include "ixtune/prompt_builder.hpp"
#include "ixtune/rule_tuner.hpp"
#include "ixtune/util.hpp"
#include "ixtune/validator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ixtune;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitService = 4;

struct Manifest {
  std::string catalog;
  std::string plan;
  std::string plans_dir;
  std::string sim;
  double alpha = 0.0;
  int k = 10;
  int n = 5;
  std::string advisor_url;
  std::string stub;
  std::string out = "run";
  long seed = 0;  // reserved for synthetic workload generators

  json to_json() const {
    return json{{"catalog", catalog}, {"plan", plan},   {"plans_dir", plans_dir},
                {"sim", sim},         {"alpha", alpha}, {"k", k},
                {"n", n},             {"advisor_url", advisor_url},
                {"stub", stub},       {"out", out},     {"seed", seed}};
  }
};

// Flag values win over manifest values; the manifest fills in the rest.
struct ManifestBinding {
  CLI::App* cmd = nullptr;
  std::string manifest_path;

  void bind(CLI::App& app) {
    cmd = &app;
    app.add_option("--manifest", manifest_path, "JSON manifest with default settings");
  }

  void apply(Manifest& m) const {
    if (manifest_path.empty()) return;
    json doc = json::parse(util::read_file(manifest_path), nullptr, false);
    if (doc.is_discarded()) throw InputError("manifest: malformed JSON: " + manifest_path);
    const auto take = [&](const char* key, auto& slot, const char* flag) {
      if (doc.contains(key) && !doc[key].is_null() && cmd->count(flag) == 0)
        slot = doc[key].get<std::decay_t<decltype(slot)>>();
    };
    take("catalog", m.catalog, "--catalog");
    take("plan", m.plan, "--plan");
    take("plans_dir", m.plans_dir, "--plans-dir");
    take("sim", m.sim, "--sim");
    take("alpha", m.alpha, "--alpha");
    take("k", m.k, "--k");
    take("n", m.n, "--n");
    take("advisor_url", m.advisor_url, "--advisor-url");
    take("stub", m.stub, "--stub");
    take("out", m.out, "--out");
    take("seed", m.seed, "--seed");
  }
};

void check_exists(const std::string& path, const char* what) {
  if (path.empty()) throw InputError(std::string(what) + " path is required");
  if (!fs::exists(path)) throw InputError(std::string(what) + " file does not exist: " + path);
}

Catalog load_catalog_file(const std::string& path) {
  check_exists(path, "catalog");
  return load_catalog(util::read_file(path));
}

SyntheticWorkloadSpec load_spec_file(const std::string& path) {
  check_exists(path, "workload spec");
  return SyntheticWorkloadSpec::load(util::read_file(path));
}

std::vector<std::string> plan_files_in(const std::string& dir) {
  check_exists(dir, "plans directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no .json plan files under " + dir);
  return files;
}

std::vector<std::string> gather_plan_files(const Manifest& m) {
  std::vector<std::string> files;
  if (!m.plan.empty()) {
    check_exists(m.plan, "plan");
    files.push_back(m.plan);
  }
  if (!m.plans_dir.empty()) {
    auto more = plan_files_in(m.plans_dir);
    files.insert(files.end(), more.begin(), more.end());
  }
  if (files.empty()) throw InputError("provide --plan or --plans-dir");
  return files;
}

fs::path prepare_out_dir(const Manifest& m) {
  fs::path out(m.out);
  fs::create_directories(out);
  util::write_file((out / "manifest.json").string(), m.to_json().dump(2) + "\n");
  return out;
}

void require_alpha(const Manifest& m) {
  if (m.alpha < 0.0 || m.alpha >= 1.0) throw InputError("--alpha must satisfy 0 <= alpha < 1");
}

void require_k(const Manifest& m) {
  if (m.k < 1) throw InputError("--k must be >= 1");
}

std::string sql_path_for(const std::string& plan_path) {
  fs::path p(plan_path);
  p.replace_extension(".sql");
  return p.string();
}

// ---------------------------------------------------------------- recommend

int cmd_recommend(const Manifest& m) {
  require_alpha(m);
  const Catalog catalog = load_catalog_file(m.catalog);
  const auto out = prepare_out_dir(m);
  const TunerParams params{m.alpha};

  for (const auto& file : gather_plan_files(m)) {
    const PlanTree plan = parse_plan(util::read_file(file), catalog);
    const auto indexes = recommend_for_plan(plan, params);

    json arr = json::array();
    std::string ddl;
    for (const auto& index : indexes) {
      arr.push_back(index_to_json(index));
      ddl += index_ddl(index) + "\n";
    }
    util::write_file((out / (plan.query_id + ".indexes.json")).string(), arr.dump(2) + "\n");
    util::write_file((out / (plan.query_id + ".ddl.sql")).string(), ddl);
    std::cout << plan.query_id << ": " << indexes.size() << " index(es) recommended\n";
  }
  return kExitOk;
}

// --------------------------------------------------------------------- tune

int cmd_tune(const Manifest& m, const std::vector<std::string>& pool_files,
             bool phase2_full_pool) {
  require_alpha(m);
  require_k(m);
  const Catalog catalog = load_catalog_file(m.catalog);
  const SyntheticWorkloadSpec spec = load_spec_file(m.sim);
  const auto out = prepare_out_dir(m);

  std::vector<CandidatePool> pools;
  if (!m.plan.empty() || !m.plans_dir.empty()) {
    CandidatePool rule_pool;
    for (const auto& file : gather_plan_files(m)) {
      const PlanTree plan = parse_plan(util::read_file(file), catalog);
      for (const auto& index : recommend_for_plan(plan, TunerParams{m.alpha}))
        rule_pool.add(index, "rule_tuner");
    }
    pools.push_back(std::move(rule_pool));
  }
  for (const auto& file : pool_files) {
    check_exists(file, "pool");
    json doc = json::parse(util::read_file(file), nullptr, false);
    if (doc.is_discarded()) throw InputError("pool: malformed JSON: " + file);
    pools.push_back(CandidatePool::from_json(doc, fs::path(file).stem().string()));
  }

  CandidatePool merged = merge_pools(pools);
  for (const auto& entry : merged.entries) {
    const auto violations = validate_index(catalog, entry.index);
    if (!violations.empty())
      throw InputError("candidate '" + entry.index.name + "': " + util::join(violations, "; "));
  }

  std::vector<std::string> workload;
  for (const auto& q : spec.queries) workload.push_back(q.id);

  const SyntheticOracle oracle(spec);
  const Configuration config =
      greedy_select(merged, workload, m.k, oracle, GreedyOptions{phase2_full_pool});
  const double cost = estimate_workload(oracle, config, workload);

  util::write_file((out / "configuration.json").string(), config.to_json(cost).dump(2) + "\n");
  std::cout << "selected " << config.indexes.size() << " of " << merged.size()
            << " candidates, estimated workload cost " << util::format_number(cost) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- prompt

int cmd_prompt(const Manifest& m, bool multi) {
  const Catalog catalog = load_catalog_file(m.catalog);
  const auto out = prepare_out_dir(m);

  PromptBundle bundle;
  std::string out_name;
  if (!multi) {
    check_exists(m.plan, "plan");
    const PlanTree plan = parse_plan(util::read_file(m.plan), catalog);
    const std::string sql_file = sql_path_for(m.plan);
    check_exists(sql_file, "query SQL");
    bundle = build_single_query_prompt(util::read_file(sql_file), catalog, plan);
    out_name = "prompt_" + plan.query_id;
  } else {
    require_k(m);
    std::vector<std::pair<std::string, PlanTree>> queries;
    for (const auto& file : gather_plan_files(m)) {
      const std::string sql_file = sql_path_for(file);
      check_exists(sql_file, "query SQL");
      queries.emplace_back(util::read_file(sql_file),
                           parse_plan(util::read_file(file), catalog));
    }
    bundle = build_multi_query_prompt(queries, catalog, m.k);
    out_name = "prompt_multi";
  }

  util::write_file((out / (out_name + ".txt")).string(), bundle.text);
  json meta{{"kind", bundle.kind == PromptKind::Multi ? "multi" : "single"},
            {"query_ids", bundle.query_ids},
            {"characters", bundle.char_count()},
            {"digest", bundle.digest()}};
  if (bundle.k_constraint) meta["k"] = *bundle.k_constraint;
  util::write_file((out / (out_name + ".meta.json")).string(), meta.dump(2) + "\n");
  std::cout << out_name << ".txt: " << bundle.char_count() << " characters, digest "
            << bundle.digest() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- advise

int cmd_advise(const Manifest& m, const std::string& prompt_file, bool k_set) {
  const Catalog catalog = load_catalog_file(m.catalog);
  check_exists(prompt_file, "prompt");
  const auto out = prepare_out_dir(m);
  if (m.n < 1) throw InputError("--n must be >= 1");

  PromptBundle bundle;
  bundle.text = util::read_file(prompt_file);

  AdvisorEndpoint endpoint = AdvisorEndpoint::from_env();
  if (!m.advisor_url.empty()) endpoint.url = m.advisor_url;
  if (!m.stub.empty()) endpoint.fixtures_dir = m.stub;

  auto responses = request_recommendations(endpoint, bundle, m.n, catalog);

  std::optional<int> k;
  if (k_set) {
    require_k(m);
    k = m.k;
  }

  int usable = 0;
  std::vector<AdvisorResponse> accepted;
  for (auto& response : responses) {
    if (!response.error) {
      try {
        response.parsed = enforce_constraints(std::move(response.parsed), k);
        ++usable;
        accepted.push_back(response);
      } catch (const InputError& e) {
        response.error = e.what();
        response.parsed.clear();
      }
    }
    json doc{{"invocation_id", response.invocation_id},
             {"latency_seconds", response.latency_seconds},
             {"raw_text", response.raw_text},
             {"dropped", response.dropped}};
    json arr = json::array();
    for (const auto& index : response.parsed) arr.push_back(index_to_json(index));
    doc["parsed"] = arr;
    if (response.rationale) doc["rationale"] = *response.rationale;
    if (response.error) doc["error"] = *response.error;
    util::write_file(
        (out / ("response_" + std::to_string(response.invocation_id) + ".json")).string(),
        doc.dump(2) + "\n");
    std::cout << "invocation " << response.invocation_id << ": "
              << (response.error ? "error: " + *response.error
                                 : std::to_string(response.parsed.size()) + " index(es)")
              << "\n";
  }

  const CandidatePool pool = pool_from_responses(accepted);
  util::write_file((out / "advisor_pool.json").string(), pool.to_json().dump(2) + "\n");
  if (usable == 0) throw ServiceError("no advisor invocation produced a usable response");
  return kExitOk;
}

// ----------------------------------------------------------------- validate

int cmd_validate(const Manifest& m, const std::vector<std::string>& config_files,
                 double cap_s, double rule_tune_ms, double advisor_tune_ms) {
  const Catalog catalog = load_catalog_file(m.catalog);
  const SyntheticWorkloadSpec spec = load_spec_file(m.sim);
  const auto out = prepare_out_dir(m);
  if (config_files.empty()) throw InputError("provide at least one --configs file");
  if (!(cap_s > 0)) throw InputError("--cap-s must be positive");

  std::vector<std::pair<std::string, Configuration>> configs;
  for (const auto& file : config_files) {
    check_exists(file, "configuration");
    json doc = json::parse(util::read_file(file), nullptr, false);
    if (doc.is_discarded()) throw InputError("configuration: malformed JSON: " + file);
    Configuration config = Configuration::from_json(doc);
    for (const auto& index : config.indexes) {
      const auto violations = validate_index(catalog, index);
      if (!violations.empty())
        throw InputError(file + ": index '" + index.name + "': " + util::join(violations, "; "));
    }
    configs.emplace_back(fs::path(file).stem().string(), std::move(config));
  }

  std::vector<std::string> workload;
  for (const auto& q : spec.queries) workload.push_back(q.id);

  SimulatedExecutor executor(catalog, spec);
  const ValidationReport report = validate_configurations(
      configs, workload, executor, cap_s * 1000.0, TuneTimes{rule_tune_ms, advisor_tune_ms});

  util::write_file((out / "report.json").string(), report.to_json().dump(2) + "\n");
  util::write_file((out / "events.jsonl").string(), report.log.to_jsonl());
  util::write_file((out / "breakdown.txt").string(), breakdown_text(report));
  std::cout << "winner: " << (report.winner.empty() ? "(none)" : report.winner) << "\n"
            << breakdown_text(report);
  return kExitOk;
}

// ------------------------------------------------------------------- report

int cmd_report(const Manifest& m, const std::string& events_file) {
  check_exists(events_file, "events");
  ValidationReport report;
  report.log = EventLog::from_jsonl(util::read_file(events_file));
  report.tuner_rule_ms = report.log.total_ms("tune", "rule");
  report.tuner_advisor_ms = report.log.total_ms("tune", "advisor");
  report.index_creation_ms = report.log.total_ms("create");
  report.query_execution_ms = report.log.total_ms("run");

  std::cout << breakdown_text(report);
  if (!m.out.empty()) {
    const auto out = prepare_out_dir(m);
    util::write_file((out / "breakdown.json").string(), breakdown_json(report).dump(2) + "\n");
    util::write_file((out / "breakdown.txt").string(), breakdown_text(report));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"index tuning toolkit"};
  app.require_subcommand(1);

  Manifest m;
  std::vector<std::string> pool_files;
  std::vector<std::string> config_files;
  std::string prompt_file;
  std::string events_file;
  bool multi = false;
  bool phase2_full_pool = false;
  double cap_s = 300.0;
  double rule_tune_ms = 0.0;
  double advisor_tune_ms = 0.0;

  const CLI::Validator alpha_range(
      [](std::string& s) {
        try {
          const double v = std::stod(s);
          if (v >= 0.0 && v < 1.0) return std::string();
        } catch (...) {
        }
        return std::string("must satisfy 0 <= alpha < 1");
      },
      "ALPHA");

  const auto add_common = [&](CLI::App* cmd, ManifestBinding& binding) {
    binding.bind(*cmd);
    cmd->add_option("--catalog", m.catalog, "catalog JSON file");
    cmd->add_option("--plan", m.plan, "single plan JSON file");
    cmd->add_option("--plans-dir", m.plans_dir, "directory of plan JSON files");
    cmd->add_option("--sim", m.sim, "synthetic workload spec JSON");
    cmd->add_option("--oracle", m.sim, "alias for --sim");
    cmd->add_option("--alpha", m.alpha, "table cost threshold, fraction of plan cost")
        ->check(alpha_range);
    cmd->add_option("--k", m.k, "max number of indexes")->check(CLI::PositiveNumber);
    cmd->add_option("--n", m.n, "number of advisor invocations")->check(CLI::PositiveNumber);
    cmd->add_option("--advisor-url", m.advisor_url, "advisor service URL");
    cmd->add_option("--stub", m.stub, "advisor fixtures directory (offline mode)");
    cmd->add_option("--out", m.out, "output directory");
    cmd->add_option("--seed", m.seed, "random seed recorded in the manifest");
  };

  ManifestBinding bind_recommend, bind_tune, bind_prompt, bind_advise, bind_validate,
      bind_report;

  auto* recommend = app.add_subcommand("recommend", "rule-based index recommendations per plan");
  add_common(recommend, bind_recommend);

  auto* tune = app.add_subcommand("tune", "two-phase greedy workload configuration selection");
  add_common(tune, bind_tune);
  tune->add_option("--pool", pool_files, "extra candidate pool JSON file (repeatable)");
  tune->add_flag("--phase2-full-pool", phase2_full_pool,
                 "seed workload phase with the whole pool, not per-query winners");

  auto* prompt = app.add_subcommand("prompt", "render advisor prompt(s)");
  add_common(prompt, bind_prompt);
  prompt->add_flag("--multi", multi, "multi-query workload prompt");
  prompt->add_flag("--single", [](std::int64_t) {}, "single-query prompt (default)");

  auto* advise = app.add_subcommand("advise", "collect advisor recommendations for a prompt");
  add_common(advise, bind_advise);
  advise->add_option("--prompt", prompt_file, "prompt text file")->required();

  auto* validate = app.add_subcommand("validate", "measure configurations on the simulator");
  add_common(validate, bind_validate);
  validate->add_option("--configs", config_files, "configuration JSON files, in evaluation order")
      ->delimiter(',');
  validate->add_option("--cap-s", cap_s, "initial per-run cap in seconds (default 300)");
  validate->add_option("--rule-tune-ms", rule_tune_ms, "rule tuner time to account");
  validate->add_option("--advisor-tune-ms", advisor_tune_ms, "advisor time to account");

  auto* report = app.add_subcommand("report", "render the validation time breakdown");
  add_common(report, bind_report);
  report->add_option("--events", events_file, "events.jsonl from a validation run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (recommend->parsed()) {
      bind_recommend.apply(m);
      return cmd_recommend(m);
    }
    if (tune->parsed()) {
      bind_tune.apply(m);
      return cmd_tune(m, pool_files, phase2_full_pool);
    }
    if (prompt->parsed()) {
      bind_prompt.apply(m);
      return cmd_prompt(m, multi);
    }
    if (advise->parsed()) {
      bind_advise.apply(m);
      return cmd_advise(m, prompt_file, advise->count("--k") > 0);
    }
    if (validate->parsed()) {
      bind_validate.apply(m);
      return cmd_validate(m, config_files, cap_s, rule_tune_ms, advisor_tune_ms);
    }
    if (report->parsed()) {
      bind_report.apply(m);
      return cmd_report(m, events_file);
    }
  } catch (const ServiceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitService;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
