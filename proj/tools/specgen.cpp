// specgen: run the specification-generation experiment grid and report on it.
//
//   specgen run --dataset DIR --out DIR [--oracle replay:DIR | --oracle http] ...
//   specgen report OUT_DIR
//   specgen table OUT_DIR... [--exclude PERSONA]
//   specgen parse FILE.c
//   specgen check FILE.c --config CV

#include <CLI11.hpp>

#include <iostream>
#include <memory>

#include "specgen/experiment.hpp"
#include "specgen/framac.hpp"
#include "specgen/oracle_http.hpp"

namespace fs = std::filesystem;
using namespace specgen;

namespace {

std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw io_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty())
      out.push_back(item);
  return out;
}

struct run_args {
  fs::path dataset, out, templates = SPECGEN_DEFAULT_TEMPLATE_DIR;
  std::string configs = "CB,CV,CA,CF", paradigms = "delete,modify";
  int runs = 5, max_iters = 5;
  double budget = 3600;
  std::string oracle = "replay", oracle_config, persona;
  fs::path fixtures;
  double replay_latency = 0;
  std::string verifier = "mock";
  fs::path mock_table;
  std::string framac = "frama-c";
  int prover_timeout = 10;
  double verifier_budget = 120;
  unsigned workers = 0, verifier_slots = 0;
  std::string timing = "wall";
  bool no_logs = false;
  std::size_t limit = 0;
};

std::unique_ptr<oracle> make_oracle(const run_args &a, std::string &persona) {
  if (a.oracle == "replay" || a.oracle.rfind("replay:", 0) == 0) {
    fs::path root = a.oracle.size() > 7 ? fs::path(a.oracle.substr(7)) : a.fixtures;
    if (root.empty())
      throw invalid_plan("replay oracle needs --fixtures DIR or --oracle replay:DIR");
    persona = a.persona.empty() ? "replay" : a.persona;
    return std::make_unique<replay_oracle>(root, a.replay_latency);
  }
  if (a.oracle == "http") {
    auto s = http_oracle_settings{};
    if (!a.oracle_config.empty())
      s = http_oracle_settings::from_json(nlohmann::json::parse(read_file(a.oracle_config)), s);
    s = http_oracle_settings::from_env(s);
    if (!a.persona.empty())
      s.persona = a.persona;
    persona = s.persona;
    return std::make_unique<http_oracle>(s);
  }
  throw invalid_plan("unknown oracle '" + a.oracle + "' (replay:DIR or http)");
}

std::unique_ptr<verifier> make_verifier(const run_args &a) {
  if (a.verifier == "mock") {
    if (a.mock_table.empty())
      throw invalid_plan("mock verifier needs --mock-table FILE");
    return std::make_unique<mock_verifier>(mock_verifier::from_file(a.mock_table));
  }
  if (a.verifier == "framac") {
    framac_options o;
    o.executable = a.framac;
    o.prover_timeout = a.prover_timeout;
    o.wall_budget = a.verifier_budget;
    return std::make_unique<framac_verifier>(o);
  }
  throw invalid_plan("unknown verifier '" + a.verifier + "' (mock or framac)");
}

void print_summary(const std::vector<run_record> &records) {
  for (const auto &[key, recs] : group_cells(records)) {
    auto m = compute_cell(recs);
    std::cout << key.first << "/" << to_string(key.second) << ": NVP " << m.nvp << " NSVP " << m.nsvp << " NVTC "
              << compact(m.nvtc) << " RT " << compact(m.rt) << " CSCCR " << fixed(m.csccr * 100, 2) << "%";
    if (m.errored)
      std::cout << " errored " << m.errored;
    std::cout << "\n";
  }
}

int cmd_run(const run_args &a) {
  experiment_plan plan;
  plan.configs = split_list(a.configs);
  plan.paradigms.clear();
  for (const auto &p : split_list(a.paradigms))
    plan.paradigms.push_back(paradigm_from(p));
  plan.runs_per_cell = a.runs;
  plan.limits.max_repair_iterations = a.max_iters;
  plan.limits.run_wall_budget = a.budget;
  plan.verifier_id = a.verifier;
  if (a.timing != "wall" && a.timing != "accounted")
    throw invalid_plan("--timing must be wall or accounted");
  plan.timing = a.timing == "wall" ? timing_mode::wall : timing_mode::accounted;

  auto corpus = load_dataset(a.dataset);
  auto o = make_oracle(a, plan.oracle_persona);
  auto v = make_verifier(a);
  template_store templates(a.templates);
  plan.validate();

  // a resumed run must keep its plan
  const auto plan_file = a.out / "plan.json";
  if (fs::exists(plan_file) && fs::exists(a.out / "records.jsonl")) {
    auto before = nlohmann::json::parse(read_file(plan_file));
    if (before != to_json(plan))
      throw invalid_plan("plan differs from the one recorded in " + plan_file.string());
  }
  fs::create_directories(a.out);
  write_file(plan_file, to_json(plan).dump(2) + "\n");

  experiment_options opts;
  opts.out_dir = a.out;
  opts.workers = a.workers;
  opts.verifier_slots = a.verifier_slots;
  opts.run_logs = !a.no_logs;
  opts.max_new_records = a.limit;
  std::cerr << "specgen: " << corpus.size() << " programs, " << plan.cell_count(corpus.size()) << " runs planned\n";
  auto records = run_experiment(plan, corpus, *o, *v, templates, opts);
  if (records.size() < plan.cell_count(corpus.size())) {
    std::cerr << "specgen: stopped after " << records.size() << " records; rerun to resume\n";
    return 3;
  }
  write_reports(a.out, plan, records);
  print_summary(records);
  if (!clean_run(records)) {
    auto s = summary_json(records);
    std::cerr << "specgen: " << s["tool_errors"] << " tool errors, " << s["oracle_unavailable"]
              << " oracle failures; see records.csv\n";
    return 1;
  }
  return 0;
}

int cmd_report(const fs::path &dir) {
  auto plan = plan_from_json(nlohmann::json::parse(read_file(dir / "plan.json")));
  auto records = load_records(dir / "records.jsonl", false);
  write_reports(dir, plan, records);
  std::cout << read_file(dir / "table.txt");
  return clean_run(records) ? 0 : 1;
}

int cmd_table(const std::vector<fs::path> &dirs, const std::vector<std::string> &exclude) {
  std::vector<persona_results> personas;
  std::vector<std::string> configs;
  for (const auto &d : dirs) {
    auto plan = plan_from_json(nlohmann::json::parse(read_file(d / "plan.json")));
    auto records = load_records(d / "records.jsonl", false);
    persona_results pr{plan.oracle_persona, {}};
    for (const auto &[key, recs] : group_cells(records))
      pr.cells[key] = as_table_cell(compute_cell(recs));
    for (const auto &c : plan.configs)
      if (std::find(configs.begin(), configs.end(), c) == configs.end())
        configs.push_back(c);
    personas.push_back(std::move(pr));
  }
  auto t = summarize_table(personas, configs, {exclude.begin(), exclude.end()});
  std::cout << render_table(personas, t);
  return 0;
}

int cmd_parse(const fs::path &file) {
  auto spec = parse_annotations(read_file(file));
  nlohmann::json out = nlohmann::json::array();
  for (const auto &a : spec) {
    auto j = to_json(a);
    j["line"] = a.span.start_line;
    out.push_back(j);
  }
  std::cout << nlohmann::json{{"annotations", out}, {"constructs", join_keywords(constr(spec))}}.dump(2) << "\n";
  return 0;
}

int cmd_check(const fs::path &file, const std::string &config) {
  auto spec = parse_annotations(read_file(file));
  auto c = canonical_config(config);
  auto v = check_compliance(constr(spec), c);
  std::cout << config << ": " << (v.compliant ? "compliant" : "not compliant") << "\n";
  if (!v.forbidden_used.empty())
    std::cout << "  forbidden: " << join_keywords(v.forbidden_used) << "\n";
  if (v.mandatory_missing)
    std::cout << "  missing one of: " << join_keywords(c.mandatory) << "\n";
  return v.compliant ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"LLM-guided ACSL specification generation harness"};
  app.require_subcommand(1);

  run_args ra;
  auto *run = app.add_subcommand("run", "run (or resume) an experiment grid");
  run->add_option("--dataset", ra.dataset, "directory of .c programs")->required()->check(CLI::ExistingDirectory);
  run->add_option("--out", ra.out, "output directory (records, logs, reports)")->required();
  run->add_option("--configs", ra.configs, "comma-separated configurations")->capture_default_str();
  run->add_option("--paradigms", ra.paradigms, "delete,modify")->capture_default_str();
  run->add_option("--runs", ra.runs, "independent runs per cell")->capture_default_str();
  run->add_option("--max-iters", ra.max_iters, "repair budget for the modification paradigm")
      ->capture_default_str();
  run->add_option("--budget", ra.budget, "wall-clock seconds per run")->capture_default_str();
  run->add_option("--oracle", ra.oracle, "replay:DIR or http")->capture_default_str();
  run->add_option("--fixtures", ra.fixtures, "replay fixture directory");
  run->add_option("--replay-latency", ra.replay_latency, "seconds reported per replayed completion");
  run->add_option("--oracle-config", ra.oracle_config, "JSON settings for the http oracle");
  run->add_option("--persona", ra.persona, "name used for this oracle in tables");
  run->add_option("--verifier", ra.verifier, "mock or framac")->capture_default_str();
  run->add_option("--mock-table", ra.mock_table, "mock verifier table (JSON)");
  run->add_option("--framac", ra.framac, "frama-c executable")->capture_default_str();
  run->add_option("--prover-timeout", ra.prover_timeout, "WP per-goal timeout (s)")->capture_default_str();
  run->add_option("--verifier-budget", ra.verifier_budget, "wall budget per verifier call (s)")
      ->capture_default_str();
  run->add_option("--templates", ra.templates, "prompt template directory");
  run->add_option("--workers", ra.workers, "worker threads (0: all cores)");
  run->add_option("--verifier-slots", ra.verifier_slots, "concurrent verifier calls (0: workers)");
  run->add_option("--timing", ra.timing, "wall or accounted")->capture_default_str();
  run->add_flag("--no-logs", ra.no_logs, "skip per-run JSONL logs");
  run->add_option("--limit", ra.limit, "stop after this many new runs");

  fs::path report_dir;
  auto *report = app.add_subcommand("report", "regenerate reports from records.jsonl");
  report->add_option("dir", report_dir)->required()->check(CLI::ExistingDirectory);

  std::vector<fs::path> table_dirs;
  std::vector<std::string> exclude;
  auto *table = app.add_subcommand("table", "one table over several experiment directories");
  table->add_option("dirs", table_dirs)->required()->check(CLI::ExistingDirectory);
  table->add_option("--exclude", exclude, "personas left out of the Average row");

  fs::path parse_file;
  auto *parse = app.add_subcommand("parse", "list the ACSL annotations of a file");
  parse->add_option("file", parse_file)->required()->check(CLI::ExistingFile);

  fs::path check_file;
  std::string check_config;
  auto *check = app.add_subcommand("check", "check a file's annotations against a configuration");
  check->add_option("file", check_file)->required()->check(CLI::ExistingFile);
  check->add_option("--config", check_config)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(ra);
    if (*report) return cmd_report(report_dir);
    if (*table) return cmd_table(table_dirs, exclude);
    if (*parse) return cmd_parse(parse_file);
    if (*check) return cmd_check(check_file, check_config);
  } catch (const error &e) {
    std::cerr << "specgen: " << e.kind() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "specgen: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
