#pragma once

// Corpus loading, the experiment grid, and record persistence.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "specgen/acsl.hpp"
#include "specgen/config.hpp"
#include "specgen/error.hpp"
#include "specgen/metrics.hpp"
#include "specgen/program.hpp"
#include "specgen/refinement.hpp"

namespace specgen {

// Layout: <root>/<category>/<id>.c, optionally with <id>.json holding
// {"target_function": "..."}. Without a manifest the last function defined in
// the file is the target. Any ACSL already in a file is stripped.
inline std::vector<program> load_dataset(const std::filesystem::path &root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root))
    throw empty_corpus("dataset directory " + root.string() + " does not exist");
  std::vector<program> out;
  std::map<std::string, fs::path> seen;
  for (const auto &e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().extension() != ".c")
      continue;
    program p;
    p.id = e.path().stem().string();
    if (auto [it, fresh] = seen.emplace(p.id, e.path()); !fresh)
      throw duplicate_id("program id '" + p.id + "' appears in " + it->second.string() + " and " +
                         e.path().string());
    const auto parent = fs::relative(e.path().parent_path(), root);
    p.category = parent.empty() || parent == "." ? std::string("uncategorized")
                                                 : e.path().parent_path().filename().string();
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    p.source = strip_annotations(ss.str());

    const auto shape = detail::outline(p.source);
    auto manifest = e.path();
    manifest.replace_extension(".json");
    if (fs::exists(manifest)) {
      std::ifstream mi(manifest);
      auto j = nlohmann::json::parse(mi);
      p.target_function = j.at("target_function").get<std::string>();
      const auto *f = shape.find_function(p.target_function);
      if (!f || !f->is_definition)
        throw missing_target_function("manifest of " + p.id + " names '" + p.target_function +
                                      "', which is not defined in " + e.path().string());
    } else {
      for (const auto &f : shape.functions)
        if (f.is_definition)
          p.target_function = f.name;
      if (p.target_function.empty())
        throw missing_target_function(e.path().string() + " defines no function");
    }
    out.push_back(std::move(p));
  }
  if (out.empty())
    throw empty_corpus("no .c files under " + root.string());
  std::sort(out.begin(), out.end(), [](const program &a, const program &b) { return a.id < b.id; });
  return out;
}

struct experiment_plan {
  std::vector<std::string> configs = {"CB", "CV", "CA", "CF"};
  std::vector<paradigm> paradigms = {paradigm::deletion, paradigm::modification};
  int runs_per_cell = 5;
  run_limits limits;
  std::string oracle_persona = "replay";
  std::string verifier_id = "mock";
  timing_mode timing = timing_mode::wall;

  void validate() const {
    if (configs.empty())
      throw invalid_plan("plan has no configurations");
    if (paradigms.empty())
      throw invalid_plan("plan has no paradigms");
    if (runs_per_cell < 1)
      throw invalid_plan("runs per cell must be positive");
    for (const auto &c : configs)
      canonical_config(c);
    limits.validate();
  }

  std::size_t cell_count(std::size_t programs) const {
    return programs * configs.size() * paradigms.size() * static_cast<std::size_t>(runs_per_cell);
  }
};

inline nlohmann::json to_json(const experiment_plan &p) {
  std::vector<std::string> paradigms;
  for (auto m : p.paradigms)
    paradigms.emplace_back(to_string(m));
  return {{"configs", p.configs},
          {"paradigms", paradigms},
          {"runs_per_cell", p.runs_per_cell},
          {"max_repair_iterations", p.limits.max_repair_iterations},
          {"run_wall_budget", p.limits.run_wall_budget},
          {"oracle", p.oracle_persona},
          {"verifier", p.verifier_id},
          {"timing", p.timing == timing_mode::wall ? "wall" : "accounted"}};
}

inline experiment_plan plan_from_json(const nlohmann::json &j) {
  experiment_plan p;
  p.configs = j.value("configs", p.configs);
  if (j.contains("paradigms")) {
    p.paradigms.clear();
    for (const auto &m : j.at("paradigms"))
      p.paradigms.push_back(paradigm_from(m.get<std::string>()));
  }
  p.runs_per_cell = j.value("runs_per_cell", p.runs_per_cell);
  p.limits.max_repair_iterations = j.value("max_repair_iterations", p.limits.max_repair_iterations);
  p.limits.run_wall_budget = j.value("run_wall_budget", p.limits.run_wall_budget);
  p.oracle_persona = j.value("oracle", p.oracle_persona);
  p.verifier_id = j.value("verifier", p.verifier_id);
  p.timing = j.value("timing", std::string("wall")) == "accounted" ? timing_mode::accounted : timing_mode::wall;
  return p;
}

// ---- record (de)serialization ----

inline nlohmann::json to_json(const annotation &a) {
  nlohmann::json j = {{"kind", tag(a.kind)}, {"text", a.text}};
  switch (a.where.where) {
  case anchor::scope::global: j["anchor"] = "global"; break;
  case anchor::scope::function_contract:
    j["anchor"] = "contract";
    j["function"] = a.where.function;
    if (!a.where.behavior.empty())
      j["behavior"] = a.where.behavior;
    break;
  case anchor::scope::loop:
    j["anchor"] = "loop";
    j["function"] = a.where.function;
    j["loop"] = a.where.loop_ordinal;
    break;
  }
  return j;
}

inline annotation annotation_from_json(const nlohmann::json &j) {
  annotation a;
  auto kind = kind_from_tag(j.at("kind").get<std::string>());
  if (!kind)
    throw classification_error("unknown construct tag in record");
  a.kind = *kind;
  a.text = j.at("text").get<std::string>();
  a.span = {"<record>", 1, 1};
  const auto scope = j.at("anchor").get<std::string>();
  if (scope == "contract")
    a.where = anchor::contract(j.at("function").get<std::string>(), j.value("behavior", std::string{}));
  else if (scope == "loop")
    a.where = anchor::loop(j.at("function").get<std::string>(), j.at("loop").get<int>());
  else
    a.where = anchor::global();
  return a;
}

inline nlohmann::json to_json(const run_record &r) {
  nlohmann::json spec = nlohmann::json::array();
  for (const auto &a : r.final_spec)
    spec.push_back(to_json(a));
  std::vector<std::string> constructs;
  for (auto k : r.initial_constructs.kinds())
    constructs.emplace_back(tag(k));
  return {{"program", r.program_id},
          {"config", r.config_name},
          {"paradigm", to_string(r.mode)},
          {"run", r.run_index},
          {"compliant", r.compliant},
          {"outcome", to_string(r.outcome)},
          {"tool_calls", r.tool_calls},
          {"elapsed", r.elapsed},
          {"iterations", r.iterations},
          {"initial_size", r.initial_size},
          {"initial_constructs", constructs},
          {"error", r.error_kind},
          {"error_message", r.error_message},
          {"final_spec", spec}};
}

inline run_record run_record_from_json(const nlohmann::json &j) {
  run_record r;
  r.program_id = j.at("program").get<std::string>();
  r.config_name = j.at("config").get<std::string>();
  r.mode = paradigm_from(j.at("paradigm").get<std::string>());
  r.run_index = j.at("run").get<int>();
  r.compliant = j.at("compliant").get<bool>();
  r.outcome = run_outcome_from(j.at("outcome").get<std::string>());
  r.tool_calls = j.at("tool_calls").get<int>();
  r.elapsed = j.at("elapsed").get<double>();
  r.iterations = j.value("iterations", 0);
  r.initial_size = j.value("initial_size", std::size_t{0});
  for (const auto &t : j.value("initial_constructs", std::vector<std::string>{}))
    if (auto k = kind_from_tag(t))
      r.initial_constructs.insert(*k);
  r.error_kind = j.value("error", std::string{});
  r.error_message = j.value("error_message", std::string{});
  for (const auto &a : j.value("final_spec", nlohmann::json::array()))
    r.final_spec.insert(annotation_from_json(a));
  return r;
}

using record_key = std::tuple<std::string, std::string, paradigm, int>;

inline record_key key_of(const run_record &r) {
  return {r.program_id, r.config_name, r.mode, r.run_index};
}

// Reads records.jsonl. A torn final line (crash mid-write) is dropped and
// the file truncated to the last complete record.
inline std::vector<run_record> load_records(const std::filesystem::path &file,
                                            bool repair_tail = true) {
  std::vector<run_record> out;
  if (!std::filesystem::exists(file))
    return out;
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  std::size_t pos = 0, good_end = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    if (nl == std::string::npos)
      break; // incomplete tail
    std::string_view line(data.data() + pos, nl - pos);
    if (!line.empty()) {
      try {
        out.push_back(run_record_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception &) {
        break;
      }
    }
    pos = nl + 1;
    good_end = pos;
  }
  in.close();
  if (repair_tail && good_end < data.size())
    std::filesystem::resize_file(file, good_end);
  return out;
}

struct experiment_options {
  std::optional<std::filesystem::path> out_dir; // records.jsonl and run logs go here
  unsigned workers = 0;                         // 0: hardware concurrency
  unsigned verifier_slots = 0;                  // 0: same as workers
  bool run_logs = true;
  // Stop after this many new records (simulates an interrupted run).
  std::size_t max_new_records = 0;
};

// Executes every (program, config, paradigm, run) cell not already present
// in <out_dir>/records.jsonl. Returns all records, sorted by key.
inline std::vector<run_record> run_experiment(const experiment_plan &plan,
                                              const std::vector<program> &corpus, oracle &o,
                                              verifier &v, const template_store &templates,
                                              const experiment_options &opts = {}) {
  plan.validate();
  if (corpus.empty())
    throw empty_corpus("corpus is empty");

  std::vector<run_record> done;
  std::filesystem::path records_file;
  if (opts.out_dir) {
    std::filesystem::create_directories(*opts.out_dir);
    records_file = *opts.out_dir / "records.jsonl";
    done = load_records(records_file);
  }
  std::set<record_key> have;
  for (const auto &r : done)
    have.insert(key_of(r));

  struct job {
    const program *p;
    std::string config;
    paradigm mode;
    int run;
  };
  std::vector<job> jobs;
  for (const auto &p : corpus)
    for (const auto &c : plan.configs)
      for (auto m : plan.paradigms)
        for (int k = 1; k <= plan.runs_per_cell; ++k)
          if (!have.count({p.id, c, m, k}))
            jobs.push_back({&p, c, m, k});
  if (opts.max_new_records && jobs.size() > opts.max_new_records)
    jobs.resize(opts.max_new_records);

  unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
  throttled_verifier gate(v, opts.verifier_slots ? opts.verifier_slots : workers);

  std::ofstream sink;
  if (opts.out_dir)
    sink.open(records_file, std::ios::app | std::ios::binary);
  std::mutex write_mu;
  std::atomic<std::size_t> next{0};
  std::vector<run_record> fresh(jobs.size());

  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto &jb = jobs[i];
      run_context ctx{o, gate, templates, plan.limits, plan.timing, std::nullopt};
      if (opts.out_dir && opts.run_logs)
        ctx.log_dir = *opts.out_dir / "logs";
      auto rec = run_once(*jb.p, canonical_config(jb.config), jb.mode, ctx, jb.run);
      if (sink.is_open()) {
        std::lock_guard lock(write_mu);
        sink << to_json(rec).dump() << "\n" << std::flush;
      }
      fresh[i] = std::move(rec);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t)
    pool.emplace_back(work);
  work();
  for (auto &t : pool)
    t.join();

  done.insert(done.end(), std::make_move_iterator(fresh.begin()), std::make_move_iterator(fresh.end()));
  std::sort(done.begin(), done.end(),
            [](const run_record &a, const run_record &b) { return key_of(a) < key_of(b); });
  return done;
}

// ---- reports ----

inline std::string records_csv(const std::vector<run_record> &records) {
  std::ostringstream out;
  out << "program,config,paradigm,run,compliant,outcome,tool_calls,elapsed,iterations,initial_size,error\n";
  for (const auto &r : records)
    out << r.program_id << ',' << r.config_name << ',' << to_string(r.mode) << ',' << r.run_index << ','
        << (r.compliant ? 1 : 0) << ',' << to_string(r.outcome) << ',' << r.tool_calls << ','
        << fixed(r.elapsed, 4) << ',' << r.iterations << ',' << r.initial_size << ',' << r.error_kind
        << '\n';
  return out.str();
}

inline nlohmann::json summary_json(const std::vector<run_record> &records) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto &[key, recs] : group_cells(records))
    cells.push_back(to_json(compute_cell(recs)));
  int tool_errors = 0, unavailable = 0;
  for (const auto &r : records) {
    tool_errors += r.error_kind == "tool_error";
    unavailable += r.error_kind == "oracle_unavailable";
  }
  return {{"cells", cells},
          {"records", records.size()},
          {"tool_errors", tool_errors},
          {"oracle_unavailable", unavailable}};
}

// True when the run produced no ToolError or OracleUnavailable records.
inline bool clean_run(const std::vector<run_record> &records) {
  return std::none_of(records.begin(), records.end(), [](const run_record &r) {
    return r.error_kind == "tool_error" || r.error_kind == "oracle_unavailable";
  });
}

inline void write_file(const std::filesystem::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out)
    throw io_error("cannot write " + p.string());
  out << text;
}

// plan.json, records.csv, summary.json, table.txt, venn.json,
// optimal_config.json, distribution.json
inline void write_reports(const std::filesystem::path &dir, const experiment_plan &plan,
                          const std::vector<run_record> &records) {
  std::filesystem::create_directories(dir);
  write_file(dir / "plan.json", to_json(plan).dump(2) + "\n");
  write_file(dir / "records.csv", records_csv(records));
  write_file(dir / "summary.json", summary_json(records).dump(2) + "\n");

  const auto cells = group_cells(records);
  persona_results pr{plan.oracle_persona, {}};
  nlohmann::json dist = nlohmann::json::object();
  for (const auto &[key, recs] : cells) {
    auto m = compute_cell(recs);
    pr.cells[key] = as_table_cell(m);
    dist[key.first + "/" + std::string(to_string(key.second))] = to_json(m)["samples"];
  }
  auto table = summarize_table({pr}, plan.configs);
  write_file(dir / "table.txt", render_table({pr}, table));
  write_file(dir / "distribution.json", dist.dump(2) + "\n");

  nlohmann::json venn = nlohmann::json::object();
  nlohmann::json optimal = nlohmann::json::object();
  const std::vector<std::string> trio = {"CB", "CV", "CA"};
  const bool has_trio = std::all_of(trio.begin(), trio.end(), [&](const std::string &c) {
    return std::find(plan.configs.begin(), plan.configs.end(), c) != plan.configs.end();
  });
  if (has_trio) {
    for (auto m : plan.paradigms) {
      const std::string name(to_string(m));
      venn[name] = to_json(venn_sets(records, m));
      for (auto metric : {cost_metric::nvtc, cost_metric::rt}) {
        nlohmann::json shares = nlohmann::json::object();
        for (const auto &[c, share] : optimal_config_proportions(records, m, metric))
          shares[c] = round_to(share, 4);
        optimal[name][std::string(to_string(metric))] = shares;
      }
    }
  }
  write_file(dir / "venn.json", venn.dump(2) + "\n");
  write_file(dir / "optimal_config.json", optimal.dump(2) + "\n");
}

} // namespace specgen
