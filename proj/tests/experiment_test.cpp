#include <gtest/gtest.h>

#include "specgen/experiment.hpp"
#include "test_util.hpp"

using namespace specgen;
using namespace specgen::testing;
namespace fs = std::filesystem;

namespace {

fs::path toy() { return data_dir() / "toy"; }

experiment_plan toy_plan(int runs = 5) {
  experiment_plan plan;
  plan.runs_per_cell = runs;
  plan.timing = timing_mode::accounted;
  return plan;
}

struct harness {
  std::vector<program> corpus = load_dataset(toy());
  replay_oracle oracle{data_dir() / "toy_fixtures"};
  mock_verifier verifier = mock_verifier::from_file(data_dir() / "toy_mock.json");
  template_store templates;
};

std::size_t line_count(const fs::path &p) {
  auto s = read_text(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST(Dataset, ToyCorpus) {
  auto c = load_dataset(toy());
  ASSERT_EQ(c.size(), 10u);
  std::set<std::string> cats;
  for (const auto &p : c)
    cats.insert(p.category);
  EXPECT_EQ(cats, (std::set<std::string>{"arith", "arrays", "loops", "pointers"}));
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end(), [](auto &a, auto &b) { return a.id < b.id; }));
  for (const auto &p : c)
    EXPECT_FALSE(p.target_function.empty()) << p.id;
}

TEST(Dataset, StripsExistingAnnotations) {
  auto d = scratch_dir("ds_strip");
  write_text(d / "m" / "f.c", "/*@ requires x > 0; */\nint f(int x) { return x; }\n");
  auto c = load_dataset(d);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].source.find("requires"), std::string::npos);
  EXPECT_EQ(c[0].category, "m");
  EXPECT_EQ(c[0].target_function, "f");
}

TEST(Dataset, LastFunctionIsDefaultTarget) {
  auto d = scratch_dir("ds_last");
  write_text(d / "a" / "two.c", "int helper(int x) { return x; }\nint main2(int y) { return helper(y); }\n");
  EXPECT_EQ(load_dataset(d)[0].target_function, "main2");
}

TEST(Dataset, ManifestPicksTarget) {
  auto d = scratch_dir("ds_manifest");
  write_text(d / "a" / "two.c", "int helper(int x) { return x; }\nint main2(int y) { return helper(y); }\n");
  write_text(d / "a" / "two.json", R"({"target_function": "helper"})");
  EXPECT_EQ(load_dataset(d)[0].target_function, "helper");
}

TEST(Dataset, ManifestNamingUnknownFunction) {
  auto d = scratch_dir("ds_bad_manifest");
  write_text(d / "a" / "f.c", "int f(int x) { return x; }\n");
  write_text(d / "a" / "f.json", R"({"target_function": "g"})");
  EXPECT_THROW(load_dataset(d), missing_target_function);
}

TEST(Dataset, RootLevelFilesUncategorized) {
  auto d = scratch_dir("ds_root");
  write_text(d / "f.c", "int f(void) { return 0; }\n");
  EXPECT_EQ(load_dataset(d)[0].category, "uncategorized");
}

TEST(Dataset, EmptyAndMissing) {
  auto d = scratch_dir("ds_empty");
  write_text(d / "readme.txt", "nothing here");
  EXPECT_THROW(load_dataset(d), empty_corpus);
  EXPECT_THROW(load_dataset(d / "nope"), empty_corpus);
}

TEST(Dataset, DuplicateId) {
  auto d = scratch_dir("ds_dup");
  write_text(d / "a" / "f.c", "int f(void) { return 0; }\n");
  write_text(d / "b" / "f.c", "int f(void) { return 1; }\n");
  EXPECT_THROW(load_dataset(d), duplicate_id);
}

TEST(Plan, Validation) {
  experiment_plan p;
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(p.cell_count(49), 49u * 4 * 2 * 5);
  p.runs_per_cell = 0;
  EXPECT_THROW(p.validate(), invalid_plan);
  p = {};
  p.configs = {"CX"};
  EXPECT_ANY_THROW(p.validate());
  p = {};
  p.configs.clear();
  EXPECT_THROW(p.validate(), invalid_plan);
  p = {};
  p.limits.max_repair_iterations = 0;
  EXPECT_THROW(p.validate(), invalid_plan);
}

TEST(Records, JsonRoundTrip) {
  run_record r;
  r.program_id = "swap";
  r.config_name = "CA";
  r.mode = paradigm::modification;
  r.run_index = 3;
  r.compliant = true;
  r.outcome = run_outcome::exhausted;
  r.tool_calls = 6;
  r.elapsed = 12.25;
  r.iterations = 5;
  r.final_spec = parse_annotations("/*@ requires \\valid(a); */\nvoid f(int *a) { *a = 0; }\n");
  r.initial_constructs = constr(r.final_spec);
  r.initial_size = 1;
  auto back = run_record_from_json(to_json(r));
  EXPECT_EQ(to_json(back), to_json(r));
  EXPECT_TRUE(back.final_spec.same_as(r.final_spec));
}

TEST(Records, TornTailIsDropped) {
  auto d = scratch_dir("torn");
  run_record r;
  r.program_id = "a";
  r.config_name = "CB";
  write_text(d / "records.jsonl", to_json(r).dump() + "\n" + R"({"program": "b", "con)");
  auto recs = load_records(d / "records.jsonl");
  EXPECT_EQ(recs.size(), 1u);
  EXPECT_EQ(read_text(d / "records.jsonl"), to_json(r).dump() + "\n");
}

TEST(Experiment, RecordCountArithmetic) {
  harness h;
  auto plan = toy_plan(2);
  plan.configs = {"CB", "CF"};
  auto recs = run_experiment(plan, h.corpus, h.oracle, h.verifier, h.templates, {});
  EXPECT_EQ(recs.size(), plan.cell_count(h.corpus.size()));
  EXPECT_EQ(recs.size(), 10u * 2 * 2 * 2);
  std::set<record_key> keys;
  for (const auto &r : recs)
    keys.insert(key_of(r));
  EXPECT_EQ(keys.size(), recs.size());
  EXPECT_TRUE(clean_run(recs));
}

TEST(Experiment, ResumesAfterInterruption) {
  harness h;
  auto d = scratch_dir("resume");
  auto plan = toy_plan(2);
  experiment_options opts;
  opts.out_dir = d;
  opts.workers = 3;
  opts.max_new_records = 37;
  auto partial = run_experiment(plan, h.corpus, h.oracle, h.verifier, h.templates, opts);
  EXPECT_EQ(partial.size(), 37u);
  EXPECT_EQ(line_count(d / "records.jsonl"), 37u);

  // crash in the middle of writing the next record
  {
    std::ofstream out(d / "records.jsonl", std::ios::app);
    out << R"({"program":"half)";
  }
  opts.max_new_records = 0;
  auto full = run_experiment(plan, h.corpus, h.oracle, h.verifier, h.templates, opts);
  EXPECT_EQ(full.size(), plan.cell_count(10));
  EXPECT_EQ(line_count(d / "records.jsonl"), full.size());

  auto fresh_dir = scratch_dir("resume_ref");
  opts.out_dir = fresh_dir;
  auto ref = run_experiment(plan, h.corpus, h.oracle, h.verifier, h.templates, opts);
  EXPECT_EQ(summary_json(full), summary_json(ref));

  // nothing left to do
  auto again = run_experiment(plan, h.corpus, h.oracle, h.verifier, h.templates, {d, 2, 0, true, 0});
  EXPECT_EQ(again.size(), full.size());
  EXPECT_EQ(line_count(d / "records.jsonl"), full.size());
}

TEST(Experiment, DeterministicUnderReplay) {
  harness h;
  auto plan = toy_plan(5);
  experiment_options a, b;
  a.workers = 1;
  b.workers = 6;
  auto ra = run_experiment(plan, h.corpus, h.oracle, h.verifier, h.templates, a);
  auto rb = run_experiment(plan, h.corpus, h.oracle, h.verifier, h.templates, b);
  EXPECT_EQ(summary_json(ra).dump(), summary_json(rb).dump());
  EXPECT_EQ(records_csv(ra), records_csv(rb));
}

TEST(Experiment, RunLogsWritten) {
  harness h;
  auto d = scratch_dir("logs");
  auto plan = toy_plan(1);
  plan.configs = {"CV"};
  plan.paradigms = {paradigm::deletion};
  experiment_options opts;
  opts.out_dir = d;
  auto recs = run_experiment(plan, h.corpus, h.oracle, h.verifier, h.templates, opts);
  for (const auto &r : recs) {
    auto log = d / "logs" / r.program_id / "CV-delete-1.jsonl";
    ASSERT_TRUE(fs::exists(log)) << log;
    EXPECT_EQ(line_count(log), static_cast<std::size_t>(r.tool_calls) + 2);
  }
}

TEST(Experiment, ReportFiles) {
  harness h;
  auto d = scratch_dir("reports");
  auto plan = toy_plan(2);
  auto recs = run_experiment(plan, h.corpus, h.oracle, h.verifier, h.templates, {});
  write_reports(d, plan, recs);
  for (auto f : {"plan.json", "records.csv", "summary.json", "table.txt", "distribution.json", "venn.json",
                 "optimal_config.json"})
    EXPECT_TRUE(fs::exists(d / f)) << f;
  EXPECT_EQ(line_count(d / "records.csv"), recs.size() + 1);
  auto venn = nlohmann::json::parse(read_text(d / "venn.json"));
  EXPECT_TRUE(venn.contains("delete"));
  EXPECT_TRUE(venn.contains("modify"));
  auto opt = nlohmann::json::parse(read_text(d / "optimal_config.json"));
  double sum = 0;
  for (auto &[k, v] : opt["modify"]["nvtc"].items())
    sum += v.get<double>();
  EXPECT_NEAR(sum, 1.0, 1e-3);
  auto table = read_text(d / "table.txt");
  EXPECT_NE(table.find("Improvement Ratio"), std::string::npos);
}

TEST(Experiment, ToolErrorsMakeRunUnclean) {
  harness h;
  struct broken_on_swap : verifier {
    mock_verifier &inner;
    explicit broken_on_swap(mock_verifier &v) : inner(v) {}
    verifier_report verify(const program &p, const specification_set &s) override {
      if (p.id != "swap")
        return inner.verify(p, s);
      verifier_report r;
      r.status = verification_status::tool_error;
      r.raw_output = "[kernel] user error: boom";
      return r;
    }
    std::string describe() const override { return "broken"; }
  } broken(h.verifier);
  auto plan = toy_plan(1);
  plan.configs = {"CB"};
  auto recs = run_experiment(plan, h.corpus, h.oracle, broken, h.templates, {});
  EXPECT_FALSE(clean_run(recs));
  EXPECT_EQ(summary_json(recs)["tool_errors"], 2);
}

TEST(Plan, JsonRoundTrip) {
  experiment_plan p;
  p.configs = {"CV", "CA"};
  p.paradigms = {paradigm::modification};
  p.runs_per_cell = 3;
  p.limits.max_repair_iterations = 7;
  p.oracle_persona = "gpt-x";
  p.timing = timing_mode::accounted;
  EXPECT_EQ(to_json(plan_from_json(to_json(p))), to_json(p));
}
