#pragma once

// One guess-verify-refine run for a (program, configuration, paradigm).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <string>

#include <json.hpp>

#include "specgen/acsl.hpp"
#include "specgen/config.hpp"
#include "specgen/error.hpp"
#include "specgen/oracle.hpp"
#include "specgen/program.hpp"
#include "specgen/prompt.hpp"
#include "specgen/verifier.hpp"

namespace specgen {

enum class paradigm { deletion, modification };

inline std::string_view to_string(paradigm p) {
  return p == paradigm::deletion ? "delete" : "modify";
}

inline paradigm paradigm_from(std::string_view s) {
  if (s == "delete" || s == "deletion") return paradigm::deletion;
  if (s == "modify" || s == "modification") return paradigm::modification;
  throw invalid_plan("unknown paradigm '" + std::string(s) + "'");
}

struct run_limits {
  int max_repair_iterations = 5;
  double run_wall_budget = 3600.0; // seconds

  void validate() const {
    if (max_repair_iterations < 1)
      throw invalid_plan("max_repair_iterations must be positive");
    if (!(run_wall_budget > 0))
      throw invalid_plan("run wall budget must be positive");
  }
};

enum class run_outcome { verified, exhausted, errored };

inline std::string_view to_string(run_outcome o) {
  switch (o) {
  case run_outcome::verified: return "verified";
  case run_outcome::exhausted: return "exhausted";
  case run_outcome::errored: return "errored";
  }
  return "?";
}

inline run_outcome run_outcome_from(std::string_view s) {
  if (s == "verified") return run_outcome::verified;
  if (s == "exhausted") return run_outcome::exhausted;
  if (s == "errored") return run_outcome::errored;
  throw error("bad_outcome", "unknown run outcome '" + std::string(s) + "'");
}

struct run_record {
  std::string program_id;
  std::string config_name;
  paradigm mode = paradigm::deletion;
  int run_index = 1;
  bool compliant = false;
  run_outcome outcome = run_outcome::errored;
  int tool_calls = 0;
  double elapsed = 0.0;
  int iterations = 0;
  specification_set final_spec;
  construct_set initial_constructs;
  std::size_t initial_size = 0;
  std::string error_kind; // empty unless errored
  std::string error_message;
};

// How `elapsed` is measured. `accounted` sums oracle latency and verifier
// wall time as reported by the adapters, which is reproducible under replay.
enum class timing_mode { wall, accounted };

// Caps how many verifier invocations run at once across worker threads.
class throttled_verifier : public verifier {
public:
  throttled_verifier(verifier &inner, std::ptrdiff_t limit) : inner_(inner), slots_(limit) {}

  verifier_report verify(const program &p, const specification_set &s) override {
    slots_.acquire();
    struct release {
      std::counting_semaphore<> &s;
      ~release() { s.release(); }
    } guard{slots_};
    return inner_.verify(p, s);
  }
  std::string describe() const override { return inner_.describe(); }

private:
  verifier &inner_;
  std::counting_semaphore<> slots_;
};

struct run_context {
  oracle &oracle_;
  verifier &verifier_;
  const template_store &templates;
  run_limits limits;
  timing_mode timing = timing_mode::wall;
  // When set, one JSON line per verifier call is appended to
  // <log_dir>/<program>/<config>-<paradigm>-<run>.jsonl
  std::optional<std::filesystem::path> log_dir;
};

namespace detail {

// Annotations that cannot stay once `removed` is gone: anything mentioning a
// removed predicate or logic function (transitively), and the clauses of a
// removed named behavior.
inline specification_set with_dependents(const specification_set &spec,
                                         const specification_set &removed) {
  specification_set out = removed;
  bool grew = true;
  while (grew) {
    grew = false;
    std::set<std::string> symbols, behaviors;
    for (const auto &a : out) {
      auto name = declared_name(a);
      if (!name)
        continue;
      if (a.kind == construct_kind::predicate || a.kind == construct_kind::logic)
        symbols.insert(*name);
      else if (a.kind == construct_kind::behavior)
        behaviors.insert(*name);
    }
    for (const auto &a : spec) {
      if (out.contains(a))
        continue;
      bool dependent = false;
      for (const auto &sym : symbols) {
        // the declaration itself mentions its own name; skip self-reference
        if (declared_name(a) == sym && (a.kind == construct_kind::predicate ||
                                        a.kind == construct_kind::logic))
          continue;
        if (mentions_identifier(a.text, sym))
          dependent = true;
      }
      if (!a.where.behavior.empty() && behaviors.count(a.where.behavior))
        dependent = true;
      if (a.kind == construct_kind::behavior && !declared_name(a))
        for (const auto &b : behaviors)
          if (mentions_identifier(a.text, b))
            dependent = true;
      if (dependent) {
        out.insert(a);
        grew = true;
      }
    }
  }
  return out;
}

// Tie-break when no failing goal could be attributed: the last annotation
// that produces goals and is not named by a proved goal, else the last one.
inline std::optional<annotation> tie_break_victim(const verifier_report &report,
                                                  const specification_set &spec) {
  const auto &items = spec.annotations();
  std::vector<bool> proved(items.size(), false);
  for (const auto &g : report.goals)
    if (g.status == goal_status::proved && g.source_annotation && *g.source_annotation < items.size())
      proved[*g.source_annotation] = true;
  for (std::size_t i = items.size(); i-- > 0;)
    if (generates_goal(items[i]) && !proved[i])
      return items[i];
  if (!items.empty())
    return items.back();
  return std::nullopt;
}

} // namespace detail

// S' = S \ S_error, with dependents of deleted declarations removed as well.
// Always strictly smaller than S.
inline specification_set refine_delete(const specification_set &spec, const verifier_report &report) {
  if (spec.empty())
    throw precondition_violation("deletion needs a non-empty specification");
  if (report.status == verification_status::verified || report.status == verification_status::tool_error)
    throw precondition_violation("deletion needs a failed verification report");
  specification_set blamed;
  try {
    blamed = map_failures_to_annotations(report, spec);
  } catch (const unmappable_failure &e) {
    blamed = e.mapped();
  }
  if (blamed.empty())
    if (auto victim = detail::tie_break_victim(report, spec))
      blamed.insert(*victim);
  return spec.without(detail::with_dependents(spec, blamed));
}

// S' = O_repair(P, S, I, M_repair)
inline oracle_response refine_modify(const program &p, const specification_set &spec,
                                     const verifier_report &report, oracle &o,
                                     const configuration &c, const template_store &templates,
                                     int attempt_index, int run_index = 1) {
  auto prompt = build_repair_prompt(p, spec, report, c, templates);
  return repair(o, p, report, c.name, prompt, attempt_index, run_index);
}

namespace detail {

class run_log {
public:
  run_log(const run_context &ctx, const program &p, const configuration &c, paradigm m, int run) {
    if (!ctx.log_dir)
      return;
    auto dir = *ctx.log_dir / p.id;
    std::filesystem::create_directories(dir);
    out_.open(dir / (c.name + "-" + std::string(to_string(m)) + "-" + std::to_string(run) + ".jsonl"),
              std::ios::trunc);
    write({{"event", "start"},
           {"program", p.id},
           {"config", c.name},
           {"paradigm", to_string(m)},
           {"run", run},
           {"oracle", ctx.oracle_.describe()},
           {"oracle_parameters", ctx.oracle_.parameters()},
           {"verifier", ctx.verifier_.describe()},
           {"max_repair_iterations", ctx.limits.max_repair_iterations}});
  }

  void verifier_call(int attempt, const specification_set &s, const verifier_report &r,
                     double elapsed) {
    if (!out_.is_open())
      return;
    nlohmann::json failing = nlohmann::json::array();
    for (const auto *g : r.failing_goals())
      failing.push_back({{"goal", g->name}, {"status", to_string(g->status)}});
    write({{"event", "verify"},
           {"attempt", attempt},
           {"spec_size", s.size()},
           {"spec_hash", spec_hash(s)},
           {"status", to_string(r.status)},
           {"goals", r.goals.size()},
           {"failing", failing},
           {"call_time", r.wall_time},
           {"elapsed", elapsed}});
  }

  void finish(const run_record &rec) {
    if (!out_.is_open())
      return;
    write({{"event", "end"},
           {"outcome", to_string(rec.outcome)},
           {"tool_calls", rec.tool_calls},
           {"iterations", rec.iterations},
           {"error", rec.error_kind}});
  }

private:
  void write(const nlohmann::json &j) { out_ << j.dump() << "\n" << std::flush; }
  std::ofstream out_;
};

} // namespace detail

// propose -> verify -> (refine -> verify)*. Errors are folded into the record.
inline run_record run_once(const program &p, const configuration &c, paradigm mode,
                           run_context &ctx, int run_index = 1) {
  using clock = std::chrono::steady_clock;
  ctx.limits.validate();
  run_record rec;
  rec.program_id = p.id;
  rec.config_name = c.name;
  rec.mode = mode;
  rec.run_index = run_index;

  detail::run_log log(ctx, p, c, mode, run_index);
  const auto t0 = clock::now();
  double accounted = 0.0;
  auto elapsed = [&] {
    return ctx.timing == timing_mode::accounted
               ? accounted
               : std::chrono::duration<double>(clock::now() - t0).count();
  };

  try {
    auto proposal = propose(ctx.oracle_, p, c.name, build_generation_prompt(p, c, ctx.templates),
                            run_index);
    accounted += proposal.latency;
    specification_set spec = std::move(proposal.extracted);
    rec.compliant = check_compliance(spec, c).compliant;
    rec.initial_constructs = constr(spec);
    rec.initial_size = spec.size();
    rec.final_spec = spec;

    int attempt = 0;
    while (true) {
      auto report = ctx.verifier_.verify(p, spec);
      ++rec.tool_calls;
      accounted += report.wall_time;
      log.verifier_call(attempt, spec, report, elapsed());
      rec.final_spec = spec;

      if (report.status == verification_status::verified) {
        rec.outcome = run_outcome::verified;
        break;
      }
      if (report.status == verification_status::tool_error) {
        rec.outcome = run_outcome::errored;
        rec.error_kind = "tool_error";
        rec.error_message = report.raw_output.substr(0, 500);
        break;
      }
      if (elapsed() >= ctx.limits.run_wall_budget) {
        rec.outcome = run_outcome::exhausted;
        break;
      }
      if (mode == paradigm::deletion) {
        // only declarations left: nothing more to prove or to blame
        if (std::none_of(spec.begin(), spec.end(), generates_goal)) {
          rec.outcome = run_outcome::exhausted;
          break;
        }
        auto next = refine_delete(spec, report);
        ++rec.iterations;
        if (next.empty()) {
          rec.final_spec = next;
          rec.outcome = run_outcome::exhausted;
          break;
        }
        spec = std::move(next);
      } else {
        if (rec.iterations >= ctx.limits.max_repair_iterations) {
          rec.outcome = run_outcome::exhausted;
          break;
        }
        ++rec.iterations;
        ++attempt;
        auto fixed = refine_modify(p, spec, report, ctx.oracle_, c, ctx.templates, attempt, run_index);
        accounted += fixed.latency;
        spec = std::move(fixed.extracted);
      }
      if (mode == paradigm::deletion)
        ++attempt;
    }
  } catch (const error &e) {
    rec.outcome = run_outcome::errored;
    rec.error_kind = e.kind();
    rec.error_message = e.what();
  } catch (const std::exception &e) {
    rec.outcome = run_outcome::errored;
    rec.error_kind = "internal";
    rec.error_message = e.what();
  }
  rec.elapsed = elapsed();
  log.finish(rec);
  return rec;
}

} // namespace specgen
