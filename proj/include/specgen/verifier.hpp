#pragma once

// V(P, S): weave a specification into a program, run a deductive verifier,
// and relate its proof goals back to annotations.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specgen/acsl.hpp"
#include "specgen/detail/hash.hpp"
#include "specgen/error.hpp"
#include "specgen/program.hpp"

namespace specgen {

enum class verification_status { verified, failed, tool_error, timeout };
enum class goal_status { proved, unknown, timeout };

inline std::string_view to_string(verification_status s) {
  switch (s) {
  case verification_status::verified: return "verified";
  case verification_status::failed: return "failed";
  case verification_status::tool_error: return "tool_error";
  case verification_status::timeout: return "timeout";
  }
  return "?";
}

inline std::string_view to_string(goal_status s) {
  switch (s) {
  case goal_status::proved: return "proved";
  case goal_status::unknown: return "unknown";
  case goal_status::timeout: return "timeout";
  }
  return "?";
}

inline verification_status verification_status_from(std::string_view s) {
  if (s == "verified") return verification_status::verified;
  if (s == "failed") return verification_status::failed;
  if (s == "tool_error") return verification_status::tool_error;
  if (s == "timeout") return verification_status::timeout;
  throw error("bad_status", "unknown verification status '" + std::string(s) + "'");
}

inline goal_status goal_status_from(std::string_view s) {
  if (s == "proved") return goal_status::proved;
  if (s == "unknown") return goal_status::unknown;
  if (s == "timeout") return goal_status::timeout;
  throw error("bad_status", "unknown goal status '" + std::string(s) + "'");
}

struct goal_result {
  std::string name;
  goal_status status = goal_status::unknown;
  // Index into the verified specification set, when the adapter knows it.
  std::optional<std::size_t> source_annotation;
  // Line in the woven file, when the verifier reports one.
  std::optional<std::size_t> line;
};

struct verifier_report {
  verification_status status = verification_status::tool_error;
  std::vector<goal_result> goals;
  std::string raw_output;
  double wall_time = 0.0;
  // Per-annotation spans in the file the verifier saw, if it wove one.
  std::vector<source_span> woven_spans;

  std::vector<const goal_result *> failing_goals() const {
    std::vector<const goal_result *> out;
    for (const auto &g : goals)
      if (g.status != goal_status::proved)
        out.push_back(&g);
    return out;
  }
};

inline constexpr std::string_view vacuous_goal_name = "vacuous_specification";

// Derive verified/failed from the goal list. A run that produced no goal at
// all proves nothing and is reported as failed on a synthetic goal.
inline void settle_status(verifier_report &r) {
  if (r.status == verification_status::tool_error || r.status == verification_status::timeout)
    return;
  if (r.goals.empty())
    r.goals.push_back({std::string(vacuous_goal_name), goal_status::unknown, {}, {}});
  const bool all_proved = std::all_of(r.goals.begin(), r.goals.end(), [](const goal_result &g) {
    return g.status == goal_status::proved;
  });
  r.status = all_proved ? verification_status::verified : verification_status::failed;
}

// Axioms, logic definitions and behavior headers carry no proof obligation.
inline bool generates_goal(const annotation &a) {
  switch (a.kind) {
  case construct_kind::axiom:
  case construct_kind::predicate:
  case construct_kind::logic:
    return false;
  case construct_kind::behavior:
    return !declared_name(a).has_value();
  default:
    return true;
  }
}

class verifier {
public:
  virtual ~verifier() = default;
  virtual verifier_report verify(const program &p, const specification_set &s) = 0;
  virtual std::string describe() const = 0;
};

// Key used by fixture tables: order-independent hash of a specification set.
inline std::string spec_hash(const specification_set &s) {
  return detail::hex64(detail::fnv1a64(s.canonical_form()));
}

class unmappable_failure : public error {
public:
  unmappable_failure(const std::string &what, specification_set mapped)
      : error("unmappable_failure", what), mapped_(std::move(mapped)) {}
  // Annotations that could be attributed before the failure.
  const specification_set &mapped() const { return mapped_; }

private:
  specification_set mapped_;
};

namespace detail {

inline bool name_has_segment(std::string_view goal, std::string_view name) {
  if (name.empty())
    return false;
  const std::string padded = "_" + std::string(goal) + "_";
  return padded.find("_" + std::string(name) + "_") != std::string::npos;
}

inline std::optional<construct_kind> goal_category(std::string_view goal) {
  using ck = construct_kind;
  const std::pair<std::string_view, ck> table[] = {
      {"loop_invariant", ck::loop_invariant}, {"loop_assigns", ck::loop_assigns},
      {"loop_variant", ck::loop_variant},     {"lemma", ck::lemma},
      {"ensures", ck::ensures_clause},        {"post", ck::ensures_clause},
      {"requires", ck::requires_clause},      {"pre", ck::requires_clause},
      {"assigns", ck::assigns_clause},        {"complete", ck::behavior},
      {"disjoint", ck::behavior},
  };
  for (const auto &[needle, kind] : table)
    if (name_has_segment(goal, needle) ||
        (needle.find('_') != std::string_view::npos &&
         goal.find(needle) != std::string_view::npos))
      return kind;
  return std::nullopt;
}

} // namespace detail

// S_error: the annotations responsible for the failing goals of `report`.
// Attribution order: adapter-provided source, names embedded in the goal
// name, woven source lines, then the goal category. Throws
// unmappable_failure (carrying the partial result) if a failing goal cannot
// be attributed.
inline specification_set map_failures_to_annotations(const verifier_report &report,
                                                     const specification_set &spec,
                                                     std::span<const source_span> woven_spans = {}) {
  if (report.status == verification_status::verified ||
      report.status == verification_status::tool_error)
    throw precondition_violation("failure mapping needs a failed verification report");

  if (woven_spans.empty())
    woven_spans = report.woven_spans;
  const auto &items = spec.annotations();
  std::vector<bool> hit(items.size(), false);
  std::vector<std::string> unmapped;

  std::vector<std::optional<std::string>> names(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    names[i] = declared_name(items[i]);

  for (const auto *g : report.failing_goals()) {
    std::optional<std::size_t> found;
    if (g->source_annotation && *g->source_annotation < items.size())
      found = g->source_annotation;

    if (!found) {
      // lemma names and clause labels; the longest match wins so that
      // `digit_sum_step` beats `digit_sum`
      std::size_t best = 0;
      for (std::size_t i = 0; i < items.size(); ++i)
        if (names[i] && generates_goal(items[i]) && items[i].kind != construct_kind::behavior &&
            names[i]->size() > best && detail::name_has_segment(g->name, *names[i])) {
          found = i;
          best = names[i]->size();
        }
    }
    if (!found && g->line) {
      for (std::size_t i = 0; i < items.size() && !found; ++i) {
        const auto &sp = i < woven_spans.size() ? woven_spans[i] : items[i].span;
        if (sp.start_line <= *g->line && *g->line <= sp.end_line)
          found = i;
      }
    }
    if (!found) {
      auto category = detail::goal_category(g->name);
      std::string behavior;
      for (std::size_t i = 0; i < items.size(); ++i)
        if (names[i] && items[i].kind == construct_kind::behavior &&
            detail::name_has_segment(g->name, *names[i]))
          behavior = *names[i];
      if (category) {
        for (std::size_t i = items.size(); i-- > 0 && !found;) {
          const auto &a = items[i];
          if (a.kind != *category)
            continue;
          if (a.where.where != anchor::scope::global &&
              !g->name.starts_with("typed_" + a.where.function + "_") &&
              g->name.find("_" + a.where.function + "_") == std::string::npos)
            continue;
          if (!behavior.empty() && a.where.behavior != behavior)
            continue;
          found = i;
        }
      }
    }
    if (found)
      hit[*found] = true;
    else
      unmapped.push_back(g->name);
  }

  specification_set mapped;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (hit[i])
      mapped.insert(items[i]);
  if (!unmapped.empty()) {
    std::string msg = "no annotation for failing goal(s):";
    for (const auto &n : unmapped)
      msg += " " + n;
    throw unmappable_failure(msg, std::move(mapped));
  }
  return mapped;
}

// Fixture-backed verifier. Reports come from a verdict table keyed by
// (program id, spec_hash) or, failing that, are synthesized from rules that
// mark annotation texts as failing, timing out, or ill-formed.
class mock_verifier : public verifier {
public:
  struct rule {
    std::optional<std::string> program;
    std::vector<std::string> failing;
    std::vector<std::string> timeout;
    std::vector<std::string> error;
  };

  struct verdict {
    std::string program;
    std::string hash;
    verifier_report report;
    // annotation text per goal, resolved against the verified set
    std::vector<std::string> goal_annotations;
  };

  struct table {
    std::vector<rule> rules;
    std::vector<verdict> verdicts;
    bool exact_mapping = true;
    double seconds_per_call = 0.0;
  };

  mock_verifier() = default;
  explicit mock_verifier(table t) : table_(std::move(t)) {}

  static mock_verifier from_json(const nlohmann::json &j) {
    table t;
    t.exact_mapping = j.value("exact_mapping", true);
    t.seconds_per_call = j.value("seconds_per_call", 0.0);
    for (const auto &r : j.value("rules", nlohmann::json::array())) {
      rule ru;
      if (r.contains("program"))
        ru.program = r.at("program").get<std::string>();
      ru.failing = r.value("failing", std::vector<std::string>{});
      ru.timeout = r.value("timeout", std::vector<std::string>{});
      ru.error = r.value("error", std::vector<std::string>{});
      t.rules.push_back(std::move(ru));
    }
    for (const auto &v : j.value("verdicts", nlohmann::json::array())) {
      verdict vd;
      vd.program = v.at("program").get<std::string>();
      vd.hash = v.at("spec_hash").get<std::string>();
      vd.report.status = verification_status_from(v.at("status").get<std::string>());
      vd.report.wall_time = v.value("wall_time", 0.0);
      vd.report.raw_output = v.value("raw_output", std::string{});
      for (const auto &g : v.value("goals", nlohmann::json::array())) {
        goal_result gr;
        gr.name = g.at("name").get<std::string>();
        gr.status = goal_status_from(g.at("status").get<std::string>());
        if (g.contains("line"))
          gr.line = g.at("line").get<std::size_t>();
        vd.report.goals.push_back(std::move(gr));
        vd.goal_annotations.push_back(g.value("annotation", std::string{}));
      }
      t.verdicts.push_back(std::move(vd));
    }
    return mock_verifier(std::move(t));
  }

  static mock_verifier from_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
      throw io_error("cannot read mock verifier table " + path.string());
    return from_json(nlohmann::json::parse(in));
  }

  verifier_report verify(const program &p, const specification_set &s) override {
    try {
      check_anchors(p.source, s);
    } catch (const anchor_not_found &e) {
      verifier_report r;
      r.status = verification_status::tool_error;
      r.raw_output = e.what();
      r.wall_time = table_.seconds_per_call;
      return r;
    }
    const auto hash = spec_hash(s);
    for (const auto &v : table_.verdicts) {
      if (v.program != p.id || v.hash != hash)
        continue;
      verifier_report r = v.report;
      for (std::size_t g = 0; g < r.goals.size(); ++g) {
        const auto &text = v.goal_annotations[g];
        if (text.empty())
          continue;
        for (std::size_t i = 0; i < s.size(); ++i)
          if (s[i].text == text)
            r.goals[g].source_annotation = i;
      }
      return r;
    }
    return from_rules(p, s);
  }

  std::string describe() const override { return "mock"; }

  const table &fixtures() const { return table_; }

private:
  static bool listed(const std::vector<std::string> &texts, const std::string &t) {
    return std::find(texts.begin(), texts.end(), t) != texts.end();
  }

  verifier_report from_rules(const program &p, const specification_set &s) const {
    verifier_report r;
    r.wall_time = table_.seconds_per_call;
    std::vector<const rule *> active;
    for (const auto &ru : table_.rules)
      if (!ru.program || *ru.program == p.id)
        active.push_back(&ru);
    auto marked = [&](auto member, const annotation &a) {
      return std::any_of(active.begin(), active.end(),
                         [&](const rule *ru) { return listed(ru->*member, a.text); });
    };

    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto &a = s[i];
      if (marked(&rule::error, a)) {
        r.status = verification_status::tool_error;
        r.goals.clear();
        r.raw_output = "[kernel] user error: ill-formed annotation: " + a.text;
        return r;
      }
      if (!generates_goal(a))
        continue;
      goal_result g;
      if (a.kind == construct_kind::lemma)
        g.name = "typed_lemma_" + declared_name(a).value_or("l" + std::to_string(i));
      else
        g.name = "typed_" + (a.where.function.empty() ? std::string("global") : a.where.function) +
                 "_" + std::string(tag(a.kind)) + "_" + std::to_string(i);
      g.status = marked(&rule::timeout, a)   ? goal_status::timeout
                 : marked(&rule::failing, a) ? goal_status::unknown
                                             : goal_status::proved;
      if (table_.exact_mapping)
        g.source_annotation = i;
      r.goals.push_back(std::move(g));
    }
    r.status = verification_status::failed;
    settle_status(r);
    std::ostringstream out;
    for (const auto &g : r.goals)
      out << "[wp] [" << to_string(g.status) << "] " << g.name << "\n";
    r.raw_output = out.str();
    return r;
  }

  table table_;
};

} // namespace specgen
