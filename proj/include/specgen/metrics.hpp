#pragma once

// Aggregation of run records into per-cell metrics, Venn regions, optimal
// configuration shares and Table-1 style reports.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specgen/error.hpp"
#include "specgen/refinement.hpp"

namespace specgen {

// Records of one (configuration, paradigm) cell.
using cell_records = std::vector<const run_record *>;

struct grid_shape {
  std::vector<std::string> programs; // sorted
  int runs = 0;
};

// Every program must have exactly one record for each run 1..N.
inline grid_shape check_grid(const cell_records &recs, int expected_runs = 0,
                             const std::vector<std::string> &expected_programs = {}) {
  if (recs.empty())
    throw incomplete_grid("no records in cell");
  const auto &first = *recs.front();
  std::map<std::string, std::set<int>> seen;
  int max_run = 0;
  for (const auto *r : recs) {
    if (r->config_name != first.config_name || r->mode != first.mode)
      throw incomplete_grid("records from different cells mixed");
    if (r->run_index < 1)
      throw incomplete_grid("run index must start at 1");
    if (!seen[r->program_id].insert(r->run_index).second)
      throw incomplete_grid("duplicate record for " + r->program_id + " run " +
                            std::to_string(r->run_index));
    max_run = std::max(max_run, r->run_index);
  }
  const int runs = expected_runs > 0 ? expected_runs : max_run;
  for (const auto &p : expected_programs)
    if (!seen.count(p))
      throw incomplete_grid("no records for program " + p);
  grid_shape g;
  g.runs = runs;
  for (const auto &[p, rs] : seen) {
    if (static_cast<int>(rs.size()) != runs || *rs.rbegin() > runs)
      throw incomplete_grid("program " + p + " has " + std::to_string(rs.size()) + " of " +
                            std::to_string(runs) + " runs");
    g.programs.push_back(p);
  }
  return g;
}

// Compliant samples over all samples (program x run).
inline double csccr(const cell_records &recs) {
  check_grid(recs);
  const auto ok = std::count_if(recs.begin(), recs.end(), [](auto *r) { return r->compliant; });
  return static_cast<double>(ok) / static_cast<double>(recs.size());
}

// Programs whose specifications complied in every run, over all programs.
inline double csccr_per_program(const cell_records &recs) {
  auto g = check_grid(recs);
  std::map<std::string, bool> all;
  for (const auto *r : recs) {
    auto [it, fresh] = all.emplace(r->program_id, true);
    it->second = it->second && r->compliant;
  }
  const auto ok = std::count_if(all.begin(), all.end(), [](auto &kv) { return kv.second; });
  return static_cast<double>(ok) / static_cast<double>(g.programs.size());
}

inline std::map<std::string, int> verified_runs(const cell_records &recs) {
  std::map<std::string, int> n;
  for (const auto *r : recs)
    n[r->program_id] += r->outcome == run_outcome::verified;
  return n;
}

inline std::set<std::string> verified_program_set(const cell_records &recs, int at_least = 1) {
  check_grid(recs);
  std::set<std::string> out;
  for (const auto &[p, n] : verified_runs(recs))
    if (n >= at_least)
      out.insert(p);
  return out;
}

// Programs verified in at least one run.
inline int nvp(const cell_records &recs) {
  return static_cast<int>(verified_program_set(recs, 1).size());
}

// Programs verified in at least two runs.
inline int nsvp(const cell_records &recs) {
  return static_cast<int>(verified_program_set(recs, 2).size());
}

namespace detail {
template <class F>
double mean_run_total(const cell_records &recs, F field) {
  auto g = check_grid(recs);
  std::vector<double> totals(static_cast<std::size_t>(g.runs), 0.0);
  for (const auto *r : recs)
    totals[static_cast<std::size_t>(r->run_index - 1)] += field(*r);
  double sum = 0;
  for (double t : totals)
    sum += t;
  return sum / g.runs;
}
} // namespace detail

// Mean over runs of the corpus-wide total of verifier calls.
inline double nvtc(const cell_records &recs) {
  return detail::mean_run_total(recs, [](const run_record &r) { return double(r.tool_calls); });
}

// Mean over runs of the corpus-wide total elapsed seconds.
inline double rt(const cell_records &recs) {
  return detail::mean_run_total(recs, [](const run_record &r) { return r.elapsed; });
}

inline double reduction_rate(double nvp_value, double nsvp_value) {
  if (nvp_value <= 0)
    return 0.0;
  return (nvp_value - nsvp_value) / nvp_value;
}

inline double improvement_ratio(double modify_value, double delete_value) {
  if (delete_value == 0)
    throw undefined_ratio("improvement ratio undefined for a zero deletion-paradigm value");
  return (modify_value - delete_value) / delete_value;
}

struct sample_distribution {
  int compliant_verified = 0;
  int compliant_failed = 0;
  int noncompliant_verified = 0;
  int noncompliant_failed = 0;
};

inline sample_distribution distribution(const cell_records &recs) {
  check_grid(recs);
  sample_distribution d;
  for (const auto *r : recs) {
    const bool v = r->outcome == run_outcome::verified;
    (r->compliant ? (v ? d.compliant_verified : d.compliant_failed)
                  : (v ? d.noncompliant_verified : d.noncompliant_failed))++;
  }
  return d;
}

struct cell_metrics {
  std::string config_name;
  paradigm mode = paradigm::deletion;
  int programs = 0;
  int runs = 0;
  double csccr = 0;
  double csccr_per_program = 0;
  int nvp = 0;
  int nsvp = 0;
  double nvtc = 0;
  double rt = 0;
  double reduction_rate = 0;
  int errored = 0;
  std::set<std::string> verified_programs;
  sample_distribution samples;
};

inline cell_metrics compute_cell(const cell_records &recs) {
  auto g = check_grid(recs);
  cell_metrics m;
  m.config_name = recs.front()->config_name;
  m.mode = recs.front()->mode;
  m.programs = static_cast<int>(g.programs.size());
  m.runs = g.runs;
  m.csccr = csccr(recs);
  m.csccr_per_program = csccr_per_program(recs);
  m.verified_programs = verified_program_set(recs);
  m.nvp = nvp(recs);
  m.nsvp = nsvp(recs);
  m.nvtc = nvtc(recs);
  m.rt = rt(recs);
  m.reduction_rate = reduction_rate(m.nvp, m.nsvp);
  m.errored = static_cast<int>(
      std::count_if(recs.begin(), recs.end(), [](auto *r) { return r->outcome == run_outcome::errored; }));
  m.samples = distribution(recs);
  return m;
}

using cell_key = std::pair<std::string, paradigm>;

inline std::map<cell_key, cell_records> group_cells(const std::vector<run_record> &records) {
  std::map<cell_key, cell_records> cells;
  for (const auto &r : records)
    cells[{r.config_name, r.mode}].push_back(&r);
  return cells;
}

// ---- Venn regions over three configurations ----

struct venn_result {
  std::array<std::string, 3> configs;
  std::array<std::set<std::string>, 3> sets;
  // regions[mask]: programs in exactly the sets whose bit is set (bit i = configs[i]),
  // mask 1..7; regions[0] unused.
  std::array<int, 8> regions{};

  int union_size() const {
    int n = 0;
    for (int m = 1; m < 8; ++m)
      n += regions[static_cast<std::size_t>(m)];
    return n;
  }
};

inline venn_result venn_sets(const std::vector<run_record> &records, paradigm mode,
                             const std::array<std::string, 3> &configs = {"CB", "CV", "CA"}) {
  auto cells = group_cells(records);
  venn_result v;
  v.configs = configs;
  std::set<std::string> all;
  for (std::size_t i = 0; i < 3; ++i) {
    auto it = cells.find({configs[i], mode});
    if (it == cells.end())
      throw incomplete_grid("no records for " + configs[i] + "/" + std::string(to_string(mode)));
    v.sets[i] = verified_program_set(it->second);
    all.insert(v.sets[i].begin(), v.sets[i].end());
  }
  for (const auto &p : all) {
    int mask = 0;
    for (int i = 0; i < 3; ++i)
      if (v.sets[static_cast<std::size_t>(i)].count(p))
        mask |= 1 << i;
    ++v.regions[static_cast<std::size_t>(mask)];
  }
  return v;
}

// ---- optimal configuration per program ----

enum class cost_metric { nvtc, rt };

inline std::string_view to_string(cost_metric m) { return m == cost_metric::nvtc ? "nvtc" : "rt"; }

// Share of programs for which each configuration has the lowest per-program
// mean cost; ties split the program evenly among the tied configurations.
inline std::map<std::string, double>
optimal_config_proportions(const std::vector<run_record> &records, paradigm mode, cost_metric metric,
                           const std::vector<std::string> &configs = {"CB", "CV", "CA"}) {
  auto cells = group_cells(records);
  std::vector<std::map<std::string, double>> means;
  std::set<std::string> programs;
  for (const auto &c : configs) {
    auto it = cells.find({c, mode});
    if (it == cells.end())
      throw incomplete_grid("no records for " + c + "/" + std::string(to_string(mode)));
    auto g = check_grid(it->second);
    // sum first, divide once: equal totals must stay exactly equal
    std::map<std::string, double> m;
    for (const auto *r : it->second)
      m[r->program_id] += metric == cost_metric::nvtc ? r->tool_calls : r->elapsed;
    for (auto &[id, total] : m)
      total /= g.runs;
    if (!programs.empty() && programs != std::set<std::string>(g.programs.begin(), g.programs.end()))
      throw incomplete_grid("configurations cover different programs");
    programs.insert(g.programs.begin(), g.programs.end());
    means.push_back(std::move(m));
  }
  std::map<std::string, double> share;
  for (const auto &c : configs)
    share[c] = 0.0;
  for (const auto &p : programs) {
    double best = means[0].at(p);
    for (const auto &m : means)
      best = std::min(best, m.at(p));
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < configs.size(); ++i)
      if (means[i].at(p) == best)
        tied.push_back(i);
    for (auto i : tied)
      share[configs[i]] += 1.0 / static_cast<double>(tied.size()) / static_cast<double>(programs.size());
  }
  return share;
}

// ---- formatting ----

inline double round_to(double v, int places) {
  const double f = std::pow(10.0, places);
  return std::round(v * f) / f;
}

inline std::string fixed(double v, int places) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(places) << v;
  return s.str();
}

// Drop trailing zeros: 31.80 -> 31.8, 30.00 -> 30.
inline std::string compact(double v, int places = 2) {
  auto s = fixed(v, places);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0')
      s.pop_back();
    if (s.back() == '.')
      s.pop_back();
  }
  return s;
}

inline nlohmann::json to_json(const cell_metrics &m) {
  return {
      {"config", m.config_name},
      {"paradigm", to_string(m.mode)},
      {"programs", m.programs},
      {"runs", m.runs},
      {"csccr", round_to(m.csccr, 4)},
      {"csccr_per_program", round_to(m.csccr_per_program, 4)},
      {"nvp", m.nvp},
      {"nsvp", m.nsvp},
      {"nvtc", round_to(m.nvtc, 4)},
      {"rt", round_to(m.rt, 4)},
      {"reduction_rate", round_to(m.reduction_rate, 4)},
      {"errored", m.errored},
      {"verified_programs", m.verified_programs},
      {"samples",
       {{"compliant_verified", m.samples.compliant_verified},
        {"compliant_failed", m.samples.compliant_failed},
        {"noncompliant_verified", m.samples.noncompliant_verified},
        {"noncompliant_failed", m.samples.noncompliant_failed}}},
  };
}

inline nlohmann::json to_json(const venn_result &v) {
  nlohmann::json regions = nlohmann::json::object();
  for (int m = 1; m < 8; ++m) {
    std::string key;
    for (int i = 0; i < 3; ++i)
      if (m & (1 << i))
        key += (key.empty() ? "" : "&") + v.configs[static_cast<std::size_t>(i)];
    regions[key] = v.regions[static_cast<std::size_t>(m)];
  }
  nlohmann::json sets = nlohmann::json::object();
  for (std::size_t i = 0; i < 3; ++i)
    sets[v.configs[i]] = v.sets[i];
  return {{"configs", v.configs}, {"regions", regions}, {"sets", sets}, {"union", v.union_size()}};
}

// ---- results table layout ----

// The four numbers reported per configuration.
struct table_cell {
  double nvp = 0, nsvp = 0, nvtc = 0, rt = 0;
};

struct persona_results {
  std::string persona;
  // (config, paradigm) -> values
  std::map<cell_key, table_cell> cells;
};

inline table_cell as_table_cell(const cell_metrics &m) { return {double(m.nvp), double(m.nsvp), m.nvtc, m.rt}; }

struct table_report {
  std::vector<std::string> configs;
  // per paradigm: arithmetic mean over the averaged personas
  std::map<cell_key, table_cell> average;
  // (config, deletion) key; undefined entries absent
  std::map<std::string, std::array<std::optional<double>, 4>> improvement;
};

// Average rows are the arithmetic mean over personas not listed in
// `exclude_from_average`; improvement ratios compare the two paradigms'
// averages.
inline table_report summarize_table(const std::vector<persona_results> &personas,
                                    const std::vector<std::string> &configs,
                                    const std::set<std::string> &exclude_from_average = {}) {
  table_report t;
  t.configs = configs;
  for (auto mode : {paradigm::deletion, paradigm::modification})
    for (const auto &c : configs) {
      table_cell sum;
      int n = 0;
      for (const auto &p : personas) {
        if (exclude_from_average.count(p.persona))
          continue;
        auto it = p.cells.find({c, mode});
        if (it == p.cells.end())
          continue;
        sum.nvp += it->second.nvp;
        sum.nsvp += it->second.nsvp;
        sum.nvtc += it->second.nvtc;
        sum.rt += it->second.rt;
        ++n;
      }
      if (n == 0)
        continue;
      t.average[{c, mode}] = {sum.nvp / n, sum.nsvp / n, sum.nvtc / n, sum.rt / n};
    }
  for (const auto &c : configs) {
    auto d = t.average.find({c, paradigm::deletion});
    auto m = t.average.find({c, paradigm::modification});
    if (d == t.average.end() || m == t.average.end())
      continue;
    const double dv[] = {d->second.nvp, d->second.nsvp, d->second.nvtc, d->second.rt};
    const double mv[] = {m->second.nvp, m->second.nsvp, m->second.nvtc, m->second.rt};
    std::array<std::optional<double>, 4> row;
    for (std::size_t i = 0; i < 4; ++i) {
      try {
        row[i] = improvement_ratio(mv[i], dv[i]);
      } catch (const undefined_ratio &) {
      }
    }
    t.improvement[c] = row;
  }
  return t;
}

inline std::string render_table(const std::vector<persona_results> &personas,
                                const table_report &t) {
  std::ostringstream out;
  const int w = 9;
  auto pad = [](const std::string &s, int width) {
    return s.size() >= static_cast<std::size_t>(width) ? s + " " : s + std::string(width - s.size(), ' ');
  };
  std::size_t name_w = 20;
  for (const auto &p : personas)
    name_w = std::max(name_w, p.persona.size() + 2);

  out << pad("", int(name_w));
  for (const auto &c : t.configs)
    out << "| " << pad(c, 4 * w);
  out << "\n" << pad("", int(name_w));
  for (std::size_t i = 0; i < t.configs.size(); ++i)
    out << "| " << pad("NVP", w) << pad("NSVP", w) << pad("NVTC", w) << pad("RT", w);
  out << "\n";

  auto row = [&](const std::string &name, auto value_of) {
    out << pad(name, int(name_w));
    for (const auto &c : t.configs) {
      out << "| ";
      for (int k = 0; k < 4; ++k)
        out << pad(value_of(c, k), w);
    }
    out << "\n";
  };
  auto value = [](const table_cell &tc, int k) {
    switch (k) {
    case 0: return tc.nvp;
    case 1: return tc.nsvp;
    case 2: return tc.nvtc;
    default: return tc.rt;
    }
  };
  for (auto mode : {paradigm::deletion, paradigm::modification}) {
    out << (mode == paradigm::deletion ? "Deletion paradigm\n" : "Modification paradigm\n");
    for (const auto &p : personas)
      row(p.persona, [&](const std::string &c, int k) {
        auto it = p.cells.find({c, mode});
        return it == p.cells.end() ? std::string("-") : compact(value(it->second, k));
      });
    row("Average", [&](const std::string &c, int k) {
      auto it = t.average.find({c, mode});
      return it == t.average.end() ? std::string("-") : compact(value(it->second, k));
    });
  }
  row("Improvement Ratio", [&](const std::string &c, int k) {
    auto it = t.improvement.find(c);
    if (it == t.improvement.end() || !it->second[static_cast<std::size_t>(k)])
      return std::string("n/a");
    return fixed(*it->second[static_cast<std::size_t>(k)] * 100, 2) + "%";
  });
  return out.str();
}

} // namespace specgen
