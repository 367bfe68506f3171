#pragma once

// Prompt templates: one file per configuration and phase,
// `<dir>/<CONFIG>.generate.txt` and `<dir>/<CONFIG>.repair.txt`.

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include "specgen/acsl.hpp"
#include "specgen/config.hpp"
#include "specgen/error.hpp"
#include "specgen/program.hpp"
#include "specgen/verifier.hpp"

#ifndef SPECGEN_DEFAULT_TEMPLATE_DIR
#define SPECGEN_DEFAULT_TEMPLATE_DIR "templates"
#endif

namespace specgen {

enum class oracle_phase { generate, repair };

inline std::string_view to_string(oracle_phase p) {
  return p == oracle_phase::generate ? "generate" : "repair";
}

// Single pass over the template; `{name}` is replaced when `name` is bound,
// anything else (including braces in substituted text) is left alone.
inline std::string render_template(std::string_view tmpl,
                                   const std::map<std::string, std::string> &vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

class template_store {
public:
  explicit template_store(std::filesystem::path dir = SPECGEN_DEFAULT_TEMPLATE_DIR)
      : dir_(std::move(dir)) {}

  // In-memory template, takes precedence over files.
  void set(const std::string &config, oracle_phase phase, std::string text) {
    std::lock_guard lock(mu_);
    cache_[key(config, phase)] = std::move(text);
  }

  std::string get(const std::string &config, oracle_phase phase) const {
    std::lock_guard lock(mu_);
    const auto k = key(config, phase);
    if (auto it = cache_.find(k); it != cache_.end())
      return it->second;
    const auto path = dir_ / k;
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw missing_template("no template " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return cache_[k] = ss.str();
  }

  const std::filesystem::path &directory() const { return dir_; }

private:
  static std::string key(const std::string &config, oracle_phase phase) {
    return config + "." + std::string(to_string(phase)) + ".txt";
  }

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::string> cache_;
};

inline std::string mandatory_instruction(const configuration &c) {
  if (c.mandatory.empty())
    return {};
  return "You must use at least one of the following constructs: " + join_keywords(c.mandatory) + ".";
}

inline std::string build_generation_prompt(const program &p, const configuration &c,
                                           const template_store &store) {
  return render_template(store.get(c.name, oracle_phase::generate),
                         {{"program", p.source},
                          {"permitted_keywords", join_keywords(c.permitted)},
                          {"mandatory_instruction", mandatory_instruction(c)}});
}

// Failing goals first, then the tail of the raw tool output.
inline std::string format_feedback(const verifier_report &r, std::size_t raw_tail = 2000) {
  std::ostringstream out;
  out << "status: " << to_string(r.status) << "\n";
  for (const auto *g : r.failing_goals())
    out << "- goal " << g->name << ": " << to_string(g->status) << "\n";
  if (!r.raw_output.empty()) {
    std::string_view raw = r.raw_output;
    if (raw.size() > raw_tail)
      raw = raw.substr(raw.size() - raw_tail);
    out << "verifier output:\n" << raw;
    if (raw.back() != '\n')
      out << "\n";
  }
  return out.str();
}

// The specification as the oracle should see it: woven into the program when
// possible, else the bare clause list.
inline std::string render_specification(const program &p, const specification_set &s) {
  try {
    return weave(p.source, s);
  } catch (const error &) {
    std::string out;
    for (const auto &a : s)
      out += "/*@ " + a.text + " */  // " + a.where.to_string() + "\n";
    return out;
  }
}

inline std::string build_repair_prompt(const program &p, const specification_set &s,
                                       const verifier_report &r, const configuration &c,
                                       const template_store &store) {
  return render_template(store.get(c.name, oracle_phase::repair),
                         {{"program", p.source},
                          {"specification", render_specification(p, s)},
                          {"verifier_feedback", format_feedback(r)},
                          {"permitted_keywords", join_keywords(c.permitted)},
                          {"mandatory_instruction", mandatory_instruction(c)}});
}

} // namespace specgen
