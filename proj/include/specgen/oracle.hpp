#pragma once

// O_propose / O_repair behind one interface. Implementations return the raw
// completion; propose() and repair() turn it into a specification set.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "specgen/acsl.hpp"
#include "specgen/error.hpp"
#include "specgen/program.hpp"
#include "specgen/prompt.hpp"
#include "specgen/verifier.hpp"

namespace specgen {

struct oracle_request {
  oracle_phase phase = oracle_phase::generate;
  std::string program_id;
  std::string config_name;
  int attempt_index = 0;
  std::string prompt;
  int run_index = 1; // lets fixtures differ between independent runs
};

struct completion {
  std::string text;
  // Set by oracles that simulate time (replay); otherwise measured.
  std::optional<double> latency;
};

class oracle {
public:
  virtual ~oracle() = default;
  // Must be safe to call concurrently.
  virtual completion complete(const oracle_request &req) = 0;
  virtual std::string describe() const = 0;
  // Decoding parameters and the like, recorded in run logs.
  virtual nlohmann::json parameters() const { return nlohmann::json::object(); }
};

struct oracle_response {
  std::string raw_completion;
  specification_set extracted;
  double latency = 0.0;
};

namespace detail {

// Contents of ``` fenced blocks; the info string after the opening fence is dropped.
inline std::vector<std::string> fenced_blocks(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto open = text.find("```", pos);
    if (open == std::string_view::npos)
      break;
    auto body = text.find('\n', open);
    if (body == std::string_view::npos)
      break;
    auto close = text.find("```", body + 1);
    if (close == std::string_view::npos) {
      out.emplace_back(text.substr(body + 1)); // unterminated: take the rest
      break;
    }
    out.emplace_back(text.substr(body + 1, close - body - 1));
    pos = close + 3;
  }
  return out;
}

// Bare `/*@ ... */` regions and `//@` lines found in prose.
inline std::string bare_regions(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto block = text.find("/*@", pos);
    auto line = text.find("//@", pos);
    if (block == std::string_view::npos && line == std::string_view::npos)
      break;
    if (block < line) {
      auto close = text.find("*/", block + 3);
      if (close == std::string_view::npos)
        close = text.size() - 2; // parse reports it unterminated
      out += text.substr(block, close + 2 - block);
      out += '\n';
      pos = close + 2;
    } else {
      auto eol = text.find('\n', line);
      if (eol == std::string_view::npos)
        eol = text.size();
      out += text.substr(line, eol - line);
      out += '\n';
      pos = eol;
    }
  }
  return out;
}

} // namespace detail

// Annotations inside fenced code blocks, or, when there are none, bare ACSL
// comments anywhere in the completion. Text outside those regions is ignored.
inline specification_set extract_spec(std::string_view raw, const parse_options &opts = {}) {
  auto blocks = detail::fenced_blocks(raw);
  specification_set s;
  if (!blocks.empty()) {
    std::string joined;
    for (const auto &b : blocks) {
      joined += b;
      if (!joined.empty() && joined.back() != '\n')
        joined += '\n';
    }
    s = parse_annotations(joined, opts);
  }
  if (s.empty()) {
    auto bare = detail::bare_regions(raw);
    if (!bare.empty())
      s = parse_annotations(bare, opts);
  }
  if (s.empty())
    throw no_annotations_found("completion contains no ACSL annotations");
  return s;
}

namespace detail {

inline oracle_response ask(oracle &o, const oracle_request &req, const program &p) {
  if (req.prompt.empty())
    throw precondition_violation("empty prompt");
  const auto t0 = std::chrono::steady_clock::now();
  completion c = o.complete(req);
  const double measured =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  oracle_response r;
  r.raw_completion = std::move(c.text);
  r.latency = c.latency.value_or(measured);
  if (r.raw_completion.find_first_not_of(" \t\r\n") == std::string::npos)
    throw empty_completion("oracle returned an empty completion for " + p.id);
  parse_options opts;
  opts.file = "<completion>";
  opts.default_function = p.target_function;
  try {
    r.extracted = extract_spec(r.raw_completion, opts);
  } catch (const no_annotations_found &e) {
    throw empty_completion(std::string(e.what()) + " (" + p.id + ")");
  }
  return r;
}

} // namespace detail

inline oracle_response propose(oracle &o, const program &p, const std::string &config_name,
                               const std::string &prompt, int run_index = 1) {
  oracle_request req{oracle_phase::generate, p.id, config_name, 0, prompt, run_index};
  return detail::ask(o, req, p);
}

// `attempt_index` is the repair round, starting at 1 (the proposal is 0).
inline oracle_response repair(oracle &o, const program &p, const verifier_report &feedback,
                              const std::string &config_name, const std::string &prompt,
                              int attempt_index, int run_index = 1) {
  if (feedback.status == verification_status::verified)
    throw precondition_violation("repair requested for a verified specification");
  if (attempt_index < 1)
    throw precondition_violation("repair attempts are numbered from 1");
  oracle_request req{oracle_phase::repair, p.id, config_name, attempt_index, prompt, run_index};
  return detail::ask(o, req, p);
}

// Completions read from `<root>[/run-<k>]/<program>/<config>/<phase>-<attempt>.txt`.
// Everything is loaded up front; lookups are read-only afterwards.
class replay_oracle : public oracle {
public:
  explicit replay_oracle(const std::filesystem::path &root, double latency = 0.0)
      : root_(root), latency_(latency) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root))
      throw fixture_missing("replay fixture directory " + root.string() + " does not exist");
    for (const auto &e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file() || e.path().extension() != ".txt")
        continue;
      std::ifstream in(e.path(), std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      files_[fs::relative(e.path(), root).generic_string()] = ss.str();
    }
  }

  static std::string fixture_key(const oracle_request &req) {
    return req.program_id + "/" + req.config_name + "/" + std::string(to_string(req.phase)) + "-" +
           std::to_string(req.attempt_index) + ".txt";
  }

  completion complete(const oracle_request &req) override {
    const auto key = fixture_key(req);
    const auto per_run = "run-" + std::to_string(req.run_index) + "/" + key;
    if (auto it = files_.find(per_run); it != files_.end())
      return {it->second, latency_};
    if (auto it = files_.find(key); it != files_.end())
      return {it->second, latency_};
    throw fixture_missing("no replay fixture " + key + " under " + root_.string());
  }

  std::string describe() const override { return "replay(" + root_.string() + ")"; }

  nlohmann::json parameters() const override {
    return {{"kind", "replay"}, {"root", root_.string()}, {"fixtures", files_.size()},
            {"latency", latency_}};
  }

  std::size_t fixture_count() const { return files_.size(); }

private:
  std::filesystem::path root_;
  double latency_;
  std::map<std::string, std::string> files_;
};

// Oracle driven by a callback; handy in tests.
class scripted_oracle : public oracle {
public:
  using script = std::function<std::string(const oracle_request &)>;
  explicit scripted_oracle(script fn, std::optional<double> latency = 0.0)
      : fn_(std::move(fn)), latency_(latency) {}

  completion complete(const oracle_request &req) override {
    std::lock_guard lock(mu_);
    ++calls_;
    return {fn_(req), latency_};
  }
  std::string describe() const override { return "scripted"; }
  int calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

private:
  script fn_;
  std::optional<double> latency_;
  mutable std::mutex mu_;
  int calls_ = 0;
};

// Different oracles for proposing and repairing.
class phase_split_oracle : public oracle {
public:
  phase_split_oracle(oracle &proposer, oracle &repairer) : propose_(proposer), repair_(repairer) {}

  completion complete(const oracle_request &req) override {
    return (req.phase == oracle_phase::generate ? propose_ : repair_).complete(req);
  }
  std::string describe() const override {
    return "propose=" + propose_.describe() + ",repair=" + repair_.describe();
  }
  nlohmann::json parameters() const override {
    return {{"propose", propose_.parameters()}, {"repair", repair_.parameters()}};
  }

private:
  oracle &propose_;
  oracle &repair_;
};

} // namespace specgen
