#pragma once

// Frama-C/WP adapter. POSIX only.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "specgen/acsl.hpp"
#include "specgen/error.hpp"
#include "specgen/verifier.hpp"

namespace specgen {

struct process_result {
  int exit_code = -1;
  bool timed_out = false;
  std::string output; // stdout and stderr interleaved
  double wall_time = 0.0;
};

// Look a program up on PATH (or accept an explicit path).
inline std::optional<std::filesystem::path> find_executable(const std::string &name) {
  namespace fs = std::filesystem;
  if (name.find('/') != std::string::npos) {
    if (::access(name.c_str(), X_OK) == 0)
      return fs::path(name);
    return std::nullopt;
  }
  const char *path = std::getenv("PATH");
  if (!path)
    return std::nullopt;
  std::string_view rest = path;
  while (!rest.empty()) {
    auto colon = rest.find(':');
    auto dir = rest.substr(0, colon);
    if (!dir.empty()) {
      fs::path candidate = fs::path(dir) / name;
      if (::access(candidate.c_str(), X_OK) == 0)
        return candidate;
    }
    if (colon == std::string_view::npos)
      break;
    rest.remove_prefix(colon + 1);
  }
  return std::nullopt;
}

// Run argv[0] with a wall-clock budget. The child gets its own process group
// so that provers it spawns are killed with it.
inline process_result run_process(const std::vector<std::string> &argv, double budget_seconds,
                                  const std::filesystem::path &cwd = {}) {
  using clock = std::chrono::steady_clock;
  process_result res;
  int fds[2];
  if (::pipe(fds) != 0)
    throw io_error("pipe failed");

  const auto start = clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw io_error("fork failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(fds[1], STDOUT_FILENO);
    ::dup2(fds[1], STDERR_FILENO);
    ::close(fds[0]);
    ::close(fds[1]);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0)
      ::_exit(126);
    std::vector<char *> args;
    for (const auto &a : argv)
      args.push_back(const_cast<char *>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(fds[1]);
  ::fcntl(fds[0], F_SETFL, ::fcntl(fds[0], F_GETFL) | O_NONBLOCK);

  const auto deadline = start + std::chrono::duration<double>(budget_seconds);
  char buf[4096];
  bool open = true;
  while (open) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (left.count() <= 0) {
      res.timed_out = true;
      ::kill(-pid, SIGKILL);
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int n = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 200)));
    if (n > 0) {
      ssize_t got = ::read(fds[0], buf, sizeof buf);
      if (got > 0)
        res.output.append(buf, static_cast<std::size_t>(got));
      else if (got == 0)
        open = false;
    }
  }
  ::close(fds[0]);
  int status = 0;
  ::waitpid(pid, &status, 0);
  res.wall_time = std::chrono::duration<double>(clock::now() - start).count();
  if (!res.timed_out)
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return res;
}

struct framac_options {
  std::string executable = "frama-c";
  int prover_timeout = 10;     // seconds per goal
  double wall_budget = 120.0;  // seconds per invocation
  std::vector<std::string> extra_args;
  bool keep_files = false;
};

// Goal lines as printed by WP. Two shapes occur across releases:
//   [wp] [Alt-Ergo] Goal typed_f_ensures_sg_1 : Unknown (Qed:1ms)
//   [wp] [Timeout] typed_f_ensures_sg_1 (Qed 1ms) (Alt-Ergo)
// plus a summary `[wp] Proved goals:   5 / 6`.
struct wp_output {
  std::vector<goal_result> goals;
  std::optional<std::pair<int, int>> summary;
};

inline wp_output parse_wp_output(const std::string &text) {
  static const std::regex old_style(R"(Goal\s+([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(Valid|Unknown|Timeout|Failed|Stepout))");
  static const std::regex new_style(R"(\[wp\]\s+(?:[^\s\[]+:\d+:\s+)?\[(Valid|Unknown|Unsuccess|Timeout|Stepout|Failed)\]\s+(?:Goal\s+)?([A-Za-z_][A-Za-z0-9_]*))");
  static const std::regex summary(R"(Proved goals:\s*(\d+)\s*/\s*(\d+))");
  static const std::regex located(R"(^\[wp\]\s+[^\s:]+:(\d+):)");

  wp_output out;
  std::istringstream in(text);
  std::string line;
  auto status_of = [](const std::string &s) {
    if (s == "Valid") return goal_status::proved;
    if (s == "Timeout" || s == "Stepout") return goal_status::timeout;
    return goal_status::unknown;
  };
  while (std::getline(in, line)) {
    std::smatch m;
    if (std::regex_search(line, m, summary)) {
      out.summary = std::make_pair(std::stoi(m[1]), std::stoi(m[2]));
      continue;
    }
    goal_result g;
    if (std::regex_search(line, m, old_style)) {
      g.name = m[1];
      g.status = status_of(m[2]);
    } else if (std::regex_search(line, m, new_style)) {
      g.name = m[2];
      g.status = status_of(m[1]);
    } else {
      continue;
    }
    std::smatch loc;
    if (std::regex_search(line, loc, located))
      g.line = static_cast<std::size_t>(std::stoul(loc[1]));
    bool seen = false;
    for (auto &e : out.goals)
      if (e.name == g.name) {
        e = g; // last verdict wins
        seen = true;
      }
    if (!seen)
      out.goals.push_back(std::move(g));
  }
  return out;
}

// Build a report from WP output. Goals the summary counts as proved but that
// were not listed individually are added as anonymous proved goals.
inline verifier_report wp_report(const process_result &proc, const woven_program &woven) {
  verifier_report r;
  r.raw_output = proc.output;
  r.wall_time = proc.wall_time;
  if (proc.timed_out) {
    r.status = verification_status::timeout;
    return r;
  }
  auto parsed = parse_wp_output(proc.output);
  if (proc.exit_code != 0 && !parsed.summary && parsed.goals.empty()) {
    r.status = verification_status::tool_error;
    return r;
  }
  r.woven_spans = woven.spans;
  r.goals = std::move(parsed.goals);
  if (parsed.summary) {
    int listed_proved = 0;
    for (const auto &g : r.goals)
      listed_proved += g.status == goal_status::proved;
    for (int k = listed_proved; k < parsed.summary->first; ++k)
      r.goals.push_back({"proved_" + std::to_string(k), goal_status::proved, {}, {}});
    // summary says fewer proved than total but no failing goal was listed
    const int failing = static_cast<int>(r.failing_goals().size());
    for (int k = parsed.summary->first + failing; k < parsed.summary->second; ++k)
      r.goals.push_back({"unlisted_" + std::to_string(k), goal_status::unknown, {}, {}});
  }
  for (auto &g : r.goals)
    for (std::size_t i = 0; i < woven.labels.size(); ++i)
      if (!woven.labels[i].empty() && detail::name_has_segment(g.name, woven.labels[i]))
        g.source_annotation = i;
  r.status = verification_status::failed;
  settle_status(r);
  return r;
}

class framac_verifier : public verifier {
public:
  explicit framac_verifier(framac_options o = {}) : opts_(std::move(o)) {
    if (!find_executable(opts_.executable))
      throw verifier_not_installed("cannot find '" + opts_.executable + "' on PATH");
  }

  static bool available(const std::string &exe = "frama-c") {
    return find_executable(exe).has_value();
  }

  verifier_report verify(const program &p, const specification_set &s) override {
    namespace fs = std::filesystem;
    woven_program woven;
    try {
      woven = weave_detailed(p.source, s, {.label_clauses = true});
    } catch (const anchor_not_found &e) {
      verifier_report r;
      r.status = verification_status::tool_error;
      r.raw_output = e.what();
      return r;
    }
    // behavior names prefix every goal of their clauses; only clause labels identify
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i].kind == construct_kind::behavior)
        woven.labels[i].clear();
    char tmpl[] = "/tmp/specgen-wp-XXXXXX";
    if (!::mkdtemp(tmpl))
      throw io_error("cannot create temporary directory");
    const fs::path dir = tmpl;
    const fs::path file = dir / (p.id.empty() ? std::string("woven.c") : p.id + ".c");
    {
      std::ofstream out(file);
      out << woven.text;
    }
    std::vector<std::string> argv = {opts_.executable, "-wp", "-wp-timeout",
                                     std::to_string(opts_.prover_timeout)};
    argv.insert(argv.end(), opts_.extra_args.begin(), opts_.extra_args.end());
    argv.push_back(file.string());
    auto proc = run_process(argv, opts_.wall_budget, dir);
    auto report = wp_report(proc, woven);
    if (!opts_.keep_files) {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
    return report;
  }

  std::string describe() const override {
    return "framac(" + opts_.executable + ", timeout=" + std::to_string(opts_.prover_timeout) + ")";
  }

private:
  framac_options opts_;
};

} // namespace specgen
