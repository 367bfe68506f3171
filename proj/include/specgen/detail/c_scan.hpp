#pragma once

// Lightweight lexical outline of C source: function declarations, loops in
// function bodies, and the ACSL comments with the syntactic position each one
// occupies. No preprocessing and no expression grammar.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "specgen/error.hpp"

namespace specgen::detail {

class line_index {
public:
  explicit line_index(std::string_view src) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < src.size(); ++i)
      if (src[i] == '\n')
        starts_.push_back(i + 1);
  }

  // 1-based line containing `offset`.
  std::size_t line_of(std::size_t offset) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    return static_cast<std::size_t>(it - starts_.begin());
  }

  std::size_t line_start(std::size_t line) const { return starts_.at(line - 1); }

private:
  std::vector<std::size_t> starts_;
};

enum class token_kind { identifier, number, literal, punct, preproc, acsl };

struct token {
  token_kind kind;
  std::size_t begin;
  std::size_t end;
  std::string_view text;
};

struct loop_site {
  std::size_t keyword_offset;
};

struct function_site {
  std::string name;
  std::size_t decl_start; // offset of the first token of the declaration
  bool is_definition = false;
  std::vector<loop_site> loops;
};

struct acsl_region {
  std::size_t begin; // covers the comment delimiters
  std::size_t end;
  // Same length as [begin, end): delimiters and line-leading '@' blanked so
  // offsets into `body` are offsets from `begin`.
  std::string body;
  bool in_function_body = false;
  // Enclosing function when in a body; the function whose declaration
  // immediately follows when at top level; -1 otherwise.
  int function_index = -1;
  // 1-based ordinal of the loop that immediately follows, 0 if none.
  int loop_ordinal = 0;
};

struct source_outline {
  std::vector<function_site> functions;
  std::vector<acsl_region> annotations;

  // Prefers a definition over a prototype.
  const function_site *find_function(std::string_view name) const {
    const function_site *proto = nullptr;
    for (const auto &f : functions) {
      if (f.name != name)
        continue;
      if (f.is_definition)
        return &f;
      if (!proto)
        proto = &f;
    }
    return proto;
  }
};

inline bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Blank the ACSL delimiters of a comment region and the '@' characters that
// ACSL treats as whitespace at the start of continuation lines.
inline std::string blank_acsl_delimiters(std::string_view region) {
  std::string body(region);
  auto blank = [&](std::size_t pos, std::size_t len) {
    for (std::size_t i = pos; i < pos + len && i < body.size(); ++i)
      if (body[i] != '\n')
        body[i] = ' ';
  };
  if (body.starts_with("/*@")) {
    blank(0, 3);
    blank(body.size() - 2, 2);
    bool line_start = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
      char c = body[i];
      if (c == '\n') {
        line_start = true;
      } else if (line_start && (c == ' ' || c == '\t' || c == '\r')) {
      } else if (line_start && c == '@') {
        while (i < body.size() && body[i] == '@')
          body[i++] = ' ';
        --i;
        line_start = false;
      } else {
        line_start = false;
      }
    }
    // trailing "@*/"
    std::size_t j = body.size();
    while (j > 0 && (body[j - 1] == ' ' || body[j - 1] == '@'))
      body[--j] = ' ';
  } else {
    // one or more consecutive "//@" lines
    for (std::size_t i = 0; i + 2 < body.size(); ++i)
      if (body.compare(i, 3, "//@") == 0 && (i == 0 || body[i - 1] == '\n' ||
                                             std::isspace(static_cast<unsigned char>(body[i - 1])))) {
        std::size_t k = i;
        while (k > 0 && body[k - 1] != '\n' &&
               std::isspace(static_cast<unsigned char>(body[k - 1])))
          --k;
        if (k == 0 || body[k - 1] == '\n')
          blank(i, 3);
      }
  }
  return body;
}

inline std::vector<token> lex(std::string_view src) {
  std::vector<token> out;
  const std::size_t n = src.size();
  std::size_t i = 0;
  bool at_line_start = true;

  auto line_end = [&](std::size_t p) {
    auto e = src.find('\n', p);
    return e == std::string_view::npos ? n : e;
  };

  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      at_line_start = true;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#' && at_line_start) {
      std::size_t b = i;
      while (true) {
        std::size_t e = line_end(i);
        std::size_t last = e;
        while (last > i && (src[last - 1] == '\r' || src[last - 1] == ' '))
          --last;
        if (last > i && src[last - 1] == '\\' && e < n) {
          i = e + 1;
          continue;
        }
        i = e;
        break;
      }
      out.push_back({token_kind::preproc, b, i, src.substr(b, i - b)});
      continue;
    }
    at_line_start = false;
    if (src.compare(i, 3, "//@") == 0) {
      std::size_t b = i;
      std::size_t e = line_end(i);
      // merge consecutive "//@" lines into one region
      while (true) {
        std::size_t j = e;
        while (j < n && std::isspace(static_cast<unsigned char>(src[j])))
          ++j;
        if (j < n && src.compare(j, 3, "//@") == 0 &&
            src.substr(e, j - e).find('\n') != std::string_view::npos &&
            std::count(src.begin() + e, src.begin() + j, '\n') == 1) {
          e = line_end(j);
          continue;
        }
        break;
      }
      out.push_back({token_kind::acsl, b, e, src.substr(b, e - b)});
      i = e;
      continue;
    }
    if (src.compare(i, 2, "//") == 0) {
      i = line_end(i);
      continue;
    }
    if (src.compare(i, 3, "/*@") == 0) {
      auto close = src.find("*/", i + 3);
      if (close == std::string_view::npos)
        throw malformed_annotation("unterminated ACSL comment");
      out.push_back({token_kind::acsl, i, close + 2, src.substr(i, close + 2 - i)});
      i = close + 2;
      continue;
    }
    if (src.compare(i, 2, "/*") == 0) {
      auto close = src.find("*/", i + 2);
      if (close == std::string_view::npos)
        throw malformed_annotation("unterminated comment");
      i = close + 2;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::size_t b = i++;
      while (i < n && src[i] != c && src[i] != '\n') {
        if (src[i] == '\\')
          ++i;
        ++i;
      }
      if (i < n && src[i] == c)
        ++i;
      out.push_back({token_kind::literal, b, i, src.substr(b, i - b)});
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t b = i;
      while (i < n && is_ident_char(src[i]))
        ++i;
      out.push_back({token_kind::identifier, b, i, src.substr(b, i - b)});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t b = i;
      while (i < n && (is_ident_char(src[i]) || src[i] == '.'))
        ++i;
      out.push_back({token_kind::number, b, i, src.substr(b, i - b)});
      continue;
    }
    out.push_back({token_kind::punct, i, i + 1, src.substr(i, 1)});
    ++i;
  }
  return out;
}

inline source_outline outline(std::string_view src) {
  const auto toks = lex(src);
  source_outline result;

  // token index -> function index whose declaration starts there
  std::map<std::size_t, int> decl_at;
  // token index -> (function index, loop ordinal)
  std::map<std::size_t, std::pair<int, int>> loop_at;
  std::vector<std::pair<std::size_t, std::size_t>> acsl_tokens; // (token idx, region idx)

  int depth = 0;
  int paren = 0;
  int current_fn = -1;
  long decl_start = -1;
  std::string candidate;

  struct pending_do {
    int depth;
    bool braced;
    bool done;
  };
  std::vector<pending_do> dos;

  auto reset_decl = [&] {
    decl_start = -1;
    candidate.clear();
    paren = 0;
  };

  auto prev_significant = [&](std::size_t idx) -> const token * {
    while (idx > 0) {
      --idx;
      if (toks[idx].kind != token_kind::acsl)
        return &toks[idx];
    }
    return nullptr;
  };
  auto next_significant = [&](std::size_t idx) -> std::size_t {
    ++idx;
    while (idx < toks.size() && toks[idx].kind == token_kind::acsl)
      ++idx;
    return idx;
  };

  for (std::size_t t = 0; t < toks.size(); ++t) {
    const auto &tok = toks[t];
    if (tok.kind == token_kind::acsl) {
      acsl_region r;
      r.begin = tok.begin;
      r.end = tok.end;
      r.body = blank_acsl_delimiters(tok.text);
      r.in_function_body = depth > 0 && current_fn >= 0;
      if (r.in_function_body)
        r.function_index = current_fn;
      acsl_tokens.emplace_back(t, result.annotations.size());
      result.annotations.push_back(std::move(r));
      continue;
    }

    if (depth == 0) {
      if (tok.kind == token_kind::preproc) {
        reset_decl();
        continue;
      }
      if (decl_start < 0)
        decl_start = static_cast<long>(t);
      if (tok.kind == token_kind::punct) {
        const char c = tok.text[0];
        if (c == '(') {
          const token *prev = prev_significant(t);
          if (paren == 0 && candidate.empty() && prev &&
              prev->kind == token_kind::identifier && prev->text != "__attribute__" &&
              prev->text != "__declspec" && prev->text != "sizeof")
            candidate = std::string(prev->text);
          ++paren;
          continue;
        }
        if (c == ')') {
          --paren;
          continue;
        }
        const token *prev = prev_significant(t);
        const bool after_params = prev && prev->text == ")";
        if (c == '{') {
          if (paren == 0 && !candidate.empty() && after_params) {
            function_site f;
            f.name = candidate;
            f.decl_start = toks[static_cast<std::size_t>(decl_start)].begin;
            f.is_definition = true;
            decl_at[static_cast<std::size_t>(decl_start)] =
                static_cast<int>(result.functions.size());
            result.functions.push_back(std::move(f));
            current_fn = static_cast<int>(result.functions.size()) - 1;
          } else {
            current_fn = -1;
          }
          depth = 1;
          dos.clear();
          continue;
        }
        if (c == ';' && paren == 0) {
          if (!candidate.empty() && after_params) {
            function_site f;
            f.name = candidate;
            f.decl_start = toks[static_cast<std::size_t>(decl_start)].begin;
            decl_at[static_cast<std::size_t>(decl_start)] =
                static_cast<int>(result.functions.size());
            result.functions.push_back(std::move(f));
          }
          reset_decl();
          continue;
        }
      }
      continue;
    }

    // depth > 0
    if (tok.kind == token_kind::punct) {
      const char c = tok.text[0];
      if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (!dos.empty() && dos.back().braced && !dos.back().done &&
            dos.back().depth == depth)
          dos.back().done = true;
        if (depth == 0) {
          const bool was_function = current_fn >= 0;
          current_fn = -1;
          dos.clear();
          if (was_function)
            reset_decl();
        }
      } else if (c == '(') {
        ++paren;
      } else if (c == ')') {
        --paren;
      } else if (c == ';' && paren == 0) {
        if (!dos.empty() && !dos.back().braced && !dos.back().done &&
            dos.back().depth == depth)
          dos.back().done = true;
      }
      continue;
    }
    if (tok.kind != token_kind::identifier || current_fn < 0)
      continue;
    auto &fn = result.functions[static_cast<std::size_t>(current_fn)];
    if (tok.text == "do") {
      std::size_t nx = next_significant(t);
      bool braced = nx < toks.size() && toks[nx].text == "{";
      dos.push_back({depth, braced, false});
    } else if (tok.text == "while") {
      if (!dos.empty() && dos.back().depth == depth && dos.back().done) {
        dos.pop_back();
        continue;
      }
    } else if (tok.text != "for") {
      continue;
    }
    fn.loops.push_back({tok.begin});
    loop_at[t] = {current_fn, static_cast<int>(fn.loops.size())};
  }

  for (auto [tidx, ridx] : acsl_tokens) {
    auto &r = result.annotations[ridx];
    std::size_t nx = next_significant(tidx);
    if (r.in_function_body) {
      if (auto it = loop_at.find(nx); it != loop_at.end() && it->second.first == r.function_index)
        r.loop_ordinal = it->second.second;
    } else if (auto it = decl_at.find(nx); it != decl_at.end()) {
      r.function_index = it->second;
    }
  }
  return result;
}

} // namespace specgen::detail
