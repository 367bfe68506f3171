#pragma once

// ACSL annotations: parsing them out of C source, classifying each clause by
// construct, and weaving a specification set back into bare source.
//
// Clause bodies are opaque text. Only clause heads are interpreted; the
// verifier owns the semantics of everything after the keyword.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "specgen/construct.hpp"
#include "specgen/detail/c_scan.hpp"
#include "specgen/error.hpp"

namespace specgen {

struct source_span {
  std::string file;
  std::size_t start_line = 1;
  std::size_t end_line = 1;
};

// Where an annotation lives in the program.
struct anchor {
  enum class scope { global, function_contract, loop };

  scope where = scope::global;
  std::string function;
  // Named behavior a contract clause is nested in; empty for the default one.
  std::string behavior;
  int loop_ordinal = 0;

  static anchor global() { return {}; }
  static anchor contract(std::string fn, std::string behavior_name = {}) {
    return {scope::function_contract, std::move(fn), std::move(behavior_name), 0};
  }
  static anchor loop(std::string fn, int ordinal) {
    return {scope::loop, std::move(fn), {}, ordinal};
  }

  auto operator<=>(const anchor &) const = default;

  std::string to_string() const {
    switch (where) {
    case scope::global: return "global";
    case scope::function_contract:
      return "contract(" + function + (behavior.empty() ? "" : "/" + behavior) + ")";
    case scope::loop: return "loop(" + function + "," + std::to_string(loop_ordinal) + ")";
    }
    return "?";
  }
};

struct annotation {
  construct_kind kind;
  std::string text;
  source_span span;
  anchor where;

  // Identity of an annotation ignores its span.
  bool same_clause(const annotation &o) const {
    return kind == o.kind && text == o.text && where == o.where;
  }
};

namespace detail {

inline std::string normalize_ws(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space)
      out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

inline std::string_view skip_ws(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
    ++i;
  return s.substr(i);
}

inline std::string_view read_ident(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && is_ident_char(s[i]))
    ++i;
  return s.substr(0, i);
}

// First two identifier words of a clause.
inline std::vector<std::string_view> clause_head(std::string_view text) {
  std::vector<std::string_view> head;
  std::string_view rest = skip_ws(text);
  for (int k = 0; k < 2; ++k) {
    auto w = read_ident(rest);
    if (w.empty())
      break;
    head.push_back(w);
    rest = skip_ws(rest.substr(w.size()));
  }
  return head;
}

inline bool is_word_at(std::string_view s, std::size_t pos, std::string_view w) {
  if (s.compare(pos, w.size(), w) != 0)
    return false;
  if (pos > 0 && is_ident_char(s[pos - 1]))
    return false;
  const std::size_t e = pos + w.size();
  return e >= s.size() || !is_ident_char(s[e]);
}

inline bool mentions_identifier(std::string_view text, std::string_view name) {
  if (name.empty())
    return false;
  for (auto pos = text.find(name); pos != std::string_view::npos;
       pos = text.find(name, pos + 1))
    if (is_word_at(text, pos, name))
      return true;
  return false;
}

} // namespace detail

// Name declared or labelled by an annotation: lemma/axiom/predicate/logic
// names, behavior names, and `clause name: ...` labels.
inline std::optional<std::string> declared_name(const annotation &a) {
  using detail::read_ident;
  using detail::skip_ws;
  std::string_view t = a.text;
  auto after_keyword = [&]() {
    std::string_view k = keyword(a.kind);
    std::string_view rest = skip_ws(t);
    for (auto word = read_ident(rest); !word.empty() && !k.empty();
         word = read_ident(rest)) {
      k = skip_ws(k.substr(std::min(k.size(), word.size())));
      rest = skip_ws(rest.substr(word.size()));
      if (k.empty())
        break;
    }
    return rest;
  };
  switch (a.kind) {
  case construct_kind::lemma:
  case construct_kind::axiom:
  case construct_kind::behavior: {
    auto rest = after_keyword();
    auto name = read_ident(rest);
    if (name.empty() || name == "behaviors" || a.text.starts_with("complete") ||
        a.text.starts_with("disjoint"))
      return std::nullopt;
    return std::string(name);
  }
  case construct_kind::predicate:
  case construct_kind::logic: {
    auto stop = t.find_first_of("({=;<");
    std::string_view prefix = t.substr(0, stop);
    std::string last;
    std::size_t i = 0;
    while (i < prefix.size()) {
      if (detail::is_ident_start(prefix[i])) {
        std::size_t b = i;
        while (i < prefix.size() && detail::is_ident_char(prefix[i]))
          ++i;
        last = std::string(prefix.substr(b, i - b));
      } else {
        ++i;
      }
    }
    if (last.empty() || last == "predicate" || last == "logic")
      return std::nullopt;
    return last;
  }
  default: {
    auto rest = after_keyword();
    auto name = read_ident(rest);
    if (name.empty())
      return std::nullopt;
    auto after = skip_ws(rest.substr(name.size()));
    if (!after.empty() && after[0] == ':' && (after.size() < 2 || after[1] != ':'))
      return std::string(name);
    return std::nullopt;
  }
  }
}

// The candidate specification set. Ordered; duplicates (same kind, text and
// anchor) are collapsed on insertion.
class specification_set {
public:
  specification_set() = default;
  explicit specification_set(std::vector<annotation> items) {
    for (auto &a : items)
      insert(std::move(a));
  }

  // Returns false when an identical annotation is already present.
  bool insert(annotation a) {
    check_anchor_kind(a);
    for (const auto &e : items_)
      if (e.same_clause(a))
        return false;
    items_.push_back(std::move(a));
    return true;
  }

  const std::vector<annotation> &annotations() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const annotation &operator[](std::size_t i) const { return items_.at(i); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  bool contains(const annotation &a) const {
    return std::any_of(items_.begin(), items_.end(),
                       [&](const annotation &e) { return e.same_clause(a); });
  }

  // Set equality modulo spans and order.
  bool same_as(const specification_set &o) const {
    if (size() != o.size())
      return false;
    return std::all_of(items_.begin(), items_.end(),
                       [&](const annotation &a) { return o.contains(a); });
  }

  specification_set without(const specification_set &removed) const {
    specification_set out;
    for (const auto &a : items_)
      if (!removed.contains(a))
        out.items_.push_back(a);
    return out;
  }

  // One line per annotation, sorted by (kind, anchor, text).
  std::string canonical_form() const {
    std::vector<const annotation *> sorted;
    for (const auto &a : items_)
      sorted.push_back(&a);
    std::sort(sorted.begin(), sorted.end(), [](const annotation *x, const annotation *y) {
      return std::tie(x->kind, x->where, x->text) < std::tie(y->kind, y->where, y->text);
    });
    std::string out;
    for (const auto *a : sorted) {
      out += tag(a->kind);
      out += '|';
      out += a->where.to_string();
      out += '|';
      out += a->text;
      out += '\n';
    }
    return out;
  }

private:
  static void check_anchor_kind(const annotation &a) {
    if (a.text.empty())
      throw malformed_annotation("empty annotation text");
    if (a.span.start_line > a.span.end_line)
      throw malformed_annotation("span start after end");
    const bool global = a.where.where == anchor::scope::global;
    const bool loop = a.where.where == anchor::scope::loop;
    if (is_logical(a.kind) != global)
      throw malformed_annotation("'" + a.text + "' cannot be anchored at " + a.where.to_string());
    if (is_loop_kind(a.kind) != loop)
      throw malformed_annotation("'" + a.text + "' cannot be anchored at " + a.where.to_string());
  }

  std::vector<annotation> items_;
};

inline construct_set constr(const specification_set &s) {
  construct_set out;
  for (const auto &a : s)
    out.insert(a.kind);
  return out;
}

struct parse_options {
  std::string file = "<input>";
  // Contract comments with no following function are attached here when set
  // (oracle completions often carry bare contracts).
  std::optional<std::string> default_function;
};

namespace detail {

struct raw_item {
  std::string text;
  std::size_t begin; // offsets relative to the region body
  std::size_t end;
  construct_kind kind;
  bool from_axiomatic = false;
  bool behavior_header = false;
  std::string behavior; // behavior name for headers
};

// Offset of the `;` that terminates the clause starting at `pos`, or npos.
// Quantifier and let binders own one `;` each at their nesting depth.
inline std::size_t find_terminator(std::string_view s, std::size_t pos) {
  std::vector<int> binders(1, 0);
  std::size_t depth = 0;
  for (std::size_t i = pos; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"' || c == '\'') {
      for (++i; i < s.size() && s[i] != c; ++i)
        if (s[i] == '\\')
          ++i;
      continue;
    }
    if (c == '\\') {
      auto w = read_ident(s.substr(i + 1));
      if (w == "forall" || w == "exists" || w == "lambda" || w == "let")
        ++binders[depth];
      i += w.size();
      continue;
    }
    if (c == '(' || c == '[' || c == '{') {
      ++depth;
      if (binders.size() <= depth)
        binders.resize(depth + 1, 0);
      binders[depth] = 0;
    } else if (c == ')' || c == ']' || c == '}') {
      if (depth == 0)
        return std::string_view::npos;
      binders[depth] = 0;
      --depth;
    } else if (c == ';') {
      if (binders[depth] > 0) {
        --binders[depth];
        continue;
      }
      if (depth == 0)
        return i;
    }
  }
  return std::string_view::npos;
}

inline std::size_t matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '{')
      ++depth;
    else if (s[i] == '}' && --depth == 0)
      return i;
  }
  return std::string_view::npos;
}

inline void split_items(std::string_view body, std::size_t base, bool in_axiomatic,
                        std::vector<raw_item> &out) {
  std::size_t pos = 0;
  const std::size_t n = body.size();
  std::optional<std::size_t> open_behavior;
  while (true) {
    while (pos < n && std::isspace(static_cast<unsigned char>(body[pos])))
      ++pos;
    if (pos >= n)
      return;
    const std::size_t start = pos;
    auto first = read_ident(body.substr(pos));
    if (first.empty())
      throw malformed_annotation(std::string("unexpected '") + body[pos] +
                                 "' in ACSL annotation");

    if (first == "axiomatic") {
      if (in_axiomatic)
        throw malformed_annotation("nested axiomatic block");
      auto rest = skip_ws(body.substr(pos + first.size()));
      auto name = read_ident(rest);
      std::size_t brace = body.find('{', pos);
      if (name.empty() || brace == std::string_view::npos)
        throw malformed_annotation("axiomatic block without name or body");
      std::size_t close = matching_brace(body, brace);
      if (close == std::string_view::npos)
        throw malformed_annotation("unterminated axiomatic block");
      split_items(body.substr(brace + 1, close - brace - 1), base + brace + 1, true, out);
      pos = close + 1;
      open_behavior.reset();
      continue;
    }

    if (first == "behavior") {
      auto rest = skip_ws(body.substr(pos + first.size()));
      auto name = read_ident(rest);
      std::size_t colon = body.find(':', pos);
      if (name.empty() || colon == std::string_view::npos)
        throw malformed_annotation("behavior header without name");
      raw_item item;
      item.text = normalize_ws(body.substr(start, colon + 1 - start));
      item.begin = base + start;
      item.end = base + colon + 1;
      item.kind = construct_kind::behavior;
      item.behavior_header = true;
      item.behavior = std::string(name);
      item.from_axiomatic = in_axiomatic;
      out.push_back(std::move(item));
      open_behavior = out.size() - 1;
      pos = colon + 1;
      continue;
    }

    std::size_t term = find_terminator(body, pos);
    if (term == std::string_view::npos)
      throw malformed_annotation("clause '" + normalize_ws(body.substr(start, 40)) +
                                 "' has no terminating semicolon");
    std::string text = normalize_ws(body.substr(start, term + 1 - start));
    pos = term + 1;

    if (first == "assumes") {
      if (!open_behavior)
        throw malformed_annotation("'assumes' outside of a behavior");
      out[*open_behavior].text += ' ' + text;
      out[*open_behavior].end = base + term + 1;
      continue;
    }
    auto head = clause_head(text);
    raw_item item;
    item.kind = classify_construct(std::span<const std::string_view>(head));
    item.text = std::move(text);
    item.begin = base + start;
    item.end = base + term + 1;
    item.from_axiomatic = in_axiomatic;
    if (item.kind == construct_kind::behavior)
      open_behavior.reset();
    out.push_back(std::move(item));
  }
}

} // namespace detail

// Every ACSL annotation in `annotated_source`, classified and anchored.
inline specification_set parse_annotations(std::string_view annotated_source,
                                           const parse_options &opts = {}) {
  const auto outline = detail::outline(annotated_source);
  const detail::line_index lines(annotated_source);
  specification_set result;

  for (const auto &region : outline.annotations) {
    std::vector<detail::raw_item> items;
    detail::split_items(region.body, 0, false, items);
    if (items.empty())
      continue;

    bool any_global = false, any_contract = false, any_loop = false;
    for (const auto &it : items) {
      if (is_logical(it.kind) || it.from_axiomatic)
        any_global = true;
      else if (is_loop_kind(it.kind))
        any_loop = true;
      else
        any_contract = true;
    }

    auto span_of = [&](const detail::raw_item &it) {
      return source_span{opts.file, lines.line_of(region.begin + it.begin),
                         lines.line_of(region.begin + (it.end > it.begin ? it.end - 1 : it.end))};
    };

    if (region.in_function_body) {
      if (any_global || any_contract)
        throw malformed_annotation("only loop clauses may appear inside a function body");
      if (region.loop_ordinal == 0)
        throw malformed_annotation("loop annotation is not followed by a loop");
      const auto &fn = outline.functions[static_cast<std::size_t>(region.function_index)].name;
      for (const auto &it : items)
        result.insert({it.kind, it.text, span_of(it), anchor::loop(fn, region.loop_ordinal)});
      continue;
    }

    if (any_loop)
      throw malformed_annotation("loop clause outside of a function body");
    if (any_global && any_contract)
      throw malformed_annotation("global logic declarations mixed with a function contract");
    if (any_global) {
      for (const auto &it : items) {
        if (!is_logical(it.kind))
          throw malformed_annotation("'" + it.text + "' is not a logic declaration");
        result.insert({it.kind, it.text, span_of(it), anchor::global()});
      }
      continue;
    }

    std::string fn;
    if (region.function_index >= 0)
      fn = outline.functions[static_cast<std::size_t>(region.function_index)].name;
    else if (opts.default_function)
      fn = *opts.default_function;
    else
      throw malformed_annotation("function contract is not followed by a function");

    std::string behavior;
    for (const auto &it : items) {
      if (it.behavior_header) {
        behavior = it.behavior;
        result.insert({it.kind, it.text, span_of(it), anchor::contract(fn)});
      } else if (it.kind == construct_kind::behavior) {
        // complete / disjoint behaviors close the named behaviors
        behavior.clear();
        result.insert({it.kind, it.text, span_of(it), anchor::contract(fn)});
      } else {
        result.insert({it.kind, it.text, span_of(it), anchor::contract(fn, behavior)});
      }
    }
  }
  return result;
}

// The program with every ACSL comment removed. Lines that held nothing but
// annotations disappear entirely.
inline std::string strip_annotations(std::string_view source) {
  const auto toks = detail::lex(source);
  std::string out;
  std::size_t cursor = 0;
  for (const auto &t : toks) {
    if (t.kind != detail::token_kind::acsl)
      continue;
    std::size_t b = t.begin, e = t.end;
    std::size_t ls = b;
    while (ls > 0 && (source[ls - 1] == ' ' || source[ls - 1] == '\t'))
      --ls;
    std::size_t le = e;
    while (le < source.size() && (source[le] == ' ' || source[le] == '\t' || source[le] == '\r'))
      ++le;
    const bool own_line = (ls == 0 || source[ls - 1] == '\n') &&
                          (le == source.size() || source[le] == '\n');
    if (own_line && ls >= cursor) {
      b = ls;
      e = le < source.size() ? le + 1 : le;
    }
    if (b < cursor)
      b = cursor;
    out.append(source.substr(cursor, b - cursor));
    cursor = e;
  }
  out.append(source.substr(cursor));
  return out;
}

struct weave_options {
  // Give every predicate clause a unique label (`ensures sg_3: ...`) so that
  // verifier goal names identify their annotation. Existing labels are kept.
  bool label_clauses = false;
};

struct woven_program {
  std::string text;
  std::vector<source_span> spans; // per annotation, in specification order
  std::vector<std::string> labels; // clause label or declared name; may be empty
};

namespace detail {

inline bool needs_axiomatic(const annotation &a) {
  if (a.kind == construct_kind::axiom)
    return true;
  if (a.kind == construct_kind::predicate || a.kind == construct_kind::logic) {
    // declaration without definition
    return a.text.find('=') == std::string::npos;
  }
  return false;
}

inline bool labelable(construct_kind k) {
  return k == construct_kind::requires_clause || k == construct_kind::ensures_clause ||
         k == construct_kind::loop_invariant;
}

inline std::string labelled_text(const annotation &a, const std::string &label) {
  const auto kw = keyword(a.kind);
  std::string_view t = a.text;
  // normalized text begins with the keyword words separated by one space
  if (!t.starts_with(kw))
    return a.text;
  return std::string(kw) + " " + label + ":" + std::string(t.substr(kw.size()));
}

struct block_line {
  std::string text;
  int annotation = -1; // index into the specification set
};

} // namespace detail

// Checks every anchor of `spec` against `bare_source`.
inline void check_anchors(std::string_view bare_source, const specification_set &spec) {
  const auto outline = detail::outline(bare_source);
  for (const auto &a : spec) {
    if (a.where.where == anchor::scope::global)
      continue;
    const auto *fn = outline.find_function(a.where.function);
    if (!fn)
      throw anchor_not_found("no function '" + a.where.function + "'");
    if (a.where.where == anchor::scope::loop &&
        (a.where.loop_ordinal < 1 ||
         static_cast<std::size_t>(a.where.loop_ordinal) > fn->loops.size()))
      throw anchor_not_found("function '" + a.where.function + "' has no loop #" +
                             std::to_string(a.where.loop_ordinal));
    if (a.where.where == anchor::scope::loop && !fn->is_definition)
      throw anchor_not_found("function '" + a.where.function + "' has no body");
    if (!a.where.behavior.empty()) {
      bool found = false;
      for (const auto &b : spec)
        if (b.kind == construct_kind::behavior && b.where.function == a.where.function &&
            b.where.behavior.empty() && declared_name(b) == a.where.behavior)
          found = true;
      if (!found)
        throw anchor_not_found("no behavior '" + a.where.behavior + "' in contract of '" +
                               a.where.function + "'");
    }
  }
}

// Insert `spec` into `bare_source`. Global declarations go before the first
// function; contracts before their function; loop clauses before their loop.
inline woven_program weave_detailed(std::string_view bare_source, const specification_set &spec,
                                    const weave_options &opts = {}) {
  check_anchors(bare_source, spec);
  const auto outline = detail::outline(bare_source);
  const auto &items = spec.annotations();

  woven_program result;
  result.spans.resize(items.size());
  result.labels.resize(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (auto name = declared_name(items[i]))
      result.labels[i] = *name;
    else if (opts.label_clauses && detail::labelable(items[i].kind))
      result.labels[i] = "sg_" + std::to_string(i);
  }
  auto render = [&](std::size_t i) {
    const auto &a = items[i];
    if (opts.label_clauses && detail::labelable(a.kind) && !declared_name(a))
      return detail::labelled_text(a, result.labels[i]);
    return a.text;
  };

  struct insertion {
    std::size_t offset;
    int order;
    std::vector<detail::block_line> lines;
    std::string indent;
    bool at_line_start;
  };
  std::vector<insertion> inserts;

  auto placement = [&](std::size_t offset, insertion &ins) {
    std::size_t ls = offset;
    while (ls > 0 && (bare_source[ls - 1] == ' ' || bare_source[ls - 1] == '\t'))
      --ls;
    ins.at_line_start = ls == 0 || bare_source[ls - 1] == '\n';
    if (ins.at_line_start) {
      ins.indent = std::string(bare_source.substr(ls, offset - ls));
      ins.offset = ls;
    } else {
      ins.offset = offset;
    }
  };

  // globals
  std::vector<std::size_t> globals;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i].where.where == anchor::scope::global)
      globals.push_back(i);
  if (!globals.empty()) {
    insertion ins;
    ins.order = 0;
    if (outline.functions.empty()) {
      ins.offset = bare_source.size();
      ins.at_line_start = bare_source.empty() || bare_source.back() == '\n';
    } else {
      placement(outline.functions.front().decl_start, ins);
    }
    const bool axiomatic = std::any_of(globals.begin(), globals.end(), [&](std::size_t i) {
      return detail::needs_axiomatic(items[i]);
    });
    ins.lines.push_back({axiomatic ? "/*@ axiomatic Specification_theory {" : "/*@"});
    for (auto i : globals)
      ins.lines.push_back({"  " + render(i), static_cast<int>(i)});
    if (axiomatic)
      ins.lines.push_back({"}"});
    ins.lines.push_back({"*/"});
    inserts.push_back(std::move(ins));
  }

  // contracts, grouped by function in first-appearance order
  std::vector<std::string> fn_order;
  for (const auto &a : items)
    if (a.where.where == anchor::scope::function_contract &&
        std::find(fn_order.begin(), fn_order.end(), a.where.function) == fn_order.end())
      fn_order.push_back(a.where.function);
  for (const auto &fn_name : fn_order) {
    const auto *fn = outline.find_function(fn_name);
    insertion ins;
    ins.order = 1;
    placement(fn->decl_start, ins);
    ins.lines.push_back({"/*@"});
    auto emit = [&](auto pred, const char *indent) {
      for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].where.where == anchor::scope::function_contract &&
            items[i].where.function == fn_name && pred(items[i]))
          ins.lines.push_back({indent + render(i), static_cast<int>(i)});
    };
    auto in_default = [](const annotation &a) {
      return a.where.behavior.empty() && a.kind != construct_kind::behavior;
    };
    emit([&](const annotation &a) { return in_default(a) && a.kind == construct_kind::requires_clause; }, "  ");
    emit([&](const annotation &a) { return in_default(a) && a.kind != construct_kind::requires_clause; }, "  ");
    for (std::size_t h = 0; h < items.size(); ++h) {
      const auto &hdr = items[h];
      if (hdr.kind != construct_kind::behavior || hdr.where.function != fn_name ||
          hdr.where.where != anchor::scope::function_contract)
        continue;
      auto name = declared_name(hdr);
      if (!name)
        continue;
      ins.lines.push_back({"  " + render(h), static_cast<int>(h)});
      auto in_b = [&](const annotation &a) { return a.where.behavior == *name; };
      emit([&](const annotation &a) { return in_b(a) && a.kind == construct_kind::requires_clause; }, "    ");
      emit([&](const annotation &a) { return in_b(a) && a.kind != construct_kind::requires_clause; }, "    ");
    }
    emit([](const annotation &a) { return a.kind == construct_kind::behavior && !declared_name(a); }, "  ");
    ins.lines.push_back({"*/"});
    inserts.push_back(std::move(ins));
  }

  // loops
  std::vector<std::pair<std::string, int>> loop_order;
  for (const auto &a : items)
    if (a.where.where == anchor::scope::loop) {
      std::pair<std::string, int> key{a.where.function, a.where.loop_ordinal};
      if (std::find(loop_order.begin(), loop_order.end(), key) == loop_order.end())
        loop_order.push_back(key);
    }
  for (const auto &[fn_name, ordinal] : loop_order) {
    const auto *fn = outline.find_function(fn_name);
    insertion ins;
    ins.order = 2;
    placement(fn->loops[static_cast<std::size_t>(ordinal - 1)].keyword_offset, ins);
    ins.lines.push_back({"/*@"});
    auto emit = [&](bool variants) {
      for (std::size_t i = 0; i < items.size(); ++i) {
        const auto &a = items[i];
        if (a.where.where == anchor::scope::loop && a.where.function == fn_name &&
            a.where.loop_ordinal == ordinal &&
            (a.kind == construct_kind::loop_variant) == variants)
          ins.lines.push_back({"  " + render(i), static_cast<int>(i)});
      }
    };
    emit(false);
    emit(true); // variants last
    ins.lines.push_back({"*/"});
    inserts.push_back(std::move(ins));
  }

  std::stable_sort(inserts.begin(), inserts.end(), [](const insertion &a, const insertion &b) {
    return std::tie(a.offset, a.order) < std::tie(b.offset, b.order);
  });

  std::string out;
  std::size_t cursor = 0;
  std::size_t line = 1;
  auto append = [&](std::string_view s) {
    line += static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
    out.append(s);
  };
  for (const auto &ins : inserts) {
    append(bare_source.substr(cursor, ins.offset - cursor));
    cursor = ins.offset;
    if (!ins.at_line_start && !out.empty() && out.back() != '\n')
      append("\n");
    for (const auto &bl : ins.lines) {
      if (bl.annotation >= 0)
        result.spans[static_cast<std::size_t>(bl.annotation)] = {"<woven>", line, line};
      append(ins.indent);
      append(bl.text);
      append("\n");
    }
    if (!ins.at_line_start)
      append(ins.indent);
  }
  append(bare_source.substr(cursor));
  result.text = std::move(out);
  return result;
}

inline std::string weave(std::string_view bare_source, const specification_set &spec) {
  return weave_detailed(bare_source, spec).text;
}

} // namespace specgen
