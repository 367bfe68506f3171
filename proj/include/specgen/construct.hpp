#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specgen/error.hpp"

namespace specgen {

// The eleven ACSL syntactic constructs under study. The first seven are the
// basic constructs, the last four the logical ones.
enum class construct_kind : std::uint8_t {
  requires_clause,
  ensures_clause,
  assigns_clause,
  loop_invariant,
  loop_variant,
  loop_assigns,
  behavior,
  predicate,
  logic,
  lemma,
  axiom,
};

inline constexpr std::size_t construct_kind_count = 11;

inline constexpr std::array<construct_kind, construct_kind_count>
    all_construct_kinds = {
        construct_kind::requires_clause, construct_kind::ensures_clause,
        construct_kind::assigns_clause,  construct_kind::loop_invariant,
        construct_kind::loop_variant,    construct_kind::loop_assigns,
        construct_kind::behavior,        construct_kind::predicate,
        construct_kind::logic,           construct_kind::lemma,
        construct_kind::axiom,
};

// ACSL surface keyword for each kind.
constexpr std::string_view keyword(construct_kind k) {
  switch (k) {
  case construct_kind::requires_clause: return "requires";
  case construct_kind::ensures_clause: return "ensures";
  case construct_kind::assigns_clause: return "assigns";
  case construct_kind::loop_invariant: return "loop invariant";
  case construct_kind::loop_variant: return "loop variant";
  case construct_kind::loop_assigns: return "loop assigns";
  case construct_kind::behavior: return "behavior";
  case construct_kind::predicate: return "predicate";
  case construct_kind::logic: return "logic";
  case construct_kind::lemma: return "lemma";
  case construct_kind::axiom: return "axiom";
  }
  return "?";
}

// Identifier-friendly tag ("loop_invariant"), used in files and goal names.
constexpr std::string_view tag(construct_kind k) {
  switch (k) {
  case construct_kind::requires_clause: return "requires";
  case construct_kind::ensures_clause: return "ensures";
  case construct_kind::assigns_clause: return "assigns";
  case construct_kind::loop_invariant: return "loop_invariant";
  case construct_kind::loop_variant: return "loop_variant";
  case construct_kind::loop_assigns: return "loop_assigns";
  case construct_kind::behavior: return "behavior";
  case construct_kind::predicate: return "predicate";
  case construct_kind::logic: return "logic";
  case construct_kind::lemma: return "lemma";
  case construct_kind::axiom: return "axiom";
  }
  return "?";
}

inline std::optional<construct_kind> kind_from_tag(std::string_view t) {
  for (auto k : all_construct_kinds)
    if (tag(k) == t || keyword(k) == t)
      return k;
  return std::nullopt;
}

constexpr bool is_logical(construct_kind k) {
  return k == construct_kind::predicate || k == construct_kind::logic ||
         k == construct_kind::lemma || k == construct_kind::axiom;
}

constexpr bool is_basic(construct_kind k) { return !is_logical(k); }

constexpr bool is_loop_kind(construct_kind k) {
  return k == construct_kind::loop_invariant ||
         k == construct_kind::loop_variant || k == construct_kind::loop_assigns;
}

// Value set over construct_kind. Iteration yields kinds in enum order.
class construct_set {
public:
  constexpr construct_set() = default;
  construct_set(std::initializer_list<construct_kind> kinds) {
    for (auto k : kinds)
      insert(k);
  }

  static construct_set from_mask(std::uint32_t mask) {
    construct_set s;
    s.bits_ = std::bitset<construct_kind_count>(mask);
    return s;
  }

  static construct_set all() { return from_mask((1u << construct_kind_count) - 1); }

  std::uint32_t mask() const { return static_cast<std::uint32_t>(bits_.to_ulong()); }

  void insert(construct_kind k) { bits_.set(index(k)); }
  void erase(construct_kind k) { bits_.reset(index(k)); }
  bool contains(construct_kind k) const { return bits_.test(index(k)); }
  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }

  bool is_subset_of(const construct_set &other) const {
    return (bits_ & ~other.bits_).none();
  }
  bool intersects(const construct_set &other) const {
    return (bits_ & other.bits_).any();
  }

  construct_set operator|(const construct_set &o) const { return from_bits(bits_ | o.bits_); }
  construct_set operator&(const construct_set &o) const { return from_bits(bits_ & o.bits_); }
  // Set difference.
  construct_set operator-(const construct_set &o) const { return from_bits(bits_ & ~o.bits_); }
  bool operator==(const construct_set &) const = default;

  std::vector<construct_kind> kinds() const {
    std::vector<construct_kind> out;
    for (auto k : all_construct_kinds)
      if (contains(k))
        out.push_back(k);
    return out;
  }

private:
  static constexpr std::size_t index(construct_kind k) { return static_cast<std::size_t>(k); }
  static construct_set from_bits(std::bitset<construct_kind_count> b) {
    construct_set s;
    s.bits_ = b;
    return s;
  }

  std::bitset<construct_kind_count> bits_;
};

inline construct_set basic_constructs() {
  return {construct_kind::requires_clause, construct_kind::ensures_clause,
          construct_kind::assigns_clause,  construct_kind::loop_invariant,
          construct_kind::loop_variant,    construct_kind::loop_assigns,
          construct_kind::behavior};
}

inline construct_set logical_constructs() {
  return {construct_kind::predicate, construct_kind::logic,
          construct_kind::lemma, construct_kind::axiom};
}

// "requires, ensures, ..." in enum order.
inline std::string join_keywords(const construct_set &s, std::string_view sep = ", ") {
  std::string out;
  for (auto k : s.kinds()) {
    if (!out.empty())
      out += sep;
    out += keyword(k);
  }
  return out;
}

// Map the keyword tokens at the head of a clause to a construct kind.
// `complete behaviors` and `disjoint behaviors` belong to the behavior
// construct; `axiomatic` is a container, not a construct, and is rejected
// here (the parser opens the block and classifies its members).
inline construct_kind classify_construct(std::span<const std::string_view> head) {
  auto fail = [&]() -> construct_kind {
    std::string joined;
    for (auto t : head) {
      if (!joined.empty())
        joined += ' ';
      joined += t;
    }
    throw classification_error("unsupported ACSL construct '" + joined + "'");
  };
  if (head.empty())
    throw classification_error("empty clause head");

  const auto first = head[0];
  if (first == "requires") return construct_kind::requires_clause;
  if (first == "ensures") return construct_kind::ensures_clause;
  if (first == "assigns") return construct_kind::assigns_clause;
  if (first == "behavior") return construct_kind::behavior;
  if (first == "predicate") return construct_kind::predicate;
  if (first == "logic") return construct_kind::logic;
  if (first == "lemma") return construct_kind::lemma;
  if (first == "axiom") return construct_kind::axiom;
  if (first == "loop" && head.size() >= 2) {
    if (head[1] == "invariant") return construct_kind::loop_invariant;
    if (head[1] == "variant") return construct_kind::loop_variant;
    if (head[1] == "assigns") return construct_kind::loop_assigns;
  }
  if ((first == "complete" || first == "disjoint") && head.size() >= 2 &&
      head[1] == "behaviors")
    return construct_kind::behavior;
  return fail();
}

inline construct_kind classify_construct(std::initializer_list<std::string_view> head) {
  return classify_construct(std::span<const std::string_view>(head.begin(), head.size()));
}

} // namespace specgen
