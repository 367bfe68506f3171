#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "specgen/acsl.hpp"
#include "test_util.hpp"

using namespace specgen;
using specgen::testing::data_dir;
using specgen::testing::read_text;

namespace {

std::size_t count_kind(const specification_set &s, construct_kind k) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [&](const annotation &a) { return a.kind == k; }));
}

const char *one_loop = R"(int f(int n) {
  int i = 0;
  /*@ loop invariant 0 <= i; loop assigns i; */
  while (i < n) {
    i++;
  }
  return i;
}
)";

} // namespace

TEST(parse_annotations, loop_clauses_before_while) {
  auto s = parse_annotations(one_loop);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].kind, construct_kind::loop_invariant);
  EXPECT_EQ(s[0].text, "loop invariant 0 <= i;");
  EXPECT_EQ(s[0].where, anchor::loop("f", 1));
  EXPECT_EQ(s[1].kind, construct_kind::loop_assigns);
  EXPECT_EQ(s[1].where, anchor::loop("f", 1));
  EXPECT_EQ(s[0].span.start_line, 3u);
}

TEST(parse_annotations, no_acsl_gives_empty_set) {
  auto s = parse_annotations("/* plain */ int f(void) { // note\n return 0; }\n");
  EXPECT_TRUE(s.empty());
}

TEST(parse_annotations, digit_sum_verifiable_constructs) {
  auto s = parse_annotations(read_text(data_dir() / "annotated/digit_sum_verifiable.c"));
  EXPECT_GE(count_kind(s, construct_kind::logic), 1u);
  EXPECT_EQ(count_kind(s, construct_kind::lemma), 2u);
  auto kinds = constr(s);
  for (auto k : {construct_kind::requires_clause, construct_kind::ensures_clause,
                 construct_kind::assigns_clause, construct_kind::loop_invariant,
                 construct_kind::loop_assigns, construct_kind::loop_variant})
    EXPECT_TRUE(kinds.contains(k)) << tag(k);
  EXPECT_FALSE(kinds.contains(construct_kind::axiom));
}

TEST(parse_annotations, digit_sum_axiom_constructs) {
  auto s = parse_annotations(read_text(data_dir() / "annotated/digit_sum_axiom.c"));
  EXPECT_GE(count_kind(s, construct_kind::logic), 1u);
  EXPECT_EQ(count_kind(s, construct_kind::axiom), 2u);
  auto kinds = constr(s);
  EXPECT_TRUE(kinds.contains(construct_kind::axiom));
  EXPECT_TRUE(kinds.contains(construct_kind::logic));
  EXPECT_FALSE(kinds.contains(construct_kind::lemma));
}

TEST(parse_annotations, axiomatic_members_are_separate_globals) {
  auto s = parse_annotations(read_text(data_dir() / "annotated/digit_sum_axiom.c"));
  std::size_t globals = 0;
  for (const auto &a : s)
    if (a.where == anchor::global())
      ++globals;
  EXPECT_EQ(globals, 3u);
  EXPECT_EQ(s[0].text, "logic integer digit_sum(integer n);");
  EXPECT_EQ(declared_name(s[1]), "digit_sum_base");
}

TEST(parse_annotations, behavior_nesting) {
  auto s = parse_annotations(read_text(data_dir() / "annotated/abs_value.c"));
  std::vector<std::string> texts;
  for (const auto &a : s)
    texts.push_back(a.text + " @ " + a.where.to_string());
  std::vector<std::string> expected = {
      "requires x > INT_MIN; @ contract(abs_value)",
      "assigns \\nothing; @ contract(abs_value)",
      "behavior pos: assumes x >= 0; @ contract(abs_value)",
      "ensures \\result == x; @ contract(abs_value/pos)",
      "behavior neg: assumes x < 0; @ contract(abs_value)",
      "ensures \\result == -x; @ contract(abs_value/neg)",
      "complete behaviors; @ contract(abs_value)",
      "disjoint behaviors; @ contract(abs_value)",
  };
  EXPECT_EQ(texts, expected);
  EXPECT_EQ(count_kind(s, construct_kind::behavior), 4u);
}

TEST(parse_annotations, quantifier_semicolons_stay_in_clause) {
  auto s = parse_annotations(
      "/*@ requires \\forall integer i; 0 <= i < n ==> (\\exists integer j; a[j] == i);\n"
      "    ensures \\let y = n; \\result == y; */\nint f(int *a, int n);\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].kind, construct_kind::requires_clause);
  EXPECT_EQ(s[1].text, "ensures \\let y = n; \\result == y;");
}

TEST(parse_annotations, line_comment_annotations) {
  auto s = parse_annotations(read_text(data_dir() / "annotated/increment_ptr.c"));
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[3].kind, construct_kind::ensures_clause);
  EXPECT_EQ(s[3].where, anchor::contract("increment"));
  EXPECT_EQ(s[3].span.start_line, 6u);
}

TEST(parse_annotations, loop_ordinals_follow_text_order) {
  auto s = parse_annotations(read_text(data_dir() / "annotated/nested_loops.c"));
  EXPECT_EQ(s[4].where, anchor::loop("grid_cells", 1));
  EXPECT_EQ(s[8].where, anchor::loop("grid_cells", 2));
}

TEST(parse_annotations, do_while_counts_once) {
  const char *src = R"(void g(int n) {
  do { n--; } while (n > 0);
  //@ loop assigns n;
  while (n < 3) n++;
}
)";
  auto s = parse_annotations(src);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].where, anchor::loop("g", 2));
}

TEST(parse_annotations, strings_and_plain_comments_are_ignored) {
  auto s = parse_annotations(read_text(data_dir() / "annotated/ternary_strings.c"));
  EXPECT_EQ(s.size(), 3u);
}

TEST(parse_annotations, unknown_construct_raises_classification_error) {
  EXPECT_THROW(parse_annotations("/*@ ghost int x; */ int f(void);"), classification_error);
  EXPECT_THROW(parse_annotations("void f(int x) {\n //@ assert x > 0;\n}\n"),
               classification_error);
  EXPECT_THROW(parse_annotations("/*@ terminates \\true; */ int f(void);"), classification_error);
}

TEST(parse_annotations, malformed_annotations) {
  EXPECT_THROW(parse_annotations("/*@ requires x > 0; int f(int x);"), malformed_annotation);
  EXPECT_THROW(parse_annotations("/*@ requires x > 0 */ int f(int x);"), malformed_annotation);
  EXPECT_THROW(parse_annotations("/*@ requires x > 0; */ int g;"), malformed_annotation);
  EXPECT_THROW(parse_annotations("/*@ lemma l: \\true; requires \\true; */ int f(void);"),
               malformed_annotation);
  EXPECT_THROW(parse_annotations("/*@ loop invariant \\true; */ int f(void);"),
               malformed_annotation);
  EXPECT_THROW(parse_annotations("/*@ assumes x; */ int f(int x);"), malformed_annotation);
}

TEST(parse_annotations, default_function_catches_dangling_contract) {
  parse_options opts;
  opts.default_function = "target";
  auto s = parse_annotations("/*@ requires x > 0; ensures \\result > 0; */", opts);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1].where, anchor::contract("target"));
}

TEST(parse_annotations, classification_totality) {
  // each snippet holds exactly one clause: it parses to one annotation or
  // raises exactly one error
  const std::vector<std::string> clauses = {
      "requires a;", "ensures b;", "assigns \\nothing;", "behavior q: assumes a;",
      "complete behaviors;", "ghost int z;", "assert a;", "terminates a;",
      "decreases a;", "frees p;", "allocates p;", "exits a;"};
  std::size_t parsed = 0, errors = 0;
  for (const auto &c : clauses) {
    try {
      parsed += parse_annotations("/*@ " + c + " */\nint f(int a, int b, int *p);\n").size();
    } catch (const classification_error &) {
      ++errors;
    }
  }
  EXPECT_EQ(parsed + errors, clauses.size());
  EXPECT_EQ(parsed, 5u);
}

TEST(specification_set, duplicates_collapse) {
  specification_set s;
  annotation a{construct_kind::requires_clause, "requires x > 0;", {}, anchor::contract("f")};
  EXPECT_TRUE(s.insert(a));
  a.span.start_line = a.span.end_line = 9;
  EXPECT_FALSE(s.insert(a));
  EXPECT_EQ(s.size(), 1u);
  auto parsed = parse_annotations("/*@ requires x > 0; requires x > 0; */ int f(int x);");
  EXPECT_EQ(parsed.size(), 1u);
}

TEST(specification_set, anchor_kind_invariants) {
  specification_set s;
  EXPECT_THROW(s.insert({construct_kind::lemma, "lemma l: \\true;", {}, anchor::contract("f")}),
               malformed_annotation);
  EXPECT_THROW(s.insert({construct_kind::loop_variant, "loop variant n;", {}, anchor::contract("f")}),
               malformed_annotation);
  EXPECT_THROW(s.insert({construct_kind::ensures_clause, "ensures \\true;", {}, anchor::global()}),
               malformed_annotation);
}

TEST(constr, set_semantics) {
  specification_set s;
  s.insert({construct_kind::requires_clause, "requires a;", {}, anchor::contract("f")});
  s.insert({construct_kind::requires_clause, "requires b;", {}, anchor::contract("f")});
  s.insert({construct_kind::ensures_clause, "ensures c;", {}, anchor::contract("f")});
  EXPECT_EQ(constr(s), (construct_set{construct_kind::requires_clause, construct_kind::ensures_clause}));
  EXPECT_TRUE(constr(specification_set{}).empty());
}

TEST(weave, empty_set_is_identity) {
  std::string src = "int f(int x) {\n  return x;\n}\n";
  EXPECT_EQ(weave(src, {}), src);
}

TEST(weave, three_annotation_round_trip) {
  std::string bare = strip_annotations(one_loop);
  specification_set s;
  s.insert({construct_kind::ensures_clause, "ensures \\result >= 0;", {}, anchor::contract("f")});
  s.insert({construct_kind::loop_invariant, "loop invariant i >= 0;", {}, anchor::loop("f", 1)});
  s.insert({construct_kind::predicate, "predicate nonneg(integer x) = x >= 0;", {}, anchor::global()});
  auto woven = weave(bare, s);
  auto back = parse_annotations(woven);
  EXPECT_TRUE(back.same_as(s)) << woven;
  EXPECT_LT(woven.find("predicate"), woven.find("int f"));
}

TEST(weave, missing_loop_ordinal) {
  specification_set s;
  s.insert({construct_kind::loop_variant, "loop variant n - i;", {}, anchor::loop("f", 2)});
  EXPECT_THROW(weave(strip_annotations(one_loop), s), anchor_not_found);
  specification_set t;
  t.insert({construct_kind::requires_clause, "requires \\true;", {}, anchor::contract("nope")});
  EXPECT_THROW(weave(strip_annotations(one_loop), t), anchor_not_found);
}

TEST(weave, orphan_behavior_clause) {
  specification_set s;
  s.insert({construct_kind::ensures_clause, "ensures \\true;", {}, anchor::contract("f", "b")});
  EXPECT_THROW(weave(strip_annotations(one_loop), s), anchor_not_found);
}

TEST(weave, requires_first_and_variant_last) {
  std::string bare = strip_annotations(one_loop);
  specification_set s;
  s.insert({construct_kind::loop_variant, "loop variant n - i;", {}, anchor::loop("f", 1)});
  s.insert({construct_kind::loop_invariant, "loop invariant i <= n;", {}, anchor::loop("f", 1)});
  s.insert({construct_kind::ensures_clause, "ensures \\result == n;", {}, anchor::contract("f")});
  s.insert({construct_kind::requires_clause, "requires n >= 0;", {}, anchor::contract("f")});
  auto w = weave(bare, s);
  EXPECT_LT(w.find("requires"), w.find("ensures"));
  EXPECT_LT(w.find("loop invariant"), w.find("loop variant"));
}

TEST(weave, axioms_get_an_axiomatic_block) {
  auto annotated = read_text(data_dir() / "annotated/digit_sum_axiom.c");
  auto s = parse_annotations(annotated);
  auto w = weave(strip_annotations(annotated), s);
  EXPECT_NE(w.find("axiomatic"), std::string::npos);
  EXPECT_TRUE(parse_annotations(w).same_as(s));
}

TEST(weave, labels_and_spans) {
  auto annotated = read_text(data_dir() / "annotated/digit_sum_verifiable.c");
  auto s = parse_annotations(annotated);
  auto w = weave_detailed(strip_annotations(annotated), s, {.label_clauses = true});
  detail::line_index lines(w.text);
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto line = w.spans[i].start_line;
    auto begin = lines.line_start(line);
    auto end = w.text.find('\n', begin);
    std::string text = w.text.substr(begin, end - begin);
    EXPECT_NE(text.find(std::string(keyword(s[i].kind)).substr(0, 4)), std::string::npos) << text;
    if (!w.labels[i].empty())
      EXPECT_NE(text.find(w.labels[i]), std::string::npos) << text;
  }
  EXPECT_NE(w.text.find("ensures sg_"), std::string::npos);
  EXPECT_EQ(w.labels[1], "digit_sum_zero");
}

TEST(strip_annotations, removes_annotation_lines) {
  auto annotated = read_text(data_dir() / "annotated/digit_sum_verifiable.c");
  auto bare = strip_annotations(annotated);
  EXPECT_EQ(bare.find("/*@"), std::string::npos);
  EXPECT_TRUE(parse_annotations(bare).empty());
  EXPECT_NE(bare.find("while (n > 0)"), std::string::npos);
  EXPECT_EQ(strip_annotations(bare), bare);
}

TEST(round_trip, annotated_corpus) {
  std::size_t files = 0;
  construct_set covered;
  for (const auto &entry : std::filesystem::directory_iterator(data_dir() / "annotated")) {
    auto annotated = read_text(entry.path());
    auto s = parse_annotations(annotated);
    covered = covered | constr(s);
    auto bare = strip_annotations(annotated);
    auto woven = weave(bare, s);
    EXPECT_TRUE(parse_annotations(woven).same_as(s)) << entry.path() << "\n" << woven;
    EXPECT_EQ(strip_annotations(woven), bare) << entry.path();
    ++files;
  }
  EXPECT_GE(files, 30u);
  EXPECT_EQ(covered, construct_set::all());
}

// Random specification sets over a fixed program: weave then parse is the
// identity modulo spans, and stripping the woven text recovers the program.
TEST(round_trip, random_specifications) {
  const std::string bare = R"(#include <stddef.h>

int helper(int x);

int first(int n) {
  int s = 0;
  for (int i = 0; i < n; i++) {
    int j = 0;
    while (j < i) j++;
    s += j;
  }
  do { s--; } while (s > 100);
  return s;
}

  static int second(int *a, int n)
  {
    int k = 0;
    while (k < n) { a[k] = 0; k++; }
    return k;
  }
)";
  struct fn_info { const char *name; int loops; };
  const fn_info fns[] = {{"first", 3}, {"second", 1}, {"helper", 0}};
  std::mt19937 rng(20240611);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  const char *exprs[] = {"x > 0", "\\result == 0", "\\forall integer i; 0 <= i < n ==> a[i] == 0",
                         "n >= 0", "\\let t = n; t == n"};

  for (int trial = 0; trial < 300; ++trial) {
    specification_set s;
    const int count = 1 + pick(12);
    for (int c = 0; c < count; ++c) {
      const auto &fn = fns[pick(3)];
      const std::string e = exprs[pick(5)];
      const std::string uid = std::to_string(c);
      switch (pick(9)) {
      case 0: s.insert({construct_kind::requires_clause, "requires " + e + " || " + uid + " == 0;", {}, anchor::contract(fn.name)}); break;
      case 1: s.insert({construct_kind::ensures_clause, "ensures e" + uid + ": " + e + ";", {}, anchor::contract(fn.name)}); break;
      case 2: s.insert({construct_kind::assigns_clause, "assigns \\nothing;", {}, anchor::contract(fn.name)}); break;
      case 3: {
        const std::string b = "b" + uid;
        s.insert({construct_kind::behavior, "behavior " + b + ": assumes " + e + ";", {}, anchor::contract(fn.name)});
        s.insert({construct_kind::ensures_clause, "ensures " + e + ";", {}, anchor::contract(fn.name, b)});
        break;
      }
      case 4: s.insert({construct_kind::predicate, "predicate p" + uid + "(integer n) = " + e + ";", {}, anchor::global()}); break;
      case 5: s.insert({construct_kind::lemma, "lemma l" + uid + ": \\forall integer n; " + e + ";", {}, anchor::global()}); break;
      case 6: s.insert({construct_kind::axiom, "axiom a" + uid + ": \\true;", {}, anchor::global()}); break;
      case 7: s.insert({construct_kind::logic, "logic integer g" + uid + "(integer n);", {}, anchor::global()}); break;
      default:
        if (fn.loops > 0) {
          const int ord = 1 + pick(fn.loops);
          const construct_kind kinds[] = {construct_kind::loop_invariant, construct_kind::loop_assigns,
                                          construct_kind::loop_variant};
          auto k = kinds[pick(3)];
          s.insert({k, std::string(keyword(k)) + " " + (k == construct_kind::loop_assigns ? "s" : e) + ";", {},
                    anchor::loop(fn.name, ord)});
        }
      }
    }
    auto woven = weave(bare, s);
    auto back = parse_annotations(woven);
    ASSERT_TRUE(back.same_as(s)) << s.canonical_form() << "\n---\n" << woven;
    ASSERT_EQ(strip_annotations(woven), bare) << woven;
    // basic/logical partition
    EXPECT_EQ(constr(back).intersects(logical_constructs()),
              std::any_of(s.begin(), s.end(), [](const annotation &a) { return is_logical(a.kind); }));
  }
}
