#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "specgen/acsl.hpp"
#include "specgen/construct.hpp"
#include "specgen/error.hpp"

namespace specgen {

// A syntactic-construct configuration: the constructs a specification may use
// and, optionally, a set of which at least one must be used.
struct configuration {
  std::string name;
  construct_set permitted;
  construct_set mandatory;

  configuration() = default;
  configuration(std::string n, construct_set p, construct_set m)
      : name(std::move(n)), permitted(p), mandatory(m) {
    if (!mandatory.is_subset_of(permitted))
      throw unknown_configuration("configuration " + name +
                                  ": mandatory constructs must be permitted");
  }
};

inline const std::vector<std::string> &canonical_config_names() {
  static const std::vector<std::string> names = {"CB", "CV", "CA", "CF"};
  return names;
}

inline configuration canonical_config(std::string_view name) {
  using ck = construct_kind;
  const construct_set basic = basic_constructs();
  const construct_set verifiable_req{ck::predicate, ck::logic, ck::lemma};
  const construct_set axiom_req{ck::axiom};
  const construct_set verifiable = basic | verifiable_req;
  const construct_set axiomatic = basic | construct_set{ck::predicate, ck::logic} | axiom_req;

  if (name == "CB") return {"CB", basic, {}};
  if (name == "CV") return {"CV", verifiable, verifiable_req};
  if (name == "CA") return {"CA", axiomatic, axiom_req};
  if (name == "CF") return {"CF", verifiable | axiomatic, {}};
  throw unknown_configuration("unknown configuration '" + std::string(name) + "'");
}

struct compliance_verdict {
  bool compliant = false;
  construct_set forbidden_used;
  bool mandatory_missing = false;
};

inline compliance_verdict check_compliance(const construct_set &used, const configuration &c) {
  compliance_verdict v;
  v.forbidden_used = used - c.permitted;
  v.mandatory_missing = !c.mandatory.empty() && !used.intersects(c.mandatory);
  v.compliant = v.forbidden_used.empty() && !v.mandatory_missing;
  return v;
}

inline compliance_verdict check_compliance(const specification_set &s, const configuration &c) {
  return check_compliance(constr(s), c);
}

} // namespace specgen
