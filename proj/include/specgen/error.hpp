#pragma once

#include <stdexcept>
#include <string>

namespace specgen {

// Root of every error the harness raises. `kind()` is a stable tag used in
// run records and logs.
class error : public std::runtime_error {
public:
  error(std::string kind, const std::string &what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string &kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define SPECGEN_DEFINE_ERROR(name, tag)                                        \
  class name : public error {                                                  \
  public:                                                                      \
    explicit name(const std::string &what) : error(tag, what) {}               \
  }

// acsl_model
SPECGEN_DEFINE_ERROR(classification_error, "classification_error");
SPECGEN_DEFINE_ERROR(malformed_annotation, "malformed_annotation");
SPECGEN_DEFINE_ERROR(anchor_not_found, "anchor_not_found");

// config_engine
SPECGEN_DEFINE_ERROR(unknown_configuration, "unknown_configuration");
SPECGEN_DEFINE_ERROR(missing_template, "missing_template");

// oracle_gateway
SPECGEN_DEFINE_ERROR(oracle_unavailable, "oracle_unavailable");
SPECGEN_DEFINE_ERROR(empty_completion, "empty_completion");
SPECGEN_DEFINE_ERROR(fixture_missing, "fixture_missing");
SPECGEN_DEFINE_ERROR(no_annotations_found, "no_annotations_found");

// verifier_gateway
SPECGEN_DEFINE_ERROR(verifier_not_installed, "verifier_not_installed");
SPECGEN_DEFINE_ERROR(precondition_violation, "precondition_violation");

// experiment_runner
SPECGEN_DEFINE_ERROR(empty_corpus, "empty_corpus");
SPECGEN_DEFINE_ERROR(duplicate_id, "duplicate_id");
SPECGEN_DEFINE_ERROR(missing_target_function, "missing_target_function");
SPECGEN_DEFINE_ERROR(invalid_plan, "invalid_plan");

// metrics_report
SPECGEN_DEFINE_ERROR(incomplete_grid, "incomplete_grid");
SPECGEN_DEFINE_ERROR(undefined_ratio, "undefined_ratio");

SPECGEN_DEFINE_ERROR(io_error, "io_error");

#undef SPECGEN_DEFINE_ERROR

} // namespace specgen
