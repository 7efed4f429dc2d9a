#pragma once

#include <stdexcept>
#include <string>

namespace bampf {

// Malformed model data: substochastic rows, bad indices, broken invariants.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A call was made with arguments that cannot be honored (bad tolerance,
// incompatible shaping statistic, stochastic agent in an exact evaluator, ...).
struct argument_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The requested computation would exceed an explicit capacity limit.
struct capacity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An observation had zero likelihood under every candidate in the belief support.
struct impossible_evidence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bampf
