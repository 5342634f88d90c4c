#pragma once
//
// asymlab/errors.hpp -- exception types shared by all asymlab modules.
//
// Every error carries a human-readable message; the typed subclasses also
// expose the offending quantity (rank, power index, ...) so callers and the
// CLI can report structured diagnostics.

#include <stdexcept>
#include <string>

namespace asymlab {

// Base class for all asymlab failures.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// A precondition on the inputs was violated (bad parameter range, broken
// monotonicity, mismatched supports, ...).  The message names the violated
// constraint.
struct precondition_error : error {
  explicit precondition_error(const std::string& msg) : error(msg) {}
};

// Two vectors/operators live on incompatible index windows or carry
// different weights.
struct window_mismatch_error : precondition_error {
  explicit window_mismatch_error(const std::string& msg)
      : precondition_error(msg) {}
};

// A family that must be linearly independent is numerically rank deficient.
struct rank_deficiency_error : error {
  rank_deficiency_error(const std::string& msg, int rank_, double cond_)
      : error(msg), rank(rank_), condition_number(cond_) {}
  int rank;                 // numerical rank actually observed
  double condition_number;  // largest/smallest retained singular value
};

// Orbit norms blew past the configured cap while powering an operator.
struct not_power_bounded_error : error {
  not_power_bounded_error(const std::string& msg, int power_, double estimate_)
      : error(msg), power(power_), norm_estimate(estimate_) {}
  int power;             // first power at which the cap was exceeded
  double norm_estimate;  // the offending norm estimate
};

// An experiment spec file failed schema validation; `field` names the
// offending key.
struct schema_error : error {
  schema_error(const std::string& field_, const std::string& msg)
      : error("spec field '" + field_ + "': " + msg), field(field_) {}
  std::string field;
};

}  // namespace asymlab
