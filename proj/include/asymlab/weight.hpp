#pragma once
//
// asymlab/weight.hpp -- two-sided weight sequences for weighted L^2 spaces.
//
// A Weight is a sequence omega : Z -> [1, inf) with omega(n) = 1 for n >= 0
// and omega nonincreasing (omega(n) >= omega(n+1)).  The interesting growth
// therefore lives on the negative axis: omega(-n) climbs as n -> inf.
// Weights are evaluated lazily from a formula (exponential/stretched) or a
// stored table, so classifier ladders may probe far beyond the matrix window.

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "asymlab/errors.hpp"
#include "asymlab/window.hpp"

namespace asymlab {

enum class WeightKind {
  exponential,  // omega(-n) = exp(beta * n)
  stretched,    // omega(-n) = exp(n^alpha)
  table,        // omega(-n) read from an explicit table
};

inline const char* to_string(WeightKind k) {
  switch (k) {
    case WeightKind::exponential: return "exponential";
    case WeightKind::stretched: return "stretched";
    case WeightKind::table: return "table";
  }
  return "?";
}

class Weight {
 public:
  // omega(-n) = exp(beta*n) on the window [-m, m].
  static Weight exponential(double beta, int m) {
    if (beta <= 0.0)
      throw precondition_error("Weight::exponential: beta must be > 0");
    Weight w(WeightKind::exponential, IndexWindow{-m, m});
    w.beta_ = beta;
    return w;
  }

  // omega(-n) = exp(n^alpha) on the window [-m, m].
  static Weight stretched(double alpha, int m) {
    if (alpha <= 0.0 || alpha >= 1.0)
      throw precondition_error("Weight::stretched: alpha must lie in (0,1)");
    Weight w(WeightKind::stretched, IndexWindow{-m, m});
    w.alpha_ = alpha;
    return w;
  }

  // Explicit values omega(-1), omega(-2), ... on the window
  // [-values.size(), values.size()].  Values must be nonincreasing toward
  // index 0 and >= 1, i.e. values[k] >= values[k-1] >= 1.
  static Weight from_table(std::vector<double> values) {
    if (values.empty())
      throw precondition_error("Weight::from_table: empty value table");
    const int m = static_cast<int>(values.size());
    Weight w(WeightKind::table, IndexWindow{-m, m});
    w.table_ = std::move(values);
    if (w.table_.front() < 1.0)
      throw precondition_error("Weight::from_table: omega(-1) must be >= 1");
    for (std::size_t k = 1; k < w.table_.size(); ++k) {
      if (w.table_[k] < w.table_[k - 1]) {
        std::ostringstream os;
        os << "Weight::from_table: omega(" << -static_cast<int>(k + 1)
           << ") = " << w.table_[k] << " < omega(" << -static_cast<int>(k)
           << ") = " << w.table_[k - 1] << " breaks monotonicity";
        throw precondition_error(os.str());
      }
    }
    return w;
  }

  WeightKind kind() const { return kind_; }
  const IndexWindow& window() const { return window_; }
  double beta() const { return beta_; }
  double alpha() const { return alpha_; }

  // omega(n); valid for any n <= 0 for formula kinds, window-bound for tables.
  double omega(long n) const {
    if (n >= 0) return 1.0;
    return std::exp(log_omega(n));
  }

  // log omega(n), the numerically safe evaluation for classifier ladders.
  double log_omega(long n) const {
    if (n >= 0) return 0.0;
    const double m = static_cast<double>(-n);
    switch (kind_) {
      case WeightKind::exponential: return beta_ * m;
      case WeightKind::stretched: return std::pow(m, alpha_);
      case WeightKind::table: {
        const std::size_t idx = static_cast<std::size_t>(-n) - 1;
        if (idx >= table_.size()) {
          std::ostringstream os;
          os << "Weight: table weight has no value at index " << n
             << " (window " << window_.describe() << ")";
          throw precondition_error(os.str());
        }
        return std::log(table_[idx]);
      }
    }
    return 0.0;
  }

  // Largest index (as n >= 1 for omega(-n)) the weight can be evaluated at.
  long max_depth() const {
    return kind_ == WeightKind::table ? static_cast<long>(table_.size())
                                      : std::numeric_limits<long>::max() / 2;
  }

  // True when the weight climbs beyond 10^3 inside its own window: the
  // truncation already sees substantially unbounded growth.
  bool unbounded_trend() const { return omega(window_.lo) > 1.0e3; }

  bool same_as(const Weight& other) const {
    if (kind_ != other.kind_ || !(window_ == other.window_)) return false;
    switch (kind_) {
      case WeightKind::exponential: return beta_ == other.beta_;
      case WeightKind::stretched: return alpha_ == other.alpha_;
      case WeightKind::table: return table_ == other.table_;
    }
    return false;
  }

  std::string describe() const {
    std::ostringstream os;
    os << to_string(kind_);
    if (kind_ == WeightKind::exponential) os << "(beta=" << beta_ << ")";
    if (kind_ == WeightKind::stretched) os << "(alpha=" << alpha_ << ")";
    os << " on " << window_.describe();
    return os.str();
  }

 private:
  Weight(WeightKind k, IndexWindow w) : kind_(k), window_(w) {}

  WeightKind kind_;
  IndexWindow window_;
  double beta_ = 0.0;
  double alpha_ = 0.0;
  std::vector<double> table_;
};

}  // namespace asymlab
