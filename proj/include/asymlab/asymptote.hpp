#pragma once
//
// asymlab/asymptote.hpp -- probes for isometric/unitary asymptote behaviour
// at truncation scale.
//
// The long-run inner product lim_n (T^n x, T^n y) of a power-bounded operator
// is estimated by Cesaro averages over dyadic blocks of powers: block k
// averages the Gram matrices at powers 2^k .. 2^{k+1}-1, and agreement of
// consecutive block averages is the convergence certificate.  Riesz-basis
// bounds of vector families, their trend across truncation ladders, and the
// delta_n |Q_n| products of intertwiner candidates complete the toolkit.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "asymlab/eigenbasis.hpp"
#include "asymlab/errors.hpp"
#include "asymlab/linalg.hpp"

namespace asymlab {

// ---------------------------------------------------------------------------
// Cesaro Gram limits
// ---------------------------------------------------------------------------

struct GramLimitReport {
  CMatrix gram;             // gram(i, j) ~ lim_n (T^n x_i, T^n x_j)
  int iterations_used = 0;  // highest power of T actually applied
  double residual = 0.0;    // max entry gap between the last two block means
  bool converged = false;
};

// Cesaro-averaged Gram limit over dyadic power blocks.  Probes are given as
// FourierVectors on T's domain window; inner products are the weighted ones
// the probes carry.  Throws not_power_bounded_error when an orbit norm
// exceeds growth_cap times its starting norm.
inline GramLimitReport cesaro_gram_limit(const MatrixOperator& t,
                                         const std::vector<FourierVector>& probes,
                                         int max_power,
                                         double tol = defaults::iterative,
                                         double growth_cap = 1.0e6) {
  if (!t.square())
    throw precondition_error("cesaro_gram_limit: operator is not square");
  if (probes.empty())
    throw precondition_error("cesaro_gram_limit: no probes given");
  if (max_power < 8)
    throw precondition_error("cesaro_gram_limit: max_power must be >= 8");

  const int m = static_cast<int>(probes.size());
  CMatrix y(t.domain.size(), m);
  Eigen::VectorXd base_norm(m);
  for (int j = 0; j < m; ++j) {
    if (probes[j].window() != t.domain) {
      std::ostringstream os;
      os << "cesaro_gram_limit: probe " << j << " on window "
         << probes[j].window().describe() << " vs operator domain "
         << t.domain.describe();
      throw window_mismatch_error(os.str());
    }
    y.col(j) = probes[j].orthonormal();
    base_norm(j) = std::max(y.col(j).norm(), 1.0e-300);
  }

  GramLimitReport report;
  CMatrix prev_mean;
  CMatrix acc = CMatrix::Zero(m, m);
  int acc_count = 0;
  int block_end = 1;  // block k covers powers [2^k, 2^{k+1} - 1]
  for (int n = 1; n <= max_power; ++n) {
    y = t.entries * y;
    for (int j = 0; j < m; ++j) {
      const double g = y.col(j).norm() / base_norm(j);
      if (g > growth_cap) {
        std::ostringstream os;
        os << "cesaro_gram_limit: orbit norm grew to " << g
           << " times the start at power " << n;
        throw not_power_bounded_error(os.str(), n, g);
      }
    }
    acc += (y.adjoint() * y).conjugate();
    ++acc_count;
    report.iterations_used = n;
    if (n == block_end || n == max_power) {
      const CMatrix mean = acc / static_cast<double>(acc_count);
      if (prev_mean.size() > 0) {
        report.residual = (mean - prev_mean).cwiseAbs().maxCoeff();
        report.gram = 0.5 * (mean + mean.adjoint());
        if (report.residual <= tol) {
          report.converged = true;
          return report;
        }
      }
      prev_mean = mean;
      acc.setZero();
      acc_count = 0;
      block_end = 2 * block_end + 1;  // 1, 3, 7, 15, ...
    }
  }
  if (report.gram.size() == 0)
    report.gram = 0.5 * (prev_mean + prev_mean.adjoint());
  return report;
}

// ---------------------------------------------------------------------------
// Power bounds
// ---------------------------------------------------------------------------

namespace detail {

// Spectral norm tuned for long powering ladders: dense SVD for small
// matrices, deterministic power iteration above.
inline double norm_estimate(const CMatrix& a, double tol) {
  if (std::max(a.rows(), a.cols()) <= 128) return dense_singular_values(a)(0);
  return largest_sv_iterative(a, std::min(tol, 1.0e-10));
}

// Least squares fit of y ~ a + b x; returns (slope, r_squared).
inline std::pair<double, double> line_fit(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  const double slope = vxx > 0.0 ? vxy / vxx : 0.0;
  const double r2 = (vxx > 0.0 && vyy > 1e-300) ? (vxy * vxy) / (vxx * vyy) : 1.0;
  return {slope, r2};
}

}  // namespace detail

// max_{1 <= k <= n_max} |T^k|.  Throws not_power_bounded_error (with the
// offending power) if an intermediate norm exceeds growth_cap.
inline double power_bound(const MatrixOperator& t, int n_max,
                          double tol = defaults::iterative,
                          double growth_cap = 1.0e6) {
  if (!t.square()) throw precondition_error("power_bound: operator is not square");
  if (n_max < 1) throw precondition_error("power_bound: n_max must be >= 1");
  detail::require_finite(t.entries, "power_bound");
  CMatrix p = t.entries;
  double bound = 0.0;
  for (int k = 1; k <= n_max; ++k) {
    if (k > 1) p = p * t.entries;
    const double nk = detail::norm_estimate(p, tol);
    if (!std::isfinite(nk) || nk > growth_cap) {
      std::ostringstream os;
      os << "power_bound: |T^" << k << "| ~ " << nk << " exceeds cap "
         << growth_cap;
      throw not_power_bounded_error(os.str(), k, nk);
    }
    bound = std::max(bound, nk);
  }
  return bound;
}

// ---------------------------------------------------------------------------
// C-class classification
// ---------------------------------------------------------------------------

enum class CClass { c0dot, c1dot, mixed };

inline const char* to_string(CClass c) {
  switch (c) {
    case CClass::c0dot: return "C0.";
    case CClass::c1dot: return "C1.";
    case CClass::mixed: return "mixed";
  }
  return "?";
}

struct CClassTag {
  CClass forward = CClass::mixed;
  CClass backward = CClass::mixed;
  // (probe label, estimated lim |T^n x| / |x|) for forward then backward.
  std::vector<std::pair<std::string, double>> per_vector_limits;
};

namespace detail {

struct OrbitLimit {
  double estimate = 0.0;
  bool converged = false;
};

inline OrbitLimit orbit_limit(const CMatrix& t, const CVector& start, int n_max) {
  const double base = std::max(start.norm(), 1.0e-300);
  CVector y = start;
  double half_est = -1.0;
  for (int n = 1; n <= n_max; ++n) {
    y = t * y;
    if (n == n_max / 2) half_est = y.norm() / base;
  }
  OrbitLimit lim;
  lim.estimate = y.norm() / base;
  // The tail is trusted when the estimate moved little over the second half.
  lim.converged = std::abs(lim.estimate - half_est) <=
                  0.05 * std::max(1.0, std::abs(half_est));
  return lim;
}

inline CClass classify_side(const CMatrix& t,
                            const std::vector<FourierVector>& probes,
                            int n_max, double tol, const char* side,
                            std::vector<std::pair<std::string, double>>* limits) {
  bool all_big = true, all_small = true, all_converged = true;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const OrbitLimit lim = orbit_limit(t, probes[j].orthonormal(), n_max);
    limits->emplace_back(std::string(side) + " x" + std::to_string(j),
                         lim.estimate);
    all_converged = all_converged && lim.converged;
    (lim.estimate > tol ? all_small : all_big) = false;
  }
  if (!all_converged) return CClass::mixed;
  if (all_big) return CClass::c1dot;
  if (all_small) return CClass::c0dot;
  return CClass::mixed;
}

}  // namespace detail

// Estimate lim |T^n x| / |x| for every probe (forward) and for T^* (backward)
// and classify: > tol for all probes gives C1., < tol for all gives C0.,
// anything else (including non-converged estimates) is mixed.
inline CClassTag classify_c_class(const MatrixOperator& t,
                                  const std::vector<FourierVector>& probes,
                                  int n_max, double tol = 1.0e-3) {
  if (!t.square())
    throw precondition_error("classify_c_class: operator is not square");
  if (probes.empty())
    throw precondition_error("classify_c_class: no probes given");
  if (n_max < 8)
    throw precondition_error("classify_c_class: n_max must be >= 8");
  for (std::size_t j = 0; j < probes.size(); ++j)
    if (probes[j].window() != t.domain)
      throw window_mismatch_error("classify_c_class: probe " +
                                  std::to_string(j) + " window mismatch");
  CClassTag tag;
  const CMatrix adj = t.entries.adjoint();
  tag.forward = detail::classify_side(t.entries, probes, n_max, tol, "fwd",
                                      &tag.per_vector_limits);
  tag.backward = detail::classify_side(adj, probes, n_max, tol, "adj",
                                       &tag.per_vector_limits);
  return tag;
}

// ---------------------------------------------------------------------------
// Riesz bounds and ladder verdicts
// ---------------------------------------------------------------------------

struct RieszBounds {
  double lower = 0.0;  // smallest singular value of the normalized family
  double upper = 0.0;  // largest singular value of the normalized family
};

// Smallest/largest singular value of the matrix whose columns are the family
// members scaled to unit norm.  Throws rank_deficiency_error (with the
// numerical rank) if the family is dependent at machine precision.
inline RieszBounds riesz_bounds(const std::vector<FourierVector>& family) {
  if (family.empty()) throw precondition_error("riesz_bounds: empty family");
  const IndexWindow w = family.front().window();
  CMatrix b(w.size(), family.size());
  for (std::size_t j = 0; j < family.size(); ++j) {
    if (family[j].window() != w)
      throw window_mismatch_error("riesz_bounds: family member " +
                                  std::to_string(j) + " window mismatch");
    CVector c = family[j].orthonormal();
    const double nc = c.norm();
    if (nc == 0.0)
      throw precondition_error("riesz_bounds: member " + std::to_string(j) +
                               " is the zero vector");
    b.col(j) = c / nc;
  }
  RieszBounds out;
  if (std::max(b.rows(), b.cols()) <= kDenseSvdLimit) {
    const Eigen::VectorXd s = dense_singular_values(b);
    out.upper = s(0);
    out.lower = s(s.size() - 1);
  } else {
    out.upper = spectral_norm(b);
    out.lower = smallest_singular_value(b);
  }
  const double cutoff = std::max(b.rows(), b.cols()) *
                        std::numeric_limits<double>::epsilon() * out.upper;
  if (out.lower <= cutoff) {
    int rank = 0;
    const Eigen::VectorXd s = dense_singular_values(b);
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (s(k) > cutoff) ++rank;
    std::ostringstream os;
    os << "riesz_bounds: family is numerically dependent (rank " << rank
       << " of " << family.size() << ")";
    throw rank_deficiency_error(os.str(), rank,
                                out.lower > 0.0
                                    ? out.upper / out.lower
                                    : std::numeric_limits<double>::infinity());
  }
  return out;
}

enum class AsymptoteKind { lower_bound_holds, lower_bound_decays, inconclusive };

inline const char* to_string(AsymptoteKind k) {
  switch (k) {
    case AsymptoteKind::lower_bound_holds: return "lower-bound-holds";
    case AsymptoteKind::lower_bound_decays: return "lower-bound-decays";
    case AsymptoteKind::inconclusive: return "inconclusive";
  }
  return "?";
}

struct AsymptoteVerdict {
  AsymptoteKind kind = AsymptoteKind::inconclusive;
  std::vector<std::pair<int, double>> lower_bound_curve;  // (N, lower bound)
  double trend_exponent = 0.0;  // log-log slope of the lower-bound curve
  double fit_r2 = 0.0;          // quality of the log-log line fit
};

// Trend of riesz lower bounds across a truncation ladder.  A flat curve
// (slope > -0.05) staying above plateau_floor reads as lower-bound-holds;
// a well-fit decaying curve as lower-bound-decays; anything else is
// inconclusive.  Invariant under multiplying family members by unimodular
// constants, since singular values are.
inline AsymptoteVerdict asymptote_verdict(
    const std::vector<std::pair<int, std::vector<FourierVector>>>& ladder,
    double plateau_floor = 1.0e-6) {
  if (ladder.size() < 3)
    throw precondition_error("asymptote_verdict: ladder shorter than 3 rungs");
  AsymptoteVerdict v;
  std::vector<double> log_n, log_lower;
  double min_lower = std::numeric_limits<double>::infinity();
  int prev_n = 0;
  for (const auto& [n, family] : ladder) {
    if (n <= prev_n)
      throw precondition_error("asymptote_verdict: rung sizes must increase");
    prev_n = n;
    const RieszBounds rb = riesz_bounds(family);
    v.lower_bound_curve.emplace_back(n, rb.lower);
    log_n.push_back(std::log(static_cast<double>(n)));
    log_lower.push_back(std::log(std::max(rb.lower, 1.0e-300)));
    min_lower = std::min(min_lower, rb.lower);
  }
  const auto [slope, r2] = detail::line_fit(log_n, log_lower);
  v.trend_exponent = slope;
  v.fit_r2 = r2;
  if (slope >= -0.05 && min_lower > plateau_floor)
    v.kind = AsymptoteKind::lower_bound_holds;
  else if (slope < -0.05 && r2 >= 0.8)
    v.kind = AsymptoteKind::lower_bound_decays;
  else
    v.kind = AsymptoteKind::inconclusive;
  return v;
}

// ---------------------------------------------------------------------------
// delta_n lower bounds
// ---------------------------------------------------------------------------

// inf { |X x| : x in span(subspace_basis), |x| = 1 }: the smallest singular
// value of X restricted to the orthonormalized subspace.
inline double delta_lower_bound(const MatrixOperator& x,
                                const std::vector<FourierVector>& subspace_basis) {
  if (subspace_basis.empty())
    throw precondition_error("delta_lower_bound: empty subspace basis");
  const IndexWindow w = subspace_basis.front().window();
  if (w != x.domain)
    throw window_mismatch_error("delta_lower_bound: basis window " +
                                w.describe() + " vs operator domain " +
                                x.domain.describe());
  CMatrix b(w.size(), subspace_basis.size());
  for (std::size_t j = 0; j < subspace_basis.size(); ++j)
    b.col(j) = subspace_basis[j].orthonormal();
  Eigen::ColPivHouseholderQR<CMatrix> qr(b);
  if (qr.rank() < b.cols())
    throw precondition_error(
        "delta_lower_bound: subspace basis is linearly dependent");
  CMatrix q = qr.householderQ() * CMatrix::Identity(b.rows(), b.cols());
  return smallest_singular_value(x.entries * q);
}

struct DeltaQnEntry {
  double delta = 0.0;    // |X x_n| / |x_n|
  double qn_norm = 0.0;  // |Q_n| = |x_n| |x'_n|
  double product = 0.0;  // delta * qn_norm
};

// The products delta_n |Q_n| for a candidate intertwiner X over a
// biorthogonal system; bounded-below products are the quantitative
// fingerprint of an isometric asymptote surviving the truncation ladder.
inline std::vector<DeltaQnEntry> check_delta_qn_product(
    const MatrixOperator& x, const BiorthogonalSystem& sys) {
  if (sys.primal.empty())
    throw precondition_error("check_delta_qn_product: empty system");
  if (sys.window() != x.domain)
    throw window_mismatch_error(
        "check_delta_qn_product: system window " + sys.window().describe() +
        " vs operator domain " + x.domain.describe());
  std::vector<DeltaQnEntry> out;
  out.reserve(sys.primal.size());
  for (std::size_t n = 0; n < sys.primal.size(); ++n) {
    DeltaQnEntry e;
    const CVector cx = sys.primal[n].orthonormal();
    e.delta = (x.entries * cx).norm() / cx.norm();
    e.qn_norm = sys.primal[n].norm() * sys.dual[n].norm();
    e.product = e.delta * e.qn_norm;
    out.push_back(e);
  }
  return out;
}

}  // namespace asymlab
