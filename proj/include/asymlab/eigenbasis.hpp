#pragma once
//
// asymlab/eigenbasis.hpp -- biorthogonal eigenvector families and the
// diagonal operators they induce.
//
// Given a finite family x_0..x_{N-1} with duals x'_0..x'_{N-1} satisfying
// (x'_n, x_k) = delta_{nk}, the skew projections Q_n = x_n (tensor) x'_n
// assemble diagonal operators T = sum lambda_n Q_n with T x_n = lambda_n x_n.
// Two concrete families are built in:
//   * the shifted outer family x_n = chi^n * (1-z)^alpha (Helson--Szego
//     weight territory, 0 < |alpha| < 1/2), and
//   * a paired coordinate family x_{2n} = e_{2n}, x_{2n+1} = e_{2n+1} +
//     c_n e_{2n} whose skew projections grow like c_n while the diagonal
//     operator stays bounded.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "asymlab/errors.hpp"
#include "asymlab/linalg.hpp"

namespace asymlab {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct BiorthogonalSystem {
  std::vector<FourierVector> primal;
  std::vector<FourierVector> dual;
  double biorthogonality_residual = 0.0;  // max |(x'_n, x_k) - delta_{nk}|

  int size() const { return static_cast<int>(primal.size()); }
  const IndexWindow& window() const { return primal.front().window(); }
};

enum class FamilyKind { helson_szego, block_pair, explicit_list };

// Unimodular eigenvalue schedule lambda_n = exp(i t_n) with strictly
// decreasing angles 0 < t_{n+1} < t_n <= 2 pi (the hypothesis of the Abel
// summation bound |T| <= (2 pi + 1) sup_n |P_n|).
struct EigenSystemSpec {
  std::vector<double> angles;
  FamilyKind kind = FamilyKind::explicit_list;
  double alpha = 0.0;           // set when kind == helson_szego
  std::vector<double> c_seq;    // set when kind == block_pair

  // Default schedule t_n = 2 pi / (n + 1).
  static EigenSystemSpec default_angles(int count,
                                        FamilyKind kind = FamilyKind::explicit_list) {
    EigenSystemSpec spec;
    spec.kind = kind;
    spec.angles.resize(count);
    for (int n = 0; n < count; ++n)
      spec.angles[n] = 2.0 * std::numbers::pi / (n + 1);
    return spec;
  }

  void validate() const {
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t n = 0; n < angles.size(); ++n) {
      if (!(angles[n] > 0.0) || angles[n] > two_pi + 1e-15) {
        std::ostringstream os;
        os << "EigenSystemSpec: angle t_" << n << " = " << angles[n]
           << " outside (0, 2*pi]";
        throw precondition_error(os.str());
      }
      if (n > 0 && !(angles[n] < angles[n - 1])) {
        std::ostringstream os;
        os << "EigenSystemSpec: angles must strictly decrease but t_" << n - 1
           << " = " << angles[n - 1] << " <= t_" << n << " = " << angles[n];
        throw precondition_error(os.str());
      }
    }
  }

  std::vector<cplx> lambdas() const {
    std::vector<cplx> l(angles.size());
    for (std::size_t n = 0; n < angles.size(); ++n)
      l[n] = std::polar(1.0, angles[n]);
    return l;
  }
};

// ---------------------------------------------------------------------------
// Dual families and projections
// ---------------------------------------------------------------------------

// Solve for the dual family of a linearly independent primal family:
// B' = B (B^*B)^{-1} in orthonormalized coordinates, so that
// (x'_n, x_k) = delta_{nk}.  Throws rank_deficiency_error (carrying the
// numerical rank and condition number) if the primal family is dependent.
inline BiorthogonalSystem dual_family(const std::vector<FourierVector>& primal,
                                      double tol = defaults::algebraic) {
  if (primal.empty())
    throw precondition_error("dual_family: empty primal family");
  const IndexWindow w = primal.front().window();
  const int n = static_cast<int>(primal.size());
  CMatrix b(w.size(), n);
  for (int j = 0; j < n; ++j) {
    if (primal[j].window() != w)
      throw window_mismatch_error(
          "dual_family: family members on different windows (" +
          w.describe() + " vs " + primal[j].window().describe() + ")");
    b.col(j) = primal[j].orthonormal();
    if (b.col(j).norm() == 0.0)
      throw precondition_error("dual_family: primal member " +
                               std::to_string(j) + " is the zero vector");
  }

  const Eigen::VectorXd s = dense_singular_values(b);
  const double cutoff = std::max(b.rows(), b.cols()) *
                        std::numeric_limits<double>::epsilon() * s(0);
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cutoff) ++rank;
  if (rank < n) {
    std::ostringstream os;
    os << "dual_family: primal family is rank deficient (rank " << rank
       << " of " << n << ")";
    throw rank_deficiency_error(os.str(), rank,
                                s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1)
                                                      : std::numeric_limits<double>::infinity());
  }

  const CMatrix gram = b.adjoint() * b;
  const CMatrix bdual = b * gram.llt().solve(CMatrix::Identity(n, n));

  BiorthogonalSystem sys;
  sys.primal = primal;
  sys.dual.reserve(n);
  const auto& weight = primal.front().weight();
  for (int j = 0; j < n; ++j)
    sys.dual.push_back(FourierVector::from_orthonormal(w, bdual.col(j), weight));
  sys.biorthogonality_residual =
      (bdual.adjoint() * b - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (sys.biorthogonality_residual > std::max(tol, 1.0e3 * defaults::algebraic)) {
    // Solved but badly: surface the conditioning rather than a silent system.
    std::ostringstream os;
    os << "dual_family: biorthogonality residual "
       << sys.biorthogonality_residual << " exceeds tolerance";
    throw rank_deficiency_error(os.str(), rank, s(0) / s(s.size() - 1));
  }
  return sys;
}

// Wrap a closed-form primal/dual pair, verifying biorthogonality.
inline BiorthogonalSystem make_biorthogonal(std::vector<FourierVector> primal,
                                            std::vector<FourierVector> dual) {
  if (primal.size() != dual.size() || primal.empty())
    throw precondition_error("make_biorthogonal: family sizes differ");
  BiorthogonalSystem sys;
  sys.primal = std::move(primal);
  sys.dual = std::move(dual);
  double res = 0.0;
  for (std::size_t n = 0; n < sys.dual.size(); ++n)
    for (std::size_t k = 0; k < sys.primal.size(); ++k) {
      const cplx v = weighted_inner(sys.dual[n], sys.primal[k]);
      res = std::max(res, std::abs(v - (n == k ? cplx(1.0) : cplx(0.0))));
    }
  sys.biorthogonality_residual = res;
  return sys;
}

// Skew projections Q_n = x_n (tensor) x'_n; idempotent with
// Q_n Q_m = 0 for n != m and |Q_n| = |x_n| |x'_n|.
inline std::vector<MatrixOperator> skew_projections(
    const BiorthogonalSystem& sys) {
  std::vector<MatrixOperator> q;
  q.reserve(sys.primal.size());
  for (std::size_t n = 0; n < sys.primal.size(); ++n)
    q.push_back(rank_one(sys.primal[n], sys.dual[n]));
  return q;
}

// Partial sums P_n = Q_0 + ... + Q_n with their spectral norms.
inline std::vector<std::pair<MatrixOperator, double>> partial_sum_projections(
    const BiorthogonalSystem& sys, double tol = defaults::iterative) {
  std::vector<std::pair<MatrixOperator, double>> out;
  out.reserve(sys.primal.size());
  MatrixOperator acc;
  for (std::size_t n = 0; n < sys.primal.size(); ++n) {
    MatrixOperator q = rank_one(sys.primal[n], sys.dual[n]);
    acc = (n == 0) ? q : acc + q;
    out.emplace_back(acc, spectral_norm(acc, tol));
  }
  return out;
}

// Diagonal operator T = sum_n lambda_n Q_n with T x_n = lambda_n x_n and
// T^* x'_n = conj(lambda_n) x'_n.
inline MatrixOperator diagonal_operator(const EigenSystemSpec& spec,
                                        const BiorthogonalSystem& sys) {
  spec.validate();
  if (spec.angles.size() < sys.primal.size()) {
    std::ostringstream os;
    os << "diagonal_operator: " << spec.angles.size() << " eigenvalues for "
       << sys.primal.size() << " family members";
    throw precondition_error(os.str());
  }
  const std::vector<cplx> lambda = spec.lambdas();
  const IndexWindow w = sys.window();
  CMatrix t = CMatrix::Zero(w.size(), w.size());
  for (std::size_t n = 0; n < sys.primal.size(); ++n) {
    const CVector cx = sys.primal[n].orthonormal();
    const CVector cd = sys.dual[n].orthonormal();
    t.noalias() += lambda[n] * (cx * cd.adjoint());
  }
  return MatrixOperator(w, w, std::move(t));
}

// ---------------------------------------------------------------------------
// Built-in families
// ---------------------------------------------------------------------------

// Taylor coefficients of (1-z)^alpha: c_0 = 1, c_{k+1} = c_k (k-alpha)/(k+1).
inline std::vector<double> binomial_series(double alpha, int d) {
  if (d < 0) throw precondition_error("binomial_series: negative degree");
  std::vector<double> c(static_cast<std::size_t>(d) + 1);
  c[0] = 1.0;
  for (int k = 0; k < d; ++k)
    c[k + 1] = c[k] * (static_cast<double>(k) - alpha) / (k + 1);
  return c;
}

// Shifted outer family x_n = chi^n (1-z)^alpha, n = 0..N-1, truncated to the
// window [0, 2N + 64].  Requires alpha in (-1/2, 0) u (0, 1/2) and N >= 4.
inline std::vector<FourierVector> helson_szego_family(double alpha, int n_members) {
  if (!(std::abs(alpha) > 0.0 && std::abs(alpha) < 0.5)) {
    std::ostringstream os;
    os << "helson_szego_family: alpha = " << alpha
       << " outside (-1/2, 0) u (0, 1/2)";
    throw precondition_error(os.str());
  }
  if (n_members < 4)
    throw precondition_error("helson_szego_family: need at least 4 members");
  const int d = 2 * n_members + 64;
  const IndexWindow w{0, d};
  const std::vector<double> psi = binomial_series(alpha, d);
  std::vector<FourierVector> fam;
  fam.reserve(n_members);
  for (int n = 0; n < n_members; ++n) {
    CVector c = CVector::Zero(w.size());
    for (int k = n; k <= d; ++k) c(k) = psi[k - n];
    fam.emplace_back(w, std::move(c));
  }
  return fam;
}

// ---------------------------------------------------------------------------
// Paired coordinate family (block-pair system)
// ---------------------------------------------------------------------------

struct BlockPairSystem {
  BiorthogonalSystem system;
  std::vector<cplx> lambdas;     // eigenvalues, one per family member
  std::vector<double> alpha;       // X x_n = alpha_n e_n
  std::vector<double> alpha_star;  // X_* x'_n = alpha'_n e_n
  MatrixOperator T;       // diagonal operator sum lambda_n Q_n
  MatrixOperator X;       // canonical intertwiner candidate
  MatrixOperator X_star;  // adjoint-side intertwiner candidate
  double sup_c_lambda_gap = 0.0;  // sup_n c_n |lambda_{2n} - lambda_{2n+1}|
};

// Default coupling schedule c_n = sqrt(n + 1).
inline std::vector<double> block_pair_default_c(int n_pairs) {
  std::vector<double> c(n_pairs);
  for (int n = 0; n < n_pairs; ++n) c[n] = std::sqrt(n + 1.0);
  return c;
}

/// Default eigenvalue angles: t_{2n+1} = 2 pi / (2n + 2) and
// lambda_{2n} = exp(i / ((n+1) c_n)) lambda_{2n+1}, so that the pair gap
// satisfies c_n |lambda_{2n} - lambda_{2n+1}| <= 1/(n+1) <= 1.
inline std::vector<double> block_pair_default_angles(
    const std::vector<double>& c_seq, int n_pairs) {
  std::vector<double> t(2 * static_cast<std::size_t>(n_pairs));
  for (int n = 0; n < n_pairs; ++n) {
    const double odd = 2.0 * std::numbers::pi / (2 * n + 2);
    t[2 * n + 1] = odd;
    t[2 * n] = odd + 1.0 / ((n + 1) * c_seq[n]);
  }
  return t;
}

// Paired family x_{2n} = e_{2n}, x_{2n+1} = e_{2n+1} + c_n e_{2n} with the
// closed-form duals x'_{2n} = e_{2n} - c_n e_{2n+1}, x'_{2n+1} = e_{2n+1},
// eigenvalues exp(i t_n), and the canonical maps X x_n = alpha_n e_n,
// X_* x'_n = alpha'_n e_n with alpha_{2n} = alpha'_{2n+1} = (1+c_n^2)^{-1/2},
// alpha_{2n+1} = alpha'_{2n} = 1.
inline BlockPairSystem block_pair_system(const std::vector<double>& c_seq,
                                         const std::vector<double>& angle_seq,
                                         int n_pairs) {
  if (n_pairs < 2)
    throw precondition_error("block_pair_system: need at least 2 pairs");
  if (static_cast<int>(c_seq.size()) < n_pairs)
    throw precondition_error("block_pair_system: c sequence shorter than pair count");
  if (static_cast<int>(angle_seq.size()) < 2 * n_pairs)
    throw precondition_error("block_pair_system: angle sequence shorter than 2N");
  for (int n = 0; n < n_pairs; ++n) {
    if (!(c_seq[n] > 0.0)) {
      std::ostringstream os;
      os << "block_pair_system: constraint c_n > 0 violated at n = " << n
         << " (c = " << c_seq[n] << ")";
      throw precondition_error(os.str());
    }
    if (n > 0 && c_seq[n] < c_seq[n - 1]) {
      std::ostringstream os;
      os << "block_pair_system: constraint c_n -> infinity violated: c_" << n
         << " = " << c_seq[n] << " < c_" << n - 1 << " = " << c_seq[n - 1];
      throw precondition_error(os.str());
    }
  }
  if (!(c_seq[n_pairs - 1] > c_seq[0]))
    throw precondition_error(
        "block_pair_system: constraint c_n -> infinity violated: "
        "schedule does not grow across the range");

  std::vector<cplx> lambda(2 * static_cast<std::size_t>(n_pairs));
  for (int n = 0; n < 2 * n_pairs; ++n) lambda[n] = std::polar(1.0, angle_seq[n]);
  for (int a = 0; a < 2 * n_pairs; ++a)
    for (int b = a + 1; b < 2 * n_pairs; ++b)
      if (std::abs(lambda[a] - lambda[b]) < 1e-12) {
        std::ostringstream os;
        os << "block_pair_system: constraint lambda_n pairwise distinct "
           << "violated at (" << a << ", " << b << ")";
        throw precondition_error(os.str());
      }

  const IndexWindow w{0, 2 * n_pairs - 1};
  std::vector<FourierVector> primal, dual;
  primal.reserve(2 * n_pairs);
  dual.reserve(2 * n_pairs);
  for (int n = 0; n < n_pairs; ++n) {
    FourierVector even = FourierVector::unit(w, 2 * n);
    FourierVector odd = FourierVector::unit(w, 2 * n + 1);
    odd.set(2 * n, c_seq[n]);
    primal.push_back(even);
    primal.push_back(odd);
    FourierVector even_d = FourierVector::unit(w, 2 * n);
    even_d.set(2 * n + 1, -c_seq[n]);
    FourierVector odd_d = FourierVector::unit(w, 2 * n + 1);
    dual.push_back(even_d);
    dual.push_back(odd_d);
  }

  BlockPairSystem out;
  out.system = make_biorthogonal(std::move(primal), std::move(dual));
  out.lambdas = lambda;

  out.alpha.resize(2 * n_pairs);
  out.alpha_star.resize(2 * n_pairs);
  for (int n = 0; n < n_pairs; ++n) {
    const double damp = 1.0 / std::sqrt(1.0 + c_seq[n] * c_seq[n]);
    out.alpha[2 * n] = damp;
    out.alpha[2 * n + 1] = 1.0;
    out.alpha_star[2 * n] = 1.0;
    out.alpha_star[2 * n + 1] = damp;
  }

  double gap = 0.0;
  for (int n = 0; n < n_pairs; ++n)
    gap = std::max(gap, c_seq[n] * std::abs(lambda[2 * n] - lambda[2 * n + 1]));
  out.sup_c_lambda_gap = gap;

  // T = sum lambda_n Q_n.
  CMatrix t = CMatrix::Zero(w.size(), w.size());
  for (int n = 0; n < 2 * n_pairs; ++n) {
    const CVector cx = out.system.primal[n].orthonormal();
    const CVector cd = out.system.dual[n].orthonormal();
    t.noalias() += lambda[n] * (cx * cd.adjoint());
  }
  out.T = MatrixOperator(w, w, std::move(t));

  // X = sum alpha_n e_n (tensor) x'_n, X_* = sum alpha'_n e_n (tensor) x_n.
  CMatrix x = CMatrix::Zero(w.size(), w.size());
  CMatrix xs = CMatrix::Zero(w.size(), w.size());
  for (int n = 0; n < 2 * n_pairs; ++n) {
    x.row(n) = out.alpha[n] * out.system.dual[n].orthonormal().adjoint();
    xs.row(n) = out.alpha_star[n] * out.system.primal[n].orthonormal().adjoint();
  }
  out.X = MatrixOperator(w, w, std::move(x));
  out.X_star = MatrixOperator(w, w, std::move(xs));
  return out;
}

// ---------------------------------------------------------------------------
// Scaled intertwiners
// ---------------------------------------------------------------------------

// The a-priori bound sqrt(sum_n scales_n^2 |Q_n|^2) for scaled_intertwiner.
inline double intertwiner_norm_bound(const BiorthogonalSystem& sys,
                                     const std::vector<double>& scales) {
  double acc = 0.0;
  for (std::size_t n = 0; n < sys.primal.size(); ++n) {
    const double qn = sys.primal[n].norm() * sys.dual[n].norm();
    acc += scales[n] * scales[n] * qn * qn;
  }
  return std::sqrt(acc);
}

// X mapping x_n |-> scales_n e_n, i.e. X = sum_n scales_n e_n (tensor) x'_n.
// The target window is [0, N-1] with N the family size; the scaled sum
// sum scales_n^2 |Q_n|^2 must be finite.
inline MatrixOperator scaled_intertwiner(const BiorthogonalSystem& sys,
                                         const std::vector<double>& scales) {
  if (scales.size() < sys.primal.size())
    throw precondition_error("scaled_intertwiner: fewer scales than family members");
  for (std::size_t n = 0; n < sys.primal.size(); ++n)
    if (!std::isfinite(scales[n]))
      throw precondition_error("scaled_intertwiner: non-finite scale at n = " +
                               std::to_string(n));
  const double bound = intertwiner_norm_bound(sys, scales);
  if (!std::isfinite(bound))
    throw precondition_error(
        "scaled_intertwiner: sum scales_n^2 |Q_n|^2 is not finite");
  const IndexWindow dom = sys.window();
  const IndexWindow cod{0, sys.size() - 1};
  CMatrix x = CMatrix::Zero(cod.size(), dom.size());
  for (int n = 0; n < sys.size(); ++n)
    x.row(n) = scales[n] * sys.dual[n].orthonormal().adjoint();
  return MatrixOperator(dom, cod, std::move(x));
}

}  // namespace asymlab
