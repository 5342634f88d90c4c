#pragma once
//
// asymlab/linalg.hpp -- dense complex linear algebra over index windows.
//
// Conventions used throughout asymlab:
//   * A FourierVector stores coefficients f(n) on a window [lo, hi] together
//     with an optional Weight; its inner product is
//     (f, g) = sum_n f(n) * conj(g(n)) * omega(n)^2.
//   * Matrices act on *orthonormalized* coordinates c(n) = f(n) * omega(n),
//     so every MatrixOperator lives on a standard little-ell-2 and weights
//     appear only inside matrix entries.
//   * Singular values: full dense SVD up to dimension 512, deterministic
//     power/inverse iteration beyond that.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "asymlab/errors.hpp"
#include "asymlab/weight.hpp"
#include "asymlab/window.hpp"

namespace asymlab {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Central tolerance defaults; every operation accepts an override.
namespace defaults {
inline constexpr double algebraic = 1.0e-10;  // exact-identity residuals
inline constexpr double iterative = 1.0e-8;   // iterative estimates
}  // namespace defaults

// Largest dimension still sent to the full dense SVD.
inline constexpr int kDenseSvdLimit = 512;

// ---------------------------------------------------------------------------
// FourierVector
// ---------------------------------------------------------------------------

class FourierVector {
 public:
  FourierVector() = default;

  FourierVector(IndexWindow w, CVector coeffs,
                std::shared_ptr<const Weight> weight = nullptr)
      : window_(w), coeffs_(std::move(coeffs)), weight_(std::move(weight)) {
    if (coeffs_.size() != window_.size()) {
      std::ostringstream os;
      os << "FourierVector: " << coeffs_.size() << " coefficients on window "
         << window_.describe() << " (size " << window_.size() << ")";
      throw precondition_error(os.str());
    }
    if (weight_ && !(weight_->window() == window_) &&
        !(weight_->window().lo <= window_.lo &&
          weight_->window().hi >= window_.hi)) {
      std::ostringstream os;
      os << "FourierVector: weight window " << weight_->window().describe()
         << " does not cover vector window " << window_.describe();
      throw window_mismatch_error(os.str());
    }
  }

  // Zero vector on a window.
  static FourierVector zero(IndexWindow w,
                            std::shared_ptr<const Weight> weight = nullptr) {
    return FourierVector(w, CVector::Zero(w.size()), std::move(weight));
  }

  // Coordinate vector e_n.
  static FourierVector unit(IndexWindow w, int n,
                            std::shared_ptr<const Weight> weight = nullptr) {
    if (!w.contains(n)) {
      std::ostringstream os;
      os << "FourierVector::unit: index " << n << " outside window "
         << w.describe();
      throw precondition_error(os.str());
    }
    CVector c = CVector::Zero(w.size());
    c(w.offset(n)) = 1.0;
    return FourierVector(w, std::move(c), std::move(weight));
  }

  const IndexWindow& window() const { return window_; }
  const CVector& coeffs() const { return coeffs_; }
  CVector& coeffs() { return coeffs_; }
  const std::shared_ptr<const Weight>& weight() const { return weight_; }
  int size() const { return window_.size(); }

  cplx at(int n) const {
    return window_.contains(n) ? coeffs_(window_.offset(n)) : cplx(0.0);
  }
  void set(int n, cplx v) { coeffs_(window_.offset(n)) = v; }

  double omega(int n) const { return weight_ ? weight_->omega(n) : 1.0; }

  // Orthonormalized coordinates c(n) = f(n) * omega(n).
  CVector orthonormal() const {
    CVector c(coeffs_.size());
    for (int n = window_.lo; n <= window_.hi; ++n)
      c(window_.offset(n)) = coeffs_(window_.offset(n)) * omega(n);
    return c;
  }

  static FourierVector from_orthonormal(
      IndexWindow w, const CVector& c,
      std::shared_ptr<const Weight> weight = nullptr) {
    CVector f(c.size());
    for (int n = w.lo; n <= w.hi; ++n) {
      const double om = weight ? weight->omega(n) : 1.0;
      f(w.offset(n)) = c(w.offset(n)) / om;
    }
    return FourierVector(w, std::move(f), std::move(weight));
  }

  double norm() const { return orthonormal().norm(); }

  bool same_weight(const FourierVector& other) const {
    if (!weight_ && !other.weight_) return true;
    if (!weight_ || !other.weight_) return false;
    return weight_ == other.weight_ || weight_->same_as(*other.weight_);
  }

 private:
  IndexWindow window_;
  CVector coeffs_;
  std::shared_ptr<const Weight> weight_;
};

// Weighted inner product (f, g) = sum f(n) conj(g(n)) omega(n)^2.
// Both vectors must live on the same window with the same weight.
inline cplx weighted_inner(const FourierVector& f, const FourierVector& g) {
  if (f.window() != g.window()) {
    std::ostringstream os;
    os << "weighted_inner: windows " << f.window().describe() << " and "
       << g.window().describe() << " differ";
    throw window_mismatch_error(os.str());
  }
  if (!f.same_weight(g)) {
    std::ostringstream os;
    os << "weighted_inner: vectors on window " << f.window().describe()
       << " carry different weights ("
       << (f.weight() ? f.weight()->describe() : std::string("none")) << " vs "
       << (g.weight() ? g.weight()->describe() : std::string("none")) << ")";
    throw window_mismatch_error(os.str());
  }
  cplx acc = 0.0;
  for (int n = f.window().lo; n <= f.window().hi; ++n) {
    const double om = f.omega(n);
    acc += f.at(n) * std::conj(g.at(n)) * om * om;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// MatrixOperator
// ---------------------------------------------------------------------------

// Dense operator between two windows, acting on orthonormalized coordinates.
// entries has codomain.size() rows and domain.size() columns.
struct MatrixOperator {
  IndexWindow domain;
  IndexWindow codomain;
  CMatrix entries;

  MatrixOperator() = default;
  MatrixOperator(IndexWindow dom, IndexWindow cod, CMatrix m)
      : domain(dom), codomain(cod), entries(std::move(m)) {
    if (entries.rows() != codomain.size() || entries.cols() != domain.size()) {
      std::ostringstream os;
      os << "MatrixOperator: entries are " << entries.rows() << "x"
         << entries.cols() << " but windows demand " << codomain.size() << "x"
         << domain.size() << " (domain " << domain.describe() << ", codomain "
         << codomain.describe() << ")";
      throw window_mismatch_error(os.str());
    }
  }

  static MatrixOperator identity(IndexWindow w) {
    return MatrixOperator(w, w, CMatrix::Identity(w.size(), w.size()));
  }
  static MatrixOperator zero(IndexWindow dom, IndexWindow cod) {
    return MatrixOperator(dom, cod, CMatrix::Zero(cod.size(), dom.size()));
  }

  bool square() const { return domain == codomain; }

  CVector apply(const CVector& c) const {
    if (c.size() != domain.size()) {
      std::ostringstream os;
      os << "MatrixOperator::apply: vector of size " << c.size()
         << " against domain " << domain.describe();
      throw window_mismatch_error(os.str());
    }
    return entries * c;
  }

  MatrixOperator adjoint() const {
    return MatrixOperator(codomain, domain, entries.adjoint());
  }

  MatrixOperator operator*(const MatrixOperator& rhs) const {
    if (!(rhs.codomain == domain)) {
      std::ostringstream os;
      os << "MatrixOperator: composing domain " << domain.describe()
         << " with codomain " << rhs.codomain.describe();
      throw window_mismatch_error(os.str());
    }
    return MatrixOperator(rhs.domain, codomain, entries * rhs.entries);
  }

  MatrixOperator operator+(const MatrixOperator& rhs) const {
    if (!(rhs.domain == domain) || !(rhs.codomain == codomain))
      throw window_mismatch_error("MatrixOperator: adding mismatched shapes");
    return MatrixOperator(domain, codomain, entries + rhs.entries);
  }

  MatrixOperator operator-(const MatrixOperator& rhs) const {
    if (!(rhs.domain == domain) || !(rhs.codomain == codomain))
      throw window_mismatch_error(
          "MatrixOperator: subtracting mismatched shapes");
    return MatrixOperator(domain, codomain, entries - rhs.entries);
  }
};

// ---------------------------------------------------------------------------
// Singular values
// ---------------------------------------------------------------------------

namespace detail {

inline void require_finite(const CMatrix& a, const char* who) {
  if (!a.allFinite()) {
    std::ostringstream os;
    os << who << ": matrix contains non-finite entries";
    throw precondition_error(os.str());
  }
}

// Deterministic, mildly irregular start vector for power iterations.
inline CVector iteration_seed(Eigen::Index n) {
  CVector v(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = static_cast<double>(j + 1);
    v(j) = cplx(1.0 + 0.25 * std::cos(1.7 * x), 0.25 * std::sin(2.3 * x));
  }
  v.normalize();
  return v;
}

// Largest singular value by power iteration on A^* A.
inline double largest_sv_iterative(const CMatrix& a, double tol) {
  CVector v = iteration_seed(a.cols());
  double sigma = 0.0;
  const int max_iters = 2000;
  for (int it = 0; it < max_iters; ++it) {
    CVector w = a.adjoint() * (a * v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;  // v fell in the kernel: A^*A v = 0
    const double next = std::sqrt(nw);
    w /= nw;
    const double delta = std::abs(next - sigma);
    sigma = next;
    v = w;
    if (it > 4 && delta <= tol * std::max(1.0, sigma)) break;
  }
  return sigma;
}

// Smallest singular value by inverse iteration through a QR factorization.
inline double smallest_sv_iterative(const CMatrix& a, double tol) {
  // A = QR with column pivoting: A^*A = P R^*R P^*, so solves against R.
  Eigen::ColPivHouseholderQR<CMatrix> qr(a);
  const auto& r = qr.matrixR();
  const Eigen::Index k = std::min(r.rows(), r.cols());
  double dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < k; ++j)
    dmin = std::min(dmin, std::abs(r(j, j)));
  if (dmin == 0.0 || qr.rank() < a.cols()) return 0.0;

  CMatrix rtop = r.topLeftCorner(a.cols(), a.cols())
                     .template triangularView<Eigen::Upper>();
  CVector v = iteration_seed(a.cols());
  double inv_sigma = 0.0;
  const int max_iters = 2000;
  for (int it = 0; it < max_iters; ++it) {
    // Solve R^* R w = v (P-conjugation leaves singular values alone).
    CVector w = rtop.adjoint().template triangularView<Eigen::Lower>().solve(v);
    w = rtop.template triangularView<Eigen::Upper>().solve(w);
    const double nw = w.norm();
    if (!std::isfinite(nw) || nw == 0.0) return 0.0;
    const double next = std::sqrt(nw);
    w /= nw;
    const double delta = std::abs(next - inv_sigma);
    inv_sigma = next;
    v = w;
    if (it > 4 && delta <= tol * std::max(1.0, inv_sigma)) break;
  }
  return inv_sigma > 0.0 ? 1.0 / inv_sigma : 0.0;
}

}  // namespace detail

// All singular values, descending.  Dense path only; callers above the dense
// limit should use spectral_norm / smallest_singular_value instead.
// Two-sided Jacobi: slower than divide-and-conquer but dependable on the
// rank-deficient, clustered spectra this library produces (BDCSVD in Eigen
// 3.4.0 overruns a permutation buffer on exactly such inputs).
inline Eigen::VectorXd dense_singular_values(const CMatrix& a) {
  detail::require_finite(a, "dense_singular_values");
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues();
}

// Largest singular value.  The dense cutoff is deliberately lower than
// kDenseSvdLimit: only the top value is needed, and power iteration reaches
// it far faster than a full Jacobi sweep on mid-sized matrices.
inline double spectral_norm(const CMatrix& a,
                            double tol = defaults::iterative) {
  detail::require_finite(a, "spectral_norm");
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  if (std::max(a.rows(), a.cols()) <= 128)
    return dense_singular_values(a)(0);
  return detail::largest_sv_iterative(a, std::min(tol, 1.0e-10));
}

inline double spectral_norm(const MatrixOperator& a,
                            double tol = defaults::iterative) {
  return spectral_norm(a.entries, tol);
}

// Smallest singular value, measured over the columns: for a wide matrix the
// columns are dependent and the result is 0.
inline double smallest_singular_value(const CMatrix& a,
                                      double tol = defaults::iterative) {
  detail::require_finite(a, "smallest_singular_value");
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  if (a.cols() > a.rows()) return 0.0;
  if (std::max(a.rows(), a.cols()) <= kDenseSvdLimit) {
    const Eigen::VectorXd s = dense_singular_values(a);
    return s(s.size() - 1);
  }
  return detail::smallest_sv_iterative(a, std::min(tol, 1.0e-10));
}

inline double smallest_singular_value(const MatrixOperator& a,
                                      double tol = defaults::iterative) {
  return smallest_singular_value(a.entries, tol);
}

// ---------------------------------------------------------------------------
// Rank-one operators
// ---------------------------------------------------------------------------

// x (tensor) y : z |-> (z, y) x, as a matrix on orthonormalized coordinates.
// Domain is y's window, codomain is x's window.  Its spectral norm equals
// ||x|| * ||y||.
inline MatrixOperator rank_one(const FourierVector& x, const FourierVector& y) {
  const CVector cx = x.orthonormal();
  const CVector cy = y.orthonormal();
  CMatrix m = cx * cy.adjoint();
  return MatrixOperator(y.window(), x.window(), std::move(m));
}

}  // namespace asymlab
