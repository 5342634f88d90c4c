#pragma once
//
// asymlab/polynomial.hpp -- dense complex polynomials and power series.
//
// Coefficients are stored ascending: p[k] multiplies z^k.  Everything here is
// exact rational-function bookkeeping for the model-space module: products,
// Taylor (Maclaurin) expansion of p/q, root finding via the companion matrix,
// and synthetic division by (1 - conj(c) z) when the dividend vanishes at the
// boundary point 1/conj(c).

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "asymlab/errors.hpp"
#include "asymlab/linalg.hpp"

namespace asymlab {

using Poly = std::vector<cplx>;

// Largest coefficient magnitude; 0 for the empty polynomial.
inline double poly_scale(const Poly& p) {
  double s = 0.0;
  for (const cplx& c : p) s = std::max(s, std::abs(c));
  return s;
}

// Drop trailing coefficients below tol * (largest magnitude).
inline Poly poly_trim(Poly p, double tol = 0.0) {
  const double cut = tol * poly_scale(p);
  while (!p.empty() && std::abs(p.back()) <= cut) p.pop_back();
  return p;
}

// Degree of the trimmed polynomial; -1 for the zero polynomial.
inline int poly_degree(const Poly& p, double tol = 0.0) {
  return static_cast<int>(poly_trim(p, tol).size()) - 1;
}

inline Poly poly_add(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), cplx(0.0));
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) out[k] += b[k];
  return out;
}

inline Poly poly_sub(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), cplx(0.0));
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) out[k] -= b[k];
  return out;
}

inline Poly poly_scaled(Poly p, cplx c) {
  for (cplx& v : p) v *= c;
  return p;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, cplx(0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Horner evaluation.
inline cplx poly_eval(const Poly& p, cplx z) {
  cplx v(0.0);
  for (std::size_t k = p.size(); k-- > 0;) v = v * z + p[k];
  return v;
}

inline Poly poly_derivative(const Poly& p) {
  if (p.size() <= 1) return {};
  Poly out(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k)
    out[k - 1] = static_cast<double>(k) * p[k];
  return out;
}

// The reflected conjugate q#(z) = z^deg * conj(q(1 / conj(z))): coefficient
// k of the result is conj(q[deg - k]).  For a rational inner function p/q in
// lowest terms with |p/q| = 1 on the circle, p is a unimodular multiple of
// q# -- the helper that manufactures inner numerators from denominators.
inline Poly poly_reverse_conj(const Poly& q, int deg) {
  if (deg + 1 < static_cast<int>(q.size()))
    throw precondition_error("poly_reverse_conj: degree below coefficient count");
  Poly out(static_cast<std::size_t>(deg) + 1, cplx(0.0));
  for (std::size_t k = 0; k < q.size(); ++k)
    out[static_cast<std::size_t>(deg) - k] = std::conj(q[k]);
  return out;
}

// First n_terms Maclaurin coefficients of num/den; requires den(0) != 0.
inline Poly series_div(const Poly& num, const Poly& den, int n_terms) {
  if (n_terms < 0) throw precondition_error("series_div: negative term count");
  if (den.empty() || den[0] == cplx(0.0))
    throw precondition_error("series_div: denominator vanishes at 0");
  Poly out(static_cast<std::size_t>(n_terms), cplx(0.0));
  for (int k = 0; k < n_terms; ++k) {
    cplx v = k < static_cast<int>(num.size()) ? num[k] : cplx(0.0);
    for (int j = 1; j <= k && j < static_cast<int>(den.size()); ++j)
      v -= den[j] * out[k - j];
    out[k] = v / den[0];
  }
  return out;
}

// All roots (with multiplicity) via the balanced companion matrix.
inline std::vector<cplx> poly_roots(const Poly& p_in) {
  const Poly p = poly_trim(p_in, 1.0e-14);
  const int deg = static_cast<int>(p.size()) - 1;
  if (deg < 1)
    throw precondition_error("poly_roots: degree must be at least 1");
  CMatrix companion = CMatrix::Zero(deg, deg);
  for (int k = 0; k < deg; ++k) companion(k, deg - 1) = -p[k] / p[deg];
  for (int k = 1; k < deg; ++k) companion(k, k - 1) = cplx(1.0);
  Eigen::ComplexEigenSolver<CMatrix> es(companion, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw error("poly_roots: eigenvalue iteration failed to converge");
  std::vector<cplx> roots(static_cast<std::size_t>(deg));
  for (int k = 0; k < deg; ++k) roots[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    if (std::abs(std::abs(a) - std::abs(b)) > 1e-12) return std::abs(a) < std::abs(b);
    return std::arg(a) < std::arg(b);
  });
  return roots;
}

// Exact synthetic division of n(z) by (1 - conj(c) z) for unimodular c, valid
// when n(1/conj(c)) = n(c) = 0: the quotient s has s_m = sum_{j<=m} n_j
// conj(c)^{m-j} and one degree less.  The would-be remainder is checked
// against rel_tol times the coefficient scale.
inline Poly divide_one_minus_cbar_z(const Poly& n, cplx c,
                                    double rel_tol = 1.0e-9) {
  if (std::abs(std::abs(c) - 1.0) > 1.0e-12)
    throw precondition_error(
        "divide_one_minus_cbar_z: divisor point is not unimodular");
  if (n.size() < 2)
    throw precondition_error("divide_one_minus_cbar_z: dividend degree < 1");
  const cplx cb = std::conj(c);
  Poly s(n.size() - 1, cplx(0.0));
  cplx run(0.0);
  for (std::size_t m = 0; m + 1 < n.size(); ++m) {
    run = run * cb + n[m];
    s[m] = run;
  }
  const cplx remainder = run * cb + n.back();
  const double scale = std::max(poly_scale(n), 1.0e-300);
  if (std::abs(remainder) > rel_tol * scale) {
    std::ostringstream os;
    os << "divide_one_minus_cbar_z: dividend does not vanish at the boundary "
          "point (remainder "
       << std::abs(remainder) / scale << " of scale)";
    throw precondition_error(os.str());
  }
  return s;
}

}  // namespace asymlab
