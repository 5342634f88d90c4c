#pragma once
//
// asymlab/model_space.hpp -- finite-dimensional model spaces from atomic
// Clark measures.
//
// A probability measure with finitely many unimodular atoms determines a
// rational inner function u through the Cauchy-transform identity
//     1/(1 - u(z)) = sum_n a_n / (1 - z conj(zeta_n)),
// and conversely the atoms sit where u = 1 with masses 1/|u'|.  The model
// space K_u = H^2 (-) uH^2 has dimension = number of atoms; on a Taylor
// truncation [0, D] it is realized as the orthogonal complement of the
// shifted columns of u.  On top of that live the compressed shift, the
// Clark unitary V_u, multipliers phi0 = (1-v)/(1-u) between two model
// spaces over the same atoms, and the triple (T, X, Y) with YS = TY,
// XT = SX, XY = phi0(S).
//
// Everything is exact rational arithmetic up to the single unavoidable
// truncation: Taylor tails of functions whose poles lie strictly outside
// the closed disk.  Residuals therefore isolate truncation effects only.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "asymlab/errors.hpp"
#include "asymlab/linalg.hpp"
#include "asymlab/polynomial.hpp"

namespace asymlab {

// ---------------------------------------------------------------------------
// Clark measures
// ---------------------------------------------------------------------------

struct ClarkMeasure {
  std::vector<cplx> atoms;     // pairwise distinct unimodular points
  std::vector<double> masses;  // positive, normalized to total mass 1

  int size() const { return static_cast<int>(atoms.size()); }
};

// Validates atoms/masses and normalizes the total mass to 1.
inline ClarkMeasure make_clark_measure(std::vector<cplx> atoms,
                                       std::vector<double> masses) {
  if (atoms.empty())
    throw precondition_error("make_clark_measure: no atoms given");
  if (atoms.size() != masses.size())
    throw precondition_error("make_clark_measure: atom/mass count mismatch");
  double total = 0.0;
  for (std::size_t n = 0; n < atoms.size(); ++n) {
    if (std::abs(std::abs(atoms[n]) - 1.0) > 1.0e-9) {
      std::ostringstream os;
      os << "make_clark_measure: atom " << n << " is not unimodular (|zeta| = "
         << std::abs(atoms[n]) << ")";
      throw precondition_error(os.str());
    }
    atoms[n] /= std::abs(atoms[n]);
    if (!(masses[n] > 0.0)) {
      std::ostringstream os;
      os << "make_clark_measure: mass " << n << " = " << masses[n]
         << " is not positive";
      throw precondition_error(os.str());
    }
    total += masses[n];
  }
  for (std::size_t a = 0; a < atoms.size(); ++a)
    for (std::size_t b = a + 1; b < atoms.size(); ++b)
      if (std::abs(atoms[a] - atoms[b]) < 1.0e-9) {
        std::ostringstream os;
        os << "make_clark_measure: atoms " << a << " and " << b
           << " collide at " << atoms[a].real() << (atoms[a].imag() < 0 ? "-" : "+")
           << std::abs(atoms[a].imag()) << "i";
        throw precondition_error(os.str());
      }
  for (double& m : masses) m /= total;
  return ClarkMeasure{std::move(atoms), std::move(masses)};
}

// ---------------------------------------------------------------------------
// Rational inner functions
// ---------------------------------------------------------------------------

struct RationalInner {
  Poly num, den;   // u = num / den
  int degree = 0;  // Blaschke degree = dim of the model space

  cplx eval(cplx z) const { return poly_eval(num, z) / poly_eval(den, z); }

  // First n_terms Maclaurin coefficients of u.
  Poly taylor(int n_terms) const { return series_div(num, den, n_terms); }

  // Smallest pole modulus (infinity when the denominator is constant); the
  // decay rate of Taylor tails, hence the conditioning of every truncation.
  double pole_radius() const {
    if (poly_degree(den, 1.0e-14) < 1)
      return std::numeric_limits<double>::infinity();
    double r = std::numeric_limits<double>::infinity();
    for (const cplx& root : poly_roots(den)) r = std::min(r, std::abs(root));
    return r;
  }
};

namespace detail {

inline void validate_rational_inner(const RationalInner& u) {
  if (u.num.empty() || u.den.empty())
    throw precondition_error("RationalInner: empty numerator or denominator");
  if (u.den[0] == cplx(0.0))
    throw precondition_error("RationalInner: denominator vanishes at 0");
  if (std::abs(u.eval(cplx(0.0))) > 1.0e-12)
    throw precondition_error("RationalInner: u(0) must vanish");
  // Unimodularity gate. In the monomial basis the achievable accuracy of
  // |u(z)| is bounded below by Horner's backward error — coefficient mass
  // over the local denominator magnitude — and clustered zeros push that
  // far above machine precision. The budget therefore carries a
  // conditioning term per sample; it stays at 1e-9 while the coefficients
  // are tame, so genuinely non-inner data is still rejected.
  double mass = 0.0;
  for (const cplx& c : u.num) mass += std::abs(c);
  for (const cplx& c : u.den) mass += std::abs(c);
  const double ops = static_cast<double>(u.num.size() + u.den.size());
  const double eps = std::numeric_limits<double>::epsilon();
  for (int j = 0; j < 256; ++j) {
    const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * j / 256.0);
    const double den_mag = std::abs(poly_eval(u.den, z));
    const double m = std::abs(u.eval(z));
    const double budget = 1.0e-9 + 8.0 * ops * eps * mass / den_mag;
    if (std::abs(m - 1.0) > budget) {
      std::ostringstream os;
      os << "RationalInner: |u| = " << m << " off the unit circle value at "
         << "sample " << j << " of 256 (budget " << budget << ")";
      throw precondition_error(os.str());
    }
  }
  if (poly_degree(u.den, 1.0e-14) >= 1) {
    for (const cplx& root : poly_roots(u.den)) {
      if (std::abs(root) <= 1.0) {
        std::ostringstream os;
        os << "RationalInner: pole at modulus " << std::abs(root)
           << " inside the closed unit disk";
        throw precondition_error(os.str());
      }
    }
  }
}

// Prefix of the product a*b, exact for the first n coefficients.
inline Poly conv_trunc(const Poly& a, const Poly& b, int n) {
  Poly out(static_cast<std::size_t>(n), cplx(0.0));
  for (std::size_t i = 0; i < a.size() && i < static_cast<std::size_t>(n); ++i) {
    if (a[i] == cplx(0.0)) continue;
    const std::size_t jmax =
        std::min(b.size(), static_cast<std::size_t>(n) - i);
    for (std::size_t j = 0; j < jmax; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

}  // namespace detail

// Checked constructor: unimodularity on 256 circle samples, u(0) = 0, all
// poles strictly outside the closed disk.
inline RationalInner make_rational_inner(Poly num, Poly den) {
  RationalInner u;
  u.num = poly_trim(std::move(num), 1.0e-14);
  u.den = poly_trim(std::move(den), 1.0e-14);
  u.degree = std::max(poly_degree(u.num), poly_degree(u.den));
  detail::validate_rational_inner(u);
  return u;
}

// u(z) = z^n.
inline RationalInner monomial_inner(int n) {
  if (n < 1) throw precondition_error("monomial_inner: exponent must be >= 1");
  Poly p(static_cast<std::size_t>(n) + 1, cplx(0.0));
  p.back() = 1.0;
  return make_rational_inner(std::move(p), Poly{cplx(1.0)});
}

// The inner function of an atomic Clark measure: with
// B = prod_n (1 - z conj(zeta_n)) and A = sum_n a_n prod_{m!=n} (...),
// u = (A - B)/A satisfies 1/(1 - u) = sum_n a_n/(1 - z conj(zeta_n))
// exactly (partial fractions), u(0) = 0, and A has no roots in the closed
// disk, so all poles of u lie strictly outside.
inline RationalInner clark_inner(const ClarkMeasure& sigma) {
  const int k = sigma.size();
  Poly b{cplx(1.0)};
  for (int n = 0; n < k; ++n)
    b = poly_mul(b, Poly{cplx(1.0), -std::conj(sigma.atoms[n])});
  Poly a{cplx(0.0)};
  for (int n = 0; n < k; ++n) {
    Poly part{sigma.masses[n]};
    for (int m = 0; m < k; ++m) {
      if (m == n) continue;
      part = poly_mul(part, Poly{cplx(1.0), -std::conj(sigma.atoms[m])});
    }
    a = poly_add(a, part);
  }
  RationalInner u = make_rational_inner(poly_sub(a, b), a);
  if (u.degree != k) {
    std::ostringstream os;
    os << "clark_inner: degree " << u.degree << " does not match atom count "
       << k;
    throw error(os.str());
  }
  return u;
}

// Recovers the measure from u: atoms are the roots of den - num (the level
// set u = 1), masses are 1/|u'| there.
inline ClarkMeasure recover_clark_measure(const RationalInner& u) {
  const Poly level = poly_sub(u.den, u.num);
  std::vector<cplx> atoms = poly_roots(level);
  const Poly dnum = poly_derivative(u.num);
  const Poly dden = poly_derivative(u.den);
  std::vector<double> masses;
  for (cplx& zeta : atoms) {
    if (std::abs(std::abs(zeta) - 1.0) > 1.0e-6) {
      std::ostringstream os;
      os << "recover_clark_measure: level set u = 1 leaves the circle "
            "(root modulus "
         << std::abs(zeta) << ")";
      throw precondition_error(os.str());
    }
    zeta /= std::abs(zeta);
    const cplx q = poly_eval(u.den, zeta);
    const cplx du =
        (poly_eval(dnum, zeta) * q - poly_eval(u.num, zeta) * poly_eval(dden, zeta)) /
        (q * q);
    if (std::abs(du) < 1.0e-14)
      throw error("recover_clark_measure: vanishing angular derivative");
    masses.push_back(1.0 / std::abs(du));
  }
  return make_clark_measure(std::move(atoms), std::move(masses));
}

// ---------------------------------------------------------------------------
// Reproducing kernels
// ---------------------------------------------------------------------------

// Taylor coefficients on [0, D] of k_{u,zeta}(z) =
// (1 - conj(u(zeta)) u(z)) / (1 - conj(zeta) z).  For unimodular zeta the
// numerator q - conj(u(zeta)) p vanishes at zeta, so the linear factor is
// divided out synthetically (exact cancellation) before the stable series
// division by q; interior zeta uses the direct series.
inline FourierVector reproducing_kernel(const RationalInner& u, cplx zeta,
                                        int D) {
  if (D < 2 * u.degree)
    throw precondition_error(
        "reproducing_kernel: window must cover twice the degree");
  const double qscale = std::max(poly_scale(u.den), 1.0e-300);
  if (std::abs(poly_eval(u.den, zeta)) <= 1.0e-9 * qscale)
    throw precondition_error(
        "reproducing_kernel: u is not analytic at the requested point");
  const double r = std::abs(zeta);
  Poly coeffs;
  if (std::abs(r - 1.0) <= 1.0e-9) {
    const cplx w = std::conj(u.eval(zeta / r));
    const Poly numer = poly_sub(u.den, poly_scaled(u.num, w));
    const Poly s = divide_one_minus_cbar_z(numer, zeta / r, 1.0e-7);
    coeffs = series_div(s, u.den, D + 1);
  } else if (r < 1.0) {
    const cplx w = std::conj(u.eval(zeta));
    const Poly numer = poly_sub(u.den, poly_scaled(u.num, w));
    coeffs = series_div(numer, poly_mul(u.den, Poly{cplx(1.0), -std::conj(zeta)}),
                        D + 1);
  } else {
    throw precondition_error(
        "reproducing_kernel: evaluation point outside the closed disk");
  }
  CVector c(D + 1);
  for (int j = 0; j <= D; ++j) c(j) = coeffs[static_cast<std::size_t>(j)];
  return FourierVector(IndexWindow{0, D}, std::move(c));
}

// ---------------------------------------------------------------------------
// Model space representation
// ---------------------------------------------------------------------------

struct ModelSpaceRep {
  RationalInner inner;
  std::vector<FourierVector> ortho_basis;  // orthonormal basis of K_u on [0, D]
  std::vector<FourierVector> clark_basis;  // V_u images of the atom coordinates
  ClarkMeasure sigma;                      // measure recovered from the inner
  int dim = 0;

  IndexWindow window() const { return ortho_basis.front().window(); }
};

namespace detail {

// Columns u * chi^k, k = 0..D-degree, as Taylor coefficient vectors on [0,D].
inline CMatrix shifted_columns(const Poly& taylor, int D, int degree) {
  CMatrix m = CMatrix::Zero(D + 1, D - degree + 1);
  for (int k = 0; k + degree <= D; ++k)
    for (int j = k; j <= D; ++j)
      if (static_cast<std::size_t>(j - k) < taylor.size())
        m(j, k) = taylor[static_cast<std::size_t>(j - k)];
  return m;
}

// Taylor coefficients on [0, D] of (1 - u)/(1 - z conj(zeta_n)), the Cauchy
// column of atom n (exact polynomial cancellation, then stable division).
inline Poly cauchy_column(const RationalInner& u, cplx zeta, int D) {
  const Poly one_minus_u = poly_sub(u.den, u.num);
  const Poly s = divide_one_minus_cbar_z(one_minus_u, zeta, 1.0e-7);
  return series_div(s, u.den, D + 1);
}

}  // namespace detail

// Orthonormal truncated model-space basis: the orthogonal complement of
// span{u chi^k : k = 0..D-degree} inside the coefficient window [0, D],
// canonicalized by a monomial-seeded Gram-Schmidt sweep (lowest-degree
// monomials first, first nonzero coefficient rotated to the positive real
// axis).  For u = z^g this yields exactly {1, z, ..., z^{g-1}}.
inline ModelSpaceRep model_space_basis(const RationalInner& u, int D) {
  const int g = u.degree;
  if (g < 1) throw precondition_error("model_space_basis: constant inner function");
  if (D < 2 * g + 16)
    throw precondition_error(
        "model_space_basis: window must cover twice the degree plus 16");

  const Poly tu = u.taylor(D + 1);
  const CMatrix shifts = detail::shifted_columns(tu, D, g);
  Eigen::ColPivHouseholderQR<CMatrix> qr(shifts);
  if (qr.rank() < shifts.cols()) {
    std::ostringstream os;
    os << "model_space_basis: shifted columns have rank " << qr.rank()
       << " of " << shifts.cols() << "; truncation too small";
    throw rank_deficiency_error(os.str(), static_cast<int>(qr.rank()),
                                std::numeric_limits<double>::infinity());
  }
  Eigen::HouseholderQR<CMatrix> thin(shifts);
  const CMatrix qu =
      thin.householderQ() * CMatrix::Identity(D + 1, shifts.cols());

  ModelSpaceRep rep;
  rep.inner = u;
  rep.dim = g;
  CMatrix basis(D + 1, g);
  int found = 0;
  for (int m = 0; m <= D && found < g; ++m) {
    CVector w = CVector::Zero(D + 1);
    w(m) = 1.0;
    // Two projection passes keep the Gram at identity to machine precision.
    for (int pass = 0; pass < 2; ++pass) {
      w -= qu * (qu.adjoint() * w);
      for (int i = 0; i < found; ++i)
        w -= basis.col(i) * (basis.col(i).adjoint() * w);
    }
    const double nw = w.norm();
    if (nw < 1.0e-6) continue;
    w /= nw;
    for (int j = 0; j <= D; ++j) {
      if (std::abs(w(j)) > 1.0e-8) {
        w *= std::conj(w(j)) / std::abs(w(j));
        break;
      }
    }
    basis.col(found++) = w;
  }
  if (found < g) {
    std::ostringstream os;
    os << "model_space_basis: complement dimension " << found
       << " does not match degree " << g;
    throw precondition_error(os.str());
  }
  for (int i = 0; i < g; ++i)
    rep.ortho_basis.push_back(FourierVector(IndexWindow{0, D}, basis.col(i)));

  rep.sigma = recover_clark_measure(u);
  for (int n = 0; n < rep.sigma.size(); ++n) {
    const Poly col = detail::cauchy_column(u, rep.sigma.atoms[n], D);
    CVector c(D + 1);
    for (int j = 0; j <= D; ++j)
      c(j) = std::sqrt(rep.sigma.masses[n]) * col[static_cast<std::size_t>(j)];
    rep.clark_basis.push_back(FourierVector(IndexWindow{0, D}, std::move(c)));
  }
  return rep;
}

// Matrix of the compressed shift P_{K_u} S |_{K_u} in the orthonormal basis.
// Because every basis vector is orthogonal to all shifted u-columns by
// construction, compressing the truncated coefficient shift is already the
// exact compression.
inline MatrixOperator compressed_shift(const ModelSpaceRep& rep) {
  const int D = rep.window().hi;
  const int g = rep.dim;
  CMatrix q(D + 1, g);
  for (int i = 0; i < g; ++i) q.col(i) = rep.ortho_basis[i].coeffs();
  CMatrix s = CMatrix::Zero(D + 1, D + 1);
  for (int j = 0; j < D; ++j) s(j + 1, j) = 1.0;
  MatrixOperator c;
  c.domain = c.codomain = IndexWindow{0, g - 1};
  c.entries = q.adjoint() * s * q;
  return c;
}

// Matrix of the Clark unitary V_u from mass-orthonormalized atom coordinates
// (coordinate n is the indicator of atom n scaled by 1/sqrt(a_n)) to the
// orthonormal model-space basis.  Column n is sqrt(a_n)(1-u)/(1-z conj(zeta_n)).
inline MatrixOperator clark_unitary(const ModelSpaceRep& rep,
                                    const ClarkMeasure& sigma) {
  if (sigma.size() != rep.dim) {
    std::ostringstream os;
    os << "clark_unitary: " << sigma.size() << " atoms for a model space of "
       << "dimension " << rep.dim;
    throw precondition_error(os.str());
  }
  // The measure must represent the inner function through the Cauchy
  // transform identity; check it at interior samples.
  for (int j = 0; j < 64; ++j) {
    const cplx z = std::polar(0.7, 2.0 * std::numbers::pi * j / 64.0);
    cplx rhs(0.0);
    for (int n = 0; n < sigma.size(); ++n)
      rhs += sigma.masses[n] / (cplx(1.0) - z * std::conj(sigma.atoms[n]));
    const cplx lhs = cplx(1.0) / (cplx(1.0) - rep.inner.eval(z));
    if (std::abs(lhs - rhs) > 1.0e-8 * std::max(1.0, std::abs(lhs)))
      throw precondition_error(
          "clark_unitary: measure does not represent the inner function "
          "(Cauchy transform mismatch)");
  }
  const int D = rep.window().hi;
  CMatrix q(D + 1, rep.dim);
  for (int i = 0; i < rep.dim; ++i) q.col(i) = rep.ortho_basis[i].coeffs();
  CMatrix v(rep.dim, sigma.size());
  for (int n = 0; n < sigma.size(); ++n) {
    const Poly col = detail::cauchy_column(rep.inner, sigma.atoms[n], D);
    CVector c(D + 1);
    for (int j = 0; j <= D; ++j)
      c(j) = std::sqrt(sigma.masses[n]) * col[static_cast<std::size_t>(j)];
    v.col(n) = q.adjoint() * c;
  }
  const double unitarity =
      (v.adjoint() * v - CMatrix::Identity(rep.dim, rep.dim)).cwiseAbs().maxCoeff();
  if (unitarity > 1.0e-6) {
    std::ostringstream os;
    os << "clark_unitary: columns fail unitarity by " << unitarity
       << "; truncation too small for these atoms";
    throw error(os.str());
  }
  MatrixOperator out;
  out.domain = IndexWindow{0, sigma.size() - 1};
  out.codomain = IndexWindow{0, rep.dim - 1};
  out.entries = std::move(v);
  return out;
}

// ---------------------------------------------------------------------------
// Multipliers between model spaces over the same atoms
// ---------------------------------------------------------------------------

struct MultiplierPhi0 {
  Poly num, den;  // phi0 = (1 - v)/(1 - u) as a reduced rational function
  double multiplier_residual = 0.0;   // max ||(I - P_{K_v}) phi0 f|| over basis f
  double density_smallest_sv = 0.0;   // smallest singular value of K_u -> K_v
  int density_rank = 0;               // numerical rank of the same map
  int diagnostic_window = 0;          // D used for the two diagnostics

  cplx eval(cplx z) const { return poly_eval(num, z) / poly_eval(den, z); }
  Poly taylor(int n_terms) const { return series_div(num, den, n_terms); }
};

// phi0 = (1 - v)/(1 - u) for two inner functions over the same atoms.  The
// common boundary-zero factor prod(1 - z conj(zeta_n)) cancels exactly,
// leaving phi0 = A_u/A_v with both polynomials root-free on the closed disk.
// This raw builder performs the pointwise guard only; diagnostics stay zero.
inline MultiplierPhi0 multiplier_phi0_raw(const RationalInner& u,
                                          const RationalInner& v) {
  ClarkMeasure su = recover_clark_measure(u);
  ClarkMeasure sv = recover_clark_measure(v);
  if (su.size() != sv.size()) {
    std::ostringstream os;
    os << "multiplier_phi0: atom supports differ (" << su.size() << " vs "
       << sv.size() << " atoms)";
    throw precondition_error(os.str());
  }
  // Match atoms pairwise by angular position.
  const auto by_arg = [](const cplx& a, const cplx& b) {
    return std::arg(a) < std::arg(b);
  };
  std::vector<int> pu(su.size()), pv(sv.size());
  for (int i = 0; i < su.size(); ++i) pu[i] = pv[i] = i;
  std::sort(pu.begin(), pu.end(),
            [&](int a, int b) { return by_arg(su.atoms[a], su.atoms[b]); });
  std::sort(pv.begin(), pv.end(),
            [&](int a, int b) { return by_arg(sv.atoms[a], sv.atoms[b]); });
  for (int i = 0; i < su.size(); ++i) {
    if (std::abs(su.atoms[pu[i]] - sv.atoms[pv[i]]) > 1.0e-6) {
      std::ostringstream os;
      os << "multiplier_phi0: atom supports differ near argument "
         << std::arg(su.atoms[pu[i]]);
      throw precondition_error(os.str());
    }
  }
  // Rebuild the disk-zero-free numerator polynomials A from each measure,
  // over the shared atom list.
  const std::vector<cplx>& shared = sv.atoms;
  const auto build_a = [&shared](const std::vector<int>& order,
                                 const std::vector<int>& vorder,
                                 const ClarkMeasure& m) {
    Poly a{cplx(0.0)};
    for (std::size_t i = 0; i < shared.size(); ++i) {
      Poly part{m.masses[static_cast<std::size_t>(order[i])]};
      for (std::size_t j = 0; j < shared.size(); ++j) {
        if (j == i) continue;
        part = poly_mul(
            part, Poly{cplx(1.0),
                       -std::conj(shared[static_cast<std::size_t>(vorder[j])])});
      }
      a = poly_add(a, part);
    }
    return a;
  };
  MultiplierPhi0 phi;
  phi.num = build_a(pu, pv, su);
  phi.den = build_a(pv, pv, sv);

  // Guard: the rebuilt rational function must equal (1-v)/(1-u) pointwise.
  for (int j = 0; j < 64; ++j) {
    const cplx z = std::polar(0.6, 2.0 * std::numbers::pi * (j + 0.5) / 64.0);
    const cplx direct = (cplx(1.0) - v.eval(z)) / (cplx(1.0) - u.eval(z));
    const cplx built = poly_eval(phi.num, z) / poly_eval(phi.den, z);
    if (std::abs(direct - built) > 1.0e-7 * std::max(1.0, std::abs(direct)))
      throw error(
          "multiplier_phi0: rebuilt multiplier disagrees with (1-v)/(1-u); "
          "inputs are not Clark-type inner functions of these atoms");
  }
  return phi;
}

// Fills the containment and density diagnostics of a multiplier on the
// coefficient window [0, D]: the residual max_f ||(I - P_{K_v}) phi0 f||
// over the orthonormal K_u basis, and the rank / smallest singular value of
// the induced map K_u -> K_v.
inline void multiplier_diagnostics(const RationalInner& u,
                                   const RationalInner& v, MultiplierPhi0& phi,
                                   int D) {
  phi.diagnostic_window = D;
  const ModelSpaceRep rep_u = model_space_basis(u, D);
  const ModelSpaceRep rep_v = model_space_basis(v, D);
  const Poly tphi = phi.taylor(D + 1);
  CMatrix qv(D + 1, rep_v.dim);
  for (int i = 0; i < rep_v.dim; ++i) qv.col(i) = rep_v.ortho_basis[i].coeffs();
  CMatrix images(D + 1, rep_u.dim);
  for (int i = 0; i < rep_u.dim; ++i) {
    Poly f(static_cast<std::size_t>(D) + 1);
    for (int j = 0; j <= D; ++j)
      f[static_cast<std::size_t>(j)] = rep_u.ortho_basis[i].coeffs()(j);
    const Poly prod = detail::conv_trunc(tphi, f, D + 1);
    for (int j = 0; j <= D; ++j)
      images(j, i) = prod[static_cast<std::size_t>(j)];
  }
  const CMatrix in_kv = qv.adjoint() * images;  // dim_v x dim_u
  phi.multiplier_residual = (images - qv * in_kv).colwise().norm().maxCoeff();
  const Eigen::VectorXd sv_vals = dense_singular_values(in_kv);
  phi.density_smallest_sv = sv_vals(sv_vals.size() - 1);
  const double cutoff = std::max(in_kv.rows(), in_kv.cols()) *
                        std::numeric_limits<double>::epsilon() * sv_vals(0);
  phi.density_rank = 0;
  for (Eigen::Index k = 0; k < sv_vals.size(); ++k)
    if (sv_vals(k) > cutoff) ++phi.density_rank;
}

// Raw construction plus diagnostics on a generous default window.
inline MultiplierPhi0 multiplier_phi0(const RationalInner& u,
                                      const RationalInner& v) {
  MultiplierPhi0 phi = multiplier_phi0_raw(u, v);
  multiplier_diagnostics(u, v, phi, 2 * (u.degree + v.degree) + 96);
  return phi;
}

// ---------------------------------------------------------------------------
// The intertwining triple (T, X, Y)
// ---------------------------------------------------------------------------

struct TXYSystem {
  MatrixOperator T;  // S plus a rank-one correction, on [0, D]
  MatrixOperator X;  // X(v h + g) = u phi0 h + g
  MatrixOperator Y;  // Y(u h + f) = v h + phi0 f
  cplx c;            // unimodular constant with phi0 = c v conj(u) conj(phi0)
  double c_variance = 0.0;  // circle-sample variance of the c recovery
  int deg_u = 0, deg_v = 0;
};

// Builds the triple realizing YS = TY, XT = SX, XY = phi0(S) at truncation
// scale, where T = S + (v - phi0 u) (x) (1/(conj(c) phi0(0))) P(v conj(chi)).
// The identities hold on interior coefficient indices 0..D-deg(u)-deg(v);
// the top block is truncation-corrupted by construction.
inline TXYSystem build_TXY(const RationalInner& u, const RationalInner& v,
                           const MultiplierPhi0& phi, int D) {
  const int gu = u.degree;
  const int gv = v.degree;
  if (D < 2 * (gu + gv) + 16)
    throw precondition_error(
        "build_TXY: window must cover twice the combined degree plus 16");
  const cplx phi0_at_0 = phi.eval(cplx(0.0));
  if (std::abs(phi0_at_0) < 1.0e-12)
    throw precondition_error("build_TXY: phi0(0) = 0, rank-one term undefined");

  // Recover c from phi0 = c v conj(u) conj(phi0) on the circle.
  cplx c_sum(0.0);
  std::vector<cplx> c_samples(256);
  for (int j = 0; j < 256; ++j) {
    const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * j / 256.0);
    const cplx pz = phi.eval(z);
    c_samples[j] = pz / (v.eval(z) * std::conj(u.eval(z)) * std::conj(pz));
    c_sum += c_samples[j];
  }
  TXYSystem sys;
  sys.deg_u = gu;
  sys.deg_v = gv;
  sys.c = c_sum / 256.0;
  for (const cplx& s : c_samples)
    sys.c_variance += std::norm(s - sys.c) / 256.0;
  if (sys.c_variance >= 1.0e-8) {
    std::ostringstream os;
    os << "build_TXY: c is not constant on the circle (variance "
       << sys.c_variance << ")";
    throw error(os.str());
  }

  const IndexWindow w{0, D};
  const Poly tu = u.taylor(D + 2);
  const Poly tv = v.taylor(D + 2);
  const Poly tphi = phi.taylor(D + 1);
  const Poly tphiu = detail::conv_trunc(tphi, tu, D + 1);

  // T = S + (v - phi0 u) (x) s * (v/chi), s = 1/(conj(c) phi0(0)).
  CMatrix t = CMatrix::Zero(D + 1, D + 1);
  for (int j = 0; j < D; ++j) t(j + 1, j) = 1.0;
  const cplx s_scale = cplx(1.0) / (std::conj(sys.c) * phi0_at_0);
  CVector left(D + 1), right(D + 1);
  for (int j = 0; j <= D; ++j) {
    left(j) = tv[static_cast<std::size_t>(j)] - tphiu[static_cast<std::size_t>(j)];
    right(j) = s_scale * tv[static_cast<std::size_t>(j) + 1];
  }
  t += left * right.adjoint();
  sys.T.domain = sys.T.codomain = w;
  sys.T.entries = std::move(t);

  // Y and X by change of basis: the columns {inner * chi^k} + model-space
  // basis span the window, and the images of those columns are explicit.
  const ModelSpaceRep rep_u = model_space_basis(u, D);
  const ModelSpaceRep rep_v = model_space_basis(v, D);
  const auto assemble = [D](const CMatrix& shifts,
                            const std::vector<FourierVector>& basis) {
    CMatrix m(D + 1, shifts.cols() + static_cast<Eigen::Index>(basis.size()));
    m.leftCols(shifts.cols()) = shifts;
    for (std::size_t i = 0; i < basis.size(); ++i)
      m.col(shifts.cols() + static_cast<Eigen::Index>(i)) = basis[i].coeffs();
    return m;
  };
  const auto multiply_columns = [D, &tphi](const std::vector<FourierVector>& basis) {
    CMatrix m(D + 1, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
      Poly f(static_cast<std::size_t>(D) + 1);
      for (int j = 0; j <= D; ++j)
        f[static_cast<std::size_t>(j)] = basis[i].coeffs()(j);
      const Poly prod = detail::conv_trunc(tphi, f, D + 1);
      for (int j = 0; j <= D; ++j)
        m(j, static_cast<Eigen::Index>(i)) = prod[static_cast<std::size_t>(j)];
    }
    return m;
  };

  // Y: domain basis [u chi^k | f_i] -> images [v chi^k | phi0 f_i].
  {
    const CMatrix in = assemble(detail::shifted_columns(tu, D, gu), rep_u.ortho_basis);
    CMatrix out(D + 1, D + 1);
    out.leftCols(D - gu + 1) = detail::shifted_columns(tv, D, gu);
    out.rightCols(gu) = multiply_columns(rep_u.ortho_basis);
    Eigen::PartialPivLU<CMatrix> lu(in);
    sys.Y.domain = sys.Y.codomain = w;
    sys.Y.entries = out * lu.inverse();
  }
  // X: domain basis [v chi^k | g_i] -> images [u phi0 chi^k | g_i].
  {
    const CMatrix in = assemble(detail::shifted_columns(tv, D, gv), rep_v.ortho_basis);
    CMatrix out(D + 1, D + 1);
    out.leftCols(D - gv + 1) = detail::shifted_columns(tphiu, D, gv);
    for (int i = 0; i < gv; ++i)
      out.col(D - gv + 1 + i) = rep_v.ortho_basis[static_cast<std::size_t>(i)].coeffs();
    Eigen::PartialPivLU<CMatrix> lu(in);
    sys.X.domain = sys.X.codomain = w;
    sys.X.entries = out * lu.inverse();
  }
  return sys;
}

struct TXYResiduals {
  double ys_ty = 0.0;    // max entry of YS - TY on interior indices
  double xt_sx = 0.0;    // max entry of XT - SX on interior indices
  double xy_phi0 = 0.0;  // max entry of XY - phi0(S) on interior indices
  int interior_hi = 0;   // identities asserted on indices 0..interior_hi
};

// Lower-triangular Toeplitz matrix of multiplication by phi0 on [0, D]: the
// truncation of phi0(S).
inline MatrixOperator phi0_of_shift(const MultiplierPhi0& phi, int D) {
  const Poly t = phi.taylor(D + 1);
  MatrixOperator m;
  m.domain = m.codomain = IndexWindow{0, D};
  m.entries = CMatrix::Zero(D + 1, D + 1);
  for (int j = 0; j <= D; ++j)
    for (int i = j; i <= D; ++i)
      m.entries(i, j) = t[static_cast<std::size_t>(i - j)];
  return m;
}

// Interior residuals of the three intertwining identities.  The truncation
// corrupts the top deg(u) + deg(v) coefficient indices (an input monomial
// there shifts the inner-times-monomial expansion out of the window), so the
// identities are asserted on the leading block 0..D-deg(u)-deg(v) only.
inline TXYResiduals txy_interior_residuals(const TXYSystem& sys,
                                           const MultiplierPhi0& phi) {
  const int D = sys.T.domain.hi;
  TXYResiduals r;
  r.interior_hi = D - sys.deg_u - sys.deg_v;
  if (r.interior_hi < 0)
    throw precondition_error(
        "txy_interior_residuals: window smaller than the combined degree");
  const int m = r.interior_hi + 1;
  CMatrix s = CMatrix::Zero(D + 1, D + 1);
  for (int j = 0; j < D; ++j) s(j + 1, j) = 1.0;
  const CMatrix r1 = sys.Y.entries * s - sys.T.entries * sys.Y.entries;
  const CMatrix r2 = sys.X.entries * sys.T.entries - s * sys.X.entries;
  const CMatrix r3 =
      sys.X.entries * sys.Y.entries - phi0_of_shift(phi, D).entries;
  r.ys_ty = r1.topLeftCorner(m, m).cwiseAbs().maxCoeff();
  r.xt_sx = r2.topLeftCorner(m, m).cwiseAbs().maxCoeff();
  r.xy_phi0 = r3.topLeftCorner(m, m).cwiseAbs().maxCoeff();
  return r;
}

// ---------------------------------------------------------------------------
// Paired measures from a circle density
// ---------------------------------------------------------------------------

// From a base measure (atoms, masses) and a positive circle function h1,
// produce the pair (sigma_v, sigma_u) with sigma_u proportional to
// h1-reweighted masses, renormalized to a probability measure.
inline std::pair<ClarkMeasure, ClarkMeasure> dirac_example_pair(
    const std::function<double(cplx)>& h1, const std::vector<cplx>& zetas,
    const std::vector<double>& masses) {
  ClarkMeasure sigma_v = make_clark_measure(zetas, masses);
  std::vector<double> reweighted(sigma_v.masses.size());
  for (std::size_t n = 0; n < sigma_v.masses.size(); ++n) {
    const double hn = h1(sigma_v.atoms[n]);
    if (!(hn > 0.0)) {
      std::ostringstream os;
      os << "dirac_example_pair: h1 = " << hn << " at atom " << n
         << " must be positive";
      throw precondition_error(os.str());
    }
    reweighted[n] = sigma_v.masses[n] * hn;
  }
  ClarkMeasure sigma_u = make_clark_measure(sigma_v.atoms, std::move(reweighted));
  return {std::move(sigma_v), std::move(sigma_u)};
}

// ---------------------------------------------------------------------------
// Kernel growth diagnostics
// ---------------------------------------------------------------------------

struct KernelProfile {
  std::vector<cplx> grid;            // circle sample points
  std::vector<double> kernel_norms;  // ||k_{u,zeta}|| at each sample
  std::vector<double> thresholds;    // dyadic ladder C_n = 2^n
  std::vector<double> level_fractions;  // fraction with C_n < ||k|| <= C_{n+1}
};

// Norm profile of the reproducing kernels over a circle grid, with dyadic
// level-set occupancy: the finite-scale stand-in for kernel-growth level
// sets used in exhaustion arguments.
inline KernelProfile kernel_norm_profile(const RationalInner& u, int grid_size,
                                         int D) {
  if (grid_size < 4)
    throw precondition_error("kernel_norm_profile: grid too small");
  KernelProfile p;
  double max_norm = 0.0;
  for (int j = 0; j < grid_size; ++j) {
    const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / grid_size);
    p.grid.push_back(z);
    const double n = reproducing_kernel(u, z, D).norm();
    p.kernel_norms.push_back(n);
    max_norm = std::max(max_norm, n);
  }
  double level = 1.0;
  while (level <= max_norm) {
    p.thresholds.push_back(level);
    level *= 2.0;
  }
  p.thresholds.push_back(level);
  p.level_fractions.assign(p.thresholds.size() - 1, 0.0);
  for (double n : p.kernel_norms)
    for (std::size_t k = 0; k + 1 < p.thresholds.size(); ++k)
      if (n > p.thresholds[k] && n <= p.thresholds[k + 1])
        p.level_fractions[k] += 1.0 / grid_size;
  return p;
}

// The model-space conjugation f |-> u conj(chi) conj(f) at coefficient
// level: (Cf)(n) = sum_j conj(f(j)) u(n+1+j).  It is an involution on K_u;
// applying it twice returns f up to truncation tails.
inline FourierVector kernel_conjugation(const RationalInner& u,
                                        const FourierVector& f) {
  if (f.window().lo != 0)
    throw precondition_error(
        "kernel_conjugation: expected a Taylor window starting at 0");
  const int D = f.window().hi;
  const Poly tu = u.taylor(2 * D + 2);
  CVector out = CVector::Zero(D + 1);
  for (int n = 0; n <= D; ++n) {
    cplx v(0.0);
    for (int j = 0; j <= D; ++j)
      v += std::conj(f.coeffs()(j)) * tu[static_cast<std::size_t>(n + 1 + j)];
    out(n) = v;
  }
  return FourierVector(f.window(), std::move(out));
}

}  // namespace asymlab
