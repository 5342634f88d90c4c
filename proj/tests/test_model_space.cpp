// Model spaces of atomic measures: inner-function round trips, reproducing
// kernels, compressed shifts, Clark unitaries, conjugations, multipliers,
// and the (T, X, Y) intertwining triple.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numbers>

#include "asymlab/model_space.hpp"

using namespace asymlab;

namespace {

cplx horner(const FourierVector& f, cplx z) {
  cplx v(0.0);
  for (int j = f.window().hi; j >= f.window().lo; --j) v = v * z + f.at(j);
  return v;
}

CMatrix poly_at_matrix(const Poly& p, const CMatrix& m) {
  const CMatrix id = CMatrix::Identity(m.rows(), m.cols());
  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  for (std::size_t j = p.size(); j-- > 0;) out = out * m + p[j] * id;
  return out;
}

ClarkMeasure three_atoms() {
  const cplx w = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  return make_clark_measure({cplx(1.0), w, w * w}, {0.2, 0.3, 0.5});
}

void sort_by_arg(ClarkMeasure& m) {
  std::vector<int> idx(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::arg(m.atoms[static_cast<std::size_t>(a)]) <
           std::arg(m.atoms[static_cast<std::size_t>(b)]);
  });
  ClarkMeasure s;
  for (int i : idx) {
    s.atoms.push_back(m.atoms[static_cast<std::size_t>(i)]);
    s.masses.push_back(m.masses[static_cast<std::size_t>(i)]);
  }
  m = std::move(s);
}

}  // namespace

TEST_CASE("clark measures normalize and reject bad atoms") {
  const ClarkMeasure m = make_clark_measure({cplx(1.0), cplx(-1.0)}, {0.9, 1.1});
  CHECK(m.masses[0] == Catch::Approx(0.45));
  CHECK(m.masses[1] == Catch::Approx(0.55));
  CHECK_THROWS_AS(make_clark_measure({}, {}), precondition_error);
  CHECK_THROWS_AS(make_clark_measure({cplx(1.0)}, {0.5, 0.5}), precondition_error);
  CHECK_THROWS_AS(make_clark_measure({cplx(0.5)}, {1.0}), precondition_error);
  CHECK_THROWS_AS(make_clark_measure({cplx(1.0)}, {-1.0}), precondition_error);
  CHECK_THROWS_AS(make_clark_measure({cplx(1.0), cplx(1.0)}, {0.5, 0.5}),
                  precondition_error);
}

TEST_CASE("one atom at 1 gives u = z, antipodal halves give u = z squared") {
  const RationalInner u1 = clark_inner(make_clark_measure({cplx(1.0)}, {1.0}));
  const Poly t1 = u1.taylor(6);
  CHECK(std::abs(t1[0]) < 1e-12);
  CHECK(std::abs(t1[1] - cplx(1.0)) < 1e-12);
  for (int j = 2; j < 6; ++j) CHECK(std::abs(t1[static_cast<std::size_t>(j)]) < 1e-12);

  const RationalInner u2 =
      clark_inner(make_clark_measure({cplx(1.0), cplx(-1.0)}, {0.5, 0.5}));
  CHECK(u2.degree == 2);
  const Poly t2 = u2.taylor(6);
  CHECK(std::abs(t2[0]) < 1e-12);
  CHECK(std::abs(t2[1]) < 1e-12);
  CHECK(std::abs(t2[2] - cplx(1.0)) < 1e-12);
  for (int j = 3; j < 6; ++j) CHECK(std::abs(t2[static_cast<std::size_t>(j)]) < 1e-12);
  CHECK(u2.pole_radius() == std::numeric_limits<double>::infinity());
}

TEST_CASE("measure round trip through the inner function") {
  ClarkMeasure in = three_atoms();
  const RationalInner u = clark_inner(in);
  CHECK(u.degree == 3);
  CHECK(u.pole_radius() > 1.0);
  ClarkMeasure out = recover_clark_measure(u);
  sort_by_arg(in);
  sort_by_arg(out);
  REQUIRE(out.size() == in.size());
  for (int n = 0; n < in.size(); ++n) {
    CHECK(std::abs(out.atoms[static_cast<std::size_t>(n)] -
                   in.atoms[static_cast<std::size_t>(n)]) < 1e-10);
    CHECK(out.masses[static_cast<std::size_t>(n)] ==
          Catch::Approx(in.masses[static_cast<std::size_t>(n)]).margin(1e-10));
  }
  // The defining partial-fraction identity 1/(1-u) = sum a_n/(1 - z conj(z_n)).
  for (int j = 0; j < 16; ++j) {
    const cplx z = std::polar(0.55, 0.4 * j + 0.1);
    cplx rhs(0.0);
    for (int n = 0; n < in.size(); ++n)
      rhs += in.masses[static_cast<std::size_t>(n)] /
             (cplx(1.0) - z * std::conj(in.atoms[static_cast<std::size_t>(n)]));
    CHECK(std::abs(cplx(1.0) / (cplx(1.0) - u.eval(z)) - rhs) < 1e-10);
  }
}

TEST_CASE("inner function validation rejects non inner data") {
  // |u| != 1 on the circle.
  CHECK_THROWS_AS(make_rational_inner(Poly{cplx(0.0), cplx(0.5)}, Poly{cplx(1.0)}),
                  precondition_error);
  // u(0) != 0.
  CHECK_THROWS_AS(make_rational_inner(Poly{cplx(1.0)}, Poly{cplx(1.0)}),
                  precondition_error);
  // Unimodular with u(0) = 0 but a pole inside the disk:
  // u = z (1 - z/2) / (1/2 - z) has |u| = 1 on the circle and a pole at 1/2.
  CHECK_THROWS_AS(
      make_rational_inner(Poly{cplx(0.0), cplx(1.0), cplx(-0.5)},
                          Poly{cplx(0.5), cplx(-1.0)}),
      precondition_error);
  CHECK_THROWS_AS(monomial_inner(0), precondition_error);
}

TEST_CASE("reproducing kernel reproduces model space values") {
  const RationalInner u =
      clark_inner(make_clark_measure({cplx(1.0), cplx(-1.0)}, {0.45, 0.55}));
  const int D = 36;
  const ModelSpaceRep rep = model_space_basis(u, D);
  for (const cplx z0 : {cplx(0.3, 0.2), cplx(-0.1, 0.45), cplx(0.0)}) {
    const FourierVector k = reproducing_kernel(u, z0, D);
    for (const FourierVector& f : rep.ortho_basis)
      CHECK(std::abs(weighted_inner(f, k) - horner(f, z0)) < 1e-10);
  }
  // Boundary kernel at an atom: squared norm = 1/mass there.
  ClarkMeasure sig = rep.sigma;
  sort_by_arg(sig);
  for (int n = 0; n < sig.size(); ++n) {
    const FourierVector k =
        reproducing_kernel(u, sig.atoms[static_cast<std::size_t>(n)], D);
    CHECK(k.norm() * k.norm() ==
          Catch::Approx(1.0 / sig.masses[static_cast<std::size_t>(n)]).epsilon(1e-9));
  }
  // Series extraction agrees with the rational formula at an interior point.
  const cplx xi = std::polar(1.0, 0.71);
  const FourierVector kb = reproducing_kernel(u, xi, D);
  const cplx z(0.2, -0.3);
  const cplx direct = (cplx(1.0) - std::conj(u.eval(xi)) * u.eval(z)) /
                      (cplx(1.0) - std::conj(xi) * z);
  CHECK(std::abs(horner(kb, z) - direct) < 1e-10);
  CHECK_THROWS_AS(reproducing_kernel(u, cplx(0.3), 2), precondition_error);
  CHECK_THROWS_AS(reproducing_kernel(u, cplx(1.5, 0.0), D), precondition_error);
}

TEST_CASE("monomial model space basis is the monomial basis") {
  const int g = 3;
  const RationalInner u = monomial_inner(g);
  const ModelSpaceRep rep = model_space_basis(u, 2 * g + 16);
  REQUIRE(rep.dim == g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j <= rep.window().hi; ++j)
      CHECK(std::abs(rep.ortho_basis[static_cast<std::size_t>(i)].at(j) -
                     (i == j ? cplx(1.0) : cplx(0.0))) < 1e-12);
  CHECK_THROWS_AS(model_space_basis(u, 2 * g + 15), precondition_error);
}

TEST_CASE("model space basis is orthonormal and kills shifted inner columns") {
  const RationalInner u = clark_inner(three_atoms());
  const int D = 2 * u.degree + 32;
  const ModelSpaceRep rep = model_space_basis(u, D);
  REQUIRE(rep.dim == 3);
  for (int i = 0; i < rep.dim; ++i)
    for (int j = 0; j < rep.dim; ++j)
      CHECK(std::abs(weighted_inner(rep.ortho_basis[static_cast<std::size_t>(i)],
                                    rep.ortho_basis[static_cast<std::size_t>(j)]) -
                     (i == j ? cplx(1.0) : cplx(0.0))) < 1e-12);
  // Orthogonality to u z^k for every k that fits the window.
  const Poly tu = u.taylor(D + 1);
  for (int k = 0; k + u.degree <= D; ++k) {
    FourierVector col = FourierVector::zero(IndexWindow{0, D});
    for (int j = k; j <= D; ++j)
      if (static_cast<std::size_t>(j - k) < tu.size())
        col.set(j, tu[static_cast<std::size_t>(j - k)]);
    for (const FourierVector& f : rep.ortho_basis)
      CHECK(std::abs(weighted_inner(f, col)) < 1e-10);
  }
  // Clark columns live in the model space and are unit vectors.
  for (const FourierVector& c : rep.clark_basis)
    CHECK(c.norm() == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("compressed shift of a monomial inner is the nilpotent jordan cell") {
  const RationalInner u = monomial_inner(2);
  const ModelSpaceRep rep = model_space_basis(u, 2 * 2 + 16);
  const MatrixOperator s = compressed_shift(rep);
  REQUIRE(s.entries.rows() == 2);
  CHECK(std::abs(s.entries(1, 0) - cplx(1.0)) < 1e-12);
  CHECK(std::abs(s.entries(0, 0)) < 1e-12);
  CHECK(std::abs(s.entries(0, 1)) < 1e-12);
  CHECK(std::abs(s.entries(1, 1)) < 1e-12);
  CHECK((s.entries * s.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("the inner function annihilates its own compressed shift") {
  const RationalInner u = clark_inner(three_atoms());
  const ModelSpaceRep rep = model_space_basis(u, 2 * u.degree + 32);
  const MatrixOperator s = compressed_shift(rep);
  // u(S) = num(S) den(S)^{-1}; den(S) is invertible, so num(S) must vanish.
  CHECK(poly_at_matrix(u.num, s.entries).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("clark unitary is unitary and checks its measure") {
  const RationalInner u = clark_inner(three_atoms());
  const ModelSpaceRep rep = model_space_basis(u, 2 * u.degree + 32);
  const MatrixOperator v = clark_unitary(rep, rep.sigma);
  const Eigen::Index d = v.entries.rows();
  CHECK((v.entries.adjoint() * v.entries - CMatrix::Identity(d, d))
            .cwiseAbs()
            .maxCoeff() < 1e-9);
  CHECK((v.entries * v.entries.adjoint() - CMatrix::Identity(d, d))
            .cwiseAbs()
            .maxCoeff() < 1e-9);
  // A measure with the right atoms but wrong masses fails the Cauchy
  // transform representation check.
  ClarkMeasure wrong = rep.sigma;
  std::rotate(wrong.masses.begin(), wrong.masses.begin() + 1, wrong.masses.end());
  CHECK_THROWS_AS(clark_unitary(rep, wrong), precondition_error);
  ClarkMeasure fewer = make_clark_measure({cplx(1.0)}, {1.0});
  CHECK_THROWS_AS(clark_unitary(rep, fewer), precondition_error);
}

TEST_CASE("kernel conjugation is an antilinear involutive isometry") {
  // For u = z^2 the conjugation swaps 1 and z exactly.
  const RationalInner u2 = monomial_inner(2);
  FourierVector one = FourierVector::unit(IndexWindow{0, 20}, 0);
  const FourierVector c_one = kernel_conjugation(u2, one);
  CHECK(std::abs(c_one.at(1) - cplx(1.0)) < 1e-14);
  CHECK(std::abs(c_one.at(0)) < 1e-14);
  const FourierVector back = kernel_conjugation(u2, c_one);
  CHECK(std::abs(back.at(0) - cplx(1.0)) < 1e-14);

  const RationalInner u = clark_inner(three_atoms());
  const ModelSpaceRep rep = model_space_basis(u, 2 * u.degree + 32);
  for (const FourierVector& f : rep.ortho_basis) {
    const FourierVector cf = kernel_conjugation(u, f);
    CHECK(cf.norm() == Catch::Approx(f.norm()).epsilon(1e-8));
    const FourierVector ccf = kernel_conjugation(u, cf);
    double gap = 0.0;
    for (int j = 0; j <= rep.window().hi; ++j)
      gap = std::max(gap, std::abs(ccf.at(j) - f.at(j)));
    CHECK(gap < 1e-8);
  }
  // Antilinearity in the scalar.
  const cplx a(0.3, -0.8);
  FourierVector af = FourierVector::zero(rep.window());
  for (int j = 0; j <= rep.window().hi; ++j)
    af.set(j, a * rep.ortho_basis[0].at(j));
  const FourierVector caf = kernel_conjugation(u, af);
  const FourierVector cf = kernel_conjugation(u, rep.ortho_basis[0]);
  double gap = 0.0;
  for (int j = 0; j <= rep.window().hi; ++j)
    gap = std::max(gap, std::abs(caf.at(j) - std::conj(a) * cf.at(j)));
  CHECK(gap < 1e-10);
  CHECK_THROWS_AS(kernel_conjugation(u, FourierVector::unit(IndexWindow{-2, 2}, 0)),
                  precondition_error);
}

TEST_CASE("multiplier between antipodal pairs matches the defining ratio") {
  const RationalInner u =
      clark_inner(make_clark_measure({cplx(1.0), cplx(-1.0)}, {0.5, 0.5}));
  const RationalInner v =
      clark_inner(make_clark_measure({cplx(1.0), cplx(-1.0)}, {0.45, 0.55}));
  const MultiplierPhi0 phi = multiplier_phi0(u, v);
  CHECK(std::abs(phi.eval(cplx(0.0)) - cplx(1.0)) < 1e-12);
  for (int j = 0; j < 17; ++j) {
    const cplx z = std::polar(0.4, 0.37 * j);
    const cplx direct = (cplx(1.0) - v.eval(z)) / (cplx(1.0) - u.eval(z));
    CHECK(std::abs(phi.eval(z) - direct) < 1e-10);
  }
  CHECK(phi.multiplier_residual < 1e-8);
  CHECK(phi.density_rank == 2);
  CHECK(phi.density_smallest_sv > 1e-6);
}

TEST_CASE("multipliers require identical atom supports") {
  const RationalInner u =
      clark_inner(make_clark_measure({cplx(1.0), cplx(-1.0)}, {0.5, 0.5}));
  const RationalInner v = clark_inner(
      make_clark_measure({cplx(1.0), cplx(0.0, 1.0)}, {0.5, 0.5}));
  CHECK_THROWS_AS(multiplier_phi0_raw(u, v), precondition_error);
  const RationalInner w = clark_inner(make_clark_measure({cplx(1.0)}, {1.0}));
  CHECK_THROWS_AS(multiplier_phi0_raw(u, w), precondition_error);
}

TEST_CASE("txy triple intertwines on the interior") {
  const RationalInner u =
      clark_inner(make_clark_measure({cplx(1.0), cplx(-1.0)}, {0.5, 0.5}));
  const RationalInner v =
      clark_inner(make_clark_measure({cplx(1.0), cplx(-1.0)}, {0.45, 0.55}));
  const MultiplierPhi0 phi = multiplier_phi0_raw(u, v);
  const int D = 2 * (u.degree + v.degree) + 32;
  const TXYSystem sys = build_TXY(u, v, phi, D);
  CHECK(std::abs(std::abs(sys.c) - 1.0) < 1e-10);
  CHECK(sys.c_variance < 1e-10);
  const TXYResiduals res = txy_interior_residuals(sys, phi);
  CHECK(res.interior_hi == D - 4);
  CHECK(res.ys_ty < 1e-10);
  CHECK(res.xt_sx < 1e-10);
  CHECK(res.xy_phi0 < 1e-10);
  // T - S has rank exactly one.
  CMatrix s = CMatrix::Zero(D + 1, D + 1);
  for (int j = 0; j < D; ++j) s(j + 1, j) = 1.0;
  const Eigen::VectorXd sv = dense_singular_values(sys.T.entries - s);
  CHECK(sv(0) > 1e-6);
  CHECK(sv(1) < 1e-10 * sv(0));
  CHECK_THROWS_AS(build_TXY(u, v, phi, 2 * (u.degree + v.degree) + 15),
                  precondition_error);
}

TEST_CASE("txy triple with equal inner functions degenerates to the shift") {
  const RationalInner u =
      clark_inner(make_clark_measure({cplx(1.0), cplx(-1.0)}, {0.45, 0.55}));
  const MultiplierPhi0 phi = multiplier_phi0_raw(u, u);
  const int D = 2 * (2 * u.degree) + 16;
  const TXYSystem sys = build_TXY(u, u, phi, D);
  CMatrix s = CMatrix::Zero(D + 1, D + 1);
  for (int j = 0; j < D; ++j) s(j + 1, j) = 1.0;
  CHECK((sys.T.entries - s).cwiseAbs().maxCoeff() < 1e-12);
  const CMatrix id = CMatrix::Identity(D + 1, D + 1);
  CHECK((sys.X.entries - id).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((sys.Y.entries - id).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("reweighted measure pairs keep exact mass ratios") {
  const auto h1 = [](cplx z) { return 1.0 + 0.5 * z.real(); };
  const cplx w = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  const auto [sv, su] = dirac_example_pair(h1, {cplx(1.0), w, w * w},
                                           {0.2, 0.3, 0.5});
  double z_norm = 0.0;
  for (int n = 0; n < sv.size(); ++n)
    z_norm += sv.masses[static_cast<std::size_t>(n)] *
              h1(sv.atoms[static_cast<std::size_t>(n)]);
  for (int n = 0; n < sv.size(); ++n) {
    const double want = sv.masses[static_cast<std::size_t>(n)] *
                        h1(sv.atoms[static_cast<std::size_t>(n)]) / z_norm;
    CHECK(su.masses[static_cast<std::size_t>(n)] ==
          Catch::Approx(want).epsilon(1e-14));
  }
  // A density vanishing at an atom is rejected.
  const auto bad = [](cplx z) { return z.real(); };
  CHECK_THROWS_AS(dirac_example_pair(bad, {cplx(1.0), cplx(0.0, 1.0)}, {0.5, 0.5}),
                  precondition_error);
}

TEST_CASE("kernel norm profile of the antipodal monomial is flat") {
  // For u = z^2 every boundary kernel is 1 + conj(xi) z, of norm sqrt(2):
  // one dyadic level holds the whole circle.
  const KernelProfile p = kernel_norm_profile(monomial_inner(2), 64, 36);
  REQUIRE(p.kernel_norms.size() == 64);
  for (double n : p.kernel_norms)
    CHECK(n == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
  REQUIRE(p.thresholds.size() == 2);
  REQUIRE(p.level_fractions.size() == 1);
  CHECK(p.level_fractions[0] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(kernel_norm_profile(monomial_inner(2), 2, 36),
                  precondition_error);
}
