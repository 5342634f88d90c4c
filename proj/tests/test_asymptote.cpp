// Long-run probes: Cesaro Gram limits against closed-form and brute-force
// oracles, power bounds, orbit-class tags, Riesz bounds, ladder verdicts,
// and the delta_n |Q_n| products.
#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "asymlab/asymptote.hpp"
#include "asymlab/weighted_shift.hpp"

using namespace asymlab;

namespace {

std::vector<FourierVector> two_probes(const IndexWindow& w, unsigned seed) {
  std::mt19937 g(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<FourierVector> probes;
  for (int j = 0; j < 2; ++j) {
    FourierVector f = FourierVector::zero(w);
    for (int n = w.lo; n <= w.hi; ++n) f.set(n, cplx(u(g), u(g)));
    probes.push_back(std::move(f));
  }
  return probes;
}

}  // namespace

TEST_CASE("cesaro gram limit of a diagonal contraction has a closed form") {
  // D = diag(d_k): (D^n x, D^n y) -> sum over |d_k| = 1 of x_k conj(y_k).
  const IndexWindow w{0, 5};
  CMatrix d = CMatrix::Zero(6, 6);
  const std::vector<double> mods{1.0, 0.9, 1.0, 0.5, 0.99, 1.0};
  for (int k = 0; k < 6; ++k) d(k, k) = std::polar(mods[k], 0.7 * k + 0.1);
  const MatrixOperator op(w, w, d);
  const auto probes = two_probes(w, 3);
  const GramLimitReport rep = cesaro_gram_limit(op, probes, 4096, 1e-10);
  CHECK(rep.converged);
  CMatrix want = CMatrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 6; ++k)
        if (mods[k] == 1.0)
          want(i, j) +=
              probes[i].at(k) * std::conj(probes[j].at(k));
  // |d| = 0.99 decays like 0.99^{2n}; at the convergence tolerance it has
  // effectively vanished.
  CHECK((rep.gram - want).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("cesaro gram limit matches a brute force mean") {
  // Small non-normal contraction; oracle averages (T^n x_i, T^n x_j)
  // directly over a long run of powers.
  const IndexWindow w{0, 3};
  CMatrix t = CMatrix::Zero(4, 4);
  t << cplx(0.0), cplx(1.0), cplx(0.0), cplx(0.0),
       cplx(0.0), cplx(0.0), cplx(0.5), cplx(0.0),
       cplx(0.0), cplx(0.0), cplx(0.0), cplx(0.0),
       cplx(0.0), cplx(0.0), cplx(0.0), std::polar(1.0, 0.3);
  const MatrixOperator op(w, w, t);
  const auto probes = two_probes(w, 7);
  const GramLimitReport rep = cesaro_gram_limit(op, probes, 1024, 1e-12);
  CMatrix mean = CMatrix::Zero(2, 2);
  CMatrix y(4, 2);
  y.col(0) = probes[0].orthonormal();
  y.col(1) = probes[1].orthonormal();
  const int runs = 200;
  for (int n = 1; n <= runs; ++n) {
    y = t * y;
    if (n > runs / 2) mean += (y.adjoint() * y).conjugate();
  }
  mean /= static_cast<double>(runs / 2);
  CHECK((rep.gram - mean).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("cesaro gram limit of a truncated isometry is the exact gram") {
  // The unweighted unilateral shift moves interior probes isometrically as
  // long as their orbit stays inside the window.
  const IndexWindow w{0, 80};
  CMatrix s = CMatrix::Zero(81, 81);
  for (int n = 0; n < 80; ++n) s(n + 1, n) = 1.0;
  const MatrixOperator op(w, w, s);
  std::vector<FourierVector> probes;
  std::mt19937 g(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int j = 0; j < 3; ++j) {
    FourierVector f = FourierVector::zero(w);
    for (int n = 0; n <= 16; ++n) f.set(n, cplx(u(g), u(g)));
    probes.push_back(std::move(f));
  }
  const GramLimitReport rep = cesaro_gram_limit(op, probes, 32, 1e-10);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(rep.gram(i, j) - weighted_inner(probes[i], probes[j])) <
            1e-10);
}

TEST_CASE("gram limit report flags power growth") {
  const IndexWindow w{0, 2};
  const MatrixOperator op(w, w, 2.0 * CMatrix::Identity(3, 3));
  CHECK_THROWS_AS(cesaro_gram_limit(op, two_probes(w, 1), 256),
                  not_power_bounded_error);
}

TEST_CASE("power bound closed forms") {
  const IndexWindow w{0, 3};
  // Unitary: every power has norm exactly 1.
  CMatrix u = CMatrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) u(k, k) = std::polar(1.0, 0.4 * k + 0.2);
  CHECK(power_bound(MatrixOperator(w, w, u), 32) ==
        Catch::Approx(1.0).epsilon(1e-9));
  // Contraction: bounded by 1.
  CHECK(power_bound(MatrixOperator(w, w, 0.5 * u), 32) <= 1.0 + 1e-12);
  // 2x2 Jordan cell at 1: |J^n| grows without bound; the max over n <= 64
  // matches the dense norm of the explicit power [[1, n], [0, 1]].
  const IndexWindow w2{0, 1};
  CMatrix j(2, 2);
  j << 1.0, 1.0, 0.0, 1.0;
  double want = 0.0;
  for (int n = 1; n <= 64; ++n) {
    CMatrix jn(2, 2);
    jn << 1.0, static_cast<double>(n), 0.0, 1.0;
    want = std::max(want, dense_singular_values(jn)(0));
  }
  CHECK(power_bound(MatrixOperator(w2, w2, j), 64) ==
        Catch::Approx(want).epsilon(1e-8));
  // Genuine exponential growth trips the cap.
  CHECK_THROWS_AS(power_bound(MatrixOperator(w, w, 2.0 * CMatrix::Identity(4, 4)), 64),
                  not_power_bounded_error);
}

TEST_CASE("orbit classes of shifts") {
  // Unweighted truncated bilateral shift: interior orbits keep their norm in
  // both directions while they stay inside the window.
  const int m = 64;
  const IndexWindow w{-m, m};
  CMatrix s = CMatrix::Zero(w.size(), w.size());
  for (int n = -m; n < m; ++n) s(w.offset(n + 1), w.offset(n)) = 1.0;
  const MatrixOperator op(w, w, s);
  const std::vector<FourierVector> probes{FourierVector::unit(w, 0),
                                          FourierVector::unit(w, -1)};
  const CClassTag tag = classify_c_class(op, probes, 32);
  CHECK(tag.forward == CClass::c1dot);
  CHECK(tag.backward == CClass::c1dot);
  // Sub-exponentially weighted shift: forward orbits survive, backward
  // orbits die (the weights divide them away).
  const Weight ws = Weight::stretched(0.5, m);
  const MatrixOperator sw = weighted_shift(ws);
  const CClassTag tag2 = classify_c_class(sw, probes, 64);
  CHECK(tag2.forward == CClass::c1dot);
  CHECK(tag2.backward == CClass::c0dot);
  CHECK(tag2.per_vector_limits.size() == 4);
  CHECK_THROWS_AS(classify_c_class(op, probes, 4), precondition_error);
}

TEST_CASE("riesz bounds against a two member closed form") {
  // Family {e0, cos(th) e0 + sin(th) e1} normalized: singular values are
  // sqrt(1 +- cos(th)).
  const IndexWindow w{0, 1};
  const double th = 0.3;
  FourierVector a = FourierVector::unit(w, 0);
  FourierVector b = FourierVector::zero(w);
  b.set(0, std::cos(th));
  b.set(1, std::sin(th));
  const RieszBounds rb = riesz_bounds({a, b});
  CHECK(rb.upper == Catch::Approx(std::sqrt(1.0 + std::cos(th))).epsilon(1e-12));
  CHECK(rb.lower == Catch::Approx(std::sqrt(1.0 - std::cos(th))).epsilon(1e-12));
  // Orthonormal family: both bounds 1.
  const RieszBounds on = riesz_bounds({FourierVector::unit(w, 0),
                                       FourierVector::unit(w, 1)});
  CHECK(on.lower == Catch::Approx(1.0));
  CHECK(on.upper == Catch::Approx(1.0));
  CHECK_THROWS_AS(riesz_bounds({a, a}), rank_deficiency_error);
}

TEST_CASE("ladder verdicts separate flat from decaying lower bounds") {
  // Mixing angle th_N = 1/N makes the riesz lower bound decay like 1/N;
  // th_N fixed keeps it flat.
  const IndexWindow w{0, 1};
  auto family_at = [&](double th) {
    FourierVector b = FourierVector::zero(w);
    b.set(0, std::cos(th));
    b.set(1, std::sin(th));
    return std::vector<FourierVector>{FourierVector::unit(w, 0), b};
  };
  std::vector<std::pair<int, std::vector<FourierVector>>> decaying, flat;
  for (int n : {8, 16, 32, 64}) {
    decaying.emplace_back(n, family_at(1.0 / n));
    flat.emplace_back(n, family_at(0.7));
  }
  const AsymptoteVerdict vd = asymptote_verdict(decaying);
  CHECK(vd.kind == AsymptoteKind::lower_bound_decays);
  CHECK(vd.trend_exponent == Catch::Approx(-1.0).margin(0.05));
  const AsymptoteVerdict vf = asymptote_verdict(flat);
  CHECK(vf.kind == AsymptoteKind::lower_bound_holds);
  CHECK_THROWS_AS(asymptote_verdict({decaying[0], decaying[1]}),
                  precondition_error);
}

TEST_CASE("delta qn products compensate exactly for paired blocks") {
  const int n_pairs = 6;
  const auto c = block_pair_default_c(n_pairs);
  const BlockPairSystem sys =
      block_pair_system(c, block_pair_default_angles(c, n_pairs), n_pairs);
  const auto entries = check_delta_qn_product(sys.X, sys.system);
  REQUIRE(entries.size() == 2 * n_pairs);
  for (const DeltaQnEntry& e : entries) {
    // delta_n |Q_n| = 1: the norms grow exactly as fast as the intertwiner
    // shrinks the family.
    CHECK(e.product == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(e.qn_norm >= 1.0 - 1e-12);
  }
}

TEST_CASE("delta lower bound of a diagonal restriction") {
  const IndexWindow w{0, 3};
  CMatrix d = CMatrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) d(k, k) = 0.25 * (k + 1);
  const MatrixOperator op(w, w, d);
  // Restricted to span{e2, e3} the smallest amplification is 0.75.
  const std::vector<FourierVector> basis{FourierVector::unit(w, 2),
                                         FourierVector::unit(w, 3)};
  CHECK(delta_lower_bound(op, basis) == Catch::Approx(0.75).epsilon(1e-10));
}
