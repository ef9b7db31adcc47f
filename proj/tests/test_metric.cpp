#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "gravem/metric.hpp"

using namespace gravem;

namespace {

Event ev(Chart c, Real t, Real a, Real b, Real d) { return Event{{t, a, b, d}, c}; }

// covariant derivative of the metric itself; must vanish for a compatible
// connection
Real metric_compatibility_residual(const Metric& m, const Event& e) {
  const Mat4 g = m.evaluate(e);
  const Christoffel gam = m.christoffel(e);
  Real worst = 0.0;
  for (int s = 0; s < 4; ++s) {
    const Mat4 dg = m.partial(e, s);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        Real v = dg[i][j];
        for (int lam = 0; lam < 4; ++lam)
          v -= gam[lam][s][i] * g[lam][j] + gam[lam][s][j] * g[i][lam];
        worst = std::max(worst, std::abs(v));
      }
  }
  return worst;
}

}  // namespace

TEST_CASE("flat metric evaluates to eta everywhere") {
  MinkowskiMetric m;
  const Mat4 g = m.evaluate(ev(Chart::Cartesian, 3.0, -7.0, 0.5, 100.0));
  CHECK(g[0][0] == 1.0);
  CHECK(g[1][1] == -1.0);
  CHECK(g[2][2] == -1.0);
  CHECK(g[3][3] == -1.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(g[i][j] == 0.0);
}

TEST_CASE("schwarzschild line element at r = 2 r_s") {
  SchwarzschildMetric m(1.0);
  const Real th = 1.1;
  const Mat4 g = m.evaluate(ev(Chart::SchwarzschildSpherical, 0.0, 2.0, th, 0.3));
  CHECK(g[0][0] == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(g[1][1] == Catch::Approx(-2.0).epsilon(1e-15));
  CHECK(g[2][2] == Catch::Approx(-4.0).epsilon(1e-15));
  CHECK(g[3][3] == Catch::Approx(-4.0 * std::sin(th) * std::sin(th)).epsilon(1e-15));
}

TEST_CASE("zero-parameter metrics reduce to eta in cartesian charts") {
  SchwarzschildIsotropicMetric iso(0.0);
  WeakFieldMetric wf(0.0);
  const Event e1 = ev(Chart::IsotropicCartesian, 1.0, 2.0, -3.0, 0.7);
  const Event e2 = ev(Chart::Cartesian, 1.0, 2.0, -3.0, 0.7);
  const Mat4 eta = flat_eta();
  const Mat4 g1 = iso.evaluate(e1);
  const Mat4 g2 = wf.evaluate(e2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(g1[i][j] == Catch::Approx(eta[i][j]).margin(1e-15));
      CHECK(g2[i][j] == Catch::Approx(eta[i][j]).margin(1e-15));
    }
  const Christoffel c1 = iso.christoffel(e1);
  for (const auto& mat : c1)
    for (const auto& row : mat)
      for (Real v : row) CHECK(v == 0.0);
}

TEST_CASE("flat christoffels vanish identically") {
  MinkowskiMetric m;
  const Christoffel c = m.christoffel(ev(Chart::Cartesian, 0.0, 1.0, 2.0, 3.0));
  for (const auto& mat : c)
    for (const auto& row : mat)
      for (Real v : row) CHECK(v == 0.0);
}

TEST_CASE("schwarzschild Gamma^r_tt closed form") {
  SchwarzschildMetric m(1.0);
  const Christoffel c = m.christoffel(ev(Chart::SchwarzschildSpherical, 0.0, 2.0, 1.2, 0.0));
  // (r_s / 2 r^2)(1 - r_s/r) at r = 2
  CHECK(c[1][0][0] == Catch::Approx(0.0625).epsilon(1e-14));
}

TEST_CASE("finite-difference christoffels agree with the closed forms") {
  SchwarzschildMetric schw(1.0);
  SchwarzschildIsotropicMetric iso(1.0);
  WeakFieldMetric wf(1e-3);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<Real> rdist(3.0, 100.0);
  std::uniform_real_distribution<Real> thdist(0.4, kPi - 0.4);
  // relative agreement above the double-precision noise floor, absolute below
  Real worst_rel = 0.0, worst_abs = 0.0, worst_schw_abs = 0.0;
  auto compare = [&](const Christoffel& a, const Christoffel& b, Real* schw_abs) {
    for (int m2 = 0; m2 < 4; ++m2)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          const Real d = std::abs(a[m2][i][j] - b[m2][i][j]);
          if (schw_abs) *schw_abs = std::max(*schw_abs, d);
          if (std::abs(a[m2][i][j]) > 1e-5)
            worst_rel = std::max(worst_rel, d / std::abs(a[m2][i][j]));
          else
            worst_abs = std::max(worst_abs, d);
        }
  };
  for (int k = 0; k < 40; ++k) {
    const Real r = rdist(rng);
    {
      const Event e = ev(Chart::SchwarzschildSpherical, 0.0, r, thdist(rng), 1.0);
      compare(schw.christoffel(e), schw.fd_christoffel(e), &worst_schw_abs);
    }
    {
      const Event e = ev(Chart::IsotropicCartesian, 0.0, r, 0.3 * r, -0.1 * r);
      compare(iso.christoffel(e), iso.fd_christoffel(e), nullptr);
    }
    {
      const Event e = ev(Chart::Cartesian, 0.0, r, -0.2 * r, 0.4 * r);
      compare(wf.christoffel(e), wf.fd_christoffel(e), nullptr);
    }
  }
  CHECK(worst_schw_abs < 1e-8);  // max abs deviation on Schwarzschild, r in [3,100]
  CHECK(worst_rel < 1e-8);
  CHECK(worst_abs < 1e-9);
}

TEST_CASE("christoffel symmetry in the lower index pair is exact") {
  SchwarzschildIsotropicMetric iso(1.0);
  const Christoffel c = iso.christoffel(ev(Chart::IsotropicCartesian, 0.0, 4.0, 2.0, -1.0));
  for (int m2 = 0; m2 < 4; ++m2)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(c[m2][i][j] == c[m2][j][i]);
}

TEST_CASE("inner products with the metric") {
  MinkowskiMetric m;
  const Event e = ev(Chart::Cartesian, 0.0, 0.0, 0.0, 0.0);
  const CVec4 p = {1.0, 0.0, 0.0, 1.0};
  CHECK(std::abs(inner_product_at(m, e, p, p)) == 0.0);
  const CVec4 u = {1.0, 0.0, 0.0, 0.0};
  CHECK(inner_product_at(m, e, u, u).real() == 1.0);
  // the self-orthogonality that makes circular polarizations factorizable
  const CVec4 circ = {0.0, 1.0, Complex(0.0, 1.0), 0.0};
  CHECK(std::abs(inner_product_at(m, e, circ, circ)) == 0.0);
  CHECK(std::abs(inner_product_conj(circ, circ, m.evaluate(e)) - Complex(-2.0)) < 1e-15);
}

TEST_CASE("curvature length scale from the Kretschmann scalar") {
  MinkowskiMetric flat;
  CHECK(std::isinf(curvature_length_scale(flat, ev(Chart::Cartesian, 0, 1, 1, 1))));

  SchwarzschildMetric schw(1.0);
  const Real L =
      curvature_length_scale(schw, ev(Chart::SchwarzschildSpherical, 0.0, 10.0, 1.3, 0.2));
  // (12 r_s^2 / r^6)^(-1/4) at r = 10
  CHECK(L == Catch::Approx(16.990442448471225).epsilon(1e-14));

  Real prev = std::numeric_limits<Real>::infinity();
  for (Real r : {100.0, 30.0, 10.0, 4.0, 2.0, 1.3}) {
    const Real Lr =
        curvature_length_scale(schw, ev(Chart::SchwarzschildSpherical, 0.0, r, 1.3, 0.2));
    CHECK(Lr < prev);
    prev = Lr;
  }
}

TEST_CASE("validity ratio verdicts") {
  MinkowskiMetric flat;
  const auto rep0 = validity_ratio(0.1, flat, ev(Chart::Cartesian, 0, 0, 0, 0), 0.01);
  CHECK(rep0.ratio == 0.0);
  CHECK(rep0.verdict == ValidityReport::Verdict::Pass);

  SchwarzschildMetric schw(1.0);
  const Event e = ev(Chart::SchwarzschildSpherical, 0.0, 10.0, 1.57, 0.0);
  const auto rep1 = validity_ratio(0.1, schw, e, 0.01);
  CHECK(rep1.ratio == Catch::Approx(0.0058856619127654237).epsilon(1e-13));
  CHECK(rep1.verdict == ValidityReport::Verdict::Pass);

  const auto rep2 = validity_ratio(100.0, schw, e, 0.01);
  CHECK(rep2.ratio == Catch::Approx(5.8856619127654237).epsilon(1e-13));
  CHECK(rep2.verdict == ValidityReport::Verdict::Fail);

  CHECK_THROWS_AS(validity_ratio(0.0, flat, ev(Chart::Cartesian, 0, 0, 0, 0)),
                  NonPositiveWavelength);
}

TEST_CASE("metric symmetry for random events") {
  SchwarzschildMetric schw(1.0);
  SchwarzschildIsotropicMetric iso(2.0);
  WeakFieldMetric wf(0.01);
  std::mt19937_64 rng(999);
  std::uniform_real_distribution<Real> d(2.5, 500.0);
  for (int k = 0; k < 1000; ++k) {
    const Mat4 g1 =
        schw.evaluate(ev(Chart::SchwarzschildSpherical, d(rng), d(rng), 1.0, d(rng)));
    const Mat4 g2 = iso.evaluate(ev(Chart::IsotropicCartesian, 0.0, d(rng), d(rng), d(rng)));
    const Mat4 g3 = wf.evaluate(ev(Chart::Cartesian, 0.0, d(rng), d(rng), d(rng)));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        CHECK(g1[i][j] == g1[j][i]);
        CHECK(g2[i][j] == g2[j][i]);
        CHECK(g3[i][j] == g3[j][i]);
      }
  }
}

TEST_CASE("metric compatibility: covariant derivative of g vanishes") {
  SchwarzschildMetric schw(1.0);
  SchwarzschildIsotropicMetric iso(1.0);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<Real> d(4.0, 60.0);
  for (int k = 0; k < 10; ++k) {
    CHECK(metric_compatibility_residual(
              schw, ev(Chart::SchwarzschildSpherical, 0.0, d(rng), 1.2, 0.5)) < 1e-7);
    CHECK(metric_compatibility_residual(
              iso, ev(Chart::IsotropicCartesian, 0.0, d(rng), d(rng), 0.3)) < 1e-7);
  }
}

TEST_CASE("chart domain violations throw") {
  SchwarzschildMetric schw(1.0);
  CHECK_THROWS_AS(schw.evaluate(ev(Chart::SchwarzschildSpherical, 0.0, 0.9, 1.0, 0.0)),
                  OutsideChartDomain);
  CHECK_THROWS_AS(schw.evaluate(ev(Chart::SchwarzschildSpherical, 0.0, 1.0, 1.0, 0.0)),
                  OutsideChartDomain);
  SchwarzschildIsotropicMetric iso(1.0);
  CHECK_THROWS_AS(iso.evaluate(ev(Chart::IsotropicCartesian, 0.0, 0.1, 0.0, 0.0)),
                  OutsideChartDomain);
  WeakFieldMetric wf(1.0);
  CHECK_THROWS_AS(wf.evaluate(ev(Chart::Cartesian, 0.0, 1.0, 0.0, 0.0)),
                  OutsideChartDomain);
  // chart tag mismatch is rejected
  CHECK_THROWS_AS(schw.evaluate(ev(Chart::Cartesian, 0.0, 10.0, 0.0, 0.0)), Error);
}

TEST_CASE("isotropic chart matches the spherical chart through invariants") {
  // areal radius of the isotropic radius rho: r = rho (1 + rs/(4 rho))^2
  SchwarzschildMetric schw(1.0);
  SchwarzschildIsotropicMetric iso(1.0);
  const Real rho = 10.0;
  const Real r_areal = rho * std::pow(1.0 + 1.0 / (4.0 * rho), 2);
  const Real k1 = schw.kretschmann(ev(Chart::SchwarzschildSpherical, 0.0, r_areal, 1.0, 0.0));
  const Real k2 = iso.kretschmann(ev(Chart::IsotropicCartesian, 0.0, rho, 0.0, 0.0));
  CHECK(k1 == Catch::Approx(k2).epsilon(1e-13));
}

TEST_CASE("numerical kretschmann agrees with the closed form") {
  SchwarzschildMetric schw(1.0);
  const Event e = ev(Chart::SchwarzschildSpherical, 0.0, 8.0, 1.2, 0.4);
  CHECK(schw.fd_kretschmann(e) == Catch::Approx(schw.kretschmann(e)).epsilon(1e-6));

  // the weak-field metric has no closed form here; check the leading order
  WeakFieldMetric wf(1e-3);
  const Event e2 = ev(Chart::Cartesian, 0.0, 6.0, 3.0, 2.0);
  const Real rho = std::sqrt(6.0 * 6.0 + 9.0 + 4.0);
  const Real expected = 12.0 * std::pow(2e-3, 2) / std::pow(rho, 6);
  CHECK(wf.kretschmann(e2) == Catch::Approx(expected).epsilon(0.05));
}

TEST_CASE("grid metric interpolates a sampled background") {
  // sample the weak-field metric on a static spatial grid
  WeakFieldMetric wf(0.01);
  std::ostringstream grid;
  for (Real x : {4.0, 5.0, 6.0, 7.0})
    for (Real y : {-1.0, 0.0, 1.0})
      for (Real z : {-1.0, 0.0, 1.0}) {
        const Mat4 g = wf.evaluate(ev(Chart::Cartesian, 0.0, x, y, z));
        grid << 0.0 << ' ' << x << ' ' << y << ' ' << z;
        for (int i = 0; i < 4; ++i)
          for (int j = i; j < 4; ++j) grid << ' ' << std::setprecision(17) << g[i][j];
        grid << '\n';
      }
  std::istringstream in(grid.str());
  GridMetric gm(in, Chart::Cartesian);

  // exact at nodes
  const Mat4 at_node = gm.evaluate(ev(Chart::Cartesian, 0.0, 5.0, 0.0, 1.0));
  const Mat4 ref_node = wf.evaluate(ev(Chart::Cartesian, 0.0, 5.0, 0.0, 1.0));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(at_node[i][j] == Catch::Approx(ref_node[i][j]).margin(1e-15));

  // close off nodes
  const Event mid = ev(Chart::Cartesian, 0.0, 5.5, 0.25, -0.5);
  const Mat4 gi = gm.evaluate(mid);
  const Mat4 gr = wf.evaluate(mid);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(gi[i][j] == Catch::Approx(gr[i][j]).margin(2e-4));

  // finite-difference christoffels are a coarse but usable estimate
  const Christoffel ca = gm.christoffel(mid);
  const Christoffel cr = wf.christoffel(mid);
  for (int m2 = 0; m2 < 4; ++m2)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(ca[m2][i][j] == Catch::Approx(cr[m2][i][j]).margin(5e-4));

  CHECK_THROWS_AS(gm.evaluate(ev(Chart::Cartesian, 0.0, 3.0, 0.0, 0.0)), OutsideChartDomain);
}

TEST_CASE("scaled metric shrinks features and curvature lengths") {
  const MetricPtr base = std::make_shared<SchwarzschildIsotropicMetric>(1.0);
  const Real s = 1e-6;
  const MetricPtr small = scale_metric(base, s);

  const Event e = ev(Chart::IsotropicCartesian, 0.0, 10.0, 3.0, -2.0);
  Event scaled_e = e;
  for (auto& v : scaled_e.x) v *= s;

  const Mat4 g0 = base->evaluate(e);
  const Mat4 g1 = small->evaluate(scaled_e);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(g1[i][j] == g0[i][j]);

  const Real L0 = curvature_length_scale(*base, e);
  const Real L1 = curvature_length_scale(*small, scaled_e);
  CHECK(L1 == Catch::Approx(s * L0).epsilon(1e-12));

  // wrapper composition keeps the group property exact
  const MetricPtr twice = scale_metric(scale_metric(base, 2.0), 3.0);
  const MetricPtr once = scale_metric(base, 6.0);
  Event e6 = e;
  for (auto& v : e6.x) v *= 6.0;
  const Mat4 a = twice->evaluate(e6), b = once->evaluate(e6);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(a[i][j] == b[i][j]);
}

TEST_CASE("metric factory") {
  CHECK(make_metric("minkowski", {})->flat());
  CHECK(make_metric("schwarzschild", {{"r_s", 1.0}}, "schwarzschild")->name() ==
        "schwarzschild");
  CHECK(make_metric("schwarzschild", {{"r_s", 1.0}}, "isotropic-cartesian")->name() ==
        "schwarzschild-isotropic");
  CHECK(make_metric("weak-field", {{"gm", 0.5}})->name() == "weak-field");
  CHECK_THROWS_AS(make_metric("schwarzschild", {{"r_s", 1.0}}), ConstraintViolation);
  CHECK_THROWS_AS(make_metric("nope", {}), ConstraintViolation);
}
