#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "khk/hkbasis.hpp"
#include "support.hpp"

using namespace khk;
using khk_test::Gen;

namespace {

State e3(const Vec3& m, const Vec3& p) {
  State x(6);
  x << m, p;
  return x;
}

State regular_point(const System& sys, double eps, Gen& gen) {
  State x;
  REQUIRE(sample_regular_point(sys, eps, gen.engine(), x));
  return x;
}

// General Clebsch I0 and J0 written out term by term, with
// A_i = wcoef and G_i taken on (x, xt).
double general_i0_oracle(const ClebschParams& cp, const State& x, double eps) {
  const Vec3& a = cp.a;
  const double beta = *cp.beta;
  const Vec3& A = cp.wcoef;
  double g[3];
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    g[i] = x[3 + i] * x[3 + i] + beta * a[i] / (a[j] * a[k]) * x[i] * x[i];
  }
  const double num = A[0] * a[1] * a[2] * g[0] + A[1] * a[2] * a[0] * g[1] + A[2] * a[0] * a[1] * g[2];
  const double den = 1.0 + eps * eps * a[0] * a[1] * a[2] / beta * (g[0] + g[1] + g[2]);
  return num / den;
}

double general_j0_oracle(const ClebschParams& cp, const State& x, const State& xt, double eps) {
  const Vec3& a = cp.a;
  const double beta = *cp.beta;
  const Vec3& A = cp.wcoef;
  double G[3];
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    G[i] = x[3 + i] * xt[3 + i] + beta * a[i] / (a[j] * a[k]) * x[i] * xt[i];
  }
  const double num = A[0] * a[1] * a[2] * G[0] + A[1] * a[2] * a[0] * G[1] + A[2] * a[0] * a[1] * G[2];
  const double den = 1.0 - eps * eps * a[0] * a[1] * a[2] / beta * (G[0] + G[1] + G[2]);
  return num / den;
}

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace

TEST_SUITE("integrals") {

TEST_CASE("first Clebsch I0") {
  const Vec3 w(1, 2, 3);
  const System sys = build_system(FirstClebschParams{w});
  Gen gen(21);
  const State x = gen.state(6);
  CHECK(eval_I0(sys, x, 0.0) == doctest::Approx(x.tail<3>().squaredNorm()));
  for (double eps : {0.05, 0.2, 0.5}) {
    const State y = e3(gen.vec3(-1, 1), Vec3(1, 0, 0));
    CHECK(eval_I0(sys, y, eps) == doctest::Approx(1.0 / (1.0 - eps * eps * w[0])).epsilon(1e-14));
  }
  for (int t = 0; t < 50; ++t) {
    const State z = gen.state(6);
    const double eps = gen.uniform(0.01, 0.3);
    const Vec3 p = z.tail<3>();
    const double oracle = p.squaredNorm() / (1.0 - eps * eps * w.dot(p.cwiseProduct(p)));
    CHECK(rel(eval_I0(sys, z, eps), oracle) < 1e-14);
  }
}

TEST_CASE("first Clebsch J0") {
  const Vec3 w(1, 2, 3);
  const System sys = build_system(FirstClebschParams{w});
  Gen gen(22);
  const State x = gen.state(6);
  CHECK(eval_J0(sys, x, 0.0) == doctest::Approx(x.tail<3>().squaredNorm()));
  for (int t = 0; t < 50; ++t) {
    const State z = regular_point(sys, 0.1, gen);
    const State zt = kahan_step(sys.field, z, 0.1).next;
    const Vec3 p = z.tail<3>(), pt = zt.tail<3>();
    const double oracle = p.dot(pt) / (1.0 + 0.01 * w.dot(p.cwiseProduct(pt)));
    CHECK(rel(eval_J0(sys, z, 0.1), oracle) < 1e-13);
    CHECK(rel(eval_J0(sys, zt, 0.1), eval_J0(sys, z, 0.1)) < 1e-11);
  }
}

TEST_CASE("general Clebsch integrals against term-by-term formulas") {
  const System sys = build_system(khk_test::clebsch(Vec3(1, 2, 3), Vec3(-6, -3, -2)));
  const ClebschParams& cp = *sys.descriptor.clebsch;
  Gen gen(23);
  for (int t = 0; t < 50; ++t) {
    const double eps = gen.uniform(0.01, 0.2);
    const State x = regular_point(sys, eps, gen);
    const State xt = kahan_step(sys.field, x, eps).next;
    CHECK(rel(eval_I0(sys, x, eps), general_i0_oracle(cp, x, eps)) < 1e-13);
    CHECK(rel(eval_J0(sys, x, eps), general_j0_oracle(cp, x, xt, eps)) < 1e-13);
    // The minus sign in the denominator is what makes J0 an integral.
    CHECK(rel(eval_J0(sys, xt, eps), eval_J0(sys, x, eps)) < 1e-11);
  }
}

TEST_CASE("first Clebsch coefficients") {
  const System sys = build_system(FirstClebschParams{});
  Gen gen(24);
  const State x = gen.state(6);
  const Vector c = eval_coeffs(sys, x, 0.0, CoeffKind::Small);
  CHECK(c.size() == 4);
  CHECK(c[0] == 1.0);
  CHECK(c[1] == 1.0);
  CHECK(c[2] == 1.0);
  CHECK(c[3] == doctest::Approx(x.tail<3>().squaredNorm()));
  // c_i / c_0 are integrals.
  for (int t = 0; t < 20; ++t) {
    const State z = regular_point(sys, 0.1, gen);
    const State zt = kahan_step(sys.field, z, 0.1).next;
    const Vector a = eval_coeffs(sys, z, 0.1, CoeffKind::Small);
    const Vector b = eval_coeffs(sys, zt, 0.1, CoeffKind::Small);
    for (int i = 0; i < 3; ++i) CHECK(rel(b[i] / b[3], a[i] / a[3]) < 1e-11);
  }
}

TEST_CASE("Kirchhoff coefficients at a hand-substituted point") {
  const System sys = build_system(KirchhoffParams{1.0, 2.0, 0.0, 0.0});
  const State x = e3(Vec3(0, 0, 1), Vec3::Zero());
  for (double eps : {0.0, 0.1, 0.3}) {
    const Vector c = eval_coeffs(sys, x, eps, CoeffKind::Small);
    CHECK(c[0] == doctest::Approx(1.0 - 2.0 * eps * eps).epsilon(1e-15));
    CHECK(c[1] == doctest::Approx(3.0).epsilon(1e-15));
  }
}

TEST_CASE("Lagrange r and s at a hand-substituted point") {
  const double al = 2.0, ga = 1.0;
  const System sys = build_system(LagrangeParams{al, ga});
  for (double m3 : {0.5, -1.2}) {
    for (double p3 : {0.3, 2.0}) {
      const double eps = 0.1;
      const Vector rs = eval_coeffs(sys, e3(Vec3(0, 0, m3), Vec3(0, 0, p3)), eps, CoeffKind::Small);
      CHECK(rs[0] == doctest::Approx(2 * al - 1).epsilon(1e-15));
      const double s = 1 + eps * eps * al * (1 - al) * m3 * m3 - eps * eps * ga * p3;
      CHECK(rs[1] == doctest::Approx(s).epsilon(1e-15));
      CHECK(eval_I0(sys, e3(Vec3(0, 0, m3), Vec3(0, 0, p3)), eps) ==
            doctest::Approx((2 * al - 1) / s).epsilon(1e-15));
    }
  }
  CHECK_THROWS_AS(eval_I0(sys, e3(Vec3(0.1, 0.2, 0.0), Vec3(0.3, 0.1, 0.2)), 0.1), DenominatorZero);
}

TEST_CASE("eval_K") {
  const System sys = build_system(FirstClebschParams{});
  Gen gen(25);
  CHECK(eval_K(sys, e3(Vec3::Zero(), gen.vec3(-1, 1)), 0.1) == 0.0);
  const State x = gen.state(6);
  const Vec3 m = x.head<3>(), p = x.tail<3>();
  CHECK(eval_K(sys, x, 0.0) == doctest::Approx(m.dot(p) / (p.dot(p) * p.dot(p))).epsilon(1e-13));
  State z = regular_point(sys, 0.05, gen);
  const double k0 = eval_K(sys, z, 0.05);
  for (int s = 0; s < 100; ++s) {
    z = kahan_step(sys.field, z, 0.05).next;
    CHECK(rel(eval_K(sys, z, 0.05), k0) < 1e-11);
  }
  CHECK_THROWS_AS(eval_K(build_system(LagrangeParams{}), x, 0.1), UnsupportedSystem);
}

TEST_CASE("densities at eps = 0 are the coefficients") {
  const System sys = build_system(FirstClebschParams{});
  Gen gen(26);
  const State x = gen.state(6);
  CHECK(eval_density(sys, x, 0.0, "C0") == doctest::Approx(x.tail<3>().squaredNorm()));
  CHECK_THROWS_AS(eval_density(sys, x, 0.1, "nope"), InvalidParams);
}

TEST_CASE("Lagrange: the ratio of the two densities is J0") {
  const System sys = build_system(LagrangeParams{});
  Gen gen(27);
  State z = regular_point(sys, 0.05, gen);
  const double j0 = eval_density(sys, z, 0.05, "R") / eval_density(sys, z, 0.05, "S");
  CHECK(rel(j0, eval_J0(sys, z, 0.05)) < 1e-13);
  for (int s = 0; s < 100; ++s) {
    z = kahan_step(sys.field, z, 0.05).next;
    CHECK(rel(eval_density(sys, z, 0.05, "R") / eval_density(sys, z, 0.05, "S"), j0) < 1e-10);
  }
}

TEST_CASE("planar F and Fhat") {
  const System sys = build_system(PlanarFamilyParams{});
  State x(2);
  x << 1.0, 0.0;
  for (double eps : {0.0, 0.1, 0.7}) {
    CHECK(eval_planar_F(sys, x, eps, PlanarVariant::F) ==
          doctest::Approx(1.0 / (1.0 + eps * eps)).epsilon(1e-15));
  }
  PlanarFamilyParams p;
  p.a = 0.7;
  p.b = -0.4;
  p.c = -0.9;
  p.ell = Vector::Zero(2);
  p.ell[0] = 0.3;
  const System s2 = build_system(p);
  Gen gen(28);
  for (int t = 0; t < 20; ++t) {
    const State y = gen.state(2);
    const double q = p.a * y[0] * y[0] + 2 * p.b * y[0] * y[1] + p.c * y[1] * y[1];
    CHECK(eval_planar_F(s2, y, 0.0, PlanarVariant::F) == doctest::Approx(q));
    CHECK(eval_planar_F(s2, y, 0.0, PlanarVariant::Fhat) == doctest::Approx(q));
  }
}

TEST_CASE("polarize_integral") {
  const QuadraticPolynomial p1sq(6, {PolyTerm{{1.0}, 3, 3}});
  Gen gen(29);
  const State x = gen.state(6);
  CHECK(polarize_integral(p1sq, x, x, 0.1) == doctest::Approx(x[3] * x[3]));

  const Vec3 w(1, 2, 3);
  const System sys = build_system(FirstClebschParams{w});
  const auto num = first_clebsch_i0_numerator();
  const auto den = first_clebsch_i0_denominator(w);
  for (int t = 0; t < 20; ++t) {
    const State z = regular_point(sys, 0.1, gen);
    const State zt = kahan_step(sys.field, z, 0.1).next;
    const Vec3 p = z.tail<3>(), pt = zt.tail<3>();
    CHECK(rel(num.evaluate(z, 0.1), p.squaredNorm()) < 1e-15);
    CHECK(rel(polarize_integral(num, z, zt, 0.1), p.dot(pt)) < 1e-14);
    CHECK(rel(polarize_integral(den, z, zt, 0.1), 1.0 + 0.01 * w.dot(p.cwiseProduct(pt))) < 1e-14);
    CHECK(rel(polarize_integral(num, z, zt, 0.1) / polarize_integral(den, z, zt, 0.1),
              eval_J0(sys, z, 0.1)) < 1e-13);
  }

  const KirchhoffParams kp{};
  const System kir = build_system(kp);
  for (int t = 0; t < 20; ++t) {
    const State z = regular_point(kir, 0.1, gen);
    const State zt = kahan_step(kir.field, z, 0.1).next;
    const Vector big = eval_coeffs(kir, z, 0.1, CoeffKind::Big);
    CHECK(rel(polarize_integral(kirchhoff_c1_polynomial(kp), z, zt, 0.1), big[0]) < 1e-13);
    CHECK(rel(polarize_integral(kirchhoff_c3_polynomial(kp), z, zt, 0.1), big[1]) < 1e-13);
  }
}

TEST_CASE("bilinear measure hypothesis") {
  const System sys = build_system(FirstClebschParams{});
  const BilinearForm pp = [](const State& x, const State& y, double) {
    return x.tail<3>().dot(y.tail<3>());
  };
  const BilinearForm skew = [](const State& x, const State& y, double) {
    return x[3] * y[4] + 0.5 * x.tail<3>().dot(y.tail<3>());
  };
  Gen gen(30);
  for (int t = 0; t < 200; ++t) {
    const State x = regular_point(sys, 0.1, gen);
    const State probe = gen.state(6);
    CHECK(bilinear_measure_hypothesis_check(sys, pp, x, probe, 0.1).passed);
    CHECK(bilinear_measure_hypothesis_check(sys, pp, x, probe, 0.0).parity_violation == 0.0);
    CHECK_FALSE(bilinear_measure_hypothesis_check(sys, skew, x, probe, 0.1).passed);
  }
}

TEST_CASE("integral columns follow the descriptor") {
  Gen gen(31);
  for (auto params : std::vector<SystemParams>{FirstClebschParams{}, SecondClebschParams{},
                                               khk_test::clebsch(Vec3(1, 2, 3), Vec3(-6, -3, -2)),
                                               KirchhoffParams{}, LagrangeParams{},
                                               PlanarFamilyParams{}}) {
    const System sys = build_system(params);
    const State x = regular_point(sys, 0.05, gen);
    const NamedValues values = evaluate_integrals(sys, x, 0.05);
    std::vector<std::string> expected = sys.descriptor.integrals;
    for (const auto& d : sys.descriptor.densities) expected.push_back("density_" + d);
    REQUIRE(values.size() == expected.size());
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(values[i].first == expected[i]);
  }
}

TEST_CASE("conservation along orbits, every declared quantity") {
  Gen gen(32);
  for (auto params : std::vector<SystemParams>{FirstClebschParams{}, SecondClebschParams{},
                                               khk_test::clebsch(Vec3(1, 2, 3), Vec3(-6, -3, -2)),
                                               KirchhoffParams{}, LagrangeParams{},
                                               PlanarFamilyParams{}}) {
    const System sys = build_system(params);
    for (int orbit = 0; orbit < 3; ++orbit) {
      const State x0 = regular_point(sys, 0.05, gen);
      const OrbitRecord rec = iterate_orbit(sys.field, x0, 0.05, 300);
      for (const auto& name : conserved_names(sys)) {
        const OrbitFunction q = conserved_quantity(sys, name);
        const double q0 = q(x0, 0.05);
        double drift = 0.0;
        for (std::size_t k = 1; k + 1 < rec.size(); ++k) {
          drift = std::max(drift, rel(q(rec.states[k], 0.05), q0));
        }
        INFO(kind_name(sys.kind()), " ", name);
        CHECK(drift < 1e-8);
      }
    }
  }
}

TEST_CASE("probes that are not integrals drift") {
  const System sys = build_system(FirstClebschParams{});
  Gen gen(33);
  const State x0 = regular_point(sys, 0.05, gen);
  const OrbitRecord rec = iterate_orbit(sys.field, x0, 0.05, 300);
  const OrbitFunction m1 = conserved_quantity(sys, "m1");
  double drift = 0.0;
  for (const auto& s : rec.states) drift = std::max(drift, rel(m1(s, 0.05), m1(x0, 0.05)));
  CHECK(drift > 1e-4);
}

}  // TEST_SUITE
