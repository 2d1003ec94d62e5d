#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "khk/systems.hpp"
#include "support.hpp"

using namespace khk;
using khk_test::Gen;

namespace {

State e3(const Vec3& m, const Vec3& p) {
  State x(6);
  x << m, p;
  return x;
}

// The first Clebsch flow written out component by component.
State first_clebsch_oracle(const Vec3& w, const State& x) {
  const double m1 = x[0], m2 = x[1], m3 = x[2], p1 = x[3], p2 = x[4], p3 = x[5];
  State out(6);
  out << (w[2] - w[1]) * p2 * p3, (w[0] - w[2]) * p3 * p1, (w[1] - w[0]) * p1 * p2,
      m3 * p2 - m2 * p3, m1 * p3 - m3 * p1, m2 * p1 - m1 * p2;
  return out;
}

}  // namespace

TEST_SUITE("systems") {

TEST_CASE("kind names round trip") {
  for (auto k : {SystemKind::GeneralClebsch, SystemKind::FirstClebsch, SystemKind::SecondClebsch,
                 SystemKind::Kirchhoff, SystemKind::Lagrange, SystemKind::PlanarFamily}) {
    CHECK(kind_from_name(kind_name(k)) == k);
  }
  CHECK_THROWS_AS(kind_from_name("euler_top"), InvalidParams);
}

TEST_CASE("first Clebsch field at hand-substituted points") {
  const System sys = build_system(FirstClebschParams{Vec3(1, 2, 3)});
  // mdot3 = (w2 - w1) p1 p2 = +1 at m = 0, p = (1, 1, 0).
  const State f1 = evaluate_field(sys.field, e3(Vec3::Zero(), Vec3(1, 1, 0)));
  CHECK(khk_test::max_abs(f1 - e3(Vec3(0, 0, 1), Vec3::Zero())) < 1e-15);
  // m = (1, 0, 0), p = (0, 1, 0): mdot1 = 0 and pdot3 = m2 p1 - m1 p2 = -1.
  const State f2 = evaluate_field(sys.field, e3(Vec3(1, 0, 0), Vec3(0, 1, 0)));
  CHECK(f2[0] == 0.0);
  CHECK(f2[5] == doctest::Approx(-1.0));

  Gen gen(11);
  for (int t = 0; t < 100; ++t) {
    const State x = gen.state(6, 2.0);
    CHECK(khk_test::max_abs(evaluate_field(sys.field, x) - first_clebsch_oracle(Vec3(1, 2, 3), x)) <
          1e-14);
  }
}

TEST_CASE("first Clebsch matches the component oracle for random frequencies") {
  Gen gen(12);
  for (int t = 0; t < 10; ++t) {
    const Vec3 w = gen.vec3(-2, 2);
    const System first = build_system(FirstClebschParams{w});
    for (int s = 0; s < 10; ++s) {
      const State x = gen.state(6);
      CHECK(khk_test::max_abs(evaluate_field(first.field, x) - first_clebsch_oracle(w, x)) < 1e-14);
    }
  }
}

TEST_CASE("the equations with a = 1, b = omega are the first Clebsch flow") {
  Gen gen(19);
  for (int t = 0; t < 100; ++t) {
    const Vec3 w = gen.vec3(-2, 2);
    const State x = gen.state(6);
    const State lhs = evaluate_field(clebsch_field(Vec3::Ones(), w), x);
    CHECK(khk_test::max_abs(lhs - evaluate_field(build_system(FirstClebschParams{w}).field, x)) == 0.0);
  }
}

TEST_CASE("Kirchhoff leaves m3 fixed") {
  const System sys = build_system(KirchhoffParams{});
  Gen gen(13);
  for (int t = 0; t < 100; ++t) CHECK(evaluate_field(sys.field, gen.state(6, 3.0))[2] == 0.0);
  CHECK(clebsch_condition_residual(Vec3(1, 1, 2), Vec3(0.5, 0.5, -1)) == 0.0);
}

TEST_CASE("clebsch_condition_residual") {
  CHECK(clebsch_condition_residual(Vec3(1, 2, 3), Vec3(4, 4, 4)) == 0.0);
  CHECK(clebsch_condition_residual(Vec3(1, 2, 3), Vec3(-6, -3, -2)) == doctest::Approx(0.0));
  // 1/3 + 0 - 1/2
  CHECK(clebsch_condition_residual(Vec3(1, 2, 3), Vec3(1, 0, 0)) == doctest::Approx(-1.0 / 6.0));
}

TEST_CASE("clebsch_derived_params") {
  const ClebschParams ones = clebsch_derived_params(Vec3(1, 1, 1), Vec3(1, 2, 3));
  CHECK((ones.wcoef - Vec3(1, 1, 1)).cwiseAbs().maxCoeff() < 1e-15);
  const ClebschParams p = clebsch_derived_params(Vec3(1, 2, 3), Vec3(-6, -3, -2));
  REQUIRE(p.beta.has_value());
  CHECK(*p.beta == doctest::Approx(1.0));
  CHECK(p.wcoef[0] == doctest::Approx(-1.0 / 6.0));
  CHECK(p.wcoef[1] == doctest::Approx(5.0 / 6.0));
  CHECK(p.wcoef[2] == doctest::Approx(7.0 / 6.0));
  CHECK_THROWS_AS(clebsch_derived_params(Vec3(1, 2, 3), Vec3(1, 0, 0)), InvalidParams);
}

TEST_CASE("decompose_clebsch inverts the second-flow parametrization") {
  const ClebschParams p = clebsch_derived_params(Vec3(1, 2, 3), Vec3(-6, -3, -2));
  const auto sols = decompose_clebsch(p);
  bool found = false;
  for (const auto& s : sols) {
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      CHECK(std::abs(p.a[i] - (s.alpha + *p.beta * s.omega[i])) < 1e-12);
      CHECK(std::abs(p.b[i] - (s.alpha * s.omega[i] - *p.beta * s.omega[j] * s.omega[k])) < 1e-10);
    }
    if (std::abs(s.alpha) < 1e-10 && (s.omega - Vec3(1, 2, 3)).cwiseAbs().maxCoeff() < 1e-10) {
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("second Clebsch parameters satisfy the Clebsch condition") {
  Gen gen(14);
  for (int t = 0; t < 100; ++t) {
    const Vec3 w = gen.vec3(-3, 3);
    if (w.cwiseAbs().minCoeff() < 1e-3) continue;
    const Vec3 a = w;
    const Vec3 b(-w[1] * w[2], -w[2] * w[0], -w[0] * w[1]);
    // Residual relative to the size of its terms.
    const double scale = 1.0 + 2.0 * b.cwiseAbs().sum() / a.cwiseAbs().minCoeff();
    CHECK(std::abs(clebsch_condition_residual(a, b)) < 1e-12 * scale);
  }
}

TEST_CASE("continuous Wronskian relations") {
  Gen gen(15);
  const System first = build_system(FirstClebschParams{Vec3(1, 2, 3)});
  const System lagrange = build_system(LagrangeParams{2.0, 1.0});
  REQUIRE(lagrange.descriptor.wronskian_coeffs.has_value());
  CHECK((*lagrange.descriptor.wronskian_coeffs - Vec3(1, 1, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(continuous_wronskian_residual(first, State::Zero(6)) == 0.0);
  for (const System* sys : {&first, &lagrange}) {
    for (int t = 0; t < 1000; ++t) {
      const State x = gen.state(6);
      CHECK(std::abs(continuous_wronskian_residual(*sys, x)) <= 1e-13);
    }
  }
  const System planar = build_system(PlanarFamilyParams{});
  CHECK_THROWS_AS(continuous_wronskian_residual(planar, State::Zero(2)), UnsupportedSystem);
}

TEST_CASE("Lie-Poisson bracket: Casimirs and commuting Hamiltonians") {
  Gen gen(16);
  const Vec3 w(1, 2, 3);
  for (int t = 0; t < 100; ++t) {
    const State x = gen.state(6);
    const Matrix q = Matrix::Random(6, 6);
    const ScalarFunction g = [q](const State& y) { return y.dot(q * y) + y.sum(); };
    CHECK(std::abs(poisson_bracket_e3(casimir_k1, g, x)) <= 1e-6);
    CHECK(std::abs(poisson_bracket_e3(casimir_k2, g, x)) <= 1e-6);
    const ScalarFunction h1 = [w](const State& y) { return clebsch_h1(w, y); };
    const ScalarFunction h2 = [w](const State& y) { return clebsch_h2(w, y); };
    CHECK(std::abs(poisson_bracket_e3(h1, h2, x)) <= 1e-6 * (1.0 + khk_test::max_abs(x)));
    CHECK(poisson_bracket_e3(g, g, x) == 0.0);
  }
}

TEST_CASE("planar family: first two components") {
  Gen gen(17);
  for (int t = 0; t < 20; ++t) {
    PlanarFamilyParams p;
    p.a = gen.uniform(-1, 1);
    p.b = gen.uniform(-1, 1);
    p.c = gen.uniform(-1, 1);
    p.ell = gen.state(3, 0.5);
    p.ell0 = gen.uniform(0.5, 1.5);
    p.extra = gen.field(3, 0.2);
    const System sys = build_system(p);
    for (int s = 0; s < 10; ++s) {
      const State x = gen.state(3);
      const double l = p.ell.dot(x) + p.ell0;
      const State f = evaluate_field(sys.field, x);
      CHECK(f[0] == doctest::Approx(l * (p.b * x[0] + p.c * x[1])).epsilon(1e-13));
      CHECK(f[1] == doctest::Approx(-l * (p.a * x[0] + p.b * x[1])).epsilon(1e-13));
      CHECK(f[2] == doctest::Approx(evaluate_field(*p.extra, x)[2]).epsilon(1e-13));
    }
  }
}

TEST_CASE("flows preserve their Hamiltonian and the Casimirs") {
  Gen gen(18);
  std::vector<System> systems = {build_system(FirstClebschParams{}),
                                 build_system(SecondClebschParams{}),
                                 build_system(khk_test::clebsch(Vec3(1, 2, 3), Vec3(-6, -3, -2))),
                                 build_system(KirchhoffParams{}), build_system(LagrangeParams{})};
  for (const auto& sys : systems) {
    for (int t = 0; t < 50; ++t) {
      const State x = gen.state(6);
      const State f = evaluate_field(sys.field, x);
      const ScalarFunction h = [&sys](const State& y) { return hamiltonian(sys, y); };
      const double scale = 1.0 + f.norm() * x.norm();
      CHECK(std::abs(numerical_gradient(h, x).dot(f)) <= 1e-6 * scale);
      CHECK(std::abs(numerical_gradient(casimir_k1, x).dot(f)) <= 1e-6 * scale);
      CHECK(std::abs(numerical_gradient(casimir_k2, x).dot(f)) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(build_system(khk_test::clebsch(Vec3(1, 1, 1), Vec3(0, 0, 0))), InvalidParams);
  CHECK_THROWS_AS(build_system(khk_test::clebsch(Vec3(1, 2, 3), Vec3(1, 0, 0))), InvalidParams);
  PlanarFamilyParams bad;
  bad.ell = Vector::Zero(1);
  CHECK_THROWS(build_system(bad));
}

}  // TEST_SUITE
