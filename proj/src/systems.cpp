#include "khk/systems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace khk {

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {
    "general_clebsch", "first_clebsch", "second_clebsch", "kirchhoff", "lagrange", "planar_family"};

void require_e3_state(const State& x, const char* what) {
  if (x.size() != 6) {
    throw DimensionMismatch(std::string(what) + ": expected a 6-vector (m, p), got dimension " +
                            std::to_string(x.size()));
  }
}

void require_finite(const Vec3& v, const char* what) {
  if (!v.allFinite()) throw InvalidParams(std::string(what) + ": non-finite entry");
}

// Kirchhoff equations for H = <m, Am>/2 + <p, Bp>/2 with diagonal A, B.
QuadraticVectorField kirchhoff_equations(const Vec3& a, const Vec3& b) {
  FieldBuilder fb(6);
  fb.add_quadratic(0, 1, 2, a[2] - a[1]).add_quadratic(0, 4, 5, b[2] - b[1]);
  fb.add_quadratic(1, 2, 0, a[0] - a[2]).add_quadratic(1, 5, 3, b[0] - b[2]);
  fb.add_quadratic(2, 0, 1, a[1] - a[0]).add_quadratic(2, 3, 4, b[1] - b[0]);
  fb.add_quadratic(3, 2, 4, a[2]).add_quadratic(3, 1, 5, -a[1]);
  fb.add_quadratic(4, 0, 5, a[0]).add_quadratic(4, 2, 3, -a[2]);
  fb.add_quadratic(5, 1, 3, a[1]).add_quadratic(5, 0, 4, -a[0]);
  return fb.build();
}

QuadraticVectorField lagrange_field(const LagrangeParams& p) {
  const double al = p.alpha;
  const double ga = p.gamma;
  FieldBuilder fb(6);
  fb.add_quadratic(0, 1, 2, al - 1.0).add_linear(0, 4, ga);
  fb.add_quadratic(1, 0, 2, 1.0 - al).add_linear(1, 3, -ga);
  fb.add_quadratic(3, 4, 2, al).add_quadratic(3, 5, 1, -1.0);
  fb.add_quadratic(4, 5, 0, 1.0).add_quadratic(4, 3, 2, -al);
  fb.add_quadratic(5, 3, 1, 1.0).add_quadratic(5, 4, 0, -1.0);
  return fb.build();
}

QuadraticVectorField planar_field(const PlanarFamilyParams& p) {
  const int n = p.dim();
  FieldBuilder fb(n);
  if (p.extra) {
    for (int i = 2; i < n; ++i) fb.set_row(i, *p.extra);
  }
  // Component 0: l(x) (b x1 + c x2); component 1: -l(x) (a x1 + b x2).
  const std::array<std::array<double, 2>, 2> u = {{{p.b, p.c}, {-p.a, -p.b}}};
  for (int row = 0; row < 2; ++row) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < 2; ++k) fb.add_quadratic(row, j, k, p.ell[j] * u[row][k]);
    }
    for (int k = 0; k < 2; ++k) fb.add_linear(row, k, p.ell0 * u[row][k]);
  }
  return fb.build();
}

void validate(const PlanarFamilyParams& p) {
  if (p.dim() < 2) throw InvalidParams("planar family: dimension must be at least 2");
  if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c) ||
      !std::isfinite(p.ell0) || !p.ell.allFinite()) {
    throw InvalidParams("planar family: non-finite parameter");
  }
  if (p.extra && p.extra->dim() != p.dim()) {
    throw DimensionMismatch("planar family: extra field dimension does not match ell");
  }
}

std::vector<std::string> clebsch_integrals(bool first) {
  std::vector<std::string> names = {"I0", "J0"};
  if (first) {
    names.push_back("K");
  } else {
    for (const char* g : {"g1", "g2", "g3", "G1", "G2", "G3"}) names.emplace_back(g);
  }
  for (const char* c : {"c1", "c2", "c3", "c0", "C1", "C2", "C3", "C0"}) names.emplace_back(c);
  return names;
}

}  // namespace

QuadraticVectorField clebsch_field(const Vec3& a, const Vec3& b) {
  require_finite(a, "clebsch field");
  require_finite(b, "clebsch field");
  return kirchhoff_equations(a, b);
}

std::string_view kind_name(SystemKind kind) {
  return kKindNames.at(static_cast<std::size_t>(kind));
}

SystemKind kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<SystemKind>(i);
  }
  throw InvalidParams("unknown system kind \"" + std::string(name) + "\"");
}

double clebsch_condition_residual(const Vec3& a, const Vec3& b) {
  require_finite(a, "clebsch condition");
  require_finite(b, "clebsch condition");
  if ((a.array() == 0.0).any()) {
    throw InvalidParams("clebsch condition: all a_i must be nonzero");
  }
  return (b[0] - b[1]) / a[2] + (b[1] - b[2]) / a[0] + (b[2] - b[0]) / a[1];
}

ClebschParams clebsch_derived_params(const Vec3& a, const Vec3& b, double tol) {
  const double residual = clebsch_condition_residual(a, b);
  const double scale = 1.0 + b.cwiseAbs().maxCoeff() / a.cwiseAbs().minCoeff();
  if (std::abs(residual) > tol * scale) {
    throw InvalidParams("clebsch parameters violate the Clebsch condition (residual " +
                        std::to_string(residual) + ")");
  }

  ClebschParams out;
  out.a = a;
  out.b = b;
  out.wcoef = Vec3(1.0 / a[1] + 1.0 / a[2] - 1.0 / a[0],
                   1.0 / a[2] + 1.0 / a[0] - 1.0 / a[1],
                   1.0 / a[0] + 1.0 / a[1] - 1.0 / a[2]);

  // 1/beta = (b_i - b_j) / (a_k (a_i - a_j)) for cyclic (i, j, k).
  std::array<double, 3> num{}, den{};
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3;
    const int j = (k + 2) % 3;
    num[k] = b[i] - b[j];
    den[k] = a[k] * (a[i] - a[j]);
  }
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(den[k]) > std::abs(den[best])) best = k;
  }
  const double a_scale = a.cwiseAbs().maxCoeff();
  const double b_scale = b.cwiseAbs().maxCoeff();
  if (std::abs(den[best]) <= 1e-14 * a_scale * a_scale ||
      std::abs(num[best]) <= 1e-14 * b_scale) {
    return out;  // beta undefined
  }
  const double beta = den[best] / num[best];
  for (int k = 0; k < 3; ++k) {
    if (std::abs(num[k] * beta - den[k]) > 1e-10 * (std::abs(den[k]) + std::abs(num[k] * beta) + a_scale * a_scale)) {
      throw InvalidParams("clebsch parameters: the three beta ratios disagree");
    }
  }
  out.beta = beta;
  return out;
}

std::vector<ClebschDecomposition> decompose_clebsch(const ClebschParams& params) {
  if (!params.beta || *params.beta == 0.0) {
    throw InvalidParams("decompose_clebsch: beta must be defined and nonzero");
  }
  const Vec3& a = params.a;
  const Vec3& b = params.b;
  const double beta = *params.beta;
  // beta b_i = alpha (a_1 + a_2 + a_3) - 2 alpha^2 - a_j a_k, identical for every i
  // under the Clebsch condition; average the three constant terms.
  const double s = a.sum();
  double kappa = 0.0;
  for (int i = 0; i < 3; ++i) kappa += a[(i + 1) % 3] * a[(i + 2) % 3] + beta * b[i];
  kappa /= 3.0;
  const double disc = s * s - 8.0 * kappa;
  const double disc_tol = 1e-12 * (s * s + 8.0 * std::abs(kappa));
  if (disc < -disc_tol) {
    throw InvalidParams("decompose_clebsch: no real alpha (negative discriminant)");
  }
  std::vector<double> roots;
  if (disc <= disc_tol) {
    roots.push_back(s / 4.0);
  } else {
    const double q = -0.5 * (-s + std::copysign(std::sqrt(disc), -s));
    // 2 alpha^2 - s alpha + kappa = 0
    if (q != 0.0) {
      roots.push_back(q / 2.0);
      roots.push_back(kappa / q);
    } else {
      roots.push_back(0.0);
    }
  }
  std::sort(roots.begin(), roots.end());

  std::vector<ClebschDecomposition> out;
  for (double alpha : roots) {
    ClebschDecomposition d;
    d.alpha = alpha;
    d.omega = (a.array() - alpha) / beta;
    const Vec3& w = d.omega;
    const Vec3 rebuilt(alpha * w[0] - beta * w[1] * w[2], alpha * w[1] - beta * w[2] * w[0],
                       alpha * w[2] - beta * w[0] * w[1]);
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if ((rebuilt - b).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw InvalidParams("decompose_clebsch: inconsistent inputs, b is not reproduced");
    }
    out.push_back(d);
  }
  return out;
}

System build_system(const SystemParams& params) {
  return std::visit(
      [&](const auto& p) -> System {
        using T = std::decay_t<decltype(p)>;
        SystemDescriptor desc;
        desc.params = params;
        if constexpr (std::is_same_v<T, ClebschParams>) {
          ClebschParams derived = clebsch_derived_params(p.a, p.b);
          if (!derived.beta || *derived.beta == 0.0) {
            throw InvalidParams(
                "general clebsch: beta must be finite and nonzero (use first_clebsch otherwise)");
          }
          desc.kind = SystemKind::GeneralClebsch;
          desc.params = derived;
          desc.clebsch = derived;
          desc.wronskian_coeffs = derived.wcoef;
          desc.integrals = clebsch_integrals(false);
          desc.densities = {"C0", "C1", "C2", "C3", "J0den"};
          return System{kirchhoff_equations(derived.a, derived.b), std::move(desc)};
        } else if constexpr (std::is_same_v<T, FirstClebschParams>) {
          require_finite(p.omega, "first clebsch");
          desc.kind = SystemKind::FirstClebsch;
          desc.wronskian_coeffs = Vec3::Ones();
          desc.integrals = clebsch_integrals(true);
          desc.densities = {"C0", "C1", "C2", "C3", "J0den"};
          return System{kirchhoff_equations(Vec3::Ones(), p.omega), std::move(desc)};
        } else if constexpr (std::is_same_v<T, SecondClebschParams>) {
          require_finite(p.omega, "second clebsch");
          const Vec3& w = p.omega;
          const Vec3 a = w;
          const Vec3 b(-w[1] * w[2], -w[2] * w[0], -w[0] * w[1]);
          ClebschParams derived = clebsch_derived_params(a, b);
          if (!derived.beta) {
            throw InvalidParams("second clebsch: omega must have pairwise distinct entries");
          }
          desc.kind = SystemKind::SecondClebsch;
          desc.clebsch = derived;
          desc.wronskian_coeffs = derived.wcoef;
          desc.integrals = clebsch_integrals(false);
          desc.densities = {"C0", "C1", "C2", "C3", "J0den"};
          return System{kirchhoff_equations(a, b), std::move(desc)};
        } else if constexpr (std::is_same_v<T, KirchhoffParams>) {
          if (!std::isfinite(p.a1) || !std::isfinite(p.a3) || !std::isfinite(p.b1) ||
              !std::isfinite(p.b3)) {
            throw InvalidParams("kirchhoff: non-finite parameter");
          }
          if (p.a1 == 0.0) throw InvalidParams("kirchhoff: a1 must be nonzero");
          desc.kind = SystemKind::Kirchhoff;
          desc.wronskian_coeffs = Vec3(1.0, 1.0, 2.0 * p.a3 / p.a1 - 1.0);
          desc.integrals = {"I0", "J0", "c1", "c3", "C1", "C3"};
          desc.densities = {"C1", "C3"};
          return System{kirchhoff_equations(Vec3(p.a1, p.a1, p.a3), Vec3(p.b1, p.b1, p.b3)),
                        std::move(desc)};
        } else if constexpr (std::is_same_v<T, LagrangeParams>) {
          if (!std::isfinite(p.alpha) || !std::isfinite(p.gamma)) {
            throw InvalidParams("lagrange: non-finite parameter");
          }
          desc.kind = SystemKind::Lagrange;
          desc.wronskian_coeffs = Vec3(1.0, 1.0, 2.0 * p.alpha - 1.0);
          desc.integrals = {"I0", "J0", "r", "s", "R", "S"};
          desc.densities = {"R", "S"};
          return System{lagrange_field(p), std::move(desc)};
        } else {
          validate(p);
          desc.kind = SystemKind::PlanarFamily;
          desc.integrals = {"F", "Fhat"};
          return System{planar_field(p), std::move(desc)};
        }
      },
      params);
}

double casimir_k1(const State& x) {
  require_e3_state(x, "casimir_k1");
  return x.tail<3>().squaredNorm();
}

double casimir_k2(const State& x) {
  require_e3_state(x, "casimir_k2");
  return x.head<3>().dot(x.tail<3>());
}

double clebsch_h1(const Vec3& omega, const State& x) {
  require_e3_state(x, "clebsch_h1");
  const auto p = x.tail<3>();
  return x.head<3>().squaredNorm() + omega.dot(p.cwiseProduct(p));
}

double clebsch_h2(const Vec3& omega, const State& x) {
  require_e3_state(x, "clebsch_h2");
  const auto m = x.head<3>();
  const auto p = x.tail<3>();
  const Vec3& w = omega;
  return w.dot(m.cwiseProduct(m)) - w[1] * w[2] * p[0] * p[0] - w[2] * w[0] * p[1] * p[1] -
         w[0] * w[1] * p[2] * p[2];
}

double lagrange_h1(const LagrangeParams& params, const State& x) {
  require_e3_state(x, "lagrange_h1");
  return x[0] * x[0] + x[1] * x[1] + params.alpha * x[2] * x[2] + 2.0 * params.gamma * x[5];
}

double hamiltonian(const System& sys, const State& x) {
  switch (sys.kind()) {
    case SystemKind::Lagrange:
      return 0.5 * lagrange_h1(std::get<LagrangeParams>(sys.descriptor.params), x);
    case SystemKind::PlanarFamily:
      throw UnsupportedSystem("hamiltonian: planar family has no e(3)* Hamiltonian");
    default:
      break;
  }
  require_e3_state(x, "hamiltonian");
  // H = <m, Am>/2 + <p, Bp>/2.
  Vec3 a, b;
  switch (sys.kind()) {
    case SystemKind::FirstClebsch:
      a = Vec3::Ones();
      b = std::get<FirstClebschParams>(sys.descriptor.params).omega;
      break;
    case SystemKind::Kirchhoff: {
      const auto& k = std::get<KirchhoffParams>(sys.descriptor.params);
      a = Vec3(k.a1, k.a1, k.a3);
      b = Vec3(k.b1, k.b1, k.b3);
      break;
    }
    default:
      a = sys.descriptor.clebsch->a;
      b = sys.descriptor.clebsch->b;
      break;
  }
  const auto m = x.head<3>();
  const auto p = x.tail<3>();
  return 0.5 * a.dot(m.cwiseProduct(m)) + 0.5 * b.dot(p.cwiseProduct(p));
}

double continuous_wronskian_residual(const System& sys, const State& x) {
  if (!sys.descriptor.wronskian_coeffs) {
    throw UnsupportedSystem("continuous_wronskian_residual: no Wronskian relation for " +
                            std::string(kind_name(sys.kind())));
  }
  require_e3_state(x, "continuous_wronskian_residual");
  const Vec3& g = *sys.descriptor.wronskian_coeffs;
  const State xdot = evaluate_field(sys.field, x);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += g[i] * (xdot[i] * x[i + 3] - x[i] * xdot[i + 3]);
  return sum;
}

Vector numerical_gradient(const ScalarFunction& fn, const State& x) {
  const double h = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());
  Vector grad(x.size());
  State probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = fn(probe);
    probe[i] = x[i] - h;
    const double down = fn(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double poisson_bracket_e3(const ScalarFunction& f, const ScalarFunction& g, const State& x) {
  require_e3_state(x, "poisson_bracket_e3");
  const Vector df = numerical_gradient(f, x);
  const Vector dg = numerical_gradient(g, x);
  const Vec3 fm = df.head<3>(), fp = df.tail<3>();
  const Vec3 gm = dg.head<3>(), gp = dg.tail<3>();
  const Vec3 m = x.head<3>(), p = x.tail<3>();
  return m.dot(fm.cross(gm)) + p.dot(fm.cross(gp) - gm.cross(fp));
}

}  // namespace khk
