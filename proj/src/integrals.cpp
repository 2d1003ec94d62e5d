#include "khk/integrals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

namespace khk {

namespace {

constexpr std::array<std::array<int, 2>, 3> kCyclic = {{{1, 2}, {2, 0}, {0, 1}}};

void require_dim(const System& sys, const State& x, const char* what) {
  if (x.size() != sys.dim()) {
    throw DimensionMismatch(std::string(what) + ": state has dimension " +
                            std::to_string(x.size()) + ", system has dimension " +
                            std::to_string(sys.dim()));
  }
}

double checked_div(double num, double den, double den_scale, const std::string& what) {
  if (!std::isfinite(den) || std::abs(den) <= 1e-14 * (1.0 + den_scale)) {
    throw DenominatorZero(what + ": denominator vanishes");
  }
  return num / den;
}

State forward(const System& sys, const State& x, double eps) {
  return kahan_step(sys.field, x, eps).next;
}

bool is_clebsch(SystemKind kind) {
  return kind == SystemKind::FirstClebsch || kind == SystemKind::GeneralClebsch ||
         kind == SystemKind::SecondClebsch;
}

// (a, b, A) of a Clebsch flow; the first flow is a = 1, b = omega, A = 1.
struct ClebschData {
  Vec3 a;
  Vec3 b;
  Vec3 A;
  double beta = 0.0;
  bool first = false;
};

ClebschData clebsch_data(const System& sys) {
  ClebschData d;
  if (sys.kind() == SystemKind::FirstClebsch) {
    d.a = Vec3::Ones();
    d.b = std::get<FirstClebschParams>(sys.descriptor.params).omega;
    d.A = Vec3::Ones();
    d.first = true;
    return d;
  }
  const ClebschParams& cp = sys.descriptor.clebsch.value();
  d.a = cp.a;
  d.b = cp.b;
  d.A = cp.wcoef;
  d.beta = cp.beta.value();
  return d;
}

// g_i on (x, x) or G_i on (x, y).
Vec3 g_terms(const ClebschData& d, const State& x, const State& y) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    g[i] = x[3 + i] * y[3 + i];
    if (!d.first) {
      const auto [j, k] = kCyclic[i];
      g[i] += d.beta * d.a[i] / (d.a[j] * d.a[k]) * x[i] * y[i];
    }
  }
  return g;
}

// (c1, c2, c3, c0) for sign = +1 and g from (x, x); (C1, C2, C3, C0) for sign = -1.
Vector clebsch_coeffs(const ClebschData& d, const Vec3& g, double eps, double sign) {
  const double e2 = eps * eps;
  Vector c(4);
  c[3] = 0.0;
  for (int i = 0; i < 3; ++i) {
    const auto [j, k] = kCyclic[i];
    c[i] = d.A[i] + sign * e2 * d.a[i] *
                        (d.A[k] * (d.b[i] - d.b[j]) * g[j] + d.A[j] * (d.b[i] - d.b[k]) * g[k]);
    c[3] += d.A[i] * d.a[j] * d.a[k] * g[i];
  }
  return c;
}

// Denominators of I0 (sign = +1, on g) and J0 (sign = -1, on G).
double clebsch_denominator(const ClebschData& d, const State& x, const State& y, double eps,
                           double sign) {
  const double e2 = eps * eps;
  if (d.first) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += d.b[i] * x[3 + i] * y[3 + i];
    return 1.0 - sign * e2 * s;
  }
  const Vec3 g = g_terms(d, x, y);
  return 1.0 + sign * e2 * (d.a.prod() / d.beta) * g.sum();
}

double clebsch_den_scale(const ClebschData& d, const State& x, const State& y, double eps) {
  const Vec3 g = g_terms(d, x, y);
  const double w = d.first ? d.b.cwiseAbs().maxCoeff() : std::abs(d.a.prod() / d.beta);
  return eps * eps * w * g.cwiseAbs().sum();
}

// Kirchhoff (c1, c3) on (x, y); sign = +1 gives small, -1 gives big coefficients.
Vector kirchhoff_coeffs(const KirchhoffParams& k, const State& x, const State& y, double eps,
                        double sign) {
  const double e2 = eps * eps;
  Vector c(2);
  c[0] = 1.0 + sign * e2 * (k.a3 * (k.a1 - k.a3) * x[2] * y[2] + k.a1 * (k.b1 - k.b3) * x[5] * y[5]);
  c[1] = 2.0 * k.a3 / k.a1 - 1.0 +
         sign * e2 *
             (k.a1 * (k.a3 - k.a1) * (x[0] * y[0] + x[1] * y[1]) +
              k.a3 * (k.b3 - k.b1) * (x[3] * y[3] + x[4] * y[4]));
  return c;
}

void require_m3(const State& x, const char* what) {
  if (!(std::abs(x[2]) >= 1e-12)) {
    throw DenominatorZero(std::string(what) + ": |m3| < 1e-12");
  }
}

Vector lagrange_small(const LagrangeParams& lp, const State& x, double eps) {
  require_m3(x, "lagrange r");
  const double e2 = eps * eps;
  const double al = lp.alpha;
  Vector c(2);
  c[0] = (2.0 * al - 1.0) + e2 * (al - 1.0) * (x[0] * x[0] + x[1] * x[1]) +
         e2 * lp.gamma / x[2] * (x[0] * x[3] + x[1] * x[4]);
  c[1] = 1.0 + e2 * al * (1.0 - al) * x[2] * x[2] - e2 * lp.gamma * x[5];
  return c;
}

Vector lagrange_big(const LagrangeParams& lp, const State& x, const State& xt, double eps) {
  require_m3(x, "lagrange R");
  const double e2 = eps * eps;
  const double al = lp.alpha;
  Vector c(2);
  c[0] = (2.0 * al - 1.0) - e2 * (al - 1.0) * (x[0] * xt[0] + x[1] * xt[1]) -
         e2 * lp.gamma / (2.0 * x[2]) * (xt[0] * x[3] + x[0] * xt[3] + xt[1] * x[4] + x[1] * xt[4]);
  c[1] = 1.0 - e2 * al * (1.0 - al) * x[2] * x[2] + 0.5 * e2 * lp.gamma * (x[5] + xt[5]);
  return c;
}

Vector coeffs_impl(const System& sys, const State& x, const State& xt, double eps,
                   CoeffKind kind) {
  const bool big = kind == CoeffKind::Big;
  switch (sys.kind()) {
    case SystemKind::FirstClebsch:
    case SystemKind::GeneralClebsch:
    case SystemKind::SecondClebsch: {
      const ClebschData d = clebsch_data(sys);
      return clebsch_coeffs(d, g_terms(d, x, big ? xt : x), eps, big ? -1.0 : 1.0);
    }
    case SystemKind::Kirchhoff:
      return kirchhoff_coeffs(std::get<KirchhoffParams>(sys.descriptor.params), x, big ? xt : x,
                              eps, big ? -1.0 : 1.0);
    case SystemKind::Lagrange: {
      const auto& lp = std::get<LagrangeParams>(sys.descriptor.params);
      return big ? lagrange_big(lp, x, xt, eps) : lagrange_small(lp, x, eps);
    }
    case SystemKind::PlanarFamily:
      break;
  }
  throw UnsupportedSystem("eval_coeffs: no coefficient functions for " +
                          std::string(kind_name(sys.kind())));
}

double integral_impl(const System& sys, const State& x, const State& xt, double eps,
                     CoeffKind kind) {
  const bool big = kind == CoeffKind::Big;
  const char* label = big ? "J0" : "I0";
  switch (sys.kind()) {
    case SystemKind::FirstClebsch:
    case SystemKind::GeneralClebsch:
    case SystemKind::SecondClebsch: {
      const ClebschData d = clebsch_data(sys);
      const State& y = big ? xt : x;
      const double num = clebsch_coeffs(d, g_terms(d, x, y), 0.0, 1.0)[3];
      const double den = clebsch_denominator(d, x, y, eps, big ? -1.0 : 1.0);
      return checked_div(num, den, clebsch_den_scale(d, x, y, eps), label);
    }
    case SystemKind::Kirchhoff:
    case SystemKind::Lagrange: {
      const Vector c = coeffs_impl(sys, x, xt, eps, kind);
      // Kirchhoff: c3 / c1; Lagrange: r / s.
      if (sys.kind() == SystemKind::Kirchhoff) return checked_div(c[1], c[0], 1.0, label);
      return checked_div(c[0], c[1], 1.0, label);
    }
    case SystemKind::PlanarFamily:
      break;
  }
  throw UnsupportedSystem(std::string(label) + ": not defined for " +
                          std::string(kind_name(sys.kind())));
}

double planar_impl(const System& sys, const State& x, const State& xt, double eps,
                   PlanarVariant variant) {
  if (sys.kind() != SystemKind::PlanarFamily) {
    throw UnsupportedSystem("eval_planar_F: system is not the planar family");
  }
  const auto& pp = std::get<PlanarFamilyParams>(sys.descriptor.params);
  const double disc = pp.a * pp.c - pp.b * pp.b;
  const double e2 = eps * eps;
  const double lx = pp.ell.dot(x) + pp.ell0;
  if (variant == PlanarVariant::F) {
    const double num = pp.a * x[0] * x[0] + 2.0 * pp.b * x[0] * x[1] + pp.c * x[1] * x[1];
    const double t = e2 * disc * lx * lx;
    return checked_div(num, 1.0 + t, std::abs(t), "F");
  }
  const double lt = pp.ell.dot(xt) + pp.ell0;
  const double num = pp.a * x[0] * xt[0] + pp.b * (x[0] * xt[1] + xt[0] * x[1]) +
                     pp.c * x[1] * xt[1];
  const double t = e2 * disc * lx * lt;
  return checked_div(num, 1.0 - t, std::abs(t), "Fhat");
}

double density_impl(const System& sys, const State& x, const State& xt, double eps,
                    double delta_x, std::string_view name) {
  const auto& names = sys.descriptor.densities;
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw InvalidParams("density \"" + std::string(name) + "\" is not declared for " +
                        std::string(kind_name(sys.kind())));
  }
  double coeff = 0.0;
  if (is_clebsch(sys.kind())) {
    if (name == "J0den") {
      coeff = clebsch_denominator(clebsch_data(sys), x, xt, eps, -1.0);
    } else {
      const Vector c = coeffs_impl(sys, x, xt, eps, CoeffKind::Big);
      const int idx = name == "C0" ? 3 : name[1] - '1';
      coeff = c[idx];
    }
  } else {
    // Kirchhoff (C1, C3) and Lagrange (R, S) both store the pair in order.
    const Vector c = coeffs_impl(sys, x, xt, eps, CoeffKind::Big);
    coeff = (name == "C1" || name == "R") ? c[0] : c[1];
  }
  return coeff * delta_x;
}

double eval_K_impl(const System& sys, const State& x, const State& xt, double eps) {
  if (sys.kind() != SystemKind::FirstClebsch) {
    throw UnsupportedSystem("K is defined for the first Clebsch flow only");
  }
  const ClebschData d = clebsch_data(sys);
  const Vector c = clebsch_coeffs(d, g_terms(d, x, x), eps, 1.0);
  const Vector C = clebsch_coeffs(d, g_terms(d, x, xt), eps, -1.0);
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += C[i] * x[i] * x[3 + i];
  const double scale = x.tail<3>().squaredNorm() + (x.tail<3>().cwiseAbs().dot(xt.tail<3>().cwiseAbs()));
  return checked_div(checked_div(s, C[3], scale, "K (C0)"), c[3], scale, "K (c0)");
}

// Column values of evaluate_integrals, without densities.
NamedValues integral_columns(const System& sys, const State& x, const State& xt, double eps) {
  NamedValues out;
  const auto& names = sys.descriptor.integrals;
  if (sys.kind() == SystemKind::PlanarFamily) {
    out.emplace_back("F", planar_impl(sys, x, xt, eps, PlanarVariant::F));
    out.emplace_back("Fhat", planar_impl(sys, x, xt, eps, PlanarVariant::Fhat));
    return out;
  }
  out.emplace_back("I0", integral_impl(sys, x, xt, eps, CoeffKind::Small));
  out.emplace_back("J0", integral_impl(sys, x, xt, eps, CoeffKind::Big));
  const Vector small = coeffs_impl(sys, x, xt, eps, CoeffKind::Small);
  const Vector big = coeffs_impl(sys, x, xt, eps, CoeffKind::Big);
  if (is_clebsch(sys.kind())) {
    const ClebschData d = clebsch_data(sys);
    if (d.first) {
      out.emplace_back("K", eval_K_impl(sys, x, xt, eps));
    } else {
      const Vec3 g = g_terms(d, x, x);
      const Vec3 G = g_terms(d, x, xt);
      for (int i = 0; i < 3; ++i) out.emplace_back("g" + std::to_string(i + 1), g[i]);
      for (int i = 0; i < 3; ++i) out.emplace_back("G" + std::to_string(i + 1), G[i]);
    }
    for (int i = 0; i < 4; ++i) out.emplace_back("c" + std::to_string((i + 1) % 4), small[i]);
    for (int i = 0; i < 4; ++i) out.emplace_back("C" + std::to_string((i + 1) % 4), big[i]);
  } else {
    // names: I0, J0, then the small pair and the big pair.
    out.emplace_back(names.at(2), small[0]);
    out.emplace_back(names.at(3), small[1]);
    out.emplace_back(names.at(4), big[0]);
    out.emplace_back(names.at(5), big[1]);
  }
  return out;
}

std::optional<int> coordinate_index(const System& sys, std::string_view name) {
  if (name.size() < 2) return std::nullopt;
  const std::string digits(name.substr(1));
  if (!std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
    return std::nullopt;
  }
  const int k = std::stoi(digits);
  if (name[0] == 'x' && k >= 1 && k <= sys.dim()) return k - 1;
  if (sys.dim() == 6 && sys.kind() != SystemKind::PlanarFamily && k >= 1 && k <= 3) {
    if (name[0] == 'm') return k - 1;
    if (name[0] == 'p') return k + 2;
  }
  return std::nullopt;
}

}  // namespace

double eval_I0(const System& sys, const State& x, double eps) {
  require_dim(sys, x, "eval_I0");
  return integral_impl(sys, x, x, eps, CoeffKind::Small);
}

double eval_J0(const System& sys, const State& x, double eps) {
  require_dim(sys, x, "eval_J0");
  return integral_impl(sys, x, forward(sys, x, eps), eps, CoeffKind::Big);
}

double eval_J0(const System& sys, const State& x, const State& xt, double eps) {
  require_dim(sys, x, "eval_J0");
  require_dim(sys, xt, "eval_J0");
  return integral_impl(sys, x, xt, eps, CoeffKind::Big);
}

Vector eval_coeffs(const System& sys, const State& x, double eps, CoeffKind kind) {
  require_dim(sys, x, "eval_coeffs");
  if (kind == CoeffKind::Small) return coeffs_impl(sys, x, x, eps, kind);
  return coeffs_impl(sys, x, forward(sys, x, eps), eps, kind);
}

Vector eval_coeffs(const System& sys, const State& x, const State& xt, double eps,
                   CoeffKind kind) {
  require_dim(sys, x, "eval_coeffs");
  require_dim(sys, xt, "eval_coeffs");
  return coeffs_impl(sys, x, xt, eps, kind);
}

Vec3 wronskian_null_vector(const System& sys, const State& x, double eps, CoeffKind kind) {
  const Vector c = eval_coeffs(sys, x, eps, kind);
  switch (sys.kind()) {
    case SystemKind::Kirchhoff:
      return Vec3(c[0], c[0], c[1]);
    case SystemKind::Lagrange:
      return Vec3(c[1], c[1], c[0]);
    default:
      return c.head<3>();
  }
}

Vector psi_null_vector(const System& sys, const State& x, double eps, CoeffKind kind) {
  if (!is_clebsch(sys.kind())) {
    throw UnsupportedSystem("psi_null_vector: Clebsch flows only");
  }
  const ClebschData d = clebsch_data(sys);
  const Vector c = eval_coeffs(sys, x, eps, kind);
  Vector out(4);
  for (int i = 0; i < 3; ++i) {
    const auto [j, k] = kCyclic[i];
    out[i] = c[i] * d.a[j] * d.a[k];
  }
  out[3] = -c[3];
  return out;
}

Vector closed_form_null_vector(const System& sys, const State& x, double eps, CoeffKind kind) {
  if (sys.kind() != SystemKind::FirstClebsch) {
    throw UnsupportedSystem("closed_form_null_vector: first Clebsch flow only");
  }
  const Vec3& w = std::get<FirstClebschParams>(sys.descriptor.params).omega;
  const bool big = kind == CoeffKind::Big;
  const double v = big ? eval_J0(sys, x, eps) : eval_I0(sys, x, eps);
  const double sign = big ? -1.0 : 1.0;
  Vector out(4);
  for (int i = 0; i < 3; ++i) out[i] = 1.0 + sign * eps * eps * w[i] * v;
  out[3] = -v;
  return out;
}

double projective_distance(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw DimensionMismatch("projective_distance: size mismatch");
  auto normalize = [](const Vector& w) {
    Eigen::Index idx = 0;
    const double top = w.cwiseAbs().maxCoeff(&idx);
    if (top == 0.0) throw InvalidParams("projective_distance: zero vector");
    return Vector(w / w[idx]);
  };
  return (normalize(u) - normalize(v)).cwiseAbs().maxCoeff();
}

double eval_K(const System& sys, const State& x, double eps) {
  require_dim(sys, x, "eval_K");
  return eval_K_impl(sys, x, forward(sys, x, eps), eps);
}

double eval_density(const System& sys, const State& x, double eps, std::string_view name) {
  require_dim(sys, x, "eval_density");
  const KahanStepResult step = kahan_step(sys.field, x, eps);
  return density_impl(sys, x, step.next, eps, step.delta, name);
}

double eval_planar_F(const System& sys, const State& x, double eps, PlanarVariant variant) {
  require_dim(sys, x, "eval_planar_F");
  if (variant == PlanarVariant::F) return planar_impl(sys, x, x, eps, variant);
  return planar_impl(sys, x, forward(sys, x, eps), eps, variant);
}

NamedValues evaluate_integrals(const System& sys, const State& x, double eps) {
  require_dim(sys, x, "evaluate_integrals");
  const KahanStepResult step = kahan_step(sys.field, x, eps);
  return evaluate_integrals(sys, x, step.next, eps, step.delta);
}

NamedValues evaluate_integrals(const System& sys, const State& x, const State& xt, double eps,
                               double delta_x) {
  require_dim(sys, x, "evaluate_integrals");
  require_dim(sys, xt, "evaluate_integrals");
  NamedValues out = integral_columns(sys, x, xt, eps);
  for (const auto& name : sys.descriptor.densities) {
    out.emplace_back("density_" + name, density_impl(sys, x, xt, eps, delta_x, name));
  }
  return out;
}

Vector denominators(const System& sys, const State& x, double eps) {
  require_dim(sys, x, "denominators");
  const KahanStepResult step = kahan_step(sys.field, x, eps);
  const State& xt = step.next;
  std::vector<double> dens = {step.delta};
  switch (sys.kind()) {
    case SystemKind::FirstClebsch:
    case SystemKind::GeneralClebsch:
    case SystemKind::SecondClebsch: {
      const ClebschData d = clebsch_data(sys);
      dens.push_back(clebsch_denominator(d, x, x, eps, 1.0));
      dens.push_back(clebsch_denominator(d, x, xt, eps, -1.0));
      dens.push_back(coeffs_impl(sys, x, xt, eps, CoeffKind::Small)[3]);
      dens.push_back(coeffs_impl(sys, x, xt, eps, CoeffKind::Big)[3]);
      break;
    }
    case SystemKind::Kirchhoff:
      dens.push_back(coeffs_impl(sys, x, xt, eps, CoeffKind::Small)[0]);
      dens.push_back(coeffs_impl(sys, x, xt, eps, CoeffKind::Big)[0]);
      break;
    case SystemKind::Lagrange:
      dens.push_back(x[2]);
      if (std::abs(x[2]) >= 1e-12) {
        dens.push_back(coeffs_impl(sys, x, xt, eps, CoeffKind::Small)[1]);
        dens.push_back(coeffs_impl(sys, x, xt, eps, CoeffKind::Big)[1]);
      }
      break;
    case SystemKind::PlanarFamily: {
      const auto& pp = std::get<PlanarFamilyParams>(sys.descriptor.params);
      const double disc = pp.a * pp.c - pp.b * pp.b;
      const double lx = pp.ell.dot(x) + pp.ell0;
      const double lt = pp.ell.dot(xt) + pp.ell0;
      dens.push_back(1.0 + eps * eps * disc * lx * lx);
      dens.push_back(1.0 - eps * eps * disc * lx * lt);
      break;
    }
  }
  return Eigen::Map<const Vector>(dens.data(), static_cast<Eigen::Index>(dens.size()));
}

OrbitFunction conserved_quantity(const System& sys, std::string_view name) {
  if (const auto idx = coordinate_index(sys, name)) {
    const int i = *idx;
    return [i](const State& x, double) { return x[i]; };
  }
  if (name == "I0") {
    return [sys](const State& x, double eps) { return eval_I0(sys, x, eps); };
  }
  if (name == "J0") {
    return [sys](const State& x, double eps) { return eval_J0(sys, x, eps); };
  }
  if (name == "K") {
    return [sys](const State& x, double eps) { return eval_K(sys, x, eps); };
  }
  if (name == "F" || name == "Fhat") {
    const PlanarVariant v = name == "F" ? PlanarVariant::F : PlanarVariant::Fhat;
    return [sys, v](const State& x, double eps) { return eval_planar_F(sys, x, eps, v); };
  }
  const auto slash = name.find('/');
  if (slash != std::string_view::npos) {
    const std::string num(name.substr(0, slash));
    const std::string den(name.substr(slash + 1));
    const auto& cols = sys.descriptor.integrals;
    for (const auto& part : {num, den}) {
      if (std::find(cols.begin(), cols.end(), part) == cols.end()) {
        throw InvalidParams("unknown quantity \"" + part + "\" for " +
                            std::string(kind_name(sys.kind())));
      }
    }
    return [sys, num, den](const State& x, double eps) {
      const State xt = forward(sys, x, eps);
      const NamedValues vals = integral_columns(sys, x, xt, eps);
      auto lookup = [&vals](const std::string& key) {
        return std::find_if(vals.begin(), vals.end(), [&](const auto& kv) { return kv.first == key; })
            ->second;
      };
      return checked_div(lookup(num), lookup(den), 0.0, num + "/" + den);
    };
  }
  throw InvalidParams("unknown quantity \"" + std::string(name) + "\" for " +
                      std::string(kind_name(sys.kind())));
}

std::vector<std::string> conserved_names(const System& sys) {
  switch (sys.kind()) {
    case SystemKind::FirstClebsch:
      return {"I0", "J0", "K", "c1/c0", "c2/c0", "c3/c0", "C1/C0", "C2/C0", "C3/C0"};
    case SystemKind::GeneralClebsch:
    case SystemKind::SecondClebsch:
      return {"I0", "J0", "c1/c0", "c2/c0", "c3/c0", "C1/C0", "C2/C0", "C3/C0"};
    case SystemKind::Kirchhoff:
    case SystemKind::Lagrange:
      return {"I0", "J0", "m3"};
    case SystemKind::PlanarFamily:
      return {"F", "Fhat"};
  }
  return {};
}

QuadraticPolynomial::QuadraticPolynomial(int dim, std::vector<PolyTerm> terms)
    : dim_(dim), terms_(std::move(terms)) {
  if (dim < 1) throw InvalidParams("quadratic polynomial: dimension must be positive");
  for (const auto& t : terms_) {
    if (t.eps2.empty()) throw InvalidParams("quadratic polynomial: empty coefficient");
    if (t.i < -1 || t.i >= dim || t.j < -1 || t.j >= dim || (t.i == -1 && t.j != -1)) {
      throw InvalidParams("quadratic polynomial: monomial index out of range");
    }
    for (double v : t.eps2) {
      if (!std::isfinite(v)) throw InvalidParams("quadratic polynomial: non-finite coefficient");
    }
  }
}

namespace {

double eps2_coefficient(const std::vector<double>& poly, double e2) {
  double acc = 0.0;
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * e2 + *it;
  return acc;
}

}  // namespace

double QuadraticPolynomial::evaluate(const State& x, double eps) const {
  if (x.size() != dim_) throw DimensionMismatch("quadratic polynomial: state dimension");
  double acc = 0.0;
  for (const auto& t : terms_) {
    double mono = 1.0;
    if (t.i >= 0) mono = t.j >= 0 ? x[t.i] * x[t.j] : x[t.i];
    acc += eps2_coefficient(t.eps2, eps * eps) * mono;
  }
  return acc;
}

double QuadraticPolynomial::polarize(const State& x, const State& y, double eps) const {
  if (x.size() != dim_ || y.size() != dim_) {
    throw DimensionMismatch("quadratic polynomial: state dimension");
  }
  double acc = 0.0;
  for (const auto& t : terms_) {
    double mono = 1.0;
    if (t.i >= 0) {
      mono = t.j >= 0 ? 0.5 * (x[t.i] * y[t.j] + y[t.i] * x[t.j]) : 0.5 * (x[t.i] + y[t.i]);
    }
    acc += eps2_coefficient(t.eps2, -eps * eps) * mono;
  }
  return acc;
}

double polarize_integral(const QuadraticPolynomial& poly, const State& x, const State& xt,
                         double eps) {
  return poly.polarize(x, xt, eps);
}

QuadraticPolynomial first_clebsch_i0_numerator() {
  std::vector<PolyTerm> terms;
  for (int i = 3; i < 6; ++i) terms.push_back({{1.0}, i, i});
  return QuadraticPolynomial(6, std::move(terms));
}

QuadraticPolynomial first_clebsch_i0_denominator(const Vec3& omega) {
  std::vector<PolyTerm> terms = {{{1.0}, -1, -1}};
  for (int i = 0; i < 3; ++i) terms.push_back({{0.0, -omega[i]}, 3 + i, 3 + i});
  return QuadraticPolynomial(6, std::move(terms));
}

QuadraticPolynomial kirchhoff_c1_polynomial(const KirchhoffParams& k) {
  return QuadraticPolynomial(6, {{{1.0}, -1, -1},
                                 {{0.0, k.a3 * (k.a1 - k.a3)}, 2, 2},
                                 {{0.0, k.a1 * (k.b1 - k.b3)}, 5, 5}});
}

QuadraticPolynomial kirchhoff_c3_polynomial(const KirchhoffParams& k) {
  const double mq = k.a1 * (k.a3 - k.a1);
  const double pq = k.a3 * (k.b3 - k.b1);
  return QuadraticPolynomial(6, {{{2.0 * k.a3 / k.a1 - 1.0}, -1, -1},
                                 {{0.0, mq}, 0, 0},
                                 {{0.0, mq}, 1, 1},
                                 {{0.0, pq}, 3, 3},
                                 {{0.0, pq}, 4, 4}});
}

BilinearHypothesisReport bilinear_measure_hypothesis_check(const System& sys,
                                                           const BilinearForm& form,
                                                           const State& x, const State& probe,
                                                           double eps) {
  require_dim(sys, x, "bilinear_measure_hypothesis_check");
  require_dim(sys, probe, "bilinear_measure_hypothesis_check");
  BilinearHypothesisReport rep;
  const double s1 = form(x, probe, eps);
  const double s2 = form(probe, x, eps);
  rep.symmetry_violation = std::abs(s1 - s2) / (1.0 + std::abs(s1) + std::abs(s2));

  const KahanStepResult plus = kahan_step(sys.field, x, eps);
  const KahanStepResult minus = kahan_step(sys.field, x, -eps);
  const double vp = form(x, plus.next, eps) * plus.delta;
  const double vm = form(x, minus.next, -eps) * minus.delta;
  rep.parity_violation = std::abs(vp - vm) / (1.0 + std::abs(vp) + std::abs(vm));
  rep.passed = rep.symmetry_violation <= rep.tolerance && rep.parity_violation <= rep.tolerance;
  return rep;
}

}  // namespace khk
