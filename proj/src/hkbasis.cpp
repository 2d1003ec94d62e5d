#include "khk/hkbasis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace khk {

OrbitRecord iterate_orbit(const QuadraticVectorField& f, const State& x0, double eps, int steps) {
  if (steps < 1) throw InvalidParams("iterate_orbit: steps must be at least 1");
  if (x0.size() != f.dim()) throw DimensionMismatch("iterate_orbit: state dimension");
  OrbitRecord orbit;
  orbit.eps = eps;
  orbit.states.reserve(static_cast<std::size_t>(steps) + 1);
  orbit.states.push_back(x0);
  for (int k = 0; k < steps; ++k) {
    try {
      KahanStepResult r = kahan_step(f, orbit.states.back(), eps);
      orbit.deltas.push_back(r.delta);
      orbit.pole_flags.push_back(false);
      orbit.states.push_back(std::move(r.next));
    } catch (const SingularStep& e) {
      if (k == 0) throw;
      orbit.deltas.push_back(e.delta());
      orbit.pole_flags.push_back(true);
      break;
    }
  }
  return orbit;
}

double discrete_wronskian(const OrbitRecord& orbit, int ell, std::pair<int, int> pair, int base) {
  if (ell < 0 || base < 0 || static_cast<std::size_t>(base + ell) >= orbit.size()) {
    throw InvalidParams("discrete_wronskian: iterate " + std::to_string(base + ell) +
                        " is outside the orbit of length " + std::to_string(orbit.size()));
  }
  const State& x = orbit.states[base];
  const State& y = orbit.states[base + ell];
  const auto [i, j] = pair;
  if (i < 0 || j < 0 || i >= x.size() || j >= x.size()) {
    throw InvalidParams("discrete_wronskian: component index out of range");
  }
  return y[i] * x[j] - x[i] * y[j];
}

WronskianBasisSpec e3_wronskian_spec(int order) {
  if (order < 1) throw InvalidParams("wronskian order must be at least 1");
  return WronskianBasisSpec{order, {{0, 3}, {1, 4}, {2, 5}}};
}

Observable state_observable(std::string name, std::function<double(const State&)> fn) {
  return Observable{std::move(name), 0,
                    [fn = std::move(fn)](std::span<const State> s) { return fn(s[0]); }};
}

Observable constant_observable(double value) {
  return Observable{"1", 0, [value](std::span<const State>) { return value; }};
}

std::vector<Observable> wronskian_observables(const WronskianBasisSpec& spec) {
  if (spec.order < 1) throw InvalidParams("wronskian order must be at least 1");
  std::vector<Observable> out;
  for (const auto& [i, j] : spec.pairs) {
    if (i < 0 || j < 0) throw InvalidParams("wronskian pair index must be non-negative");
    const int ell = spec.order;
    out.push_back(Observable{
        "W" + std::to_string(ell) + "_" + std::to_string(i + 1) + std::to_string(j + 1), ell,
        [ell, i, j](std::span<const State> s) {
          return s[ell][i] * s[0][j] - s[0][i] * s[ell][j];
        }});
  }
  return out;
}

std::vector<Observable> psi_observables(const System& sys, CoeffKind kind) {
  std::vector<Observable> out;
  Vec3 weight = Vec3::Zero();
  if (sys.kind() == SystemKind::GeneralClebsch || sys.kind() == SystemKind::SecondClebsch) {
    const ClebschParams& cp = sys.descriptor.clebsch.value();
    const Vec3& a = cp.a;
    weight = Vec3(a[0] / (a[1] * a[2]), a[1] / (a[2] * a[0]), a[2] / (a[0] * a[1])) * *cp.beta;
  } else if (sys.kind() != SystemKind::FirstClebsch) {
    throw UnsupportedSystem("psi_observables: Clebsch flows only");
  }
  const bool big = kind == CoeffKind::Big;
  for (int i = 0; i < 3; ++i) {
    const double w = weight[i];
    out.push_back(Observable{std::string(big ? "G" : "g") + std::to_string(i + 1), big ? 1 : 0,
                             [i, w, big](std::span<const State> s) {
                               const State& x = s[0];
                               const State& y = big ? s[1] : s[0];
                               return x[3 + i] * y[3 + i] + w * x[i] * y[i];
                             }});
  }
  out.push_back(constant_observable());
  return out;
}

HKNullSpaceReport hk_nullspace(const OrbitRecord& orbit, const std::vector<Observable>& observables,
                               int window, int start) {
  const int m = static_cast<int>(observables.size());
  if (m < 1) throw InvalidParams("hk_nullspace: no observables");
  if (window < m + 2) {
    throw InvalidParams("hk_nullspace: window " + std::to_string(window) +
                        " is shorter than observables + 2 = " + std::to_string(m + 2));
  }
  if (start < 0) throw InvalidParams("hk_nullspace: negative window start");
  int lookahead = 0;
  for (const auto& obs : observables) lookahead = std::max(lookahead, obs.lookahead);
  const std::size_t needed = static_cast<std::size_t>(start + window + lookahead);
  if (orbit.size() < needed) {
    if (orbit.stopped_at_pole()) {
      throw SingularStep("hk_nullspace: pole encountered inside the window", orbit.deltas.back());
    }
    throw InvalidParams("hk_nullspace: orbit has " + std::to_string(orbit.size()) +
                        " states, window needs " + std::to_string(needed));
  }

  Matrix M(window, m);
  const std::span<const State> states(orbit.states);
  for (int r = 0; r < window; ++r) {
    for (int s = 0; s < m; ++s) {
      const auto& obs = observables[s];
      M(r, s) = obs.eval(states.subspan(start + r, obs.lookahead + 1));
    }
  }
  if (!M.allFinite()) throw InvalidParams("hk_nullspace: observable produced a non-finite value");

  const Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  HKNullSpaceReport rep;
  rep.window_start = start;
  rep.window_length = window;
  rep.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  rep.matrix_norm = smax;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] >= kNullThreshold * smax && smax > 0.0) ++rank;
  }
  rep.null_dim = m - rank;
  if (rep.null_dim > 0 && rank > 0) {
    const double first_null = sv[rank];
    rep.gap_ratio = first_null > 0.0 ? sv[rank - 1] / first_null
                                     : std::numeric_limits<double>::infinity();
  }
  const Matrix& V = svd.matrixV();
  for (int k = rank; k < m; ++k) {
    Vector v = V.col(k);
    Eigen::Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    v /= v[idx];
    rep.max_residual = std::max(rep.max_residual, (M * v).cwiseAbs().maxCoeff());
    rep.coeff_vectors.push_back(std::move(v));
  }
  return rep;
}

void to_json(nlohmann::json& j, const HKNullSpaceReport& report) {
  auto vectors = nlohmann::json::array();
  for (const auto& v : report.coeff_vectors) {
    vectors.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  j = nlohmann::json{{"singular_values", report.singular_values},
                     {"null_dim", report.null_dim},
                     {"gap_ratio", report.gap_ratio},
                     {"coeff_vectors", vectors},
                     {"window", {{"start", report.window_start}, {"length", report.window_length}}},
                     {"max_residual", report.max_residual}};
}

RatioSequences extract_integral_ratios(const OrbitRecord& orbit,
                                       const std::vector<Observable>& observables, int window,
                                       int windows, int pivot, double tolerance) {
  const int m = static_cast<int>(observables.size());
  if (pivot < 0 || pivot >= m) throw InvalidParams("extract_integral_ratios: pivot out of range");
  if (windows < 1) throw InvalidParams("extract_integral_ratios: need at least one window");
  RatioSequences out;
  out.ratios.assign(m, std::vector<double>(windows));
  for (int w = 0; w < windows; ++w) {
    const HKNullSpaceReport rep = hk_nullspace(orbit, observables, window, w);
    if (rep.null_dim != 1) {
      throw InvalidParams("extract_integral_ratios: window " + std::to_string(w) +
                          " has null_dim " + std::to_string(rep.null_dim) + ", expected 1");
    }
    const Vector& v = rep.coeff_vectors.front();
    if (std::abs(v[pivot]) < 1e-12) {
      throw InvalidParams("extract_integral_ratios: pivot coefficient vanishes");
    }
    for (int s = 0; s < m; ++s) out.ratios[s][w] = v[s] / v[pivot];
  }
  for (const auto& seq : out.ratios) {
    const auto [lo, hi] = std::minmax_element(seq.begin(), seq.end());
    const double mag = std::max(std::abs(*lo), std::abs(*hi));
    out.max_deviation = std::max(out.max_deviation, (*hi - *lo) / (1.0 + mag));
  }
  out.constant = out.max_deviation <= tolerance;
  return out;
}

int functional_rank(const std::vector<ScalarFunction>& fns, const State& x, double threshold) {
  if (fns.empty()) return 0;
  Matrix grad(static_cast<Eigen::Index>(fns.size()), x.size());
  for (std::size_t k = 0; k < fns.size(); ++k) {
    grad.row(static_cast<Eigen::Index>(k)) = numerical_gradient(fns[k], x).transpose();
  }
  if (!grad.allFinite()) throw InvalidParams("functional_rank: non-finite gradient");
  // Rank of the functions, not of their scales: each gradient row is normalized.
  for (Eigen::Index k = 0; k < grad.rows(); ++k) {
    const double norm = grad.row(k).norm();
    if (norm > 0.0) grad.row(k) /= norm;
  }
  const Vector sv = Eigen::JacobiSVD<Matrix>(grad).singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > threshold * sv[0]) ++rank;
  }
  return rank;
}

ScalarFunction wronskian_ratio_integral(const System& sys, double eps, int order, int num,
                                        int den, int window) {
  if (sys.dim() != 6 || sys.kind() == SystemKind::PlanarFamily) {
    throw UnsupportedSystem("wronskian integrals need a 6-dimensional e(3) system");
  }
  const auto observables = wronskian_observables(e3_wronskian_spec(order));
  return [sys, eps, order, num, den, window, observables](const State& x) {
    const OrbitRecord orbit = iterate_orbit(sys.field, x, eps, window - 1 + order);
    const HKNullSpaceReport rep = hk_nullspace(orbit, observables, window, 0);
    if (rep.null_dim != 1) {
      throw InvalidParams("wronskian integral: null space has dimension " +
                          std::to_string(rep.null_dim));
    }
    const Vector& v = rep.coeff_vectors.front();
    return v[num] / v[den];
  };
}

ScalarFunction higher_integral(const System& sys, double eps, std::string_view name) {
  if (sys.kind() == SystemKind::Kirchhoff || sys.kind() == SystemKind::Lagrange) {
    if (name == "J1") return wronskian_ratio_integral(sys, eps, 3, 2, 0);
  } else if (sys.kind() != SystemKind::PlanarFamily) {
    if (name == "J1") return wronskian_ratio_integral(sys, eps, 3, 0, 2);
    if (name == "J2") return wronskian_ratio_integral(sys, eps, 3, 1, 2);
    if (name == "J3") return wronskian_ratio_integral(sys, eps, 4, 0, 2);
    if (name == "J4") return wronskian_ratio_integral(sys, eps, 4, 1, 2);
  }
  throw InvalidParams("no higher integral \"" + std::string(name) + "\" for " +
                      std::string(kind_name(sys.kind())));
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

State sample_unit_ball(std::mt19937_64& rng, int n) {
  if (n < 1) throw InvalidParams("sample_unit_ball: dimension must be positive");
  // Box-Muller normals give a uniform direction; the radius is U^(1/n).
  State x(n);
  for (int i = 0; i < n; i += 2) {
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    x[i] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < n) x[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  const double norm = x.norm();
  const double radius = std::pow(uniform01(rng), 1.0 / n);
  return norm > 0.0 ? State(x * (radius / norm)) : State(State::Zero(n));
}

bool sample_regular_point(const System& sys, double eps, std::mt19937_64& rng, State& out,
                          int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    State x = sample_unit_ball(rng, sys.dim());
    try {
      const Vector dens = denominators(sys, x, eps);
      if (dens.cwiseAbs().minCoeff() < 1e-6) continue;
    } catch (const SingularStep&) {
      continue;
    } catch (const DenominatorZero&) {
      continue;
    }
    out = std::move(x);
    return true;
  }
  return false;
}

}  // namespace khk
