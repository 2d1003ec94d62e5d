#include "khk/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace khk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sup_norm(const State& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

// Regular random point or nullopt.
std::optional<State> draw(const System& sys, double eps, std::mt19937_64& rng) {
  State x;
  if (!sample_regular_point(sys, eps, rng, x)) return std::nullopt;
  return x;
}

bool is_clebsch(SystemKind kind) {
  return kind == SystemKind::FirstClebsch || kind == SystemKind::GeneralClebsch ||
         kind == SystemKind::SecondClebsch;
}

bool is_e3(SystemKind kind) { return kind != SystemKind::PlanarFamily; }

ScalarFunction named_function(const System& sys, const std::string& name, double eps) {
  if (name.size() == 2 && name[0] == 'J' && name[1] >= '1' && name[1] <= '4') {
    return higher_integral(sys, eps, name);
  }
  OrbitFunction fn = conserved_quantity(sys, name);
  return [fn, eps](const State& x) { return fn(x, eps); };
}

// Max |Fhat - F| / (1 + |F| + |Fhat|) along an orbit from a random point.
// Sum of the magnitudes that enter F (or Fhat): each numerator term over the
// denominator, plus the value times the denominator's eps^2 part.
double planar_operand_scale(const PlanarFamilyParams& p, const State& x, const State& y,
                            double eps, double value, double sign) {
  const double ly = p.ell.dot(y) + p.ell0;
  const double lx = p.ell.dot(x) + p.ell0;
  const double t = eps * eps * (p.a * p.c - p.b * p.b) * lx * ly;
  const double den = std::abs(1.0 + sign * t);
  const double terms = std::abs(p.a * x[0] * y[0]) + std::abs(p.b * x[0] * y[1]) +
                       std::abs(p.b * y[0] * x[1]) + std::abs(p.c * x[1] * y[1]);
  return (terms + std::abs(value * t)) / den;
}

double fhat_violation(const System& sys, int steps, double eps, std::mt19937_64& rng,
                      State& input) {
  const auto& p = std::get<PlanarFamilyParams>(sys.descriptor.params);
  double violation = 0.0;
  State x0 = sample_unit_ball(rng, sys.dim());
  input = x0;
  const OrbitRecord orbit = iterate_orbit(sys.field, x0, eps, steps);
  for (std::size_t k = 0; k + 1 < orbit.size(); ++k) {
    const State& x = orbit.states[k];
    const State& xt = orbit.states[k + 1];
    const double F = eval_planar_F(sys, x, eps, PlanarVariant::F);
    const double Fh = eval_planar_F(sys, x, eps, PlanarVariant::Fhat);
    const double scale = 1.0 + planar_operand_scale(p, x, x, eps, F, 1.0) +
                         planar_operand_scale(p, x, xt, eps, Fh, -1.0);
    violation = std::max(violation, std::abs(Fh - F) / scale);
  }
  return violation;
}

}  // namespace

void to_json(nlohmann::json& j, const PropertyReport& r) {
  j = nlohmann::json{{"name", r.name},
                     {"trials", r.trials},
                     {"skipped", r.skipped},
                     {"max_violation", r.max_violation},
                     {"tolerance", r.tolerance},
                     {"passed", r.passed},
                     {"worst_case_input", std::vector<double>(r.worst_case_input.data(),
                                                              r.worst_case_input.data() +
                                                                  r.worst_case_input.size())},
                     {"seed", r.seed}};
}

std::mt19937_64 trial_rng(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

PropertyReport run_trials(const std::string& name, int trials, std::uint64_t seed,
                          double tolerance, const Trial& trial, unsigned threads) {
  if (trials < 1) throw InvalidParams(name + ": trials must be positive");
  std::vector<std::optional<double>> results(trials);
  std::vector<State> inputs(trials);

  auto work = [&](int i) {
    std::mt19937_64 rng = trial_rng(seed, i);
    try {
      results[i] = trial(rng, inputs[i]);
    } catch (const SingularStep&) {
      results[i] = std::nullopt;
    } catch (const DenominatorZero&) {
      results[i] = std::nullopt;
    } catch (const std::exception&) {
      results[i] = kInf;
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(trials));
  if (threads <= 1) {
    for (int i = 0; i < trials; ++i) work(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) work(i);
      });
    }
  }

  PropertyReport rep;
  rep.name = name;
  rep.trials = trials;
  rep.tolerance = tolerance;
  rep.seed = seed;
  int worst = -1;
  for (int i = 0; i < trials; ++i) {
    if (!results[i]) {
      ++rep.skipped;
      continue;
    }
    double v = *results[i];
    if (!std::isfinite(v)) v = kInf;
    if (worst < 0 || v > rep.max_violation) {
      rep.max_violation = v;
      worst = i;
    }
  }
  if (worst >= 0) rep.worst_case_input = inputs[worst];
  rep.passed = worst >= 0 && rep.max_violation <= tolerance;
  return rep;
}

PropertyReport check_reversibility(const System& sys, int trials, double eps,
                                   std::uint64_t seed) {
  return run_trials("reversibility", trials, seed, 1e-10,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      const State xt = kahan_step(sys.field, *x, eps).next;
                      const State back = kahan_step(sys.field, xt, -eps).next;
                      return sup_norm(back - *x) / (1.0 + sup_norm(*x));
                    });
}

PropertyReport check_step_residual(const System& sys, int trials, double eps,
                                   std::uint64_t seed) {
  return run_trials("step_residual", trials, seed, 1e-12,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      return kahan_step(sys.field, *x, eps).residual;
                    });
}

PropertyReport check_jacobian_identity(const System& sys, int trials, double eps,
                                       std::uint64_t seed) {
  return run_trials("jacobian_identity", trials, seed, 1e-11,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      const KahanStepResult step = kahan_step(sys.field, *x, eps);
                      const double lhs =
                          map_jacobian(sys.field, *x, eps).determinant() * step.delta;
                      const double rhs = delta(sys.field, step.next, -eps);
                      return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
                    });
}

PropertyReport check_conservation(const System& sys, const std::string& quantity, int steps,
                                  double eps, int trials, std::uint64_t seed) {
  const OrbitFunction fn = conserved_quantity(sys, quantity);
  return run_trials("conservation[" + quantity + "]", trials, seed, 1e-8,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      const OrbitRecord orbit = iterate_orbit(sys.field, *x, eps, steps);
                      if (orbit.stopped_at_pole()) return std::nullopt;
                      const double v0 = fn(orbit.states[0], eps);
                      double drift = 0.0;
                      for (std::size_t k = 1; k + 1 < orbit.size(); ++k) {
                        drift = std::max(drift, std::abs(fn(orbit.states[k], eps) - v0) /
                                                    (1.0 + std::abs(v0)));
                      }
                      return drift;
                    });
}

PropertyReport check_m3_exact(const System& sys, int steps, double eps, int trials,
                              std::uint64_t seed) {
  if (sys.kind() != SystemKind::Kirchhoff && sys.kind() != SystemKind::Lagrange) {
    throw UnsupportedSystem("check_m3_exact: Kirchhoff and Lagrange only");
  }
  return run_trials("m3_exact", trials, seed, 1e-14,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      const OrbitRecord orbit = iterate_orbit(sys.field, *x, eps, steps);
                      double worst = 0.0;
                      for (std::size_t k = 0; k + 1 < orbit.size(); ++k) {
                        const double m3 = orbit.states[k][2];
                        worst = std::max(worst, std::abs(orbit.states[k + 1][2] - m3) /
                                                    (1.0 + std::abs(m3)));
                      }
                      return worst;
                    });
}

PropertyReport check_measure(const System& sys, const std::string& density, int trials,
                             double eps, std::uint64_t seed,
                             const std::function<double(const State&, double)>& custom) {
  auto phi = [&](const State& x) {
    return custom ? custom(x, eps) : eval_density(sys, x, eps, density);
  };
  return run_trials("measure[" + density + "]", trials, seed, 1e-10,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      const State xt = kahan_step(sys.field, *x, eps).next;
                      const double det = map_jacobian(sys.field, *x, eps).determinant();
                      const double ratio = phi(xt) / phi(*x);
                      return std::abs(ratio - det) / std::abs(det);
                    });
}

PropertyReport check_identities_clebsch1(const System& sys, int trials, double eps,
                                         std::uint64_t seed, double perturb) {
  if (sys.kind() != SystemKind::FirstClebsch) {
    throw UnsupportedSystem("check_identities_clebsch1: first Clebsch flow only");
  }
  return run_trials(
      "identities_clebsch1", trials, seed, 1e-12,
      [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
        const auto x = draw(sys, eps, rng);
        if (!x) return std::nullopt;
        input = *x;
        const State xt = kahan_step(sys.field, *x, eps).next;
        Vector c = eval_coeffs(sys, *x, xt, eps, CoeffKind::Small);
        c[0] += perturb;
        const Vector C = eval_coeffs(sys, *x, xt, eps, CoeffKind::Big);
        const Vector ct = eval_coeffs(sys, xt, xt, eps, CoeffKind::Small);
        const auto m = x->head<3>();
        const auto p = x->tail<3>();
        const auto mt = xt.head<3>();
        const auto pt = xt.tail<3>();
        // Each identity: sum_i u_i a_i b_i = sum_i C_i d_i e_i.
        auto identity = [&](const Vector& u, const auto& a, const auto& b, const auto& d,
                            const auto& e) {
          double lhs = 0.0, rhs = 0.0, scale = 1.0;
          for (int i = 0; i < 3; ++i) {
            lhs += u[i] * a[i] * b[i];
            rhs += C[i] * d[i] * e[i];
            scale += std::abs(u[i] * a[i] * b[i]) + std::abs(C[i] * d[i] * e[i]);
          }
          return std::abs(lhs - rhs) / scale;
        };
        return std::max({identity(c, mt, p, m, p), identity(c, m, pt, m, p),
                         identity(ct, m, pt, mt, pt), identity(ct, mt, p, mt, pt)});
      });
}

PropertyReport check_closed_forms(const System& sys, int trials, double eps,
                                  std::uint64_t seed) {
  return run_trials("closed_form_null_vectors", trials, seed, 1e-11,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      double worst = 0.0;
                      for (CoeffKind kind : {CoeffKind::Small, CoeffKind::Big}) {
                        worst = std::max(worst,
                                         projective_distance(psi_null_vector(sys, *x, eps, kind),
                                                             closed_form_null_vector(sys, *x, eps, kind)));
                      }
                      return worst;
                    });
}

PropertyReport check_wronskian_basis(const System& sys, int order, int trials, double eps,
                                     std::uint64_t seed, int window) {
  const auto observables = wronskian_observables(e3_wronskian_spec(order));
  return run_trials("wronskian_basis[" + std::to_string(order) + "]", trials, seed, 1e-6,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      const OrbitRecord orbit =
                          iterate_orbit(sys.field, *x, eps, window - 1 + order);
                      const HKNullSpaceReport rep = hk_nullspace(orbit, observables, window, 0);
                      if (rep.null_dim != 1) return 1.0;
                      return 1.0 / rep.gap_ratio;
                    });
}

PropertyReport check_wronskian_coefficients(const System& sys, CoeffKind kind, int trials,
                                            double eps, std::uint64_t seed, int window) {
  const int order = kind == CoeffKind::Small ? 1 : 2;
  const auto observables = wronskian_observables(e3_wronskian_spec(order));
  return run_trials(std::string("wronskian_coefficients[") + (order == 1 ? "c" : "C") + "]",
                    trials, seed, 1e-8,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      const OrbitRecord orbit =
                          iterate_orbit(sys.field, *x, eps, window - 1 + order);
                      const HKNullSpaceReport rep = hk_nullspace(orbit, observables, window, 0);
                      if (rep.null_dim != 1) return kInf;
                      return projective_distance(rep.coeff_vectors.front(),
                                                 wronskian_null_vector(sys, *x, eps, kind));
                    });
}

PropertyReport check_psi_basis(const System& sys, CoeffKind kind, int trials, double eps,
                               std::uint64_t seed, int window) {
  const auto observables = psi_observables(sys, kind);
  const int lookahead = kind == CoeffKind::Big ? 1 : 0;
  return run_trials(std::string("psi_basis[") + (kind == CoeffKind::Small ? "0" : "1") + "]",
                    trials, seed, 1e-8,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      const OrbitRecord orbit =
                          iterate_orbit(sys.field, *x, eps, window - 1 + lookahead);
                      const HKNullSpaceReport rep = hk_nullspace(orbit, observables, window, 0);
                      if (rep.null_dim != 1) return kInf;
                      return projective_distance(rep.coeff_vectors.front(),
                                                 psi_null_vector(sys, *x, eps, kind));
                    });
}

PropertyReport check_functional_rank(const System& sys, const std::vector<std::string>& names,
                                     int trials, double eps, std::uint64_t seed) {
  std::vector<ScalarFunction> fns;
  std::string label;
  for (const auto& n : names) {
    fns.push_back(named_function(sys, n, eps));
    label += (label.empty() ? "" : ",") + n;
  }
  return run_trials("functional_rank[" + label + "]", trials, seed, 0.0,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      return static_cast<double>(fns.size()) - functional_rank(fns, *x);
                    });
}

PropertyReport check_continuous_wronskian(const System& sys, int trials, std::uint64_t seed) {
  return run_trials("continuous_wronskian", trials, seed, 1e-13,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      input = sample_unit_ball(rng, sys.dim());
                      const double n = sup_norm(input);
                      return std::abs(continuous_wronskian_residual(sys, input)) /
                             (1.0 + n * n * n);
                    });
}

PropertyReport check_flow_invariants(const System& sys, int trials, std::uint64_t seed) {
  const std::vector<ScalarFunction> fns = {
      [&sys](const State& x) { return hamiltonian(sys, x); }, casimir_k1, casimir_k2};
  return run_trials("flow_invariants", trials, seed, 1e-6,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      input = sample_unit_ball(rng, sys.dim());
                      const State f = evaluate_field(sys.field, input);
                      double worst = 0.0;
                      for (const auto& fn : fns) {
                        const Vector g = numerical_gradient(fn, input);
                        worst = std::max(worst, std::abs(g.dot(f)) / (1.0 + g.norm() * f.norm()));
                      }
                      return worst;
                    });
}

PropertyReport check_brackets(const Vec3& omega, int trials, std::uint64_t seed) {
  return run_trials(
      "poisson_brackets", trials, seed, 1e-6,
      [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
        input = sample_unit_ball(rng, 6);
        Matrix S(6, 6);
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) S(i, j) = 2.0 * uniform01(rng) - 1.0;
        }
        S = 0.5 * (S + S.transpose()).eval();
        const ScalarFunction G = [S](const State& x) { return x.dot(S * x); };
        const ScalarFunction h1 = [&omega](const State& x) { return clebsch_h1(omega, x); };
        const ScalarFunction h2 = [&omega](const State& x) { return clebsch_h2(omega, x); };
        return std::max({std::abs(poisson_bracket_e3(h1, h2, input)),
                         std::abs(poisson_bracket_e3(casimir_k1, G, input)),
                         std::abs(poisson_bracket_e3(casimir_k2, G, input))});
      });
}

PropertyReport check_bilinear_hypothesis(const System& sys, const BilinearForm& form,
                                         const std::string& name, int trials, double eps,
                                         std::uint64_t seed) {
  return run_trials("bilinear_hypothesis[" + name + "]", trials, seed, 1e-11,
                    [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                      const auto x = draw(sys, eps, rng);
                      if (!x) return std::nullopt;
                      input = *x;
                      const State probe = sample_unit_ball(rng, sys.dim());
                      const auto rep = bilinear_measure_hypothesis_check(sys, form, *x, probe, eps);
                      return std::max(rep.symmetry_violation, rep.parity_violation);
                    });
}

PropertyReport check_planar_fhat(int draws, int steps, double eps, std::uint64_t seed, int dim) {
  if (dim < 2) throw InvalidParams("check_planar_fhat: dimension must be at least 2");
  return run_trials(
      "planar_fhat_equals_f", draws, seed, 1e-12,
      [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
        auto u = [&rng](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
        PlanarFamilyParams p;
        p.a = u(-1.0, 1.0);
        p.c = u(-1.0, 1.0);
        p.b = u(-1.0, 1.0);
        p.ell = Vector(dim);
        for (int i = 0; i < dim; ++i) p.ell[i] = u(-0.5, 0.5);
        p.ell0 = u(0.5, 1.5);
        if (dim > 2) {
          FieldBuilder extra(dim);
          for (int i = 2; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) {
              extra.add_linear(i, j, u(-0.2, 0.2));
              for (int k = j; k < dim; ++k) extra.add_quadratic(i, j, k, u(-0.2, 0.2));
            }
          }
          p.extra = extra.build();
        }
        return fhat_violation(build_system(p), steps, eps, rng, input);
      });
}

std::vector<PropertyReport> run_suite(const System& sys, const SuiteOptions& o) {
  std::vector<PropertyReport> out;
  const double eps = o.eps;
  const int hk_trials = std::min(o.trials, 20);
  std::uint64_t seed = o.seed;

  out.push_back(check_step_residual(sys, o.trials, eps, seed));
  out.push_back(check_reversibility(sys, o.trials, eps, seed));
  out.push_back(check_jacobian_identity(sys, o.trials, eps, seed));
  for (const auto& q : conserved_names(sys)) {
    out.push_back(check_conservation(sys, q, o.steps, eps, o.orbits, seed));
  }
  if (sys.kind() == SystemKind::Kirchhoff || sys.kind() == SystemKind::Lagrange) {
    out.push_back(check_m3_exact(sys, o.steps, eps, o.orbits, seed));
  }
  for (const auto& d : sys.descriptor.densities) {
    out.push_back(check_measure(sys, d, o.trials, eps, seed));
  }
  if (sys.kind() == SystemKind::PlanarFamily) {
    out.push_back(run_trials("planar_fhat_equals_f", o.orbits, seed, 1e-12,
                             [&](std::mt19937_64& rng, State& input) -> std::optional<double> {
                               return fhat_violation(sys, std::min(o.steps, 200), eps, rng, input);
                             }));
    return out;
  }
  if (sys.kind() == SystemKind::FirstClebsch) {
    const Vec3 omega = std::get<FirstClebschParams>(sys.descriptor.params).omega;
    out.push_back(check_identities_clebsch1(sys, o.trials, eps, seed));
    out.push_back(check_closed_forms(sys, o.trials, eps, seed));
    const BilinearForm num = [](const State& x, const State& y, double) {
      return x.tail<3>().dot(y.tail<3>());
    };
    const BilinearForm den = [omega](const State& x, const State& y, double e) {
      return 1.0 + e * e * (omega.array() * x.tail<3>().array() * y.tail<3>().array()).sum();
    };
    out.push_back(check_bilinear_hypothesis(sys, num, "C0", o.trials, eps, seed));
    out.push_back(check_bilinear_hypothesis(sys, den, "J0den", o.trials, eps, seed));
  }
  const int max_order = o.max_order > 0 ? o.max_order : (is_clebsch(sys.kind()) ? 4 : 3);
  for (int order = 1; order <= max_order; ++order) {
    out.push_back(check_wronskian_basis(sys, order, hk_trials, eps, seed));
  }
  out.push_back(check_wronskian_coefficients(sys, CoeffKind::Small, hk_trials, eps, seed));
  out.push_back(check_wronskian_coefficients(sys, CoeffKind::Big, hk_trials, eps, seed));
  if (is_clebsch(sys.kind())) {
    out.push_back(check_psi_basis(sys, CoeffKind::Small, hk_trials, eps, seed));
    out.push_back(check_psi_basis(sys, CoeffKind::Big, hk_trials, eps, seed));
    out.push_back(check_functional_rank(sys, {"J1", "J2", "J3", "J4"}, o.rank_points, o.rank_eps, seed));
  } else if (sys.kind() == SystemKind::Kirchhoff) {
    out.push_back(check_functional_rank(sys, {"I0", "J0", "J1", "m3"}, o.rank_points, o.rank_eps, seed));
  }
  if (is_e3(sys.kind())) {
    out.push_back(check_continuous_wronskian(sys, o.trials, seed));
    out.push_back(check_flow_invariants(sys, o.trials, seed));
  }
  if (sys.kind() == SystemKind::FirstClebsch) {
    out.push_back(check_brackets(std::get<FirstClebschParams>(sys.descriptor.params).omega,
                                 o.trials, seed));
  }
  return out;
}

bool all_passed(const std::vector<PropertyReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed; });
}

}  // namespace khk
