#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "khk/integrals.hpp"

namespace khk {

struct OrbitRecord {
  std::vector<State> states;  // x, Phi(x), Phi^2(x), ...
  double eps = 0.0;
  std::vector<double> deltas;     // deltas[k] = Delta(states[k]; eps)
  std::vector<bool> pole_flags;   // pole_flags[k]: step from states[k] hit a pole

  std::size_t size() const noexcept { return states.size(); }
  bool stopped_at_pole() const noexcept { return !pole_flags.empty() && pole_flags.back(); }
};

// Applies `steps` Kahan steps.  At a pole the orbit stops and the last flag is
// set; a pole on the very first step throws SingularStep.
OrbitRecord iterate_orbit(const QuadraticVectorField& f, const State& x0, double eps, int steps);

// W^(l)_ij = x_i^(base+l) x_j^(base) - x_i^(base) x_j^(base+l).
double discrete_wronskian(const OrbitRecord& orbit, int ell, std::pair<int, int> pair, int base);

struct WronskianBasisSpec {
  int order = 1;
  std::vector<std::pair<int, int>> pairs;
};

// Pairs (m_i, p_i), i = 1, 2, 3, of a 6-dimensional state.
WronskianBasisSpec e3_wronskian_spec(int order);

// An observable is evaluated on a run of consecutive orbit states; `lookahead`
// is how many states past the base point it needs.
struct Observable {
  std::string name;
  int lookahead = 0;
  std::function<double(std::span<const State>)> eval;
};

Observable state_observable(std::string name, std::function<double(const State&)> fn);
Observable constant_observable(double value = 1.0);
std::vector<Observable> wronskian_observables(const WronskianBasisSpec& spec);
// (g1, g2, g3, 1) (Small) or (G1, G2, G3, 1) (Big) of a Clebsch flow.
std::vector<Observable> psi_observables(const System& sys, CoeffKind kind);

struct HKNullSpaceReport {
  std::vector<double> singular_values;  // descending
  int null_dim = 0;
  std::vector<Vector> coeff_vectors;    // largest-magnitude entry is +1
  int window_start = 0;
  int window_length = 0;
  double gap_ratio = 0.0;               // sigma_last_nonnull / sigma_first_null; 0 if undefined
  double max_residual = 0.0;            // max |M v| over reported vectors
  double matrix_norm = 0.0;             // spectral norm of M
};

inline constexpr double kNullThreshold = 1e-9;

// Builds M[r][s] = phi_s(Phi^(start + r)(x)) for r < window and returns its
// singular spectrum and null space.
HKNullSpaceReport hk_nullspace(const OrbitRecord& orbit, const std::vector<Observable>& observables,
                               int window, int start = 0);

void to_json(nlohmann::json& j, const HKNullSpaceReport& report);

struct RatioSequences {
  std::vector<std::vector<double>> ratios;  // ratios[s][w] = v_s / v_pivot on window w
  double max_deviation = 0.0;               // max relative spread over windows
  bool constant = false;
};

// Recomputes the null vector on `windows` consecutive windows starting at
// 0, 1, 2, ... and returns the coefficient ratios against `pivot`.
RatioSequences extract_integral_ratios(const OrbitRecord& orbit,
                                       const std::vector<Observable>& observables, int window,
                                       int windows, int pivot, double tolerance = 1e-9);

// Numerical rank of the row-normalized gradient matrix of `fns` at x,
// threshold 1e-7 sigma_max.
int functional_rank(const std::vector<ScalarFunction>& fns, const State& x,
                    double threshold = 1e-7);

// Ratio integral v_num / v_den of the order-`order` Wronskian null vector,
// computed from an orbit window started at x.
ScalarFunction wronskian_ratio_integral(const System& sys, double eps, int order, int num,
                                        int den, int window = 12);

// The higher integrals named by the Clebsch and Kirchhoff Wronskian bases:
// J1 = D1/D3 and J2 = D2/D3 (third order), J3 = E1/E3 and J4 = E2/E3 (fourth
// order); for Kirchhoff J1 = D3/D1.
ScalarFunction higher_integral(const System& sys, double eps, std::string_view name);

// Uniform point in the unit ball of R^n.
State sample_unit_ball(std::mt19937_64& rng, int n);
double uniform01(std::mt19937_64& rng);

// Samples the unit ball until every declared denominator of the system is at
// least 1e-6 in magnitude and the first step is regular.  Returns false after
// max_attempts failures.
bool sample_regular_point(const System& sys, double eps, std::mt19937_64& rng, State& out,
                          int max_attempts = 1000);

}  // namespace khk
