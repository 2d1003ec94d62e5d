#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "khk/hkbasis.hpp"

namespace khk {

struct PropertyReport {
  std::string name;
  int trials = 0;
  int skipped = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  State worst_case_input;
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const PropertyReport& report);

// One trial: draws its input from the supplied generator, stores it in `input`
// and returns the violation, or nullopt to mark the trial skipped (pole,
// vanishing denominator).
using Trial = std::function<std::optional<double>(std::mt19937_64& rng, State& input)>;

// Runs `trials` independent trials on up to `threads` threads.  Trial i uses a
// generator seeded from (seed, i), so the report does not depend on the thread
// count.  Non-finite violations count as failures.
PropertyReport run_trials(const std::string& name, int trials, std::uint64_t seed,
                          double tolerance, const Trial& trial, unsigned threads = 0);

// Generator of trial i of a run with the given seed.
std::mt19937_64 trial_rng(std::uint64_t seed, int index);

// |Phi(Phi(x, e), -e) - x| / (1 + |x|), tolerance 1e-10.
PropertyReport check_reversibility(const System& sys, int trials, double eps,
                                   std::uint64_t seed = 42);

// Defect of the defining relation of each accepted step, tolerance 1e-12.
PropertyReport check_step_residual(const System& sys, int trials, double eps,
                                   std::uint64_t seed = 42);

// |det dPhi * Delta(x; e) - Delta(xt; -e)| / scale, tolerance 1e-11.
PropertyReport check_jacobian_identity(const System& sys, int trials, double eps,
                                       std::uint64_t seed = 42);

// Maximum relative drift |X(x_k) - X(x_0)| / (1 + |X(x_0)|) along orbits of
// `steps` steps; tolerance 1e-8.
PropertyReport check_conservation(const System& sys, const std::string& quantity, int steps,
                                  double eps, int trials = 5, std::uint64_t seed = 42);

// |mt3 - m3| / (1 + |m3|) per step along orbits; tolerance 1e-14.
PropertyReport check_m3_exact(const System& sys, int steps, double eps, int trials = 5,
                              std::uint64_t seed = 42);

// |phi(xt)/phi(x) - det dPhi(x)| / |det dPhi(x)|, tolerance 1e-10.  A custom
// density replaces the named one when given (for negative controls).
PropertyReport check_measure(const System& sys, const std::string& density, int trials,
                             double eps, std::uint64_t seed = 42,
                             const std::function<double(const State&, double)>& custom = {});

// The four one-step identities of the first Clebsch flow, tolerance
// 1e-12 * (1 + sum of |terms|).  `perturb` is added to c1 (negative control).
PropertyReport check_identities_clebsch1(const System& sys, int trials, double eps,
                                         std::uint64_t seed = 42, double perturb = 0.0);

// Psi-basis null vectors of the first Clebsch flow against their closed forms
// through I0 and J0, tolerance 1e-11.
PropertyReport check_closed_forms(const System& sys, int trials, double eps,
                                  std::uint64_t seed = 42);

// Wronskian observables of the given order: violation 1/gap_ratio (1 when
// null_dim != 1), tolerance 1e-6.
PropertyReport check_wronskian_basis(const System& sys, int order, int trials, double eps,
                                     std::uint64_t seed = 42, int window = 8);

// Order-1 (Small) or order-2 (Big) Wronskian null vector against the closed-form
// coefficients, projective distance, tolerance 1e-8.
PropertyReport check_wronskian_coefficients(const System& sys, CoeffKind kind, int trials,
                                            double eps, std::uint64_t seed = 42,
                                            int window = 8);

// Psi0 / Psi1 null vectors against psi_null_vector, tolerance 1e-8.
PropertyReport check_psi_basis(const System& sys, CoeffKind kind, int trials, double eps,
                               std::uint64_t seed = 42, int window = 8);

// Functional rank of the named integrals (I0, J0, K, J1..J4, coordinates):
// violation = names.size() - rank, tolerance 0.
PropertyReport check_functional_rank(const System& sys, const std::vector<std::string>& names,
                                     int trials, double eps, std::uint64_t seed = 42);

// Continuous Wronskian relation on the vector field, tolerance 1e-13 * (1 + |x|^3).
PropertyReport check_continuous_wronskian(const System& sys, int trials,
                                          std::uint64_t seed = 42);

// Gradient of the flow's Hamiltonian and of the Casimirs against the field,
// tolerance 1e-6 * scale.
PropertyReport check_flow_invariants(const System& sys, int trials, std::uint64_t seed = 42);

// {H1, H2} and {K_i, G} for random quadratic G on e(3)*, tolerance 1e-6 * scale.
PropertyReport check_brackets(const Vec3& omega, int trials, std::uint64_t seed = 42);

// Bilinear-measure hypothesis for a given form at random points.
PropertyReport check_bilinear_hypothesis(const System& sys, const BilinearForm& form,
                                         const std::string& name, int trials, double eps,
                                         std::uint64_t seed = 42);

// |Fhat - F| / scale along orbits for `draws` random planar systems, including
// indefinite forms; tolerance 1e-12.
PropertyReport check_planar_fhat(int draws, int steps, double eps, std::uint64_t seed = 42,
                                 int dim = 4);

struct SuiteOptions {
  double eps = 0.05;
  int trials = 200;
  int steps = 1000;
  int orbits = 5;
  std::uint64_t seed = 42;
  int max_order = 0;       // 0: the orders the theory covers for the system
  double rank_eps = 1.0;   // higher-order integrals separate only at larger steps
  int rank_points = 20;
};

// Every property the theory states for this system, in a fixed order.
std::vector<PropertyReport> run_suite(const System& sys, const SuiteOptions& options);

bool all_passed(const std::vector<PropertyReport>& reports);

}  // namespace khk
