#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "khk/systems.hpp"

namespace khk {

// Small coefficients c_i live on (x); big coefficients C_i on (x, Phi(x)).
enum class CoeffKind { Small, Big };

enum class PlanarVariant { F, Fhat };

using NamedValues = std::vector<std::pair<std::string, double>>;

// Quadratic-fractional integral I0 of the system's Kahan map.
double eval_I0(const System& sys, const State& x, double eps);

// Bilinear-fractional integral J0, evaluated on (x, Phi(x, eps)).
double eval_J0(const System& sys, const State& x, double eps);
double eval_J0(const System& sys, const State& x, const State& xt, double eps);

// Clebsch family: (c1, c2, c3, c0) or (C1, C2, C3, C0).
// Kirchhoff: (c1, c3) or (C1, C3).  Lagrange: (r, s) or (R, S).
Vector eval_coeffs(const System& sys, const State& x, double eps, CoeffKind kind);
Vector eval_coeffs(const System& sys, const State& x, const State& xt, double eps,
                   CoeffKind kind);

// Null vector of the Wronskians W^(1) (Small) or W^(2) (Big) in closed form:
// [c1:c2:c3] for Clebsch flows, [c1:c1:c3] for Kirchhoff, [s:s:r] for Lagrange.
Vec3 wronskian_null_vector(const System& sys, const State& x, double eps, CoeffKind kind);

// Null vector of the basis Psi0 = (g1, g2, g3, 1) (Small) or Psi1 = (G1, G2, G3, 1) (Big)
// of a Clebsch flow; for the first flow g_i = p_i^2 and G_i = p_i pt_i.
Vector psi_null_vector(const System& sys, const State& x, double eps, CoeffKind kind);

// First Clebsch flow only: the null vectors written through the integrals,
// [1 + eps^2 w_i I0 : -I0] and [1 - eps^2 w_i J0 : -J0].
Vector closed_form_null_vector(const System& sys, const State& x, double eps, CoeffKind kind);

// max |u - v| after normalizing both projective vectors (largest entry +1).
double projective_distance(const Vector& u, const Vector& v);

// First Clebsch flow: K = sum (C_i / C0) (m_i p_i) / c0.
double eval_K(const System& sys, const State& x, double eps);

// Numerator phi = (coefficient) * Delta(x; eps) of the named density.
double eval_density(const System& sys, const State& x, double eps, std::string_view name);

double eval_planar_F(const System& sys, const State& x, double eps, PlanarVariant variant);

// Every denominator the system's integrals divide by (including Delta(x; eps)
// and m3 for Lagrange), evaluated on (x, Phi(x, eps)).
Vector denominators(const System& sys, const State& x, double eps);

// The system's declared integral columns followed by density_<name> columns.
NamedValues evaluate_integrals(const System& sys, const State& x, double eps);
NamedValues evaluate_integrals(const System& sys, const State& x, const State& xt, double eps,
                               double delta_x);

// A function of (x, eps) that is conserved along orbits.  Names: I0, J0, K, F,
// Fhat, ratios like "c1/c0" or "C3/C0", and coordinates (m1..p3 or x1..xn)
// for probes.
using OrbitFunction = std::function<double(const State&, double)>;
OrbitFunction conserved_quantity(const System& sys, std::string_view name);

// Quantities the theory asserts to be conserved for this system.
std::vector<std::string> conserved_names(const System& sys);

// A polynomial of degree <= 2 in x whose coefficients are polynomials in eps^2.
struct PolyTerm {
  std::vector<double> eps2;  // coefficient = sum_k eps2[k] * (eps^2)^k
  int i = -1;                // -1: constant monomial
  int j = -1;                // -1 with i >= 0: linear monomial x_i
};

class QuadraticPolynomial {
 public:
  QuadraticPolynomial(int dim, std::vector<PolyTerm> terms);

  int dim() const noexcept { return dim_; }
  const std::vector<PolyTerm>& terms() const noexcept { return terms_; }

  double evaluate(const State& x, double eps) const;
  // Polarization with eps^2 -> -eps^2:
  // x_i x_j -> (x_i y_j + y_i x_j)/2, x_i -> (x_i + y_i)/2, constants unchanged.
  double polarize(const State& x, const State& y, double eps) const;

 private:
  int dim_;
  std::vector<PolyTerm> terms_;
};

double polarize_integral(const QuadraticPolynomial& poly, const State& x, const State& xt,
                         double eps);

// Coefficient tables of some quadratic-fractional integrals.
QuadraticPolynomial first_clebsch_i0_numerator();
QuadraticPolynomial first_clebsch_i0_denominator(const Vec3& omega);
QuadraticPolynomial kirchhoff_c1_polynomial(const KirchhoffParams& params);
QuadraticPolynomial kirchhoff_c3_polynomial(const KirchhoffParams& params);

using BilinearForm = std::function<double(const State&, const State&, double)>;

struct BilinearHypothesisReport {
  double symmetry_violation = 0.0;  // |P(x, y) - P(y, x)| relative
  double parity_violation = 0.0;    // |P(x, Phi(x, e)) D(x; e) - P(x, Phi(x, -e)) D(x; -e)| relative
  double tolerance = 1e-11;
  bool passed = false;
};

// Checks numerically at x that a symmetric bilinear expression P(x, xt; eps^2)
// satisfies P(x, Phi(x, eps)) = p(x; eps^2) / Delta(x; eps), which makes p the
// density of an invariant measure.  `probe` is the second argument for the
// symmetry check.
BilinearHypothesisReport bilinear_measure_hypothesis_check(const System& sys,
                                                           const BilinearForm& form,
                                                           const State& x, const State& probe,
                                                           double eps);

}  // namespace khk
