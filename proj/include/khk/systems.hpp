#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "khk/quadfield.hpp"

namespace khk {

using ScalarFunction = std::function<double(const State&)>;

enum class SystemKind { GeneralClebsch, FirstClebsch, SecondClebsch, Kirchhoff, Lagrange, PlanarFamily };

std::string_view kind_name(SystemKind kind);
SystemKind kind_from_name(std::string_view name);

// Rigid body in an ideal fluid with diagonal inertia a and b satisfying the
// Clebsch condition.  beta is empty when it is undefined (all a_i equal, or
// all b_i equal); wcoef are the Wronskian-relation coefficients A_i.
struct ClebschParams {
  Vec3 a = Vec3::Ones();
  Vec3 b = Vec3::Zero();
  std::optional<double> beta;
  Vec3 wcoef = Vec3::Ones();
};

struct FirstClebschParams {
  Vec3 omega = Vec3(1.0, 2.0, 3.0);
};

struct SecondClebschParams {
  Vec3 omega = Vec3(1.0, 2.0, 3.0);
};

// a1 = a2 and b1 = b2.
struct KirchhoffParams {
  double a1 = 1.0;
  double a3 = 2.0;
  double b1 = 0.5;
  double b3 = -1.0;
};

struct LagrangeParams {
  double alpha = 2.0;
  double gamma = 1.0;
};

// First two components l(x) dH/dx2 and -l(x) dH/dx1 with
// H = (a x1^2 + 2 b x1 x2 + c x2^2)/2 and affine l(x) = ell . x + ell0.
// Components 2..n-1 are copied from `extra`; its first two rows are ignored.
struct PlanarFamilyParams {
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
  Vector ell = Vector::Zero(2);
  double ell0 = 1.0;
  std::optional<QuadraticVectorField> extra;

  int dim() const { return static_cast<int>(ell.size()); }
};

using SystemParams = std::variant<ClebschParams, FirstClebschParams, SecondClebschParams,
                                  KirchhoffParams, LagrangeParams, PlanarFamilyParams>;

struct SystemDescriptor {
  SystemKind kind = SystemKind::FirstClebsch;
  SystemParams params;
  // Set for GeneralClebsch and SecondClebsch: the derived (a, b, beta, A).
  std::optional<ClebschParams> clebsch;
  // Coefficients gamma_i of the continuous relation sum gamma_i (mdot_i p_i - m_i pdot_i) = 0.
  std::optional<Vec3> wronskian_coeffs;
  // Names of the attached integral columns, in output order.
  std::vector<std::string> integrals;
  // Names of the attached invariant-measure densities.
  std::vector<std::string> densities;
};

struct System {
  QuadraticVectorField field;
  SystemDescriptor descriptor;

  SystemKind kind() const noexcept { return descriptor.kind; }
  int dim() const noexcept { return field.dim(); }
};

// (b1 - b2)/a3 + (b2 - b3)/a1 + (b3 - b1)/a2.
double clebsch_condition_residual(const Vec3& a, const Vec3& b);

ClebschParams clebsch_derived_params(const Vec3& a, const Vec3& b, double tol = 1e-12);

struct ClebschDecomposition {
  double alpha = 0.0;
  Vec3 omega = Vec3::Zero();
};

// Real solutions (alpha, omega) of a_i = alpha + beta w_i, b_i = alpha w_i - beta w_j w_k.
std::vector<ClebschDecomposition> decompose_clebsch(const ClebschParams& params);

System build_system(const SystemParams& params);

// Kirchhoff equations for H = (<m, diag(a) m> + <p, diag(b) p>)/2, without
// any condition on (a, b).
QuadraticVectorField clebsch_field(const Vec3& a, const Vec3& b);

// Continuous Hamiltonians and Casimirs on e(3)*; x = (m, p).
double casimir_k1(const State& x);
double casimir_k2(const State& x);
double clebsch_h1(const Vec3& omega, const State& x);
double clebsch_h2(const Vec3& omega, const State& x);
double lagrange_h1(const LagrangeParams& params, const State& x);
// The flow's own Hamiltonian H (so that the field is {x, H}).
double hamiltonian(const System& sys, const State& x);

// sum gamma_i (mdot_i p_i - m_i pdot_i) with xdot = f(x).
double continuous_wronskian_residual(const System& sys, const State& x);

// Central-difference gradient with step 1e-6 (1 + |x|_inf).
Vector numerical_gradient(const ScalarFunction& fn, const State& x);

// Lie-Poisson bracket of e(3)*: m.(dF/dm x dG/dm) + p.(dF/dm x dG/dp - dG/dm x dF/dp).
double poisson_bracket_e3(const ScalarFunction& f, const ScalarFunction& g, const State& x);

}  // namespace khk
