#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <vector>

#include "khk/errors.hpp"

namespace khk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using State = Eigen::VectorXd;

// Quadratic vector field f(x) = Q(x) + Bx + c on R^n.
//
// The quadratic part is stored as n symmetric n x n matrices, one per output
// component, so that component i of Q(x) is x^T quad(i) x.  Values are
// immutable once constructed.
class QuadraticVectorField {
 public:
  QuadraticVectorField(std::vector<Matrix> quad, Matrix lin, Vector constant);

  static QuadraticVectorField zero(int dim);

  int dim() const noexcept { return static_cast<int>(constant_.size()); }
  const Matrix& quad(int component) const { return quad_.at(component); }
  const std::vector<Matrix>& quad() const noexcept { return quad_; }
  const Matrix& lin() const noexcept { return lin_; }
  const Vector& constant() const noexcept { return constant_; }

  double quad_coeff(int i, int j, int k) const { return quad_.at(i)(j, k); }

 private:
  std::vector<Matrix> quad_;
  Matrix lin_;
  Vector constant_;
};

// Assembles a field from monomials.  add_quadratic(i, j, k, v) adds the term
// v * x_j * x_k to component i, splitting it symmetrically over (j, k).
class FieldBuilder {
 public:
  explicit FieldBuilder(int dim);

  FieldBuilder& add_quadratic(int component, int j, int k, double coeff);
  FieldBuilder& add_linear(int component, int j, double coeff);
  FieldBuilder& add_constant(int component, double coeff);
  FieldBuilder& set_row(int component, const QuadraticVectorField& source);

  QuadraticVectorField build() const;

 private:
  void check_index(int index) const;

  int dim_;
  std::vector<Matrix> quad_;
  Matrix lin_;
  Vector constant_;
};

struct KahanStepResult {
  State next;
  double delta = 1.0;     // det(I - eps f'(x))
  double residual = 0.0;  // max-norm defect of the defining relation / (1 + |x| + |next|)
};

// f(x) = Q(x) + Bx + c.
State evaluate_field(const QuadraticVectorField& f, const State& x);

// Polarized right-hand side Q(x, y) + B(x + y)/2 + c.
State polarize_eval(const QuadraticVectorField& f, const State& x, const State& y);

// f'(x)[i][j] = 2 sum_k Q[i][j][k] x_k + B[i][j].
Matrix jacobian_field(const QuadraticVectorField& f, const State& x);

// Common denominator det(I - eps f'(x)) of the Kahan map.
double delta(const QuadraticVectorField& f, const State& x, double eps);

// Pole threshold 1e-13 * (1 + ||eps f'(x)||_inf)^n.
double singular_threshold(const QuadraticVectorField& f, const State& x, double eps);

// One step x -> x + 2 eps (I - eps f'(x))^{-1} f(x).  Throws SingularStep at
// poles of the map.
KahanStepResult kahan_step(const QuadraticVectorField& f, const State& x, double eps);

// Defect of (xt - x) = 2 eps (Q(x, xt) + B(x + xt)/2 + c), max norm, relative
// to 1 + |x| + |xt|.
double step_residual(const QuadraticVectorField& f, const State& x, const State& xt,
                     double eps);

// d(xt)/dx = (I - eps f'(x))^{-1} (I + eps f'(xt)).
Matrix map_jacobian(const QuadraticVectorField& f, const State& x, double eps);

void to_json(nlohmann::json& j, const QuadraticVectorField& f);
QuadraticVectorField field_from_json(const nlohmann::json& j);

}  // namespace khk
