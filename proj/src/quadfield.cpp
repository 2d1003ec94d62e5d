#include "khk/quadfield.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace khk {

namespace {

void require_dim(const QuadraticVectorField& f, const State& x, const char* what) {
  if (x.size() != f.dim()) {
    throw DimensionMismatch(std::string(what) + ": state has dimension " +
                            std::to_string(x.size()) + ", field has dimension " +
                            std::to_string(f.dim()));
  }
}

// 2 eps (Q(x, y) + B(x + y)/2 + c) - (y - x), accumulated in long double.
Vector extended_residual(const QuadraticVectorField& f, const State& x, const State& y,
                         double eps) {
  const int n = f.dim();
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    long double acc = f.constant()[i];
    const Matrix& q = f.quad(i);
    for (int r = 0; r < n; ++r) {
      long double row = 0.0L;
      for (int c = 0; c < n; ++c) row += static_cast<long double>(q(r, c)) * y[c];
      acc += static_cast<long double>(x[r]) * row;
      acc += 0.5L * f.lin()(i, r) * (static_cast<long double>(x[r]) + y[r]);
    }
    acc = 2.0L * eps * acc - (static_cast<long double>(y[i]) - x[i]);
    out[i] = static_cast<double>(acc);
  }
  return out;
}

Matrix step_matrix(const QuadraticVectorField& f, const State& x, double eps) {
  const int n = f.dim();
  return Matrix::Identity(n, n) - eps * jacobian_field(f, x);
}

// Q(x, y) with each component x^T Q_i y.
Vector bilinear(const QuadraticVectorField& f, const State& x, const State& y) {
  Vector out(f.dim());
  for (int i = 0; i < f.dim(); ++i) {
    out[i] = x.dot(f.quad(i) * y);
  }
  return out;
}

}  // namespace

QuadraticVectorField::QuadraticVectorField(std::vector<Matrix> quad, Matrix lin,
                                           Vector constant)
    : quad_(std::move(quad)), lin_(std::move(lin)), constant_(std::move(constant)) {
  const auto n = constant_.size();
  if (n < 1) {
    throw InvalidParams("quadratic field: dimension must be positive");
  }
  if (static_cast<Eigen::Index>(quad_.size()) != n) {
    throw DimensionMismatch("quadratic field: expected " + std::to_string(n) +
                            " quadratic components, got " + std::to_string(quad_.size()));
  }
  if (lin_.rows() != n || lin_.cols() != n) {
    throw DimensionMismatch("quadratic field: linear part must be n x n");
  }
  if (!lin_.allFinite() || !constant_.allFinite()) {
    throw InvalidParams("quadratic field: non-finite coefficient");
  }
  for (std::size_t i = 0; i < quad_.size(); ++i) {
    const Matrix& q = quad_[i];
    if (q.rows() != n || q.cols() != n) {
      throw DimensionMismatch("quadratic field: component " + std::to_string(i) +
                              " must be n x n");
    }
    if (!q.allFinite()) {
      throw InvalidParams("quadratic field: non-finite coefficient");
    }
    const double tol = 1e-12 * (1.0 + q.cwiseAbs().maxCoeff());
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > tol) {
      throw InvalidParams("quadratic field: component " + std::to_string(i) +
                          " is not symmetric in its last two indices");
    }
    // Symmetrize exactly so polarization is well defined bit for bit.
    quad_[i] = 0.5 * (q + q.transpose());
  }
}

QuadraticVectorField QuadraticVectorField::zero(int dim) {
  if (dim < 1) throw InvalidParams("quadratic field: dimension must be positive");
  return QuadraticVectorField(std::vector<Matrix>(dim, Matrix::Zero(dim, dim)),
                              Matrix::Zero(dim, dim), Vector::Zero(dim));
}

FieldBuilder::FieldBuilder(int dim)
    : dim_(dim),
      quad_(dim > 0 ? dim : 0, Matrix::Zero(dim > 0 ? dim : 0, dim > 0 ? dim : 0)),
      lin_(Matrix::Zero(dim > 0 ? dim : 0, dim > 0 ? dim : 0)),
      constant_(Vector::Zero(dim > 0 ? dim : 0)) {
  if (dim < 1) throw InvalidParams("field builder: dimension must be positive");
}

void FieldBuilder::check_index(int index) const {
  if (index < 0 || index >= dim_) {
    throw DimensionMismatch("field builder: index " + std::to_string(index) +
                            " out of range for dimension " + std::to_string(dim_));
  }
}

FieldBuilder& FieldBuilder::add_quadratic(int component, int j, int k, double coeff) {
  check_index(component);
  check_index(j);
  check_index(k);
  quad_[component](j, k) += 0.5 * coeff;
  quad_[component](k, j) += 0.5 * coeff;
  return *this;
}

FieldBuilder& FieldBuilder::add_linear(int component, int j, double coeff) {
  check_index(component);
  check_index(j);
  lin_(component, j) += coeff;
  return *this;
}

FieldBuilder& FieldBuilder::add_constant(int component, double coeff) {
  check_index(component);
  constant_[component] += coeff;
  return *this;
}

FieldBuilder& FieldBuilder::set_row(int component, const QuadraticVectorField& source) {
  check_index(component);
  if (source.dim() != dim_) {
    throw DimensionMismatch("field builder: source field has wrong dimension");
  }
  quad_[component] = source.quad(component);
  lin_.row(component) = source.lin().row(component);
  constant_[component] = source.constant()[component];
  return *this;
}

QuadraticVectorField FieldBuilder::build() const {
  return QuadraticVectorField(quad_, lin_, constant_);
}

State evaluate_field(const QuadraticVectorField& f, const State& x) {
  require_dim(f, x, "evaluate_field");
  return bilinear(f, x, x) + f.lin() * x + f.constant();
}

State polarize_eval(const QuadraticVectorField& f, const State& x, const State& y) {
  require_dim(f, x, "polarize_eval");
  require_dim(f, y, "polarize_eval");
  return bilinear(f, x, y) + 0.5 * (f.lin() * (x + y)) + f.constant();
}

Matrix jacobian_field(const QuadraticVectorField& f, const State& x) {
  require_dim(f, x, "jacobian_field");
  Matrix jac = f.lin();
  for (int i = 0; i < f.dim(); ++i) {
    jac.row(i) += 2.0 * (f.quad(i) * x).transpose();
  }
  return jac;
}

double delta(const QuadraticVectorField& f, const State& x, double eps) {
  return step_matrix(f, x, eps).partialPivLu().determinant();
}

double singular_threshold(const QuadraticVectorField& f, const State& x, double eps) {
  const double norm = (eps * jacobian_field(f, x)).cwiseAbs().rowwise().sum().maxCoeff();
  return 1e-13 * std::pow(1.0 + norm, f.dim());
}

double step_residual(const QuadraticVectorField& f, const State& x, const State& xt,
                     double eps) {
  const Vector defect = (xt - x) - 2.0 * eps * polarize_eval(f, x, xt);
  const double scale = 1.0 + x.cwiseAbs().maxCoeff() + xt.cwiseAbs().maxCoeff();
  return defect.cwiseAbs().maxCoeff() / scale;
}

KahanStepResult kahan_step(const QuadraticVectorField& f, const State& x, double eps) {
  require_dim(f, x, "kahan_step");
  const Matrix a = step_matrix(f, x, eps);
  const Eigen::PartialPivLU<Matrix> lu(a);
  const double det = lu.determinant();
  if (!std::isfinite(det) || std::abs(det) < singular_threshold(f, x, eps)) {
    throw SingularStep("kahan_step: map has a pole (|delta| below threshold)", det);
  }
  KahanStepResult out;
  out.next = x + 2.0 * eps * lu.solve(evaluate_field(f, x));
  // Two rounds of refinement against the defining relation, residual in long
  // double; near poles the plain solve loses digits that the integrals need.
  for (int round = 0; round < 2; ++round) {
    out.next += lu.solve(extended_residual(f, x, out.next, eps));
  }
  out.delta = det;
  out.residual = step_residual(f, x, out.next, eps);
  return out;
}

Matrix map_jacobian(const QuadraticVectorField& f, const State& x, double eps) {
  const State xt = kahan_step(f, x, eps).next;
  const int n = f.dim();
  const Matrix rhs = Matrix::Identity(n, n) + eps * jacobian_field(f, xt);
  return step_matrix(f, x, eps).partialPivLu().solve(rhs);
}

void to_json(nlohmann::json& j, const QuadraticVectorField& f) {
  const int n = f.dim();
  auto quad = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    auto rows = nlohmann::json::array();
    for (int r = 0; r < n; ++r) {
      auto row = nlohmann::json::array();
      for (int c = 0; c < n; ++c) row.push_back(f.quad(i)(r, c));
      rows.push_back(std::move(row));
    }
    quad.push_back(std::move(rows));
  }
  auto lin = nlohmann::json::array();
  for (int r = 0; r < n; ++r) {
    auto row = nlohmann::json::array();
    for (int c = 0; c < n; ++c) row.push_back(f.lin()(r, c));
    lin.push_back(std::move(row));
  }
  auto constant = nlohmann::json::array();
  for (int i = 0; i < n; ++i) constant.push_back(f.constant()[i]);
  j = nlohmann::json{{"dim", n}, {"quad", quad}, {"lin", lin}, {"const", constant}};
}

QuadraticVectorField field_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidParams("field json: expected an object");
  for (const char* key : {"dim", "quad", "lin", "const"}) {
    if (!j.contains(key)) throw InvalidParams(std::string("field json: missing \"") + key + "\"");
  }
  const int n = j.at("dim").get<int>();
  if (n < 1) throw InvalidParams("field json: \"dim\" must be positive");

  auto read_matrix = [n](const nlohmann::json& rows, const std::string& where) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
      throw DimensionMismatch("field json: " + where + " must have " + std::to_string(n) + " rows");
    }
    Matrix m(n, n);
    for (int r = 0; r < n; ++r) {
      const auto& row = rows[r];
      if (!row.is_array() || static_cast<int>(row.size()) != n) {
        throw DimensionMismatch("field json: " + where + " row " + std::to_string(r) +
                                " must have " + std::to_string(n) + " entries");
      }
      for (int c = 0; c < n; ++c) m(r, c) = row[c].get<double>();
    }
    return m;
  };

  const auto& quad_json = j.at("quad");
  if (!quad_json.is_array() || static_cast<int>(quad_json.size()) != n) {
    throw DimensionMismatch("field json: \"quad\" must have " + std::to_string(n) + " components");
  }
  std::vector<Matrix> quad;
  quad.reserve(n);
  for (int i = 0; i < n; ++i) {
    quad.push_back(read_matrix(quad_json[i], "quad[" + std::to_string(i) + "]"));
  }
  Matrix lin = read_matrix(j.at("lin"), "lin");
  const auto& c_json = j.at("const");
  if (!c_json.is_array() || static_cast<int>(c_json.size()) != n) {
    throw DimensionMismatch("field json: \"const\" must have " + std::to_string(n) + " entries");
  }
  Vector constant(n);
  for (int i = 0; i < n; ++i) constant[i] = c_json[i].get<double>();
  return QuadraticVectorField(std::move(quad), std::move(lin), std::move(constant));
}

}  // namespace khk
