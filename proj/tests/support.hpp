#pragma once

// Independent oracles and hand-rolled generators shared by the unit tests.
// Nothing here calls into Eigen's solvers: the oracles work on plain nested
// vectors so that they can catch mistakes in the library's own linear algebra.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "khk/systems.hpp"

namespace khk_test {

using Rows = std::vector<std::vector<double>>;

inline Rows to_rows(const khk::Matrix& m) {
  Rows out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

// Gaussian elimination with partial pivoting on an augmented copy.
inline std::vector<double> gauss_solve(Rows a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

// Laplace expansion along the first row.  Exponential, fine for n <= 6.
inline double cofactor_det(const Rows& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  double det = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    Rows minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (std::size_t c = 0; c < n; ++c) {
        if (c != j) row.push_back(a[r][c]);
      }
      minor.push_back(std::move(row));
    }
    det += (j % 2 == 0 ? 1.0 : -1.0) * a[0][j] * cofactor_det(minor);
  }
  return det;
}

// Central differences of a vector-valued map, columns are d/dx_j.
inline khk::Matrix fd_jacobian(const std::function<khk::Vector(const khk::State&)>& fn,
                               const khk::State& x, double h = 1e-6) {
  const khk::Vector f0 = fn(x);
  khk::Matrix jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    khk::State xp = x;
    khk::State xm = x;
    xp[j] += h;
    xm[j] -= h;
    jac.col(j) = (fn(xp) - fn(xm)) / (2.0 * h);
  }
  return jac;
}

// Deterministic generator of test inputs.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }

  khk::State state(int n, double scale = 1.0) {
    khk::State x(n);
    for (int i = 0; i < n; ++i) x[i] = uniform(-scale, scale);
    return x;
  }

  khk::Vec3 vec3(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }

  // Random quadratic field with coefficients in [-scale, scale].
  khk::QuadraticVectorField field(int n, double scale = 1.0) {
    khk::FieldBuilder b(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        b.add_linear(i, j, uniform(-scale, scale));
        for (int k = j; k < n; ++k) b.add_quadratic(i, j, k, uniform(-scale, scale));
      }
      b.add_constant(i, uniform(-scale, scale));
    }
    return b.build();
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// General Clebsch parameters; beta and the coefficients A_i are derived on build.
inline khk::ClebschParams clebsch(const khk::Vec3& a, const khk::Vec3& b) {
  khk::ClebschParams p;
  p.a = a;
  p.b = b;
  return p;
}

inline double max_abs(const khk::Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace khk_test
