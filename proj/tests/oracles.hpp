#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the library's numeric paths.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "hyperaug/nn/tensor.hpp"

namespace oracle {

using hyperaug::Matrix;

inline Matrix naive_affine(const Matrix& x, const Matrix& w, const hyperaug::Vector& b) {
  Matrix y(x.rows(), w.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index o = 0; o < w.rows(); ++o) {
      double s = b[o];
      for (Eigen::Index i = 0; i < x.cols(); ++i) s += x(r, i) * w(o, i);
      y(r, o) = s;
    }
  }
  return y;
}

// Central difference of f with respect to *param, restoring it afterwards.
inline double central_difference(const std::function<double()>& f, double* param, double h = 1e-5) {
  const double saved = *param;
  *param = saved + h;
  const double up = f();
  *param = saved - h;
  const double down = f();
  *param = saved;
  return (up - down) / (2.0 * h);
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

}  // namespace oracle
