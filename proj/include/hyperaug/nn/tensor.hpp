#pragma once

#include <Eigen/Dense>

namespace hyperaug {

// Batches are row-major: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace hyperaug
