#pragma once

#include <Eigen/Dense>
#include <span>

#include "kramers/common.hpp"

namespace kramers {

/// Positive square root of a symmetric positive-definite matrix, by symmetric
/// eigendecomposition. The positive root is the fixed convention everywhere;
/// other admissible roots differ by an orthogonal factor only.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m, double tol = 1e-10);

bool all_finite(std::span<const double> xs);

}  // namespace kramers
