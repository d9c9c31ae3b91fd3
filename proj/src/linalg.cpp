#include "kramers/linalg.hpp"

#include <cmath>

namespace kramers {

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) throw ValidationError("spd_sqrt: matrix not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw ValidationError("spd_sqrt: matrix not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) {
    throw NumericError("spd_sqrt: eigendecomposition failed");
  }
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw ValidationError("spd_sqrt: matrix not positive-definite");
  }
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

bool all_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace kramers
