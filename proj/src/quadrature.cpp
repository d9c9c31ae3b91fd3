#include "kramers/quadrature.hpp"

#include <cmath>

#include "kramers/common.hpp"

namespace kramers {
namespace {

// Golub--Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 * (first eigenvector component)^2.
void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                  double mu0, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    jacobi(i, i) = diag(i);
    if (i + 1 < n) {
      jacobi(i, i + 1) = offdiag(i);
      jacobi(i + 1, i) = offdiag(i);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) {
    throw NumericError("golub_welsch: eigensolve failed");
  }
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights(i) = mu0 * v0 * v0;
  }
}

}  // namespace

GaussHermite GaussHermite::probabilists(int order) {
  if (order < 1) throw ValidationError("GaussHermite: order must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd off(order - 1 > 0 ? order - 1 : 0);
  for (int k = 1; k < order; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
  GaussHermite gh;
  golub_welsch(diag, off, 1.0, gh.nodes, gh.weights);
  return gh;
}

GaussLegendre GaussLegendre::make(int order) {
  if (order < 1) throw ValidationError("GaussLegendre: order must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd off(order - 1 > 0 ? order - 1 : 0);
  for (int k = 1; k < order; ++k) {
    off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  }
  GaussLegendre gl;
  golub_welsch(diag, off, 2.0, gl.nodes, gl.weights);
  return gl;
}

double GaussLegendre::integrate(const std::function<double(double)>& f,
                                double a, double b, int cells) const {
  if (cells < 1) throw ValidationError("GaussLegendre: cells must be >= 1");
  const double h = (b - a) / cells;
  double total = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double mid = a + (c + 0.5) * h;
    double cell_sum = 0.0;
    for (int i = 0; i < nodes.size(); ++i) {
      cell_sum += weights(i) * f(mid + 0.5 * h * nodes(i));
    }
    total += 0.5 * h * cell_sum;
  }
  return total;
}

double periodic_trapezoid(const std::function<double(double)>& f,
                          double period, int n) {
  double s = 0.0;
  const double h = period / n;
  for (int i = 0; i < n; ++i) s += f(i * h);
  return s * h;
}

}  // namespace kramers
