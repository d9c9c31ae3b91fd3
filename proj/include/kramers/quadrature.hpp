#pragma once

#include <Eigen/Dense>
#include <functional>

namespace kramers {

/// Gauss-Hermite rule for the standard Gaussian weight e^{-x^2/2}/sqrt(2*pi).
/// Exact for polynomials up to degree 2*order - 1; weights sum to one.
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  static GaussHermite probabilists(int order);
};

/// Gauss-Legendre rule on [-1, 1]; weights sum to two.
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  static GaussLegendre make(int order);

  /// Integrate f over [a, b] with a composite rule on `cells` equal cells.
  double integrate(const std::function<double(double)>& f, double a, double b,
                   int cells = 1) const;
};

/// Trapezoid rule over one period of a periodic function; spectrally accurate
/// for smooth integrands.
double periodic_trapezoid(const std::function<double(double)>& f,
                          double period, int n);

}  // namespace kramers
