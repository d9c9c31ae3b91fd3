#include "kramers/gibbs.hpp"

#include <cmath>

#include "kramers/linalg.hpp"
#include "kramers/quadrature.hpp"
#include "kramers/rng.hpp"

namespace kramers {

double GibbsSpec::hamiltonian(std::span<const double> q,
                              std::span<const double> p) const {
  return V->value(q) + U.value(p);
}

double GibbsSpec::unnormalized_density(std::span<const double> q,
                                       std::span<const double> p) const {
  return std::exp(-beta * hamiltonian(q, p));
}

Eigen::MatrixXd GibbsSpec::kappa_covariance() const {
  return U.mass() / beta;
}

void GibbsSpec::validate(int n_samples, std::uint64_t seed) const {
  if (!(beta > 0.0)) throw ValidationError("gibbs: beta must be > 0");
  CounterStream stream(seed, StreamPurpose::BurnIn, 2);
  const int d = domain.dim;
  std::vector<double> q(d), p(d);
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < d; ++i) {
      const double u = stream.uniform(static_cast<std::uint32_t>(s),
                                      static_cast<std::uint32_t>(2 * i));
      q[i] = domain.is_torus() ? u * domain.length : (u - 0.5) * 8.0;
      p[i] = (stream.uniform(static_cast<std::uint32_t>(s),
                             static_cast<std::uint32_t>(2 * i + 1)) -
              0.5) *
             8.0;
    }
    const double rho = unnormalized_density(q, p);
    if (!(rho > 0.0) || !std::isfinite(rho)) {
      throw ValidationError("gibbs density not positive and finite at sample");
    }
  }
}

namespace {

// Iterate the tensor grid of a d-dimensional Gauss-Hermite rule.
template <typename Body>
void for_each_tensor_node(const GaussHermite& gh, int d, Body&& body) {
  const int n = static_cast<int>(gh.nodes.size());
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  while (true) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      x[i] = gh.nodes(idx[i]);
      w *= gh.weights(idx[i]);
    }
    body(std::span<const double>(x.data(), x.size()), w);
    int k = 0;
    while (k < d && ++idx[k] == n) idx[k++] = 0;
    if (k == d) break;
  }
}

}  // namespace

double pi0_project(
    const std::function<double(std::span<const double>, std::span<const double>)>& f,
    const GibbsSpec& gibbs, std::span<const double> q, int quad_order) {
  if (!gibbs.U.is_quadratic()) {
    throw UnsupportedError(
        "pi0_project: non-quadratic kinetic energy has no built-in quadrature");
  }
  const int d = gibbs.domain.dim;
  const Eigen::MatrixXd root = spd_sqrt(gibbs.kappa_covariance());
  const GaussHermite gh = GaussHermite::probabilists(quad_order);
  std::vector<double> p(d);
  double acc = 0.0;
  for_each_tensor_node(gh, d, [&](std::span<const double> x, double w) {
    for (int i = 0; i < d; ++i) {
      p[i] = 0.0;
      for (int j = 0; j < d; ++j) p[i] += root(i, j) * x[j];
    }
    acc += w * f(q, std::span<const double>(p.data(), p.size()));
  });
  return acc;
}

Eigen::VectorXd pi0_noise_drift(const MatrixField& field, const GibbsSpec& gibbs,
                                std::span<const double> q, int quad_order) {
  const int d = gibbs.domain.dim;
  std::vector<Eigen::MatrixXd> dD;
  field.derivative(q, dD);
  Eigen::VectorXd out(d);
  std::vector<double> gradu(d);
  for (int k = 0; k < d; ++k) {
    out(k) = pi0_project(
        [&](std::span<const double>, std::span<const double> p) {
          gibbs.U.gradient(p, gradu);
          // (D'(q)[grad U(p)] p)_k = sum_{i,j} d_i D_{kj}(q) d_i U(p) p_j
          double v = 0.0;
          for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) v += dD[i](k, j) * gradu[i] * p[j];
          }
          return v;
        },
        gibbs, q, quad_order);
  }
  return out;
}

double noise_drift_identity_check(const MatrixField& field, const GibbsSpec& gibbs,
                                  std::span<const double> q, int quad_order) {
  const Eigen::VectorXd lhs = pi0_noise_drift(field, gibbs, q, quad_order);
  const Eigen::VectorXd rhs = field.div_row(q) / gibbs.beta;
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

double nu_average(const GibbsSpec& gibbs,
                  const std::function<double(std::span<const double>)>& f,
                  int points_per_dim) {
  const int d = gibbs.domain.dim;
  if (gibbs.domain.is_torus()) {
    if (d > 3) throw UnsupportedError("nu_average: tensor grid limited to d <= 3");
    const double L = gibbs.domain.length;
    const double h = L / points_per_dim;
    std::vector<int> idx(d, 0);
    std::vector<double> q(d);
    double num = 0.0, den = 0.0;
    while (true) {
      for (int i = 0; i < d; ++i) q[i] = idx[i] * h;
      const double w = std::exp(-gibbs.beta * gibbs.V->value(q));
      num += w * f(q);
      den += w;
      int k = 0;
      while (k < d && ++idx[k] == points_per_dim) idx[k++] = 0;
      if (k == d) break;
    }
    return num / den;
  }
  // Euclidean: nu is Gaussian only for quadratic V.
  if (gibbs.V->kind() != PotentialKind::Quadratic) {
    throw UnsupportedError("nu_average: Euclidean quadrature needs quadratic V");
  }
  Eigen::MatrixXd k(d, d);
  const std::vector<double> origin(d, 0.0);
  gibbs.V->hessian(origin, k);
  const Eigen::MatrixXd cov = k.inverse() / gibbs.beta;
  const Eigen::MatrixXd root = spd_sqrt(cov);
  const GaussHermite gh = GaussHermite::probabilists(64);
  std::vector<double> q(d);
  double acc = 0.0;
  for_each_tensor_node(gh, d, [&](std::span<const double> x, double w) {
    for (int i = 0; i < d; ++i) {
      q[i] = 0.0;
      for (int j = 0; j < d; ++j) q[i] += root(i, j) * x[j];
    }
    acc += w * f(q);
  });
  return acc;
}

}  // namespace kramers
