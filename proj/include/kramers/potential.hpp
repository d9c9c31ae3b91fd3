#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kramers/domain.hpp"

namespace kramers {

struct Config;

enum class PotentialKind { Zero, Quadratic, Cosine, DoubleWell, Sum };

/// Scalar potential with closed-form descriptor. Coefficients are built-in
/// closed forms (not arbitrary callbacks) so smoothness and Lipschitz
/// properties are decidable at construction.
class ScalarPotential {
 public:
  explicit ScalarPotential(Domain domain) : domain_(domain) {}
  virtual ~ScalarPotential() = default;

  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim; }

  virtual PotentialKind kind() const = 0;
  virtual double value(std::span<const double> q) const = 0;
  virtual void gradient(std::span<const double> q, std::span<double> out) const = 0;
  virtual bool has_hessian() const { return true; }
  virtual void hessian(std::span<const double> q, Eigen::MatrixXd& out) const;

  // Scalar fast paths for d == 1; defaults route through the vector API.
  virtual double value1(double q) const;
  virtual double grad1(double q) const;

  /// Global Lipschitz constant of the gradient, when one is certifiable from
  /// the descriptor; nullopt otherwise (e.g. the double well on R^d).
  virtual std::optional<double> gradient_lipschitz() const = 0;

  virtual std::string describe() const = 0;

  /// Write the descriptor into the given config section.
  virtual void serialize(Config& cfg, const std::string& section) const = 0;

 private:
  Domain domain_;
};

using PotentialPtr = std::shared_ptr<const ScalarPotential>;

PotentialPtr make_zero_potential(Domain domain);

/// q |-> 1/2 q^T K q with K symmetric positive semi-definite.
PotentialPtr make_quadratic_potential(Domain domain, Eigen::MatrixXd stiffness);

/// q |-> sum_i a_i cos(2 pi q_i / period). `period` defaults to the torus
/// edge length; it must be given explicitly on Euclidean domains.
PotentialPtr make_cosine_potential(Domain domain, Eigen::VectorXd amplitudes,
                                   std::optional<double> period = std::nullopt);

/// q |-> sum_i (q_i^2 - 1)^2. Euclidean domains only (the expression does not
/// descend to the torus); its gradient carries no global Lipschitz bound.
PotentialPtr make_double_well_potential(Domain domain);

PotentialPtr make_sum_potential(std::vector<PotentialPtr> terms);

/// Kinetic energy U on R^d. When U(p) = 1/2 p^T M^{-1} p the mass matrix is
/// retained so Gaussian momentum quadrature and exact sampling apply.
class KineticEnergy {
 public:
  KineticEnergy() = default;

  static KineticEnergy quadratic(int dim, Eigen::MatrixXd mass);
  static KineticEnergy from_potential(PotentialPtr u);

  bool is_quadratic() const { return mass_.has_value(); }
  const Eigen::MatrixXd& mass() const;
  const Eigen::MatrixXd& mass_inverse() const;
  int dim() const { return u_ ? u_->dim() : 0; }

  double value(std::span<const double> p) const { return u_->value(p); }
  void gradient(std::span<const double> p, std::span<double> out) const {
    u_->gradient(p, out);
  }
  double value1(double p) const { return u_->value1(p); }
  double grad1(double p) const { return u_->grad1(p); }
  const PotentialPtr& potential() const { return u_; }

  /// U must be even (momentum-reversal symmetry); spot-checked at sampled
  /// points.
  bool is_even(int n_samples, std::uint64_t seed) const;

 private:
  PotentialPtr u_;
  std::optional<Eigen::MatrixXd> mass_;
  Eigen::MatrixXd mass_inv_;
};

}  // namespace kramers
