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

enum class MatrixFieldKind { Constant, DiagonalTrig, Conformal };

/// Symmetric positive-definite matrix field q -> D(q) with its Frechet
/// derivative tensor D'(q). Uniform ellipticity
///   (1/M_D) Id <= D(q) <= M_D Id
/// is certified from the descriptor at construction; `validate` spot-checks
/// it numerically along with symmetry and the derivative.
class MatrixField {
 public:
  explicit MatrixField(Domain domain) : domain_(domain) {}
  virtual ~MatrixField() = default;

  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim; }

  virtual MatrixFieldKind kind() const = 0;
  virtual void value(std::span<const double> q, Eigen::MatrixXd& out) const = 0;

  /// out[k] = dD/dq_k, so that (D'(q)[u])_{ij} = sum_k out[k](i,j) u_k.
  virtual void derivative(std::span<const double> q,
                          std::vector<Eigen::MatrixXd>& out) const = 0;

  /// Ellipticity constant M_D >= 1.
  virtual double ellipticity_bound() const = 0;

  virtual std::string describe() const = 0;

  /// Write the descriptor into the given config section.
  virtual void serialize(Config& cfg, const std::string& section) const = 0;

  // Scalar fast paths for d == 1.
  virtual double value1(double q) const;
  virtual double deriv1(double q) const;

  /// Row-wise divergence, (div D)_k = sum_j d_j D_{kj}(q).
  Eigen::VectorXd div_row(std::span<const double> q) const;

  /// Sampled numeric checks: symmetry to 1e-12, two-sided ellipticity, and
  /// derivative against central finite differences (1e-6 relative). Throws
  /// ValidationError on failure.
  void validate(int n_samples, std::uint64_t seed) const;

 private:
  Domain domain_;
};

using MatrixFieldPtr = std::shared_ptr<const MatrixField>;

MatrixFieldPtr make_constant_field(Domain domain, Eigen::MatrixXd value);

/// Diagonal entries d_i(q) = a_i + b_i cos(2 pi q_i / period)
///                          + c_i sin(2 pi q_i / period),
/// requiring a_i > sqrt(b_i^2 + c_i^2) so the field stays SPD.
MatrixFieldPtr make_diagonal_trig_field(Domain domain, Eigen::VectorXd offset,
                                        Eigen::VectorXd cos_coeff,
                                        Eigen::VectorXd sin_coeff,
                                        std::optional<double> period = std::nullopt);

/// Conformal field c(q) Id with
/// c(q) = a + sum_i (b_i cos(2 pi q_i / period) + c_i sin(2 pi q_i / period)).
MatrixFieldPtr make_conformal_field(Domain domain, double offset,
                                    Eigen::VectorXd cos_coeff,
                                    Eigen::VectorXd sin_coeff,
                                    std::optional<double> period = std::nullopt);

/// Free-function spelling of the row-wise divergence.
Eigen::VectorXd div_row(const MatrixField& field, std::span<const double> q);

}  // namespace kramers
