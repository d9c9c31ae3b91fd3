#include "kramers/problem.hpp"

#include <cmath>

namespace kramers {

double ProblemSpec::mass_energy(std::span<const double> q) const {
  if (!mass) throw UnsupportedError("problem has no mass field");
  Eigen::MatrixXd m;
  mass->value(q, m);
  const double logdet = std::log(m.determinant());
  return V->value(q) + logdet / (2.0 * beta);
}

void ProblemSpec::mass_energy_gradient(std::span<const double> q,
                                       std::span<double> out) const {
  if (!mass) throw UnsupportedError("problem has no mass field");
  const int d = dim();
  V->gradient(q, out);
  Eigen::MatrixXd m;
  std::vector<Eigen::MatrixXd> dm;
  mass->value(q, m);
  mass->derivative(q, dm);
  const Eigen::MatrixXd minv = m.inverse();
  // grad log det M = tr(M^{-1} dM/dq_k)
  for (int k = 0; k < d; ++k) {
    out[k] += (minv * dm[k]).trace() / (2.0 * beta);
  }
}

double ProblemSpec::mass_hamiltonian(std::span<const double> q,
                                     std::span<const double> p) const {
  if (!mass) throw UnsupportedError("problem has no mass field");
  Eigen::MatrixXd m;
  mass->value(q, m);
  Eigen::Map<const Eigen::VectorXd> pv(p.data(), p.size());
  return 0.5 * pv.dot(m.inverse() * pv) + mass_energy(q);
}

void ProblemSpec::check_consistent() const {
  if (!(beta > 0.0)) throw ValidationError("problem: beta must be > 0");
  if (!V) throw ValidationError("problem: missing potential");
  if (V->dim() != dim()) throw ValidationError("problem: V dimension mismatch");
  if (U.dim() != 0 && U.dim() != dim()) {
    throw ValidationError("problem: U dimension mismatch");
  }
  for (const MatrixFieldPtr& f : {D, A, mass, friction}) {
    if (f && f->dim() != dim()) {
      throw ValidationError("problem: matrix field dimension mismatch");
    }
  }
}

ProblemSpec default_problem() {
  ProblemSpec p;
  p.domain = Domain::torus(1, 2.0 * M_PI);
  p.beta = 1.0;
  p.V = make_cosine_potential(p.domain, Eigen::VectorXd::Ones(1));
  p.U = KineticEnergy::quadratic(1, Eigen::MatrixXd::Identity(1, 1));
  // D = 2 + sin q
  p.D = make_diagonal_trig_field(p.domain, Eigen::VectorXd::Constant(1, 2.0),
                                 Eigen::VectorXd::Zero(1),
                                 Eigen::VectorXd::Ones(1));
  p.check_consistent();
  return p;
}

ProblemSpec default_cg_problem() {
  ProblemSpec p = default_problem();
  // A = 1 + 0.3 cos z
  p.A = make_diagonal_trig_field(p.domain, Eigen::VectorXd::Constant(1, 1.0),
                                 Eigen::VectorXd::Constant(1, 0.3),
                                 Eigen::VectorXd::Zero(1));
  return p;
}

ProblemSpec default_mass_problem(double mass_offset, double mass_cos,
                                 double mass_sin, double sigma) {
  ProblemSpec p;
  p.domain = Domain::torus(1, 2.0 * M_PI);
  p.beta = 1.0;
  p.V = make_cosine_potential(p.domain, Eigen::VectorXd::Ones(1));
  p.U = KineticEnergy::quadratic(1, Eigen::MatrixXd::Identity(1, 1));
  p.mass = make_diagonal_trig_field(
      p.domain, Eigen::VectorXd::Constant(1, mass_offset),
      Eigen::VectorXd::Constant(1, mass_cos), Eigen::VectorXd::Constant(1, mass_sin));
  p.friction =
      make_constant_field(p.domain, sigma * Eigen::MatrixXd::Identity(1, 1));
  p.check_consistent();
  return p;
}

}  // namespace kramers
