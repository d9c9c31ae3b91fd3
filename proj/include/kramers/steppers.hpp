#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "kramers/problem.hpp"

namespace kramers {

/// Reusable per-thread temporaries so the inner loops stay allocation-free.
struct StepScratch {
  std::vector<double> va, vb, vc, vd;
  Eigen::MatrixXd ma, mb, mc;
  Eigen::VectorXd ea, eb, ec;
  std::vector<Eigen::MatrixXd> tensor;
  void resize(int d);
};

/// Largest admissible Euler-Maruyama step for the kinetic families: keeps the
/// explicit damping factor of the momentum update inside (0, 1). Quadratic
/// kinetic energies only.
double kinetic_stability_cap(const ProblemSpec& prob, double lambda,
                             bool rescaled);

/// One Euler-Maruyama step of
///   dX = -[D grad V - (1/beta) div D] dt + sqrt(2/beta) D^{1/2} dW.
/// `dw` must have covariance dt * Id. Set `include_divergence_drift = false`
/// to ablate the noise-induced drift term.
void overdamped_em_step(const ProblemSpec& prob, std::span<double> x,
                        std::span<const double> dw, double dt, StepScratch& s,
                        bool include_divergence_drift = true);

/// One Euler-Maruyama step of the kinetic dynamics with inverse friction
/// profile D. With `rescaled` the time-rescaled system is advanced:
///   dX = lambda grad U(P) dt,
///   dP = -lambda grad V dt - lambda^2 D^{-1} grad U dt
///        + sqrt(2 lambda^2 / beta) D^{-1/2} dW;
/// without it, the plain dynamics at friction lambda.
void underdamped_em_step(const ProblemSpec& prob, std::span<double> q,
                         std::span<double> p, std::span<const double> dw,
                         double dt, double lambda, bool rescaled, StepScratch& s);

/// Effective (coarse-grained) kinetic dynamics
///   dz = A(z) v dt,  dv = (-A grad V + (1/beta) div A)(z) dt - lambda v dt
///                         + sqrt(2 lambda / beta) dW,
/// with the same rescaling convention as above.
void cg_kinetic_em_step(const ProblemSpec& prob, std::span<double> z,
                        std::span<double> v, std::span<const double> dw,
                        double dt, double lambda, bool rescaled, StepScratch& s);

/// Kinetic dynamics with position-dependent mass M(q) and friction Sigma(q):
///   dq = M^{-1} p dt,
///   dp = -grad_q H_M dt - lambda Sigma M^{-1} p dt
///        + sqrt(2 lambda / beta) Sigma^{1/2} dW,
/// where H_M = 1/2 p^T M^{-1}(q) p + V(q) + (1/(2 beta)) log det M(q).
void mass_langevin_em_step(const ProblemSpec& prob, std::span<double> q,
                           std::span<double> p, std::span<const double> dw,
                           double dt, double lambda, bool rescaled,
                           StepScratch& s);

/// Symplectic-Euler step of the pure Hamiltonian part (lambda = 0) of the
/// mass dynamics; the momentum update is solved by fixed-point iteration.
void mass_symplectic_euler_step(const ProblemSpec& prob, std::span<double> q,
                                std::span<double> p, double dt, StepScratch& s);

/// BAOAB splitting for equilibrium sampling of the kinetic dynamics
/// (quadratic U): the O-substep uses the exact frozen-coefficient OU update,
/// so the scheme stays stable at large lambda. Sampling only; the coupled
/// runs use fine-grid Euler-Maruyama.
void underdamped_baoab_step(const ProblemSpec& prob, std::span<double> q,
                            std::span<double> p, std::span<const double> xi,
                            double dt, double lambda, StepScratch& s);

/// BAOAB analogue for the effective dynamics (friction -lambda v).
void cg_baoab_step(const ProblemSpec& prob, std::span<double> z,
                   std::span<double> v, std::span<const double> xi, double dt,
                   double lambda, StepScratch& s);

/// Divergence guard: finite and within the coordinate cap.
bool state_admissible(std::span<const double> xs);

}  // namespace kramers
