#include "kramers/steppers.hpp"

#include <cmath>

#include "kramers/linalg.hpp"

namespace kramers {

void StepScratch::resize(int d) {
  va.assign(d, 0.0);
  vb.assign(d, 0.0);
  vc.assign(d, 0.0);
  vd.assign(d, 0.0);
  ma.resize(d, d);
  mb.resize(d, d);
  mc.resize(d, d);
  ea.resize(d);
  eb.resize(d);
  ec.resize(d);
  tensor.assign(d, Eigen::MatrixXd::Zero(d, d));
}

bool state_admissible(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x) || std::abs(x) > kDivergenceCap) return false;
  }
  return true;
}

double kinetic_stability_cap(const ProblemSpec& prob, double lambda,
                             bool rescaled) {
  if (!prob.U.is_quadratic()) {
    throw UnsupportedError("stability cap requires a quadratic kinetic energy");
  }
  if (!prob.D) throw ValidationError("problem has no inverse friction profile D");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prob.U.mass_inverse());
  const double minv_norm = es.eigenvalues().maxCoeff();
  const double dinv_norm = prob.D->ellipticity_bound();  // |D^{-1}| <= M_D
  const double rate = (rescaled ? lambda * lambda : lambda) * dinv_norm * minv_norm;
  return 1.0 / rate;
}

void overdamped_em_step(const ProblemSpec& prob, std::span<double> x,
                        std::span<const double> dw, double dt, StepScratch& s,
                        bool include_divergence_drift) {
  const int d = prob.dim();
  if (d == 1) {
    const double q = x[0];
    const double dval = prob.D->value1(q);
    double drift = -dval * prob.V->grad1(q);
    if (include_divergence_drift) drift += prob.D->deriv1(q) / prob.beta;
    x[0] = q + drift * dt + std::sqrt(2.0 * dval / prob.beta) * dw[0];
    return;
  }
  prob.D->value(x, s.ma);
  Eigen::Map<Eigen::VectorXd> xv(x.data(), d);
  Eigen::Map<const Eigen::VectorXd> dwv(dw.data(), d);
  prob.V->gradient(x, s.va);
  Eigen::Map<const Eigen::VectorXd> gv(s.va.data(), d);
  s.ea = -s.ma * gv;
  if (include_divergence_drift) s.ea += prob.D->div_row(x) / prob.beta;
  const Eigen::MatrixXd root = spd_sqrt(s.ma);
  xv += s.ea * dt + std::sqrt(2.0 / prob.beta) * (root * dwv);
}

void underdamped_em_step(const ProblemSpec& prob, std::span<double> q,
                         std::span<double> p, std::span<const double> dw,
                         double dt, double lambda, bool rescaled,
                         StepScratch& s) {
  const double a = rescaled ? lambda : 1.0;
  const int d = prob.dim();
  if (d == 1) {
    const double qi = q[0], pi = p[0];
    const double gu = prob.U.grad1(pi);
    const double dval = prob.D->value1(qi);
    const double noise = std::sqrt(2.0 * a * lambda / (prob.beta * dval));
    q[0] = qi + a * gu * dt;
    p[0] = pi + (-a * prob.V->grad1(qi) - a * lambda * gu / dval) * dt +
           noise * dw[0];
    return;
  }
  prob.U.gradient(p, s.va);   // grad U(p)
  prob.V->gradient(q, s.vb);  // grad V(q)
  prob.D->value(q, s.ma);
  const Eigen::MatrixXd dinv = s.ma.inverse();
  const Eigen::MatrixXd dinv_root = spd_sqrt(dinv);
  Eigen::Map<Eigen::VectorXd> qv(q.data(), d), pv(p.data(), d);
  Eigen::Map<const Eigen::VectorXd> gu(s.va.data(), d), gvq(s.vb.data(), d),
      dwv(dw.data(), d);
  qv += a * dt * gu;
  pv += (-a * gvq - a * lambda * (dinv * gu)) * dt +
        std::sqrt(2.0 * a * lambda / prob.beta) * (dinv_root * dwv);
}

void cg_kinetic_em_step(const ProblemSpec& prob, std::span<double> z,
                        std::span<double> v, std::span<const double> dw,
                        double dt, double lambda, bool rescaled,
                        StepScratch& s) {
  if (!prob.A) throw ValidationError("problem has no effective field A");
  const double a = rescaled ? lambda : 1.0;
  const int d = prob.dim();
  if (d == 1) {
    const double zi = z[0], vi = v[0];
    const double aval = prob.A->value1(zi);
    z[0] = zi + a * aval * vi * dt;
    v[0] = vi +
           a * (-aval * prob.V->grad1(zi) + prob.A->deriv1(zi) / prob.beta) * dt -
           a * lambda * vi * dt + std::sqrt(2.0 * a * lambda / prob.beta) * dw[0];
    return;
  }
  prob.A->value(z, s.ma);
  prob.V->gradient(z, s.va);
  Eigen::Map<Eigen::VectorXd> zv(z.data(), d), vv(v.data(), d);
  Eigen::Map<const Eigen::VectorXd> gv(s.va.data(), d), dwv(dw.data(), d);
  const Eigen::VectorXd diva = prob.A->div_row(z);
  zv += a * dt * (s.ma * vv);
  vv += a * dt * (-s.ma * gv + diva / prob.beta) - a * lambda * dt * vv +
        std::sqrt(2.0 * a * lambda / prob.beta) * dwv;
}

namespace {

// grad_q of 1/2 p^T M^{-1}(q) p + E(q); also returns M^{-1} p.
void mass_force(const ProblemSpec& prob, std::span<const double> q,
                std::span<const double> p, StepScratch& s,
                Eigen::VectorXd& grad_h, Eigen::VectorXd& minv_p) {
  const int d = prob.dim();
  prob.mass->value(q, s.ma);
  prob.mass->derivative(q, s.tensor);
  const Eigen::MatrixXd minv = s.ma.inverse();
  Eigen::Map<const Eigen::VectorXd> pv(p.data(), d);
  minv_p = minv * pv;
  grad_h.resize(d);
  prob.V->gradient(q, s.vb);
  for (int k = 0; k < d; ++k) {
    // -1/2 p^T M^{-1} (d_k M) M^{-1} p  +  d_k V  + (1/(2 beta)) tr(M^{-1} d_k M)
    grad_h(k) = -0.5 * minv_p.dot(s.tensor[k] * minv_p) + s.vb[k] +
                (minv * s.tensor[k]).trace() / (2.0 * prob.beta);
  }
}

}  // namespace

void mass_langevin_em_step(const ProblemSpec& prob, std::span<double> q,
                           std::span<double> p, std::span<const double> dw,
                           double dt, double lambda, bool rescaled,
                           StepScratch& s) {
  if (!prob.mass || !prob.friction) {
    throw ValidationError("problem has no mass/friction fields");
  }
  const double a = rescaled ? lambda : 1.0;
  const int d = prob.dim();
  if (d == 1) {
    const double qi = q[0], pi = p[0];
    const double m = prob.mass->value1(qi);
    const double dm = prob.mass->deriv1(qi);
    const double sig = prob.friction->value1(qi);
    const double minv_p = pi / m;
    const double grad_h = -0.5 * minv_p * minv_p * dm + prob.V->grad1(qi) +
                          dm / (m * 2.0 * prob.beta);
    q[0] = qi + a * minv_p * dt;
    p[0] = pi + (-a * grad_h - a * lambda * sig * minv_p) * dt +
           std::sqrt(2.0 * a * lambda * sig / prob.beta) * dw[0];
    return;
  }
  Eigen::VectorXd grad_h, minv_p;
  mass_force(prob, q, p, s, grad_h, minv_p);
  prob.friction->value(q, s.mb);
  const Eigen::MatrixXd sig_root = spd_sqrt(s.mb);
  Eigen::Map<Eigen::VectorXd> qv(q.data(), d), pv(p.data(), d);
  Eigen::Map<const Eigen::VectorXd> dwv(dw.data(), d);
  qv += a * dt * minv_p;
  pv += (-a * grad_h - a * lambda * (s.mb * minv_p)) * dt +
        std::sqrt(2.0 * a * lambda / prob.beta) * (sig_root * dwv);
}

void mass_symplectic_euler_step(const ProblemSpec& prob, std::span<double> q,
                                std::span<double> p, double dt, StepScratch& s) {
  if (!prob.mass) throw ValidationError("problem has no mass field");
  const int d = prob.dim();
  // p' = p - dt grad_q H(q, p'), fixed point in p'.
  Eigen::VectorXd pk = Eigen::Map<const Eigen::VectorXd>(p.data(), d);
  const Eigen::VectorXd p0 = pk;
  Eigen::VectorXd grad_h, minv_p;
  std::vector<double> pbuf(d);
  for (int it = 0; it < 64; ++it) {
    for (int i = 0; i < d; ++i) pbuf[i] = pk(i);
    mass_force(prob, q, pbuf, s, grad_h, minv_p);
    Eigen::VectorXd pn = p0 - dt * grad_h;
    const double delta = (pn - pk).cwiseAbs().maxCoeff();
    pk = pn;
    if (delta < 1e-14) break;
  }
  for (int i = 0; i < d; ++i) pbuf[i] = pk(i);
  mass_force(prob, q, pbuf, s, grad_h, minv_p);
  for (int i = 0; i < d; ++i) {
    p[i] = pk(i);
    q[i] += dt * minv_p(i);
  }
}

void underdamped_baoab_step(const ProblemSpec& prob, std::span<double> q,
                            std::span<double> p, std::span<const double> xi,
                            double dt, double lambda, StepScratch& s) {
  if (!prob.U.is_quadratic()) {
    throw UnsupportedError("BAOAB requires a quadratic kinetic energy");
  }
  const int d = prob.dim();
  const double h2 = 0.5 * dt;
  if (d == 1) {
    const double minv = prob.U.mass_inverse()(0, 0);
    p[0] -= h2 * prob.V->grad1(q[0]);
    q[0] += h2 * minv * p[0];
    const double theta = lambda * minv / prob.D->value1(q[0]);
    const double damp = std::exp(-dt * theta);
    const double mass = prob.U.mass()(0, 0);
    const double std_p = std::sqrt(mass / prob.beta * (1.0 - damp * damp));
    p[0] = damp * p[0] + std_p * xi[0];
    q[0] += h2 * minv * p[0];
    p[0] -= h2 * prob.V->grad1(q[0]);
    return;
  }
  if (d > 3) {
    throw UnsupportedError("BAOAB O-substep eigendecomposition limited to d <= 3");
  }
  Eigen::Map<Eigen::VectorXd> qv(q.data(), d), pv(p.data(), d);
  Eigen::Map<const Eigen::VectorXd> xiv(xi.data(), d);
  const Eigen::MatrixXd& minv = prob.U.mass_inverse();
  prob.V->gradient(q, s.va);
  pv -= h2 * Eigen::Map<const Eigen::VectorXd>(s.va.data(), d);
  qv += h2 * (minv * pv);
  // O: exact OU with frozen coefficients. Theta = lambda D^{-1} M^{-1} is
  // similar to the SPD matrix S = lambda M^{-1/2} D^{-1} M^{-1/2}.
  prob.D->value(q, s.ma);
  const Eigen::MatrixXd mroot = spd_sqrt(prob.U.mass());
  const Eigen::MatrixXd mroot_inv = mroot.inverse();
  const Eigen::MatrixXd S =
      lambda * mroot_inv * s.ma.inverse() * mroot_inv;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  const Eigen::VectorXd ev = es.eigenvalues();
  const Eigen::MatrixXd U = es.eigenvectors();
  const Eigen::MatrixXd damp =
      mroot * U * (-dt * ev.array()).exp().matrix().asDiagonal() *
      U.transpose() * mroot_inv;
  const Eigen::MatrixXd fluct =
      mroot * U *
      ((1.0 - (-2.0 * dt * ev.array()).exp()) / prob.beta)
          .sqrt()
          .matrix()
          .asDiagonal() *
      U.transpose();
  pv = damp * pv + fluct * xiv;
  qv += h2 * (minv * pv);
  prob.V->gradient(q, s.va);
  pv -= h2 * Eigen::Map<const Eigen::VectorXd>(s.va.data(), d);
}

void cg_baoab_step(const ProblemSpec& prob, std::span<double> z,
                   std::span<double> v, std::span<const double> xi, double dt,
                   double lambda, StepScratch& s) {
  if (!prob.A) throw ValidationError("problem has no effective field A");
  const int d = prob.dim();
  const double h2 = 0.5 * dt;
  const double damp = std::exp(-dt * lambda);
  const double std_v = std::sqrt((1.0 - damp * damp) / prob.beta);
  if (d == 1) {
    const double force0 =
        -prob.A->value1(z[0]) * prob.V->grad1(z[0]) + prob.A->deriv1(z[0]) / prob.beta;
    v[0] += h2 * force0;
    z[0] += h2 * prob.A->value1(z[0]) * v[0];
    v[0] = damp * v[0] + std_v * xi[0];
    z[0] += h2 * prob.A->value1(z[0]) * v[0];
    const double force1 =
        -prob.A->value1(z[0]) * prob.V->grad1(z[0]) + prob.A->deriv1(z[0]) / prob.beta;
    v[0] += h2 * force1;
    return;
  }
  Eigen::Map<Eigen::VectorXd> zv(z.data(), d), vv(v.data(), d);
  Eigen::Map<const Eigen::VectorXd> xiv(xi.data(), d);
  auto force = [&](Eigen::VectorXd& out) {
    prob.A->value(z, s.ma);
    prob.V->gradient(z, s.va);
    out = -s.ma * Eigen::Map<const Eigen::VectorXd>(s.va.data(), d) +
          prob.A->div_row(z) / prob.beta;
  };
  Eigen::VectorXd f;
  force(f);
  vv += h2 * f;
  prob.A->value(z, s.ma);
  zv += h2 * (s.ma * vv);
  vv = damp * vv + std_v * xiv;
  prob.A->value(z, s.ma);
  zv += h2 * (s.ma * vv);
  force(f);
  vv += h2 * f;
}

}  // namespace kramers
