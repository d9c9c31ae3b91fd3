#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kramers/coupled.hpp"
#include "kramers/linalg.hpp"
#include "kramers/noise.hpp"
#include "kramers/problem.hpp"
#include "kramers/sampling.hpp"
#include "kramers/steppers.hpp"

using namespace kramers;

namespace {

ProblemSpec euclidean_quadratic_problem() {
  ProblemSpec p;
  p.domain = Domain::euclidean(1);
  p.beta = 1.0;
  p.V = make_quadratic_potential(p.domain, Eigen::MatrixXd::Identity(1, 1));
  p.U = KineticEnergy::quadratic(1, Eigen::MatrixXd::Identity(1, 1));
  p.D = make_constant_field(p.domain, Eigen::MatrixXd::Identity(1, 1));
  return p;
}

double sample_mean(std::span<const double> xs) {
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

double sample_var(std::span<const double> xs) {
  const double m = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST_CASE("coupled noise: coarse increments are exact sums of fine ones") {
  const CoupledNoise noise(1234, 0.25, 8, 1.0, 2, 3);
  std::vector<double> coarse(2), fine(2), acc(2);
  for (std::uint32_t s = 0; s < 4; ++s) {
    noise.coarse_increment(s, coarse);
    acc.assign(2, 0.0);
    for (int r = 0; r < 8; ++r) {
      noise.fine_increment(s, static_cast<std::uint32_t>(r), fine);
      for (int k = 0; k < 2; ++k) acc[k] += fine[k];
    }
    CHECK(coarse[0] == acc[0]);  // bitwise
    CHECK(coarse[1] == acc[1]);
  }
}

TEST_CASE("coupled noise: fine increments have the right variance") {
  const double dt = 0.125;
  const CoupledNoise noise(77, dt, 4, 1.0, 1, 0);
  std::vector<double> xs;
  std::vector<double> w(1);
  for (std::uint32_t s = 0; s < 2500; ++s) {
    for (std::uint32_t r = 0; r < 4; ++r) {
      noise.fine_increment(s, r, w);
      xs.push_back(w[0]);
    }
  }
  CHECK(std::abs(sample_mean(xs)) < 3.0 * std::sqrt(dt / 4.0 / xs.size()) * 3.0);
  CHECK(sample_var(xs) == doctest::Approx(dt / 4.0).epsilon(0.05));
}

TEST_CASE("streams for distinct trajectories are uncorrelated") {
  const CounterStream a(99, StreamPurpose::PathNoise, 0);
  const CounterStream b(99, StreamPurpose::PathNoise, 1);
  const int n = 20000;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (int i = 0; i < n; ++i) {
    const double xa = a.normal1(static_cast<std::uint32_t>(i), 0);
    const double xb = b.normal1(static_cast<std::uint32_t>(i), 0);
    sab += xa * xb;
    saa += xa * xa;
    sbb += xb * xb;
  }
  CHECK(std::abs(sab / std::sqrt(saa * sbb)) < 0.05);
}

TEST_CASE("overdamped step: hand-evaluated drift at q = 0") {
  // d=1, D = 2 + sin q, V = q^2/2, beta = 1, dW = 0, dt = 1e-3:
  // drift = -D(0) V'(0) + D'(0) = 0 + cos(0) = 1, so q' = 1e-3.
  ProblemSpec p = euclidean_quadratic_problem();
  p.D = make_diagonal_trig_field(p.domain, Eigen::VectorXd::Constant(1, 2.0),
                                 Eigen::VectorXd::Zero(1),
                                 Eigen::VectorXd::Ones(1), 2.0 * M_PI);
  StepScratch s;
  s.resize(1);
  std::vector<double> x{0.0};
  const std::vector<double> dw{0.0};
  overdamped_em_step(p, x, dw, 1e-3, s);
  CHECK(x[0] == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("overdamped step reduces to -grad V dt + sqrt(2) dW when D = Id") {
  ProblemSpec p = euclidean_quadratic_problem();
  StepScratch s;
  s.resize(1);
  for (double q0 : {-1.2, 0.4, 2.0}) {
    for (double w : {-0.3, 0.0, 0.9}) {
      std::vector<double> x{q0};
      const std::vector<double> dw{w};
      overdamped_em_step(p, x, dw, 1e-2, s);
      CHECK(x[0] ==
            doctest::Approx(q0 - q0 * 1e-2 + std::sqrt(2.0) * w).epsilon(1e-13));
    }
  }
}

TEST_CASE("overdamped increments are exactly Gaussian for constant D, zero V") {
  // With grad V = 0 and constant D the one-step map is
  // x + sqrt(2 dt / beta) D^{1/2} N(0, Id), deterministically in dW.
  ProblemSpec p = euclidean_quadratic_problem();
  p.beta = 2.0;
  p.V = make_zero_potential(p.domain);
  Eigen::MatrixXd d0(1, 1);
  d0 << 3.0;
  p.D = make_constant_field(p.domain, d0);
  StepScratch s;
  s.resize(1);
  std::vector<double> x{0.7};
  const std::vector<double> dw{0.25};
  overdamped_em_step(p, x, dw, 0.1, s);
  CHECK(x[0] == doctest::Approx(0.7 + std::sqrt(2.0 / 2.0 * 3.0) * 0.25).epsilon(1e-13));
}

TEST_CASE("underdamped rescaled step: hand evaluation") {
  // q=0, p=1, V=q^2/2, D=1, M=1, beta=1, lambda=2, dt=1e-4, dW=0:
  //   q' = q + lambda grad U(p) dt = 2e-4,
  //   p' = p - lambda V'(0) dt - lambda^2 D^{-1} grad U(p) dt = 1 - 4e-4.
  ProblemSpec p = euclidean_quadratic_problem();
  StepScratch s;
  s.resize(1);
  std::vector<double> q{0.0}, mom{1.0};
  const std::vector<double> dw{0.0};
  underdamped_em_step(p, q, mom, dw, 1e-4, 2.0, /*rescaled=*/true, s);
  CHECK(q[0] == doctest::Approx(2e-4).epsilon(1e-12));
  CHECK(mom[0] == doctest::Approx(1.0 - 4e-4).epsilon(1e-12));
}

TEST_CASE("underdamped at lambda=1 is the unit-friction kinetic step") {
  ProblemSpec p = euclidean_quadratic_problem();
  StepScratch s;
  s.resize(1);
  const double dt = 1e-3, w = 0.4, q0 = 0.3, p0 = -0.8;
  std::vector<double> q{q0}, mom{p0};
  const std::vector<double> dw{w};
  underdamped_em_step(p, q, mom, dw, dt, 1.0, /*rescaled=*/true, s);
  CHECK(q[0] == doctest::Approx(q0 + p0 * dt).epsilon(1e-13));
  CHECK(mom[0] ==
        doctest::Approx(p0 - q0 * dt - p0 * dt + std::sqrt(2.0) * w).epsilon(1e-13));
}

TEST_CASE("momentum OU: empirical stationary variance matches M/beta") {
  // V = 0, D const, U quadratic: P is a discretized OU process.
  // Oracle: the OU closed form gives stationary variance M/beta = 1.
  ProblemSpec p = euclidean_quadratic_problem();
  p.V = make_zero_potential(p.domain);
  EnsembleState init = EnsembleState::make(4000, 1, true);
  EnsembleRunOptions opts;
  opts.horizon = 8.0;
  opts.dt = 0.01;
  opts.lambda = 1.0;
  opts.rescaled = false;
  opts.seed = 2024;
  const EnsembleRunResult run =
      simulate_ensemble(p, DynamicsFamily::Underdamped, init, opts);
  const double var = sample_var(run.final_state.momenta);
  CHECK(var == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("cg step with A = Id matches the underdamped step with D = M = Id") {
  ProblemSpec p = euclidean_quadratic_problem();
  p.A = make_constant_field(p.domain, Eigen::MatrixXd::Identity(1, 1));
  StepScratch s;
  s.resize(1);
  const double dt = 1e-3, lam = 3.0;
  std::vector<double> z{0.2}, v{0.5}, q{0.2}, mom{0.5};
  const std::vector<double> dw{0.33};
  cg_kinetic_em_step(p, z, v, dw, dt, lam, /*rescaled=*/true, s);
  underdamped_em_step(p, q, mom, dw, dt, lam, /*rescaled=*/true, s);
  CHECK(z[0] == doctest::Approx(q[0]).epsilon(1e-14));
  CHECK(v[0] == doctest::Approx(mom[0]).epsilon(1e-14));
}

TEST_CASE("cg divergence drift term: div(A^2) = 2 A A' by finite differences") {
  const ProblemSpec p = default_cg_problem();
  const double h = 1e-6;
  for (double z : {0.0, 0.9, 2.2, 4.4}) {
    const double lhs = 2.0 * p.A->value1(z) * p.A->deriv1(z);
    const double ap = p.A->value1(z + h), am = p.A->value1(z - h);
    const double fd = (ap * ap - am * am) / (2.0 * h);
    CHECK(lhs == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("constant A = a Id: effective limit drift equals overdamped with D = a^2") {
  // One overdamped step with D = a^2 Id carries drift -a^2 grad V.
  const double a = 1.7;
  ProblemSpec p = euclidean_quadratic_problem();
  Eigen::MatrixXd d0(1, 1);
  d0 << a * a;
  p.D = make_constant_field(p.domain, d0);
  StepScratch s;
  s.resize(1);
  std::vector<double> x{0.6};
  const std::vector<double> dw{0.0};
  overdamped_em_step(p, x, dw, 1e-3, s);
  CHECK(x[0] == doctest::Approx(0.6 - a * a * 0.6 * 1e-3).epsilon(1e-12));
}

TEST_CASE("mass dynamics: quadratic-form derivative, hand value -1/8") {
  // d=1, m = 2 + sin q: d/dq [p^2/(2 m(q))] at q=0, p=1 is -cos(0)/(2*4).
  const ProblemSpec p = default_mass_problem();
  StepScratch s;
  s.resize(1);
  // lambda = 0, dW = 0: p' - p = -dt * grad_q H_M(q, p).
  const double dt = 1e-6;
  std::vector<double> q{0.0}, mom{1.0};
  const std::vector<double> dw{0.0};
  mass_langevin_em_step(p, q, mom, dw, dt, 0.0, /*rescaled=*/false, s);
  const double grad_h = (1.0 - mom[0]) / dt;
  // grad H = -1/8 (kinetic part) + V'(0) (=0) + m'(0)/(2 beta m(0)) (=1/4).
  CHECK(grad_h == doctest::Approx(-0.125 + 0.25).epsilon(1e-9));

  // Independent oracle: finite differences of the full Hamiltonian.
  const double h = 1e-6;
  const std::vector<double> qp{h}, qm{-h}, pp{1.0};
  const double fd =
      (p.mass_hamiltonian(qp, pp) - p.mass_hamiltonian(qm, pp)) / (2.0 * h);
  CHECK(grad_h == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("mass dynamics: constant M, Sigma reduce to the friction family") {
  // With M = m0 Id and Sigma = s0 Id constant, the mass step must equal the
  // underdamped step with kinetic mass m0 and D = Sigma^{-1} up to the noise
  // convention sqrt(2 lambda/beta) Sigma^{1/2} = sqrt(2 lambda/beta) D^{-1/2}.
  const double m0 = 2.0, s0 = 0.5;
  ProblemSpec pm;
  pm.domain = Domain::euclidean(1);
  pm.beta = 1.3;
  pm.V = make_quadratic_potential(pm.domain, Eigen::MatrixXd::Identity(1, 1));
  pm.U = KineticEnergy::quadratic(1, m0 * Eigen::MatrixXd::Identity(1, 1));
  pm.mass = make_constant_field(pm.domain, m0 * Eigen::MatrixXd::Identity(1, 1));
  pm.friction =
      make_constant_field(pm.domain, s0 * Eigen::MatrixXd::Identity(1, 1));
  ProblemSpec pu = pm;
  pu.D = make_constant_field(pu.domain,
                             (1.0 / s0) * Eigen::MatrixXd::Identity(1, 1));
  StepScratch s;
  s.resize(1);
  const double dt = 1e-3, lam = 2.5, w = 0.7;
  std::vector<double> q1{0.4}, p1{-0.6}, q2{0.4}, p2{-0.6};
  const std::vector<double> dw{w};
  mass_langevin_em_step(pm, q1, p1, dw, dt, lam, /*rescaled=*/false, s);
  underdamped_em_step(pu, q2, p2, dw, dt, lam, /*rescaled=*/false, s);
  CHECK(q1[0] == doctest::Approx(q2[0]).epsilon(1e-13));
  CHECK(p1[0] == doctest::Approx(p2[0]).epsilon(1e-13));
}

TEST_CASE("symplectic euler conserves energy to O(dt)") {
  const ProblemSpec p = default_mass_problem();
  StepScratch s;
  s.resize(1);
  auto drift = [&](double dt) {
    std::vector<double> q{0.5}, mom{0.8};
    const double h0 = p.mass_hamiltonian(q, mom);
    const int n = static_cast<int>(std::llround(1.0 / dt));
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      mass_symplectic_euler_step(p, q, mom, dt, s);
      worst = std::max(worst, std::abs(p.mass_hamiltonian(q, mom) - h0));
    }
    return worst;
  };
  const double e1 = drift(1e-3);
  const double e2 = drift(5e-4);
  CHECK(e1 < 0.05);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.4));
}

TEST_CASE("baoab at V=0 samples the exact momentum marginal") {
  ProblemSpec p = default_problem();
  p.V = make_zero_potential(p.domain);
  EnsembleState init = EnsembleState::make(4000, 1, true);
  EnsembleRunOptions opts;
  opts.horizon = 20.0;
  opts.dt = 0.25;  // deliberately large; the O-step is exact
  opts.lambda = 4.0;
  opts.use_baoab = true;
  opts.seed = 5;
  const EnsembleRunResult run =
      simulate_ensemble(p, DynamicsFamily::Underdamped, init, opts);
  CHECK(sample_var(run.final_state.momenta) == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("stability cap rejects oversized steps") {
  const ProblemSpec p = default_problem();
  const double cap = kinetic_stability_cap(p, 8.0, /*rescaled=*/true);
  CHECK(cap == doctest::Approx(1.0 / (64.0 * 3.0)).epsilon(1e-12));
  CoupledOptions opts;
  opts.n_traj = 2;
  opts.coarse_dt = 1.0 / 8.0;
  opts.refine.reference_dt = 1e9;  // forces refine = 1, fine step too large
  CHECK_THROWS_AS(simulate_coupled_single(p, 8.0, opts), ConfigError);
}

TEST_CASE("gibbs sampling: gaussian marginals and rejection acceptance") {
  // Quadratic V on R: E[q^2] = 1/(beta K).
  ProblemSpec p = euclidean_quadratic_problem();
  p.beta = 2.0;
  SampleDiagnostics diag;
  const EnsembleState s1 = sample_gibbs(p.gibbs(), 20000, 11, &diag);
  CHECK(sample_mean(s1.positions) == doctest::Approx(0.0).epsilon(1.0).scale(0.02));
  CHECK(sample_var(s1.positions) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(sample_var(s1.momenta) == doctest::Approx(0.5).epsilon(0.05));

  // Cosine V on the torus: acceptance = I0(1)/e, frozen from the quadrature
  // oracle integral (1/2 pi) int exp(-(cos q + 1)) dq = I0(1) e^{-1}.
  const ProblemSpec tor = default_problem();
  SampleDiagnostics diag2;
  const EnsembleState s2 = sample_gibbs(tor.gibbs(), 20000, 12, &diag2);
  CHECK(diag2.acceptance_rate == doctest::Approx(0.46576).epsilon(0.03));
  // Momentum block is exactly Gaussian with covariance M/beta = 1.
  CHECK(sample_var(s2.momenta) == doctest::Approx(1.0).epsilon(0.05));
  s2.check_invariants(tor.domain);
}

TEST_CASE("mass gibbs sampling: conditional momentum variance") {
  const ProblemSpec p = default_mass_problem();
  const EnsembleState s = sample_gibbs_mass(p, 20000, 13);
  // E[p^2] = E_nu[m(q)]/beta; oracle by quadrature.
  const GibbsSpec g = p.gibbs();
  const double expected = nu_average(g, [&](std::span<const double> q) {
    return p.mass->value1(q[0]);
  });
  CHECK(sample_var(s.momenta) == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("coupled run is deterministic across thread counts") {
  const ProblemSpec p = default_problem();
  CoupledOptions opts;
  opts.n_traj = 8;
  opts.horizon = 0.25;
  opts.coarse_dt = 1.0 / 64.0;
  opts.snapshots = 4;
  opts.seed = 31;
  opts.observables = {cos_observable(p.domain)};
  opts.threads = 1;
  const CoupledRunResult r1 = simulate_coupled_single(p, 4.0, opts);
  opts.threads = 2;
  const CoupledRunResult r2 = simulate_coupled_single(p, 4.0, opts);
  CHECK(r1.fine_pos == r2.fine_pos);      // bitwise
  CHECK(r1.coarse_pos == r2.coarse_pos);  // bitwise
  CHECK(r1.fine_avg == r2.fine_avg);
}

TEST_CASE("coupled pair matches the linear-SDE covariance oracle") {
  // V = q^2/2, D = 1, M = 1, beta = 1: the joint (X^lam, P^lam, X) is a
  // linear SDE driven by one Brownian motion. Oracle: RK4 on the 3x3
  // covariance ODE dS = A S + S A^T + B B^T with warm-start initial data.
  const double lam = 16.0;
  const double horizon = 0.5;
  ProblemSpec p = euclidean_quadratic_problem();
  CoupledOptions opts;
  opts.n_traj = 4000;
  opts.horizon = horizon;
  opts.coarse_dt = 1.0 / 256.0;
  opts.snapshots = 8;
  opts.seed = 313;
  const CoupledRunResult run = simulate_coupled_single(p, lam, opts);

  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  a(0, 1) = lam;
  a(1, 0) = -lam;
  a(1, 1) = -lam * lam;
  a(2, 2) = -1.0;
  Eigen::Vector3d bvec(0.0, std::sqrt(2.0) * lam, std::sqrt(2.0));
  const Eigen::Matrix3d bbt = bvec * bvec.transpose();
  Eigen::Matrix3d s;
  s << 1, 0, 1, 0, 1, 0, 1, 0, 1;
  auto rhs = [&](const Eigen::Matrix3d& m) -> Eigen::Matrix3d {
    return a * m + m * a.transpose() + bbt;
  };
  const double hrk = 1e-5;
  const int steps = static_cast<int>(std::llround(horizon / hrk));
  std::vector<int> snap_steps;
  for (double t : run.snap_times) {
    snap_steps.push_back(static_cast<int>(std::llround(t / hrk)));
  }
  std::vector<double> oracle_at_snap;
  std::size_t snap_idx = 0;
  for (int i = 0; i < steps; ++i) {
    const Eigen::Matrix3d k1 = rhs(s);
    const Eigen::Matrix3d k2 = rhs(s + 0.5 * hrk * k1);
    const Eigen::Matrix3d k3 = rhs(s + 0.5 * hrk * k2);
    const Eigen::Matrix3d k4 = rhs(s + hrk * k3);
    s += hrk / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (snap_idx < snap_steps.size() && i + 1 == snap_steps[snap_idx]) {
      oracle_at_snap.push_back(s(0, 0) - 2.0 * s(0, 2) + s(2, 2));
      ++snap_idx;
    }
  }
  REQUIRE(oracle_at_snap.size() == run.snap_times.size());
  for (std::size_t j = 0; j < oracle_at_snap.size(); ++j) {
    double mean_sq = 0.0;
    for (std::size_t i = 0; i < opts.n_traj; ++i) {
      const double diff = run.fine_pos(j, i) - run.coarse_pos(j, i);
      mean_sq += diff * diff;
    }
    mean_sq /= static_cast<double>(opts.n_traj);
    CHECK(mean_sq == doctest::Approx(oracle_at_snap[j]).epsilon(0.10));
  }
}

TEST_CASE("ensemble state invariants") {
  EnsembleState s = EnsembleState::make(4, 1, true);
  s.positions[2] = -0.5;
  CHECK_THROWS_AS(s.check_invariants(Domain::torus(1, 1.0)), ValidationError);
  s.positions[2] = 0.5;
  s.check_invariants(Domain::torus(1, 1.0));
}
