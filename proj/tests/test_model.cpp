#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kramers/gibbs.hpp"
#include "kramers/linalg.hpp"
#include "kramers/problem.hpp"
#include "kramers/quadrature.hpp"
#include "kramers/rng.hpp"

using namespace kramers;

namespace {

Eigen::MatrixXd random_spd(int d, std::uint64_t seed) {
  CounterStream s(seed, StreamPurpose::BurnIn, 7);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      a(i, j) = s.normal1(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
  }
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace

TEST_CASE("spd_sqrt identity and diagonal cases") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  CHECK((spd_sqrt(id) - id).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(2, 2);
  d2(0, 0) = 4.0;
  d2(1, 1) = 9.0;
  const Eigen::MatrixXd r = spd_sqrt(d2);
  CHECK(r(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::abs(r(0, 1)) < 1e-14);
}

TEST_CASE("spd_sqrt squares back to the input") {
  // Oracle: re-multiplication.
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const Eigen::MatrixXd m = random_spd(4, seed);
    const Eigen::MatrixXd s = spd_sqrt(m);
    CHECK((s * s - m).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("spd_sqrt rejects bad inputs") {
  Eigen::MatrixXd ns(2, 2);
  ns << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(spd_sqrt(ns), ValidationError);
  Eigen::MatrixXd neg(2, 2);
  neg << 1.0, 0.0, 0.0, -2.0;
  CHECK_THROWS_AS(spd_sqrt(neg), ValidationError);
}

TEST_CASE("div_row on constant and trig fields") {
  const Domain dom2 = Domain::torus(2, 2.0 * M_PI);
  auto constant = make_constant_field(dom2, random_spd(2, 21));
  const std::vector<double> q2{0.3, 1.2};
  CHECK(div_row(*constant, q2).cwiseAbs().maxCoeff() == 0.0);

  const ProblemSpec prob = default_problem();
  const std::vector<double> q0{0.0};
  CHECK(div_row(*prob.D, q0)(0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("div_row matches finite differences on the diagonal built-in") {
  const Domain dom = Domain::torus(2, 2.0 * M_PI);
  Eigen::VectorXd a(2), b(2), c(2);
  a << 2.0, 3.0;
  b << 0.5, -0.4;
  c << 0.3, 0.8;
  auto field = make_diagonal_trig_field(dom, a, b, c);
  const double h = 1e-6;
  for (double q1 : {0.0, 0.7, 2.9}) {
    for (double q2 : {0.2, 1.8}) {
      const std::vector<double> q{q1, q2};
      const Eigen::VectorXd dv = div_row(*field, q);
      Eigen::MatrixXd mp, mm;
      Eigen::VectorXd fd = Eigen::VectorXd::Zero(2);
      for (int j = 0; j < 2; ++j) {
        std::vector<double> qp = q, qm = q;
        qp[j] += h;
        qm[j] -= h;
        field->value(qp, mp);
        field->value(qm, mm);
        for (int k = 0; k < 2; ++k) fd(k) += (mp(k, j) - mm(k, j)) / (2.0 * h);
      }
      CHECK((dv - fd).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("matrix field validation: symmetry, ellipticity, derivative") {
  const Domain dom = Domain::torus(2, 2.0 * M_PI);
  Eigen::VectorXd a(2), b(2), c(2);
  a << 2.0, 1.5;
  b << 0.9, 0.0;
  c << 0.0, 0.5;
  make_diagonal_trig_field(dom, a, b, c)->validate(1000, 99);
  make_conformal_field(dom, 2.0, b, c)->validate(1000, 100);
  make_constant_field(dom, random_spd(2, 5))->validate(1000, 101);
  default_problem().D->validate(1000, 102);

  // Positivity precondition enforced at construction.
  Eigen::VectorXd bad(2);
  bad << 2.1, 0.0;
  CHECK_THROWS_AS(make_diagonal_trig_field(dom, a, bad, c), ValidationError);
}

TEST_CASE("built-in potential gradients match finite differences") {
  const Domain t1 = Domain::torus(1, 2.0 * M_PI);
  const Domain e2 = Domain::euclidean(2);
  Eigen::MatrixXd k(2, 2);
  k << 2.0, 0.3, 0.3, 1.0;
  std::vector<PotentialPtr> pots = {
      make_cosine_potential(t1, Eigen::VectorXd::Ones(1)),
      make_quadratic_potential(e2, k),
      make_double_well_potential(e2),
      make_sum_potential({make_quadratic_potential(e2, k),
                          make_double_well_potential(e2)}),
  };
  CounterStream s(3, StreamPurpose::BurnIn, 0);
  for (const auto& pot : pots) {
    const int d = pot->dim();
    std::vector<double> q(d), g(d);
    for (int trial = 0; trial < 32; ++trial) {
      for (int i = 0; i < d; ++i) {
        q[i] = 2.0 * s.normal1(static_cast<std::uint32_t>(trial),
                               static_cast<std::uint32_t>(i));
      }
      pot->gradient(q, g);
      for (int i = 0; i < d; ++i) {
        std::vector<double> qp = q, qm = q;
        const double h = 1e-6 * std::max(1.0, std::abs(q[i]));
        qp[i] += h;
        qm[i] -= h;
        const double fd = (pot->value(qp) - pot->value(qm)) / (2.0 * h);
        CHECK(std::abs(fd - g[i]) <=
              1e-6 * std::max({1.0, std::abs(fd), std::abs(g[i])}));
      }
    }
  }
}

TEST_CASE("lipschitz certificates") {
  const Domain t1 = Domain::torus(1, 2.0 * M_PI);
  const Domain e1 = Domain::euclidean(1);
  auto cosine = make_cosine_potential(t1, Eigen::VectorXd::Ones(1));
  CHECK(cosine->gradient_lipschitz().has_value());
  CHECK(*cosine->gradient_lipschitz() == doctest::Approx(1.0));
  auto quad = make_quadratic_potential(e1, 3.0 * Eigen::MatrixXd::Identity(1, 1));
  CHECK(*quad->gradient_lipschitz() == doctest::Approx(3.0));
  // No global certificate exists for the double well on R^d.
  CHECK(!make_double_well_potential(e1)->gradient_lipschitz().has_value());
}

TEST_CASE("kinetic energy: quadratic form and parity") {
  const Eigen::MatrixXd m = random_spd(2, 31);
  const KineticEnergy u = KineticEnergy::quadratic(2, m);
  CHECK(u.is_quadratic());
  const std::vector<double> p{0.4, -1.1};
  Eigen::Map<const Eigen::VectorXd> pv(p.data(), 2);
  CHECK(u.value(p) ==
        doctest::Approx(0.5 * pv.dot(m.inverse() * pv)).epsilon(1e-14));
  std::vector<double> g(2);
  u.gradient(p, g);
  const Eigen::VectorXd expected = m.inverse() * pv;
  CHECK(std::abs(g[0] - expected(0)) < 1e-14);
  CHECK(std::abs(g[1] - expected(1)) < 1e-14);
  CHECK(u.is_even(64, 17));
}

TEST_CASE("pi0_project gaussian moments") {
  ProblemSpec prob = default_problem();
  // Use a non-trivial mass to exercise the covariance scaling.
  Eigen::MatrixXd mass(1, 1);
  mass << 2.5;
  prob.U = KineticEnergy::quadratic(1, mass);
  prob.beta = 2.0;
  const GibbsSpec gibbs = prob.gibbs();
  const std::vector<double> q{0.3};

  auto one = [](std::span<const double>, std::span<const double>) { return 1.0; };
  CHECK(pi0_project(one, gibbs, q) == doctest::Approx(1.0).epsilon(1e-14));

  auto p0 = [](std::span<const double>, std::span<const double> p) { return p[0]; };
  CHECK(std::abs(pi0_project(p0, gibbs, q)) < 1e-14);

  auto p00 = [](std::span<const double>, std::span<const double> p) {
    return p[0] * p[0];
  };
  CHECK(pi0_project(p00, gibbs, q) ==
        doctest::Approx(mass(0, 0) / prob.beta).epsilon(1e-12));

  // Unsupported kinetic energy: explicit error, no guessing.
  ProblemSpec dw = prob;
  dw.U = KineticEnergy::from_potential(
      make_double_well_potential(Domain::euclidean(1)));
  CHECK_THROWS_AS(pi0_project(one, dw.gibbs(), q), UnsupportedError);
}

TEST_CASE("pi0 gaussian covariance in 2d") {
  Domain dom = Domain::torus(2, 2.0 * M_PI);
  ProblemSpec prob;
  prob.domain = dom;
  prob.beta = 1.5;
  prob.V = make_cosine_potential(dom, Eigen::VectorXd::Ones(2));
  const Eigen::MatrixXd mass = random_spd(2, 41);
  prob.U = KineticEnergy::quadratic(2, mass);
  const GibbsSpec gibbs = prob.gibbs();
  const std::vector<double> q{0.1, 0.2};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      auto pij = [i, j](std::span<const double>, std::span<const double> p) {
        return p[i] * p[j];
      };
      CHECK(pi0_project(pij, gibbs, q) ==
            doctest::Approx(mass(i, j) / prob.beta).epsilon(1e-10));
    }
  }
}

TEST_CASE("noise-drift centering identity") {
  const ProblemSpec prob = default_problem();
  const GibbsSpec gibbs = prob.gibbs();

  // Constant D: both sides vanish.
  auto constant = make_constant_field(prob.domain, 2.0 * Eigen::MatrixXd::Identity(1, 1));
  const std::vector<double> q{1.1};
  CHECK(noise_drift_identity_check(*constant, gibbs, q) < 1e-14);

  // D = 2 + sin q at q = pi/4: quadrature value equals cos(pi/4).
  // Frozen from the Gauss-Hermite oracle at order >= 8.
  const std::vector<double> qpi4{M_PI / 4.0};
  const Eigen::VectorXd v = pi0_noise_drift(*prob.D, gibbs, qpi4, 8);
  CHECK(std::abs(v(0) - 0.70710678118654752) < 1e-10);

  // 16-point grids for both built-in D families.
  const Domain dom2 = Domain::torus(2, 2.0 * M_PI);
  ProblemSpec prob2;
  prob2.domain = dom2;
  prob2.beta = 1.3;
  prob2.V = make_cosine_potential(dom2, Eigen::VectorXd::Ones(2));
  prob2.U = KineticEnergy::quadratic(2, random_spd(2, 51));
  Eigen::VectorXd a(2), b(2), c(2);
  a << 2.0, 3.0;
  b << 0.6, -0.3;
  c << 0.2, 0.9;
  auto diag = make_diagonal_trig_field(dom2, a, b, c);
  auto conf = make_conformal_field(dom2, 2.5, b, c);
  for (int i = 0; i < 16; ++i) {
    const double qi = i * 2.0 * M_PI / 16.0;
    const std::vector<double> qq{qi, 2.0 * M_PI - qi};
    CHECK(noise_drift_identity_check(*diag, prob2.gibbs(), qq) < 1e-8);
    CHECK(noise_drift_identity_check(*conf, prob2.gibbs(), qq) < 1e-8);
  }
}

TEST_CASE("gibbs density is positive and finite") {
  default_problem().gibbs().validate(1000, 61);
}

TEST_CASE("gauss-hermite integrates gaussian moments exactly") {
  const GaussHermite gh = GaussHermite::probabilists(16);
  CHECK(gh.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
  double m2 = 0.0, m4 = 0.0, m31 = 0.0;
  for (int i = 0; i < gh.nodes.size(); ++i) {
    const double x = gh.nodes(i);
    m2 += gh.weights(i) * x * x;
    m4 += gh.weights(i) * x * x * x * x;
    m31 += gh.weights(i) * x * x * x;
  }
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(m31) < 1e-12);
}

TEST_CASE("torus wrap and minimal image") {
  const Domain t = Domain::torus(1, 2.0 * M_PI);
  CHECK(t.wrap(-0.1) == doctest::Approx(2.0 * M_PI - 0.1));
  CHECK(t.wrap(2.0 * M_PI + 0.2) == doctest::Approx(0.2));
  CHECK(t.displacement(0.1, 2.0 * M_PI - 0.1) == doctest::Approx(0.2).epsilon(1e-12));
  const std::vector<double> x{0.05}, y{2.0 * M_PI - 0.05};
  CHECK(t.distance(x, y) == doctest::Approx(0.1).epsilon(1e-12));
}
