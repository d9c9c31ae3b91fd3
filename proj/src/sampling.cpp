#include "kramers/sampling.hpp"

#include <atomic>
#include <cmath>

#include "kramers/linalg.hpp"
#include "kramers/rng.hpp"
#include "kramers/steppers.hpp"

namespace kramers {

namespace {

constexpr std::uint32_t kMaxRejectionAttempts = 200000;

double torus_min_scan(const GibbsSpec& gibbs) {
  const int d = gibbs.domain.dim;
  if (d > 3) throw UnsupportedError("torus rejection sampling limited to d <= 3");
  const int n = d == 1 ? 4096 : (d == 2 ? 256 : 64);
  const double h = gibbs.domain.length / n;
  std::vector<int> idx(d, 0);
  std::vector<double> q(d);
  double best = 1e300;
  while (true) {
    for (int i = 0; i < d; ++i) q[i] = idx[i] * h;
    best = std::min(best, gibbs.V->value(q));
    int k = 0;
    while (k < d && ++idx[k] == n) idx[k++] = 0;
    if (k == d) break;
  }
  return best;
}

/// Draw q ~ nu by rejection from the uniform proposal on the torus cell.
/// Returns the number of attempts used.
std::uint32_t rejection_position(const GibbsSpec& gibbs, const CounterStream& st,
                                 double v_min, std::span<double> q) {
  const int d = gibbs.domain.dim;
  for (std::uint32_t attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
    for (int i = 0; i < d; ++i) {
      q[i] = gibbs.domain.length *
             st.uniform(attempt, static_cast<std::uint32_t>(2 * i));
    }
    const double u = st.uniform(attempt, static_cast<std::uint32_t>(2 * d));
    const double accept = std::exp(-gibbs.beta * (gibbs.V->value(q) - v_min));
    if (u <= accept) return attempt + 1;
  }
  throw ConfigError("rejection sampling acceptance too low");
}

void gaussian_momentum(const Eigen::MatrixXd& root, const CounterStream& st,
                       std::uint32_t step, std::span<double> p) {
  const int d = static_cast<int>(p.size());
  std::vector<double> xi(d);
  st.normals(step, 1u << 16, xi);
  for (int i = 0; i < d; ++i) {
    p[i] = 0.0;
    for (int j = 0; j < d; ++j) p[i] += root(i, j) * xi[j];
  }
}

}  // namespace

double torus_potential_min(const GibbsSpec& gibbs) { return torus_min_scan(gibbs); }

void draw_initial_state(const GibbsSpec& gibbs, std::uint64_t seed,
                        std::uint64_t trajectory, std::span<double> q,
                        std::span<double> p) {
  const CounterStream st(seed, StreamPurpose::InitialConditions, trajectory);
  const int d = gibbs.domain.dim;
  if (gibbs.domain.is_torus()) {
    const double v_min = torus_min_scan(gibbs);
    rejection_position(gibbs, st, v_min, q);
  } else if (gibbs.V->kind() == PotentialKind::Quadratic) {
    Eigen::MatrixXd k(d, d);
    const std::vector<double> origin(d, 0.0);
    gibbs.V->hessian(origin, k);
    const Eigen::MatrixXd root = spd_sqrt(k.inverse() / gibbs.beta);
    std::vector<double> xi(d);
    st.normals(0, 0, xi);
    for (int i = 0; i < d; ++i) {
      q[i] = 0.0;
      for (int j = 0; j < d; ++j) q[i] += root(i, j) * xi[j];
    }
  } else {
    throw UnsupportedError(
        "per-trajectory draws support torus or quadratic-V problems");
  }
  if (!p.empty()) {
    const Eigen::MatrixXd root = spd_sqrt(gibbs.U.mass() / gibbs.beta);
    gaussian_momentum(root, st, 0, p);
  }
}

EnsembleState sample_gibbs(const GibbsSpec& gibbs, std::size_t n,
                           std::uint64_t seed, SampleDiagnostics* diag) {
  const int d = gibbs.domain.dim;
  EnsembleState out = EnsembleState::make(n, d, true);
  const Eigen::MatrixXd mom_root = spd_sqrt(gibbs.U.mass() / gibbs.beta);

  if (gibbs.domain.is_torus()) {
    const double v_min = torus_min_scan(gibbs);
    std::atomic<std::uint64_t> attempts{0};
    parallel_for(n, 0, [&](std::size_t a, std::size_t b) {
      std::uint64_t local_attempts = 0;
      for (std::size_t i = a; i < b; ++i) {
        const CounterStream st(seed, StreamPurpose::InitialConditions, i);
        local_attempts += rejection_position(gibbs, st, v_min, out.position(i));
        gaussian_momentum(mom_root, st, 0, out.momentum(i));
      }
      attempts += local_attempts;
    });
    if (diag) {
      diag->acceptance_rate =
          static_cast<double>(n) / static_cast<double>(attempts.load());
      diag->burnin = {};
    }
    // Guard required by the contract: configuration error when the proposal
    // almost never lands.
    if (static_cast<double>(n) / static_cast<double>(attempts.load()) < 1e-4) {
      throw ConfigError("rejection sampling acceptance below 1e-4");
    }
    return out;
  }

  if (gibbs.V->kind() == PotentialKind::Quadratic) {
    parallel_for(n, 0, [&](std::size_t a, std::size_t b) {
      for (std::size_t i = a; i < b; ++i) {
        const CounterStream st(seed, StreamPurpose::InitialConditions, i);
        draw_initial_state(gibbs, seed, i, out.position(i), out.momentum(i));
        (void)st;
      }
    });
    if (diag) *diag = {};
    return out;
  }

  // Overdamped burn-in fallback for non-Gaussian Euclidean marginals.
  ProblemSpec aux;
  aux.domain = gibbs.domain;
  aux.beta = gibbs.beta;
  aux.V = gibbs.V;
  aux.U = gibbs.U;
  aux.D = make_constant_field(gibbs.domain, Eigen::MatrixXd::Identity(d, d));
  const double h = 1e-3;
  const int window = 2000;
  const int max_windows = 50;
  std::vector<double> window_means;
  bool stabilized = false;
  // One chain per trajectory, advanced window by window until the ensemble
  // mean of V stabilizes.
  parallel_for(n, 0, [&](std::size_t a, std::size_t b) {
    for (std::size_t i = a; i < b; ++i) {
      for (int k = 0; k < d; ++k) out.position(i)[k] = 0.0;
    }
  });
  StepScratch scratch_template;
  scratch_template.resize(d);
  for (int w = 0; w < max_windows && !stabilized; ++w) {
    parallel_for(n, 0, [&](std::size_t a, std::size_t b) {
      StepScratch scratch = scratch_template;
      std::vector<double> dw(d);
      for (std::size_t i = a; i < b; ++i) {
        const CounterStream st(seed, StreamPurpose::BurnIn, i);
        for (int s = 0; s < window; ++s) {
          const std::uint32_t step = static_cast<std::uint32_t>(w * window + s);
          st.normals(step, 0, dw);
          for (double& x : dw) x *= std::sqrt(h);
          overdamped_em_step(aux, out.position(i), dw, h, scratch);
        }
      }
    });
    double mean_v = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_v += gibbs.V->value(out.position(i));
    mean_v /= static_cast<double>(n);
    window_means.push_back(mean_v);
    const std::size_t m = window_means.size();
    if (m >= 3) {
      const double d1 = std::abs(window_means[m - 1] - window_means[m - 2]);
      const double d2 = std::abs(window_means[m - 2] - window_means[m - 3]);
      const double scale = std::abs(window_means[m - 1]) + 1e-9;
      stabilized = d1 < 0.02 * scale && d2 < 0.02 * scale;
    }
  }
  parallel_for(n, 0, [&](std::size_t a, std::size_t b) {
    for (std::size_t i = a; i < b; ++i) {
      const CounterStream st(seed, StreamPurpose::InitialConditions, i);
      gaussian_momentum(mom_root, st, 0, out.momentum(i));
    }
  });
  if (diag) {
    diag->acceptance_rate = 1.0;
    diag->burnin.used = true;
    diag->burnin.stabilized = stabilized;
    diag->burnin.window_means = window_means;
  }
  return out;
}

EnsembleState sample_gibbs_mass(const ProblemSpec& prob, std::size_t n,
                                std::uint64_t seed, SampleDiagnostics* diag) {
  if (!prob.mass) throw ValidationError("problem has no mass field");
  const GibbsSpec gibbs = prob.gibbs();
  if (!gibbs.domain.is_torus()) {
    throw UnsupportedError("mass-dependent sampling implemented on the torus");
  }
  const int d = gibbs.domain.dim;
  EnsembleState out = EnsembleState::make(n, d, true);
  const double v_min = torus_min_scan(gibbs);
  std::atomic<std::uint64_t> attempts{0};
  parallel_for(n, 0, [&](std::size_t a, std::size_t b) {
    Eigen::MatrixXd m;
    std::uint64_t local_attempts = 0;
    for (std::size_t i = a; i < b; ++i) {
      const CounterStream st(seed, StreamPurpose::InitialConditions, i);
      local_attempts += rejection_position(gibbs, st, v_min, out.position(i));
      prob.mass->value(out.position(i), m);
      gaussian_momentum(spd_sqrt(m / prob.beta), st, 0, out.momentum(i));
    }
    attempts += local_attempts;
  });
  if (diag) {
    diag->acceptance_rate =
        static_cast<double>(n) / static_cast<double>(attempts.load());
    diag->burnin = {};
  }
  return out;
}

}  // namespace kramers
