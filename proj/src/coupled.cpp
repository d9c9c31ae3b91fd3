#include "kramers/coupled.hpp"

#include <atomic>
#include <cmath>

#include "kramers/steppers.hpp"

namespace kramers {

int RefineRule::operator()(double lambda, double coarse_dt) const {
  const double r = 4.0 * lambda * lambda * coarse_dt / reference_dt;
  return std::max(1, static_cast<int>(std::ceil(r - 1e-12)));
}

Observable cos_observable(const Domain& domain) {
  const double omega =
      domain.is_torus() ? 2.0 * M_PI / domain.length : 1.0;
  return {"cos_q1",
          [omega](std::span<const double> q) { return std::cos(omega * q[0]); }};
}

Observable sin_observable(const Domain& domain) {
  const double omega =
      domain.is_torus() ? 2.0 * M_PI / domain.length : 1.0;
  return {"sin_q1",
          [omega](std::span<const double> q) { return std::sin(omega * q[0]); }};
}

Observable potential_observable(const PotentialPtr& v) {
  return {"potential", [v](std::span<const double> q) { return v->value(q); }};
}

Observable clipped_abs_observable() {
  return {"clipped_abs",
          [](std::span<const double> q) { return std::min(std::abs(q[0]), 1.0); }};
}

namespace {

std::vector<int> snapshot_indices(int n_steps, int snapshots) {
  std::vector<int> idx(snapshots);
  for (int j = 0; j < snapshots; ++j) {
    idx[j] = static_cast<int>(std::llround(
        static_cast<double>(n_steps) * (j + 1) / snapshots));
  }
  return idx;
}

void store_wrapped(const Domain& domain, std::span<const double> x,
                   double* dst) {
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = domain.wrap(x[i]);
}

}  // namespace

CoupledRunResult simulate_coupled_single(const ProblemSpec& prob, double lambda,
                                         const CoupledOptions& opts) {
  prob.check_consistent();
  if (!prob.D) throw ValidationError("coupled run needs the D field");
  if (lambda < 1.0) throw ValidationError("coupled run: lambda must be >= 1");
  const int d = prob.dim();
  const std::size_t n = opts.n_traj;
  const int n_steps =
      static_cast<int>(std::llround(opts.horizon / opts.coarse_dt));
  if (n_steps < opts.snapshots) {
    throw ConfigError("coarse grid has fewer steps than snapshots");
  }
  const int refine = opts.refine(lambda, opts.coarse_dt);
  const double fine_dt = opts.coarse_dt / refine;
  if (fine_dt > kinetic_stability_cap(prob, lambda, /*rescaled=*/true)) {
    throw ConfigError("fine step exceeds the stability cap; increase refine");
  }

  CoupledRunResult out;
  out.lambda = lambda;
  out.dim = d;
  out.coarse_dt = opts.coarse_dt;
  out.refine_factor = refine;
  const std::vector<int> snaps = snapshot_indices(n_steps, opts.snapshots);
  out.snap_times.resize(opts.snapshots);
  for (int j = 0; j < opts.snapshots; ++j) {
    out.snap_times[j] = snaps[j] * opts.coarse_dt;
  }
  out.fine_pos.resize(opts.snapshots, n * d);
  out.coarse_pos.resize(opts.snapshots, n * d);
  const std::size_t n_obs = opts.observables.size();
  out.fine_avg = Eigen::MatrixXd::Zero(n_obs, n);
  out.coarse_avg = Eigen::MatrixXd::Zero(n_obs, n);
  out.diverged.assign(n, 0);

  const GibbsSpec gibbs = prob.gibbs();
  std::atomic<std::size_t> diverged_count{0};

  parallel_for(n, opts.threads, [&](std::size_t a, std::size_t b) {
    StepScratch scratch;
    scratch.resize(d);
    std::vector<double> q(d), p(d), x(d), dwf(d), dwc(d);
    std::vector<double> avg_f(n_obs), avg_c(n_obs);
    std::size_t local_diverged = 0;
    for (std::size_t i = a; i < b; ++i) {
      draw_initial_state(gibbs, opts.seed, i, q, p);
      for (int k = 0; k < d; ++k) x[k] = q[k];
      const CoupledNoise noise(opts.seed, opts.coarse_dt, refine, opts.horizon,
                               d, i);
      // Trapezoid accumulators over the coarse grid (both fidelities are read
      // at coarse grid points; this is the grid-point coupling convention).
      for (std::size_t o = 0; o < n_obs; ++o) {
        const double f0 = opts.observables[o].f(q);
        avg_f[o] = 0.5 * f0;
        avg_c[o] = 0.5 * f0;
      }
      bool dead = false;
      int snap_cursor = 0;
      for (int s = 0; s < n_steps && !dead; ++s) {
        for (int k = 0; k < d; ++k) dwc[k] = 0.0;
        for (int r = 0; r < refine; ++r) {
          noise.fine_increment(static_cast<std::uint32_t>(s),
                               static_cast<std::uint32_t>(r), dwf);
          underdamped_em_step(prob, q, p, dwf, fine_dt, lambda,
                              /*rescaled=*/true, scratch);
          for (int k = 0; k < d; ++k) dwc[k] += dwf[k];
        }
        overdamped_em_step(prob, x, dwc, opts.coarse_dt, scratch);
        if (!state_admissible(q) || !state_admissible(p) ||
            !state_admissible(x)) {
          out.diverged[i] = 1;
          ++local_diverged;
          dead = true;
          break;
        }
        const bool last = s + 1 == n_steps;
        for (std::size_t o = 0; o < n_obs; ++o) {
          const double w = last ? 0.5 : 1.0;
          avg_f[o] += w * opts.observables[o].f(q);
          avg_c[o] += w * opts.observables[o].f(x);
        }
        while (snap_cursor < opts.snapshots && snaps[snap_cursor] == s + 1) {
          store_wrapped(prob.domain, q,
                        out.fine_pos.data() +
                            (snap_cursor * out.fine_pos.cols() + i * d));
          store_wrapped(prob.domain, x,
                        out.coarse_pos.data() +
                            (snap_cursor * out.coarse_pos.cols() + i * d));
          ++snap_cursor;
        }
      }
      if (dead) {
        for (int j = 0; j < opts.snapshots; ++j) {
          for (int k = 0; k < d; ++k) {
            out.fine_pos(j, i * d + k) = 0.0;
            out.coarse_pos(j, i * d + k) = 0.0;
          }
        }
        for (std::size_t o = 0; o < n_obs; ++o) {
          out.fine_avg(o, i) = 0.0;
          out.coarse_avg(o, i) = 0.0;
        }
      } else {
        const double inv_t = opts.coarse_dt / opts.horizon;
        for (std::size_t o = 0; o < n_obs; ++o) {
          out.fine_avg(o, i) = avg_f[o] * inv_t;
          out.coarse_avg(o, i) = avg_c[o] * inv_t;
        }
      }
    }
    diverged_count += local_diverged;
  });

  out.n_diverged = diverged_count.load();
  if (static_cast<double>(out.n_diverged) >
      opts.divergence_budget * static_cast<double>(n)) {
    throw NumericError("diverged trajectories exceed the budget: " +
                       std::to_string(out.n_diverged));
  }
  return out;
}

std::vector<CoupledRunResult> simulate_coupled(const ProblemSpec& prob,
                                               std::span<const double> lambdas,
                                               const CoupledOptions& opts) {
  std::vector<CoupledRunResult> results;
  results.reserve(lambdas.size());
  for (double lam : lambdas) {
    results.push_back(simulate_coupled_single(prob, lam, opts));
  }
  return results;
}

EnsembleRunResult simulate_ensemble(const ProblemSpec& prob,
                                    DynamicsFamily family,
                                    const EnsembleState& initial,
                                    const EnsembleRunOptions& opts) {
  prob.check_consistent();
  const int d = prob.dim();
  const std::size_t n = initial.n_traj;
  const int n_steps = static_cast<int>(std::llround(opts.horizon / opts.dt));
  const bool kinetic = family != DynamicsFamily::Overdamped;
  if (kinetic && !initial.has_momenta()) {
    throw ValidationError("kinetic ensemble needs momenta in the initial state");
  }
  const int snapshots = opts.snapshots;
  std::vector<int> snaps =
      snapshots > 0 ? snapshot_indices(n_steps, snapshots) : std::vector<int>{};

  EnsembleRunResult out;
  out.snap_times.resize(snapshots);
  for (int j = 0; j < snapshots; ++j) out.snap_times[j] = snaps[j] * opts.dt;
  out.positions.resize(snapshots, n * d);
  out.final_state = initial;
  out.final_state.time = initial.time + opts.horizon;
  out.final_state.lambda = opts.lambda;
  out.diverged.assign(n, 0);
  std::atomic<std::size_t> diverged_count{0};

  parallel_for(n, opts.threads, [&](std::size_t a, std::size_t b) {
    StepScratch scratch;
    scratch.resize(d);
    std::vector<double> q(d), p(d), dw(d);
    for (std::size_t i = a; i < b; ++i) {
      const std::uint64_t traj = initial.traj_ids[i];
      const CounterStream stream(opts.seed, StreamPurpose::PathNoise, traj);
      for (int k = 0; k < d; ++k) {
        q[k] = initial.position(i)[k];
        if (kinetic) p[k] = initial.momentum(i)[k];
      }
      bool dead = false;
      int snap_cursor = 0;
      const double noise_std = std::sqrt(opts.dt);
      for (int s = 0; s < n_steps && !dead; ++s) {
        if (d == 1) {
          dw[0] = stream.normal1(static_cast<std::uint32_t>(s), 0);
        } else {
          stream.normals(static_cast<std::uint32_t>(s), 0, dw);
        }
        if (!opts.use_baoab) {
          for (double& w : dw) w *= noise_std;
        }
        switch (family) {
          case DynamicsFamily::Overdamped:
            overdamped_em_step(prob, q, dw, opts.dt, scratch,
                               opts.include_divergence_drift);
            break;
          case DynamicsFamily::Underdamped:
            if (opts.use_baoab) {
              underdamped_baoab_step(prob, q, p, dw, opts.dt, opts.lambda,
                                     scratch);
            } else {
              underdamped_em_step(prob, q, p, dw, opts.dt, opts.lambda,
                                  opts.rescaled, scratch);
            }
            break;
          case DynamicsFamily::CgKinetic:
            if (opts.use_baoab) {
              cg_baoab_step(prob, q, p, dw, opts.dt, opts.lambda, scratch);
            } else {
              cg_kinetic_em_step(prob, q, p, dw, opts.dt, opts.lambda,
                                 opts.rescaled, scratch);
            }
            break;
          case DynamicsFamily::MassLangevin:
            mass_langevin_em_step(prob, q, p, dw, opts.dt, opts.lambda,
                                  opts.rescaled, scratch);
            break;
        }
        if (!state_admissible(q) || (kinetic && !state_admissible(p))) {
          out.diverged[i] = 1;
          ++diverged_count;
          dead = true;
          break;
        }
        while (snap_cursor < snapshots && snaps[snap_cursor] == s + 1) {
          store_wrapped(prob.domain, q,
                        out.positions.data() +
                            (snap_cursor * out.positions.cols() + i * d));
          ++snap_cursor;
        }
      }
      for (int k = 0; k < d; ++k) {
        out.final_state.position(i)[k] = dead ? 0.0 : prob.domain.wrap(q[k]);
        if (kinetic) out.final_state.momentum(i)[k] = dead ? 0.0 : p[k];
      }
    }
  });

  out.n_diverged = diverged_count.load();
  if (static_cast<double>(out.n_diverged) >
      opts.divergence_budget * static_cast<double>(n)) {
    throw NumericError("diverged trajectories exceed the budget: " +
                       std::to_string(out.n_diverged));
  }
  return out;
}

}  // namespace kramers
