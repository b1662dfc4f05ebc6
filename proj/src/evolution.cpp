#include "collapse/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "collapse/errors.hpp"

namespace collapse {

namespace {

constexpr Complex kI(0.0, 1.0);
constexpr double kPositivityProbe = 1e-8;

struct StepPlan {
  std::size_t steps;
  double dt;
  std::vector<std::size_t> record;  // sorted step indices, always contains 0 and steps
};

StepPlan plan_steps(const IntegratorConfig& cfg, double w_max) {
  double dt_target;
  if (cfg.dt) {
    dt_target = *cfg.dt;
  } else if (w_max > 0.0) {
    dt_target = cfg.safety / w_max;
  } else {
    dt_target = cfg.t_max / static_cast<double>(std::max<std::size_t>(cfg.samples, 1));
  }
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(cfg.t_max / dt_target - 1e-9)));
  StepPlan plan{steps, cfg.t_max / static_cast<double>(steps), {}};

  const std::size_t stride =
      cfg.record_every ? *cfg.record_every
                       : std::max<std::size_t>(1, steps / std::max<std::size_t>(cfg.samples, 1));
  for (std::size_t k = 0; k <= steps; k += stride) plan.record.push_back(k);
  plan.record.push_back(steps);
  if (cfg.log_samples > 1 && steps > 1) {
    const double top = std::log(static_cast<double>(steps));
    for (std::size_t m = 0; m < cfg.log_samples; ++m) {
      const double frac = static_cast<double>(m) / static_cast<double>(cfg.log_samples - 1);
      plan.record.push_back(static_cast<std::size_t>(std::llround(std::exp(frac * top))));
    }
  }
  std::sort(plan.record.begin(), plan.record.end());
  plan.record.erase(std::unique(plan.record.begin(), plan.record.end()), plan.record.end());
  return plan;
}

std::vector<OffDiagonalIndex> upper_pairs(Eigen::Index n) {
  std::vector<OffDiagonalIndex> pairs;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = r + 1; s < n; ++s) pairs.push_back({r, s});
  }
  return pairs;
}

double spectral_radius(const ComplexMatrix& h) {
  if (h.size() == 0 || h.isZero(0.0)) return 0.0;
  const auto ev = hermitian_eigenvalues(h);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

/// Per-step invariant checks shared by both solvers.
class ConservationMonitor {
 public:
  explicit ConservationMonitor(Eigen::Index n)
      : probe_(n, n), llt_(n), identity_(ComplexMatrix::Identity(n, n)) {}

  void check(const ComplexMatrix& rho, double t, ConservationStats& stats) {
    const Eigen::Index n = rho.rows();
    double trace = 0.0;
    double herm = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index r = 0; r < n; ++r) {
        const Complex v = rho(r, c);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          throw DivergenceError("integration diverged at t = " + std::to_string(t) +
                                ": non-finite density matrix entry");
        }
        herm = std::max(herm, std::abs(v - std::conj(rho(c, r))));
      }
      trace += rho(c, c).real();
    }
    stats.max_trace_error = std::max(stats.max_trace_error, std::abs(trace - 1.0));
    stats.max_hermiticity_error = std::max(stats.max_hermiticity_error, herm);

    probe_.noalias() = rho + kPositivityProbe * identity_;
    llt_.compute(probe_);
    if (llt_.info() != Eigen::Success) {
      const double lowest = hermitian_eigenvalues(rho).back();
      stats.min_eigenvalue = std::min(stats.min_eigenvalue, lowest);
      if (lowest < -kPositivityFailure) {
        throw IntegrationError("positivity lost at t = " + std::to_string(t) +
                               " (eigenvalue " + std::to_string(lowest) +
                               "); reduce dt or the safety factor");
      }
      ++stats.positivity_breaches;
    }
  }

 private:
  ComplexMatrix probe_;
  Eigen::LLT<ComplexMatrix> llt_;
  ComplexMatrix identity_;
};

TrajectorySample make_sample(double t, const ComplexMatrix& rho,
                             const std::vector<OffDiagonalIndex>& tracked,
                             const std::optional<DensityMatrix>& target, ConservationStats& stats) {
  DensityMatrix snapshot = [&] {
    try {
      return DensityMatrix(rho, DmTolerance{kSnapshotTolerance.hermitian, kSnapshotTolerance.trace,
                                            kPositivityFailure});
    } catch (const ValidationError& e) {
      throw IntegrationError("invalid snapshot at t = " + std::to_string(t) + ": " + e.what());
    }
  }();
  std::vector<double> eig = dm_eigenvalues(snapshot);
  stats.min_eigenvalue = std::min(stats.min_eigenvalue, eig.back());

  std::vector<double> clamped(eig);
  for (double& v : clamped) v = std::max(v, 0.0);

  std::vector<double> diag(static_cast<std::size_t>(rho.rows()));
  for (Eigen::Index k = 0; k < rho.rows(); ++k) diag[static_cast<std::size_t>(k)] = rho(k, k).real();
  std::vector<Complex> off;
  off.reserve(tracked.size());
  for (const auto& p : tracked) off.push_back(rho(p.row, p.col));

  const double entropy = entropy_of_spectrum(clamped);
  const double distance = target ? trace_distance(snapshot, *target)
                                 : std::numeric_limits<double>::quiet_NaN();
  return TrajectorySample{t, std::move(snapshot), std::move(diag), std::move(off), entropy,
                          std::move(eig), distance};
}

/// Fast-limit diagonal generator with the square roots cached.
class FastDiagonalRates {
 public:
  FastDiagonalRates(std::span<const double> p_all, double gamma, double omega)
      : root_(p_all.size()), scale_(gamma * omega) {
    for (std::size_t k = 0; k < p_all.size(); ++k) {
      if (!(p_all[k] > 0.0)) {
        throw ValidationError("fast-limit rates need strictly positive (floored) p values");
      }
      root_[k] = std::sqrt(p_all[k]);
    }
    root_sum_ = std::accumulate(root_.begin(), root_.end(), 0.0);
  }

  std::size_t size() const noexcept { return root_.size(); }

  void operator()(std::span<const double> diag, std::span<double> out) const {
    double weighted = 0.0;
    for (std::size_t m = 0; m < root_.size(); ++m) weighted += diag[m] / root_[m];
    for (std::size_t r = 0; r < root_.size(); ++r) {
      out[r] = scale_ * (root_[r] * weighted - diag[r] / root_[r] * root_sum_);
    }
  }

  double max_weight() const {
    const auto [lo, hi] = std::minmax_element(root_.begin(), root_.end());
    return scale_ * *hi / *lo;
  }

 private:
  std::vector<double> root_;
  double root_sum_ = 0.0;
  double scale_;
};

}  // namespace

void IntegratorConfig::validate() const {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be positive");
  if (dt && !(*dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(safety > 0.0 && safety <= 0.5)) throw ConfigError("safety must lie in (0, 0.5]");
  if (record_every && *record_every == 0) throw ConfigError("record_every must be positive");
  if (samples == 0) throw ConfigError("samples must be positive");
}

Trajectory::Trajectory(std::vector<OffDiagonalIndex> tracked, std::vector<TrajectorySample> samples,
                       ConservationStats stats)
    : tracked_(std::move(tracked)), samples_(std::move(samples)), stats_(stats) {
  if (samples_.empty()) throw ValidationError("trajectory must contain at least one sample");
}

std::size_t Trajectory::dim() const { return static_cast<std::size_t>(samples_.front().rho.dim()); }

ComplexMatrix master_rhs(const ComplexMatrix& hamiltonian, const DissipatorSpec& spec,
                         const DensityMatrix& rho) {
  if (hamiltonian.rows() != rho.dim() || hamiltonian.cols() != rho.dim()) {
    throw ValidationError("master_rhs: hamiltonian dimension mismatch");
  }
  ComplexMatrix out;
  spec.apply(rho.matrix(), out);
  if (!hamiltonian.isZero(0.0)) {
    out.noalias() += -kI * (hamiltonian * rho.matrix());
    out.noalias() += kI * (rho.matrix() * hamiltonian);
  }
  return out;
}

Trajectory integrate(const DensityMatrix& rho0, const ComplexMatrix& hamiltonian,
                     const DissipatorSpec& spec, const IntegratorConfig& cfg,
                     const std::optional<DensityMatrix>& target) {
  cfg.validate();
  const Eigen::Index n = rho0.dim();
  if (spec.dim() != n) throw ValidationError("integrate: dissipator dimension mismatch");
  if (hamiltonian.rows() != n || hamiltonian.cols() != n) {
    throw ValidationError("integrate: hamiltonian dimension mismatch");
  }
  if (target && target->dim() != n) throw ValidationError("integrate: target dimension mismatch");

  const bool unitary_part = !hamiltonian.isZero(0.0);
  const double w_max = spec.max_weight() + 2.0 * spectral_radius(hamiltonian);
  const StepPlan plan = plan_steps(cfg, w_max);
  const double dt = plan.dt;

  ComplexMatrix rho = rho0.matrix();
  ComplexMatrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), stage(n, n);
  auto rhs = [&](const ComplexMatrix& x, ComplexMatrix& out) {
    spec.apply(x, out);
    if (unitary_part) {
      out.noalias() += -kI * (hamiltonian * x);
      out.noalias() += kI * (x * hamiltonian);
    }
  };

  ConservationStats stats;
  stats.steps = plan.steps;
  stats.dt = dt;
  ConservationMonitor monitor(n);
  const auto tracked = upper_pairs(n);
  std::vector<TrajectorySample> samples;
  samples.reserve(plan.record.size());
  samples.push_back(make_sample(0.0, rho, tracked, target, stats));
  std::size_t next = 1;

  for (std::size_t step = 1; step <= plan.steps; ++step) {
    rhs(rho, k1);
    stage.noalias() = rho + (0.5 * dt) * k1;
    rhs(stage, k2);
    stage.noalias() = rho + (0.5 * dt) * k2;
    rhs(stage, k3);
    stage.noalias() = rho + dt * k3;
    rhs(stage, k4);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double t = step == plan.steps ? cfg.t_max : static_cast<double>(step) * dt;
    monitor.check(rho, t, stats);
    if (next < plan.record.size() && plan.record[next] == step) {
      samples.push_back(make_sample(t, rho, tracked, target, stats));
      ++next;
    }
  }
  return Trajectory(tracked, std::move(samples), stats);
}

double fast_offdiag_rate(double p_r, double p_s, std::span<const double> p_all, double gamma,
                         double omega) {
  if (!(p_r > 0.0) || !(p_s > 0.0)) {
    throw ValidationError("fast_offdiag_rate: p values must be floored and positive");
  }
  double root_sum = 0.0;
  for (double p : p_all) root_sum += std::sqrt(p);
  const double root_r = std::sqrt(p_r);
  const double root_s = std::sqrt(p_s);
  return 0.5 * gamma * omega * ((root_sum - root_r) / root_r + (root_sum - root_s) / root_s);
}

std::vector<double> fast_diag_rhs(std::span<const double> p_all, std::span<const double> diag,
                                  double gamma, double omega) {
  if (diag.size() != p_all.size()) throw ValidationError("fast_diag_rhs: length mismatch");
  std::vector<double> out(diag.size());
  FastDiagonalRates(p_all, gamma, omega)(diag, out);
  return out;
}

Trajectory integrate_fast_limit(const DensityMatrix& rho0, std::span<const double> p_all,
                                double gamma, double omega, const IntegratorConfig& cfg,
                                const std::optional<DensityMatrix>& target) {
  cfg.validate();
  const Eigen::Index n = rho0.dim();
  if (p_all.size() != static_cast<std::size_t>(n)) {
    throw ValidationError("integrate_fast_limit: p_all length does not match the state");
  }
  if (target && target->dim() != n) {
    throw ValidationError("integrate_fast_limit: target dimension mismatch");
  }
  const FastDiagonalRates rates(p_all, gamma, omega);
  const StepPlan plan = plan_steps(cfg, n > 1 ? rates.max_weight() : 0.0);
  const double dt = plan.dt;
  const auto un = static_cast<std::size_t>(n);

  const auto tracked = upper_pairs(n);
  std::vector<double> decay(tracked.size());
  for (std::size_t k = 0; k < tracked.size(); ++k) {
    decay[k] = fast_offdiag_rate(p_all[static_cast<std::size_t>(tracked[k].row)],
                                 p_all[static_cast<std::size_t>(tracked[k].col)], p_all, gamma,
                                 omega);
  }

  std::vector<double> diag(un), k1(un), k2(un), k3(un), k4(un), stage(un);
  for (std::size_t k = 0; k < un; ++k) diag[k] = rho0(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();

  ComplexMatrix rho = rho0.matrix();
  auto assemble = [&](double t) {
    for (std::size_t k = 0; k < un; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      rho(i, i) = diag[k];
    }
    for (std::size_t k = 0; k < tracked.size(); ++k) {
      const auto [r, s] = tracked[k];
      const Complex v = rho0(r, s) * std::exp(-decay[k] * t);
      rho(r, s) = v;
      rho(s, r) = std::conj(v);
    }
  };

  ConservationStats stats;
  stats.steps = plan.steps;
  stats.dt = dt;
  ConservationMonitor monitor(n);
  std::vector<TrajectorySample> samples;
  samples.reserve(plan.record.size());
  samples.push_back(make_sample(0.0, rho, tracked, target, stats));
  std::size_t next = 1;

  for (std::size_t step = 1; step <= plan.steps; ++step) {
    rates(diag, k1);
    for (std::size_t k = 0; k < un; ++k) stage[k] = diag[k] + 0.5 * dt * k1[k];
    rates(stage, k2);
    for (std::size_t k = 0; k < un; ++k) stage[k] = diag[k] + 0.5 * dt * k2[k];
    rates(stage, k3);
    for (std::size_t k = 0; k < un; ++k) stage[k] = diag[k] + dt * k3[k];
    rates(stage, k4);
    for (std::size_t k = 0; k < un; ++k) {
      diag[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }

    const double t = step == plan.steps ? cfg.t_max : static_cast<double>(step) * dt;
    assemble(t);
    monitor.check(rho, t, stats);
    if (next < plan.record.size() && plan.record[next] == step) {
      samples.push_back(make_sample(t, rho, tracked, target, stats));
      ++next;
    }
  }
  return Trajectory(tracked, std::move(samples), stats);
}

double alignment_time(const Trajectory& traj, const DensityMatrix& target, double tol) {
  const auto& samples = traj.samples();
  std::optional<std::size_t> last_outside;
  double distance = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    distance = trace_distance(samples[k].rho, target);
    if (distance > tol) last_outside = k;
  }
  if (!last_outside) return samples.front().t;
  if (*last_outside + 1 == samples.size()) {
    throw NotAlignedError("not aligned within t_max = " + std::to_string(samples.back().t) +
                              ": final trace distance " + std::to_string(distance) +
                              " exceeds " + std::to_string(tol),
                          distance);
  }
  return samples[*last_outside + 1].t;
}

Trajectory simulate_model(const MeasurementModel& model, const IntegratorConfig& cfg,
                          EvolutionMode mode) {
  const DensityMatrix rho0 = model.initial_dm();
  const DensityMatrix target = model.target_dm();
  const RateTable rates = model.rates();
  if (mode == EvolutionMode::Fast) {
    return integrate_fast_limit(rho0, rates.squared(), model.gamma(), model.omega(), cfg, target);
  }
  const DissipatorSpec spec = lindblad_jump_family(rates, model.gamma(), model.omega());
  return integrate(rho0, model.hamiltonian(), spec, cfg, target);
}

}  // namespace collapse
