#include "collapse/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <Eigen/Eigenvalues>

#include "collapse/errors.hpp"

namespace collapse {

RealMatrix diag_generator_matrix(std::span<const double> p_all, double gamma, double omega) {
  const auto n = static_cast<Eigen::Index>(p_all.size());
  if (n == 0) throw ValidationError("diag_generator_matrix: empty probability list");
  std::vector<double> root(p_all.size());
  for (std::size_t k = 0; k < p_all.size(); ++k) {
    if (!(p_all[k] > 0.0)) throw ValidationError("diag_generator_matrix: p values must be positive");
    root[k] = std::sqrt(p_all[k]);
  }
  const double root_sum = std::accumulate(root.begin(), root.end(), 0.0);
  RealMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      m(r, c) = root[r] / root[c];
    }
    m(r, r) -= root_sum / root[r];
  }
  return gamma * omega * m;
}

GeneratorSpectrum generator_spectrum(const RealMatrix& generator, double rate_scale) {
  if (generator.rows() == 0 || generator.rows() != generator.cols()) {
    throw ValidationError("generator_spectrum: generator must be square and non-empty");
  }
  Eigen::EigenSolver<RealMatrix> solver(generator, true);
  if (solver.info() != Eigen::Success) {
    throw IntegrationError("generator_spectrum: eigen-decomposition did not converge");
  }
  GeneratorSpectrum out;
  const Eigen::VectorXcd& values = solver.eigenvalues();
  out.eigenvalues.assign(values.data(), values.data() + values.size());
  out.eigenvectors = solver.eigenvectors();
  out.zero_tolerance = 1e-9 * rate_scale;

  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < out.eigenvalues.size(); ++k) {
    const double mag = std::abs(out.eigenvalues[k]);
    if (mag <= out.zero_tolerance) ++out.near_zero_count;
    if (mag < smallest) {
      smallest = mag;
      out.zero_index = k;
    }
  }

  const auto zero = static_cast<Eigen::Index>(out.zero_index);
  for (Eigen::Index k = 0; k < out.eigenvectors.cols(); ++k) {
    if (k == zero) continue;
    out.eigenvectors.col(k).normalize();
  }
  const Complex sum = out.eigenvectors.col(zero).sum();
  if (std::abs(sum) == 0.0) {
    throw ValidationError("generator_spectrum: stationary eigenvector has zero sum");
  }
  out.eigenvectors.col(zero) /= sum;
  out.stationary.resize(static_cast<std::size_t>(generator.rows()));
  for (Eigen::Index r = 0; r < generator.rows(); ++r) {
    out.stationary[static_cast<std::size_t>(r)] = out.eigenvectors(r, zero).real();
  }
  return out;
}

std::vector<double> spectral_diagonals(const GeneratorSpectrum& spectrum,
                                       std::span<const double> initial_diag, double t) {
  const auto n = spectrum.eigenvectors.rows();
  if (static_cast<Eigen::Index>(initial_diag.size()) != n) {
    throw ValidationError("spectral_diagonals: initial diagonal length mismatch");
  }
  Eigen::VectorXcd d0(n);
  for (Eigen::Index k = 0; k < n; ++k) d0(k) = initial_diag[static_cast<std::size_t>(k)];
  const Eigen::VectorXcd coeff = spectrum.eigenvectors.partialPivLu().solve(d0);
  Eigen::VectorXcd weighted(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    weighted(k) = coeff(k) * std::exp(spectrum.eigenvalues[static_cast<std::size_t>(k)] * t);
  }
  const Eigen::VectorXcd d = spectrum.eigenvectors * weighted;
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = d(k).real();
  return out;
}

QslReport qsl_lower_bound(const DensityMatrix& rho0, const DensityMatrix& rho_inf,
                          const ComplexMatrix& initial_rhs, SpeedNorm norm,
                          std::optional<double> measured_alignment_time) {
  if (rho0.dim() != rho_inf.dim() || initial_rhs.rows() != rho0.dim() ||
      initial_rhs.cols() != rho0.dim()) {
    throw ValidationError("qsl_lower_bound: dimension mismatch");
  }
  QslReport report{};
  report.numerator = trace_distance(rho_inf, rho0);
  if (norm == SpeedNorm::DiagonalRms) {
    report.denominator = std::sqrt(initial_rhs.diagonal().cwiseAbs2().mean());
  } else {
    report.denominator = initial_rhs.norm();
  }
  if (!(report.denominator > 0.0)) {
    throw ValidationError("qsl_lower_bound: initial state is stationary (zero speed)");
  }
  report.bound = report.numerator / report.denominator;
  report.measured_alignment_time = measured_alignment_time;
  if (measured_alignment_time && report.bound > 0.0) {
    report.ratio = *measured_alignment_time / report.bound;
  }
  return report;
}

std::vector<SweepRow> gamma_sweep(const MeasurementModel& model, std::span<const double> gammas,
                                  const IntegratorConfig& cfg, EvolutionMode mode, double tol,
                                  std::size_t threads) {
  if (gammas.empty()) throw ConfigError("gamma_sweep: empty gamma list");
  for (double g : gammas) {
    if (!(g > 0.0)) throw ConfigError("gamma_sweep: every gamma must be positive");
  }
  std::vector<SweepRow> rows(gammas.size());
  auto run_row = [&](std::size_t k) {
    const double g = gammas[k];
    SweepRow& row = rows[k];
    row.gamma = g;
    row.alignment_time = std::numeric_limits<double>::quiet_NaN();
    row.gamma_times_tau = std::numeric_limits<double>::quiet_NaN();
    try {
      const MeasurementModel scaled = model.with_gamma(g);
      IntegratorConfig row_cfg = cfg;
      if (g != model.gamma()) row_cfg.t_max = cfg.t_max * model.gamma() / g;
      const Trajectory traj = simulate_model(scaled, row_cfg, mode);
      row.alignment_time = alignment_time(traj, scaled.target_dm(), tol);
      row.gamma_times_tau = g * row.alignment_time;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, rows.size());
  if (threads <= 1) {
    for (std::size_t k = 0; k < rows.size(); ++k) run_row(k);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < rows.size(); k = next++) run_row(k);
    });
  }
  pool.clear();
  return rows;
}

double relative_spread(std::span<const SweepRow> rows) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  std::size_t count = 0;
  for (const SweepRow& row : rows) {
    if (!row.error.empty()) continue;
    lo = std::min(lo, row.gamma_times_tau);
    hi = std::max(hi, row.gamma_times_tau);
    sum += row.gamma_times_tau;
    ++count;
  }
  if (count == 0) return std::numeric_limits<double>::quiet_NaN();
  return (hi - lo) / (sum / static_cast<double>(count));
}

}  // namespace collapse
