#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "collapse/dissipator.hpp"
#include "collapse/measurement_model.hpp"
#include "collapse/quantum_state.hpp"

namespace collapse {

inline constexpr double kDefaultSafety = 0.05;
inline constexpr double kDefaultAlignmentTolerance = 0.01;

// Tolerances applied to every recorded snapshot.
inline constexpr DmTolerance kSnapshotTolerance{1e-10, 1e-9, 1e-8};
// Hard positivity limit; beyond it integration stops with IntegrationError.
inline constexpr double kPositivityFailure = 1e-6;

struct IntegratorConfig {
  double t_max = 1.0;                       // units of 1/Omega
  std::optional<double> dt;                 // nullopt = AUTO: safety / w_max
  double safety = kDefaultSafety;
  std::optional<std::size_t> record_every;  // nullopt = t_max split into `samples` strides
  std::size_t samples = 200;
  // Extra geometrically spaced early samples; they resolve the 1/w_max transient.
  std::size_t log_samples = 100;

  void validate() const;
};

enum class EvolutionMode { Full, Fast };

/// Worst-case conservation figures over every integration step.
struct ConservationStats {
  std::size_t steps = 0;
  double dt = 0.0;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  // Smallest eigenvalue over recorded samples.
  double min_eigenvalue = 1.0;
  // Steps at which rho + 1e-8 * 1 was not positive definite.
  std::size_t positivity_breaches = 0;
};

struct OffDiagonalIndex {
  Eigen::Index row;
  Eigen::Index col;
};

struct TrajectorySample {
  double t;
  DensityMatrix rho;
  std::vector<double> diagonals;
  std::vector<Complex> off_diagonals;  // ordered as Trajectory::tracked()
  double entropy;
  std::vector<double> eigenvalues;     // descending
  double trace_distance;               // to the target, NaN without one
};

class Trajectory {
 public:
  Trajectory(std::vector<OffDiagonalIndex> tracked, std::vector<TrajectorySample> samples,
             ConservationStats stats);

  const std::vector<TrajectorySample>& samples() const noexcept { return samples_; }
  const std::vector<OffDiagonalIndex>& tracked() const noexcept { return tracked_; }
  const ConservationStats& stats() const noexcept { return stats_; }
  const TrajectorySample& final_sample() const { return samples_.back(); }
  std::size_t dim() const;

 private:
  std::vector<OffDiagonalIndex> tracked_;
  std::vector<TrajectorySample> samples_;
  ConservationStats stats_;
};

// -i[H, rho] + D(rho) with hbar = 1.
ComplexMatrix master_rhs(const ComplexMatrix& hamiltonian, const DissipatorSpec& spec,
                         const DensityMatrix& rho);

// Fixed-step classical RK4 on the full master equation.
Trajectory integrate(const DensityMatrix& rho0, const ComplexMatrix& hamiltonian,
                     const DissipatorSpec& spec, const IntegratorConfig& cfg,
                     const std::optional<DensityMatrix>& target = std::nullopt);

// Decay rate of rho_rs in the fast-decoherence limit, from the jump family:
// (G*W/2) [ (sum_m sqrt(p_m) - sqrt(p_r)) / sqrt(p_r) + (same for s) ].
double fast_offdiag_rate(double p_r, double p_s, std::span<const double> p_all, double gamma,
                         double omega);

// G*W [ sqrt(p_r) sum_m d_m / sqrt(p_m) - (d_r / sqrt(p_r)) sum_m sqrt(p_m) ].
std::vector<double> fast_diag_rhs(std::span<const double> p_all, std::span<const double> diag,
                                  double gamma, double omega);

// Diagonals by RK4 on fast_diag_rhs, off-diagonals by their exact exponential.
Trajectory integrate_fast_limit(const DensityMatrix& rho0, std::span<const double> p_all,
                                double gamma, double omega, const IntegratorConfig& cfg,
                                const std::optional<DensityMatrix>& target = std::nullopt);

// Earliest recorded time after which the trace distance to `target` stays <= tol.
// Throws NotAlignedError carrying the final distance if the last sample is above tol.
double alignment_time(const Trajectory& traj, const DensityMatrix& target,
                      double tol = kDefaultAlignmentTolerance);

// Builds the jump family from the model and runs the chosen solver against its aligned target.
Trajectory simulate_model(const MeasurementModel& model, const IntegratorConfig& cfg,
                          EvolutionMode mode = EvolutionMode::Full);

}  // namespace collapse
