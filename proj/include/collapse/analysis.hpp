#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "collapse/evolution.hpp"
#include "collapse/measurement_model.hpp"
#include "collapse/quantum_state.hpp"

namespace collapse {

// M[r][m] = G*W (sqrt(p_r)/sqrt(p_m) - delta_rm sum_k sqrt(p_k)/sqrt(p_r)),
// so that fast_diag_rhs(p, d) == M d.
RealMatrix diag_generator_matrix(std::span<const double> p_all, double gamma, double omega);

/// Eigen-decomposition of the diagonal generator.
///
/// `stationary` is the eigenvector of the eigenvalue closest to zero, scaled
/// to unit sum and taken real. Every other eigenvector has unit Euclidean norm.
struct GeneratorSpectrum {
  std::vector<Complex> eigenvalues;
  Eigen::MatrixXcd eigenvectors;  // columns
  std::size_t zero_index = 0;
  std::vector<double> stationary;
  // Eigenvalues with |lambda| <= zero_tolerance; more than one means the
  // stationary state is not unique.
  std::size_t near_zero_count = 0;
  double zero_tolerance = 0.0;

  bool degenerate() const noexcept { return near_zero_count > 1; }
};

// zero_tolerance = 1e-9 * rate_scale (pass G*W).
GeneratorSpectrum generator_spectrum(const RealMatrix& generator, double rate_scale);

// rho_nn(t) = sum_k c_k v_{n,k} exp(lambda_k t) with c fitted to the initial diagonal.
std::vector<double> spectral_diagonals(const GeneratorSpectrum& spectrum,
                                       std::span<const double> initial_diag, double t);

enum class SpeedNorm { DiagonalRms, Frobenius };

struct QslReport {
  double numerator;    // trace distance between the end points
  double denominator;  // speed norm of the initial right-hand side (inverse time)
  double bound;        // numerator / denominator
  std::optional<double> measured_alignment_time;
  std::optional<double> ratio;  // measured / bound
};

QslReport qsl_lower_bound(const DensityMatrix& rho0, const DensityMatrix& rho_inf,
                          const ComplexMatrix& initial_rhs,
                          SpeedNorm norm = SpeedNorm::DiagonalRms,
                          std::optional<double> measured_alignment_time = std::nullopt);

struct SweepRow {
  double gamma;
  double alignment_time;   // NaN if the row failed
  double gamma_times_tau;  // NaN if the row failed
  std::string error;       // empty on success
};

// One run per gamma; t_max is rescaled by model.gamma()/gamma so every row covers the
// same G*W*t horizon. Rows run on up to `threads` threads (0 = hardware concurrency).
std::vector<SweepRow> gamma_sweep(const MeasurementModel& model, std::span<const double> gammas,
                                  const IntegratorConfig& cfg,
                                  EvolutionMode mode = EvolutionMode::Full,
                                  double tol = kDefaultAlignmentTolerance,
                                  std::size_t threads = 1);

// (max - min) / mean of gamma * tau over the successful rows.
double relative_spread(std::span<const SweepRow> rows);

}  // namespace collapse
