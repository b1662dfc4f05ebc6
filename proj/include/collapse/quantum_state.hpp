#pragma once

#include <numbers>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "collapse/correspondence.hpp"

namespace collapse {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Probabilities = std::vector<double>;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kProbabilitySumTolerance = 1e-12;

/// Normalized amplitude list of the system or the apparatus pointer.
class StateVector {
 public:
  // Throws ValidationError (naming `label` and the norm) unless sum |a_k|^2 = 1 within 1e-12.
  StateVector(std::vector<Complex> amplitudes, std::string label = "state");

  std::size_t dim() const noexcept { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
  Complex operator[](std::size_t k) const { return amplitudes_[k]; }
  const std::string& label() const noexcept { return label_; }

 private:
  std::vector<Complex> amplitudes_;
  std::string label_;
};

struct DmTolerance {
  double hermitian = 1e-12;
  double trace = 1e-10;
  double positivity = 1e-10;
};

/// Hermitian, unit-trace, positive-semidefinite matrix on the combined basis.
///
/// Construction validates the three invariants against `DmTolerance`; the
/// integrator uses a looser tolerance for snapshots.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix entries, const DmTolerance& tol = {});

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return entries_; }
  Complex operator()(Eigen::Index row, Eigen::Index col) const { return entries_(row, col); }

  double purity() const;

 private:
  ComplexMatrix entries_;
};

DensityMatrix product_state_dm(const StateVector& sys, const StateVector& app);

// Diagonal state with weight p_i * w_ij on every reading j owned by outcome i.
DensityMatrix aligned_dm(std::span<const double> probs, const CorrespondenceMap& correspondence);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

// -sum P ln P over the spectrum, divided by ln(log_base). Eigenvalues in
// [-1e-10, 0] count as zero; anything lower throws PositivityError.
double von_neumann_entropy(const DensityMatrix& dm, double log_base = std::numbers::e);
double entropy_of_spectrum(std::span<const double> eigenvalues, double log_base = std::numbers::e);

// Descending.
std::vector<double> dm_eigenvalues(const DensityMatrix& dm);
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m);

double max_hermiticity_error(const ComplexMatrix& m);

}  // namespace collapse
