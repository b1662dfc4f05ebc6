#include "collapse/quantum_state.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "collapse/errors.hpp"

namespace collapse {

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

StateVector::StateVector(std::vector<Complex> amplitudes, std::string label)
    : amplitudes_(std::move(amplitudes)), label_(std::move(label)) {
  if (amplitudes_.empty()) {
    throw ValidationError(label_ + " state vector must have at least one amplitude");
  }
  double norm2 = 0.0;
  for (const Complex& a : amplitudes_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw ValidationError(label_ + " state vector has a non-finite amplitude");
    }
    norm2 += std::norm(a);
  }
  if (std::abs(norm2 - 1.0) > kNormTolerance) {
    throw ValidationError(label_ + " state vector is not normalized: squared norm " +
                          format_double(norm2));
  }
}

DensityMatrix::DensityMatrix(ComplexMatrix entries, const DmTolerance& tol)
    : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw ValidationError("density matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) {
    throw ValidationError("density matrix has non-finite entries");
  }
  const double herm = max_hermiticity_error(entries_);
  if (herm > tol.hermitian) {
    throw ValidationError("density matrix is not Hermitian: max |a_ij - conj(a_ji)| = " +
                          format_double(herm));
  }
  const double trace = entries_.trace().real();
  if (std::abs(trace - 1.0) > tol.trace) {
    throw ValidationError("density matrix trace is " + format_double(trace) + ", expected 1");
  }
  const auto eig = hermitian_eigenvalues(entries_);
  if (eig.back() < -tol.positivity) {
    throw PositivityError("density matrix has eigenvalue " + format_double(eig.back()) +
                          " below -" + format_double(tol.positivity));
  }
}

double DensityMatrix::purity() const { return (entries_ * entries_).trace().real(); }

DensityMatrix product_state_dm(const StateVector& sys, const StateVector& app) {
  const auto n_sys = static_cast<Eigen::Index>(sys.dim());
  const auto n_app = static_cast<Eigen::Index>(app.dim());
  Eigen::VectorXcd psi(n_sys * n_app);
  for (Eigen::Index i = 0; i < n_sys; ++i) {
    for (Eigen::Index j = 0; j < n_app; ++j) {
      psi(i * n_app + j) = sys[static_cast<std::size_t>(i)] * app[static_cast<std::size_t>(j)];
    }
  }
  return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix aligned_dm(std::span<const double> probs, const CorrespondenceMap& correspondence) {
  if (probs.size() != correspondence.outcomes()) {
    throw ValidationError("aligned_dm: " + std::to_string(probs.size()) +
                          " probabilities for " + std::to_string(correspondence.outcomes()) +
                          " outcomes");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw ValidationError("aligned_dm: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw ValidationError("aligned_dm: probabilities sum to " + format_double(sum));
  }
  const auto n = static_cast<Eigen::Index>(correspondence.combined_dim());
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto readings = correspondence.readings_of(i);
    const auto weights = correspondence.weights_of(i);
    for (std::size_t k = 0; k < readings.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(correspondence.flat_index(i, readings[k]));
      m(r, r) = probs[i] * weights[k];
    }
  }
  return DensityMatrix(std::move(m));
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("trace_distance: dimension mismatch (" + std::to_string(a.rows()) +
                          " vs " + std::to_string(b.rows()) + ")");
  }
  const ComplexMatrix diff = a - b;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(diff, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_distance(a.matrix(), b.matrix());
}

double entropy_of_spectrum(std::span<const double> eigenvalues, double log_base) {
  if (!(log_base > 1.0)) throw ValidationError("entropy: log base must exceed 1");
  double s = 0.0;
  for (double p : eigenvalues) {
    if (p < -1e-10) {
      throw PositivityError("entropy: eigenvalue " + format_double(p) + " below -1e-10");
    }
    if (p > 0.0) s -= p * std::log(p);
  }
  return s / std::log(log_base);
}

double von_neumann_entropy(const DensityMatrix& dm, double log_base) {
  return entropy_of_spectrum(dm_eigenvalues(dm), log_base);
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

std::vector<double> dm_eigenvalues(const DensityMatrix& dm) {
  return hermitian_eigenvalues(dm.matrix());
}

double max_hermiticity_error(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace collapse
