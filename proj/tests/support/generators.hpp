#pragma once

// Seeded generators for property-style tests.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "collapse/measurement_model.hpp"
#include "collapse/quantum_state.hpp"

namespace collapse::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20240611);
  return engine;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Complex gaussian_complex() {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng()), n(rng())};
}

inline std::vector<Complex> random_amplitudes(std::size_t dim) {
  std::vector<Complex> a(dim);
  double norm2 = 0.0;
  for (auto& x : a) {
    x = gaussian_complex();
    norm2 += std::norm(x);
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : a) x *= inv;
  return a;
}

inline StateVector random_state(std::size_t dim, const char* label = "state") {
  return StateVector(random_amplitudes(dim), label);
}

// G G^+ / Tr(G G^+): full-rank mixed state.
inline ComplexMatrix random_density_entries(Eigen::Index n) {
  ComplexMatrix g(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) g(r, c) = gaussian_complex();
  }
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  // Exact Hermitian symmetry with real diagonal.
  ComplexMatrix sym = 0.5 * (rho + rho.adjoint());
  for (Eigen::Index k = 0; k < n; ++k) sym(k, k) = sym(k, k).real();
  const double tr = sym.trace().real();
  for (Eigen::Index k = 0; k < n; ++k) sym(k, k) /= tr;
  return sym;
}

inline DensityMatrix random_density(Eigen::Index n) { return DensityMatrix(random_density_entries(n)); }

inline ComplexMatrix random_unitary(Eigen::Index n) {
  ComplexMatrix g(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) g(r, c) = gaussian_complex();
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  return qr.householderQ() * ComplexMatrix::Identity(n, n);
}

// Entries in [epsilon, 1], log-uniform so that ratios span several decades.
inline RateTable random_rate_table(std::size_t outcomes, std::size_t readings, double epsilon) {
  std::vector<double> v(outcomes * readings);
  for (auto& x : v) x = std::exp(uniform(std::log(epsilon), 0.0));
  return RateTable(outcomes, readings, std::move(v), epsilon);
}

}  // namespace collapse::testing
