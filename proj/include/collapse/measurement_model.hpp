#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "collapse/correspondence.hpp"
#include "collapse/quantum_state.hpp"

namespace collapse {

inline constexpr double kDefaultEpsilon = 1e-4;

/// Rate parameters r(i,j) on the outcome x reading grid, floored at epsilon.
class RateTable {
 public:
  RateTable(std::size_t outcomes, std::size_t readings, std::vector<double> values, double epsilon);

  std::size_t outcomes() const noexcept { return outcomes_; }
  std::size_t readings() const noexcept { return readings_; }
  std::size_t combined_dim() const noexcept { return values_.size(); }
  double epsilon() const noexcept { return epsilon_; }

  double operator()(std::size_t outcome, std::size_t reading) const {
    return values_[outcome * readings_ + reading];
  }
  // Read through the flat index i*J + j.
  double flat(std::size_t r) const { return values_[r]; }
  std::span<const double> flat_values() const noexcept { return values_; }

  // r(k)^2 per flat index: the stationary diagonal of the dissipator.
  std::vector<double> squared() const;

 private:
  std::size_t outcomes_;
  std::size_t readings_;
  std::vector<double> values_;
  double epsilon_;
};

/// Everything needed to set up one measurement run.
class MeasurementModel {
 public:
  MeasurementModel(StateVector sys, StateVector app, CorrespondenceMap correspondence, double gamma,
                   double omega, double epsilon, ComplexMatrix hamiltonian);

  const StateVector& sys() const noexcept { return sys_; }
  const StateVector& app() const noexcept { return app_; }
  const CorrespondenceMap& correspondence() const noexcept { return correspondence_; }
  double gamma() const noexcept { return gamma_; }
  double omega() const noexcept { return omega_; }
  double epsilon() const noexcept { return epsilon_; }
  const ComplexMatrix& hamiltonian() const noexcept { return hamiltonian_; }
  std::size_t combined_dim() const noexcept { return correspondence_.combined_dim(); }

  Probabilities probabilities() const;
  RateTable rates() const;
  DensityMatrix initial_dm() const;
  DensityMatrix target_dm() const;

  MeasurementModel with_gamma(double gamma) const;

 private:
  StateVector sys_;
  StateVector app_;
  CorrespondenceMap correspondence_;
  double gamma_;
  double omega_;
  double epsilon_;
  ComplexMatrix hamiltonian_;
};

Probabilities born_probabilities(const StateVector& sys);

// Aligned entries max(sqrt(p_i * w_ij), epsilon); everything else epsilon.
// Throws ConfigError if epsilon >= the smallest nonzero sqrt(p_i * w_ij).
RateTable born_rate_table(std::span<const double> probs, const CorrespondenceMap& correspondence,
                          double epsilon);

// (E/2)(cos 2a sigma_z + sin 2a sigma_x); (cos a, sin a) is the +E/2 eigenvector.
ComplexMatrix zeeman_hamiltonian(double alpha, double energy_scale);

// Two-level system and pointer prepared as Zeeman eigenstates at alpha_s and
// alpha_a, one-to-one readout, H = H_S x 1 + 1 x H_A with energy scale omega.
MeasurementModel spin_half_scenario(double alpha_s, double alpha_a, double gamma, double omega,
                                    double epsilon = kDefaultEpsilon);

}  // namespace collapse
