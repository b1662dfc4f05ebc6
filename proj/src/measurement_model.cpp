#include "collapse/measurement_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "collapse/errors.hpp"

namespace collapse {

RateTable::RateTable(std::size_t outcomes, std::size_t readings, std::vector<double> values,
                     double epsilon)
    : outcomes_(outcomes), readings_(readings), values_(std::move(values)), epsilon_(epsilon) {
  if (values_.size() != outcomes_ * readings_ || values_.empty()) {
    throw ValidationError("rate table: expected " + std::to_string(outcomes_ * readings_) +
                          " entries, got " + std::to_string(values_.size()));
  }
  if (!(epsilon_ > 0.0)) throw ValidationError("rate table: floor must be positive");
  for (double v : values_) {
    if (!(v >= epsilon_) || !std::isfinite(v)) {
      throw ValidationError("rate table: entry " + std::to_string(v) + " below the floor " +
                            std::to_string(epsilon_));
    }
  }
}

std::vector<double> RateTable::squared() const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(), [](double r) { return r * r; });
  return out;
}

Probabilities born_probabilities(const StateVector& sys) {
  Probabilities p(sys.dim());
  for (std::size_t i = 0; i < sys.dim(); ++i) p[i] = std::norm(sys[i]);
  return p;
}

RateTable born_rate_table(std::span<const double> probs, const CorrespondenceMap& correspondence,
                          double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("rate floor epsilon must be positive");
  if (probs.size() != correspondence.outcomes()) {
    throw ValidationError("born_rate_table: " + std::to_string(probs.size()) +
                          " probabilities for " + std::to_string(correspondence.outcomes()) +
                          " outcomes");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw ValidationError("born_rate_table: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw ValidationError("born_rate_table: probabilities sum to " + std::to_string(sum));
  }

  const std::size_t readings = correspondence.readings();
  std::vector<double> values(correspondence.combined_dim(), epsilon);
  double smallest_physical = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto owned = correspondence.readings_of(i);
    const auto weights = correspondence.weights_of(i);
    for (std::size_t k = 0; k < owned.size(); ++k) {
      const double rate = std::sqrt(probs[i] * weights[k]);
      if (rate > 0.0) smallest_physical = std::min(smallest_physical, rate);
      values[i * readings + owned[k]] = std::max(rate, epsilon);
    }
  }
  if (epsilon >= smallest_physical) {
    throw ConfigError("rate floor epsilon = " + std::to_string(epsilon) +
                      " is not below the smallest physical rate " +
                      std::to_string(smallest_physical));
  }
  return RateTable(correspondence.outcomes(), readings, std::move(values), epsilon);
}

ComplexMatrix zeeman_hamiltonian(double alpha, double energy_scale) {
  if (!(energy_scale > 0.0)) throw ValidationError("zeeman_hamiltonian: energy scale must be positive");
  const double c = std::cos(2.0 * alpha);
  const double s = std::sin(2.0 * alpha);
  ComplexMatrix h(2, 2);
  h << c, s,
       s, -c;
  return 0.5 * energy_scale * h;
}

MeasurementModel::MeasurementModel(StateVector sys, StateVector app,
                                   CorrespondenceMap correspondence, double gamma, double omega,
                                   double epsilon, ComplexMatrix hamiltonian)
    : sys_(std::move(sys)),
      app_(std::move(app)),
      correspondence_(std::move(correspondence)),
      gamma_(gamma),
      omega_(omega),
      epsilon_(epsilon),
      hamiltonian_(std::move(hamiltonian)) {
  if (!(gamma_ > 0.0)) throw ConfigError("gamma must be positive");
  if (!(omega_ > 0.0)) throw ConfigError("omega must be positive");
  if (!(epsilon_ > 0.0)) throw ConfigError("epsilon must be positive");
  if (sys_.dim() != correspondence_.outcomes()) {
    throw ConfigError("system dimension " + std::to_string(sys_.dim()) +
                      " does not match the correspondence outcome count " +
                      std::to_string(correspondence_.outcomes()));
  }
  if (app_.dim() != correspondence_.readings()) {
    throw ConfigError("apparatus dimension " + std::to_string(app_.dim()) +
                      " does not match the correspondence reading count " +
                      std::to_string(correspondence_.readings()));
  }
  const auto n = static_cast<Eigen::Index>(combined_dim());
  if (hamiltonian_.rows() != n || hamiltonian_.cols() != n) {
    throw ConfigError("hamiltonian must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (max_hermiticity_error(hamiltonian_) > 1e-12) {
    throw ConfigError("hamiltonian is not Hermitian");
  }
  // Validates the floor against the physical rates.
  (void)rates();
}

Probabilities MeasurementModel::probabilities() const { return born_probabilities(sys_); }

RateTable MeasurementModel::rates() const {
  return born_rate_table(probabilities(), correspondence_, epsilon_);
}

DensityMatrix MeasurementModel::initial_dm() const { return product_state_dm(sys_, app_); }

DensityMatrix MeasurementModel::target_dm() const {
  return aligned_dm(probabilities(), correspondence_);
}

MeasurementModel MeasurementModel::with_gamma(double gamma) const {
  return MeasurementModel(sys_, app_, correspondence_, gamma, omega_, epsilon_, hamiltonian_);
}

MeasurementModel spin_half_scenario(double alpha_s, double alpha_a, double gamma, double omega,
                                    double epsilon) {
  if (!(omega > 0.0)) throw ConfigError("omega must be positive");
  StateVector sys({std::cos(alpha_s), std::sin(alpha_s)}, "system");
  StateVector app({std::cos(alpha_a), std::sin(alpha_a)}, "apparatus");
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix hs = zeeman_hamiltonian(alpha_s, omega);
  const ComplexMatrix ha = zeeman_hamiltonian(alpha_a, omega);
  ComplexMatrix h = ComplexMatrix::Zero(4, 4);
  for (Eigen::Index a = 0; a < 2; ++a) {
    for (Eigen::Index b = 0; b < 2; ++b) {
      h.block(a * 2, b * 2, 2, 2) += hs(a, b) * id + id(a, b) * ha;
    }
  }
  return MeasurementModel(std::move(sys), std::move(app), CorrespondenceMap::one_to_one(2), gamma,
                          omega, epsilon, std::move(h));
}

}  // namespace collapse
