#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "collapse/measurement_model.hpp"
#include "collapse/quantum_state.hpp"

namespace collapse {

struct JumpTerm {
  double weight;       // inverse time
  ComplexMatrix jump;
};

/// Weighted jump-operator family sum_n g_n (L rho L^+ - 1/2 {L^+ L, rho}).
///
/// The constructor precomputes sum_n g_n L^+ L and recognizes matrix-unit
/// jumps |a><b| so that applying the family stays O(N^2) per unit term.
class DissipatorSpec {
 public:
  DissipatorSpec(Eigen::Index dim, std::vector<JumpTerm> terms);

  Eigen::Index dim() const noexcept { return dim_; }
  const std::vector<JumpTerm>& terms() const noexcept { return terms_; }

  // Largest single weight; bounds the explicit step size.
  double max_weight() const noexcept { return max_weight_; }

  // out = D(rho). `rho` need not be a valid density matrix (RK stages are not).
  void apply(const ComplexMatrix& rho, ComplexMatrix& out) const;

 private:
  Eigen::Index dim_;
  std::vector<JumpTerm> terms_;
  std::vector<std::optional<std::pair<Eigen::Index, Eigen::Index>>> unit_;
  ComplexMatrix loss_;
  double max_weight_ = 0.0;
};

// One term per ordered flat pair (r, s), r != s: weight G*W*r(r)/r(s), jump |r><s|.
DissipatorSpec lindblad_jump_family(const RateTable& rates, double gamma, double omega);

ComplexMatrix apply_dissipator(const DissipatorSpec& spec, const DensityMatrix& rho);
ComplexMatrix apply_dissipator(const DissipatorSpec& spec, const ComplexMatrix& rho);

// Element-wise action of the family above without building any operator.
ComplexMatrix apply_dissipator_closed_form(const RateTable& rates, double gamma, double omega,
                                           const DensityMatrix& rho);
ComplexMatrix apply_dissipator_closed_form(const RateTable& rates, double gamma, double omega,
                                           const ComplexMatrix& rho);

}  // namespace collapse
