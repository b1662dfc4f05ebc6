#include "collapse/dissipator.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "collapse/errors.hpp"

namespace collapse {

namespace {

// (row, col) of the single unit entry, if `m` is a matrix unit.
std::optional<std::pair<Eigen::Index, Eigen::Index>> as_matrix_unit(const ComplexMatrix& m) {
  std::optional<std::pair<Eigen::Index, Eigen::Index>> found;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const Complex v = m(r, c);
      if (v == Complex(0.0, 0.0)) continue;
      if (v != Complex(1.0, 0.0) || found) return std::nullopt;
      found = std::make_pair(r, c);
    }
  }
  return found;
}

void check_dims(Eigen::Index expected, const ComplexMatrix& rho, const char* who) {
  if (rho.rows() != expected || rho.cols() != expected) {
    throw ValidationError(std::string(who) + ": dimension mismatch (expected " +
                          std::to_string(expected) + ", got " + std::to_string(rho.rows()) + ")");
  }
}

}  // namespace

DissipatorSpec::DissipatorSpec(Eigen::Index dim, std::vector<JumpTerm> terms)
    : dim_(dim), terms_(std::move(terms)), loss_(ComplexMatrix::Zero(dim, dim)) {
  if (dim_ <= 0) throw ValidationError("dissipator: dimension must be positive");
  unit_.reserve(terms_.size());
  for (const JumpTerm& t : terms_) {
    if (t.jump.rows() != dim_ || t.jump.cols() != dim_) {
      throw ValidationError("dissipator: jump operator has wrong dimension");
    }
    if (!(t.weight >= 0.0)) throw ValidationError("dissipator: weights must be non-negative");
    unit_.push_back(as_matrix_unit(t.jump));
    if (const auto& u = unit_.back()) {
      loss_(u->second, u->second) += t.weight;
    } else {
      loss_.noalias() += t.weight * (t.jump.adjoint() * t.jump);
    }
    max_weight_ = std::max(max_weight_, t.weight);
  }
}

void DissipatorSpec::apply(const ComplexMatrix& rho, ComplexMatrix& out) const {
  check_dims(dim_, rho, "apply_dissipator");
  out.resize(dim_, dim_);
  out.noalias() = -0.5 * (loss_ * rho);
  out.noalias() -= 0.5 * (rho * loss_);
  for (std::size_t n = 0; n < terms_.size(); ++n) {
    const JumpTerm& t = terms_[n];
    if (const auto& u = unit_[n]) {
      // |a><b| rho |b><a| = rho_bb |a><a|
      out(u->first, u->first) += t.weight * rho(u->second, u->second);
    } else {
      out.noalias() += t.weight * (t.jump * rho * t.jump.adjoint());
    }
  }
}

DissipatorSpec lindblad_jump_family(const RateTable& rates, double gamma, double omega) {
  if (!(gamma > 0.0) || !(omega > 0.0)) {
    throw ValidationError("lindblad_jump_family: gamma and omega must be positive");
  }
  const auto n = static_cast<Eigen::Index>(rates.combined_dim());
  for (double r : rates.flat_values()) {
    if (!(r > 0.0)) throw ValidationError("lindblad_jump_family: rate entries must be positive");
  }
  std::vector<JumpTerm> terms;
  terms.reserve(static_cast<std::size_t>(n * n - n));
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = 0; s < n; ++s) {
      if (r == s) continue;
      ComplexMatrix jump = ComplexMatrix::Zero(n, n);
      jump(r, s) = 1.0;
      const double weight = gamma * omega * rates.flat(static_cast<std::size_t>(r)) /
                            rates.flat(static_cast<std::size_t>(s));
      terms.push_back({weight, std::move(jump)});
    }
  }
  return DissipatorSpec(n, std::move(terms));
}

ComplexMatrix apply_dissipator(const DissipatorSpec& spec, const ComplexMatrix& rho) {
  ComplexMatrix out;
  spec.apply(rho, out);
  return out;
}

ComplexMatrix apply_dissipator(const DissipatorSpec& spec, const DensityMatrix& rho) {
  return apply_dissipator(spec, rho.matrix());
}

ComplexMatrix apply_dissipator_closed_form(const RateTable& rates, double gamma, double omega,
                                           const ComplexMatrix& rho) {
  const auto n = static_cast<Eigen::Index>(rates.combined_dim());
  check_dims(n, rho, "apply_dissipator_closed_form");
  const auto r = rates.flat_values();
  const double rate_sum = std::accumulate(r.begin(), r.end(), 0.0);
  double weighted_pop = 0.0;  // sum_k rho_kk / r_k
  for (Eigen::Index k = 0; k < n; ++k) weighted_pop += rho(k, k).real() / r[k];

  // The sums skip the element's own pair: a self-jump |a><a| is not in the family.
  ComplexMatrix out(n, n);
  const double scale = gamma * omega;
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a == b) {
        const double gain = r[a] * (weighted_pop - rho(a, a).real() / r[a]);
        const double loss = rho(a, a).real() / r[a] * (rate_sum - r[a]);
        out(a, a) = scale * (gain - loss);
      } else {
        const double decay = 0.5 * ((rate_sum - r[a]) / r[a] + (rate_sum - r[b]) / r[b]);
        out(a, b) = -scale * decay * rho(a, b);
      }
    }
  }
  return out;
}

ComplexMatrix apply_dissipator_closed_form(const RateTable& rates, double gamma, double omega,
                                           const DensityMatrix& rho) {
  return apply_dissipator_closed_form(rates, gamma, omega, rho.matrix());
}

}  // namespace collapse
