#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace collapse {

/// Which pointer readings stand for which observable outcome.
///
/// Outcome i owns a non-empty set of readings; reading sets are disjoint.
/// Each owned reading carries a weight, and the weights of one outcome sum
/// to 1 (uniform 1/R unless given). The combined basis |i,j> is addressed by
/// the flat index i*J + j (row-major, 0-based) everywhere in the library.
class CorrespondenceMap {
 public:
  static CorrespondenceMap one_to_one(std::size_t outcomes);

  CorrespondenceMap(std::size_t outcomes, std::size_t readings,
                    std::vector<std::vector<std::size_t>> assignment,
                    std::vector<std::vector<double>> weights = {});

  std::size_t outcomes() const noexcept { return outcomes_; }
  std::size_t readings() const noexcept { return readings_; }
  std::size_t combined_dim() const noexcept { return outcomes_ * readings_; }

  std::span<const std::size_t> readings_of(std::size_t outcome) const;
  std::span<const double> weights_of(std::size_t outcome) const;

  // Weight of reading j within outcome i, or nullopt when j is not assigned to i.
  std::optional<double> weight(std::size_t outcome, std::size_t reading) const;

  bool is_one_to_one() const noexcept;

  std::size_t flat_index(std::size_t outcome, std::size_t reading) const noexcept {
    return outcome * readings_ + reading;
  }

 private:
  std::size_t outcomes_;
  std::size_t readings_;
  std::vector<std::vector<std::size_t>> assignment_;
  std::vector<std::vector<double>> weights_;
};

}  // namespace collapse
