#include "collapse/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "collapse/errors.hpp"

namespace collapse {

CorrespondenceMap CorrespondenceMap::one_to_one(std::size_t outcomes) {
  std::vector<std::vector<std::size_t>> assignment(outcomes);
  for (std::size_t i = 0; i < outcomes; ++i) assignment[i] = {i};
  return CorrespondenceMap(outcomes, outcomes, std::move(assignment));
}

CorrespondenceMap::CorrespondenceMap(std::size_t outcomes, std::size_t readings,
                                     std::vector<std::vector<std::size_t>> assignment,
                                     std::vector<std::vector<double>> weights)
    : outcomes_(outcomes),
      readings_(readings),
      assignment_(std::move(assignment)),
      weights_(std::move(weights)) {
  if (outcomes_ == 0 || readings_ == 0) {
    throw ValidationError("correspondence: outcome and reading counts must be positive");
  }
  if (assignment_.size() != outcomes_) {
    throw ValidationError("correspondence: expected " + std::to_string(outcomes_) +
                          " reading sets, got " + std::to_string(assignment_.size()));
  }
  std::vector<bool> used(readings_, false);
  for (std::size_t i = 0; i < outcomes_; ++i) {
    if (assignment_[i].empty()) {
      throw ValidationError("correspondence: outcome " + std::to_string(i) + " has no readings");
    }
    for (std::size_t j : assignment_[i]) {
      if (j >= readings_) {
        throw ValidationError("correspondence: reading " + std::to_string(j) + " out of range");
      }
      if (used[j]) {
        throw ValidationError("correspondence: reading " + std::to_string(j) +
                              " assigned to more than one outcome");
      }
      used[j] = true;
    }
  }

  if (weights_.empty()) {
    weights_.resize(outcomes_);
    for (std::size_t i = 0; i < outcomes_; ++i) {
      weights_[i].assign(assignment_[i].size(), 1.0 / static_cast<double>(assignment_[i].size()));
    }
    return;
  }
  if (weights_.size() != outcomes_) {
    throw ValidationError("correspondence: weights must be given for every outcome");
  }
  for (std::size_t i = 0; i < outcomes_; ++i) {
    if (weights_[i].size() != assignment_[i].size()) {
      throw ValidationError("correspondence: outcome " + std::to_string(i) +
                            " has mismatched reading and weight counts");
    }
    double sum = 0.0;
    for (double w : weights_[i]) {
      if (!(w > 0.0)) {
        throw ValidationError("correspondence: reading weights must be positive");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ValidationError("correspondence: weights of outcome " + std::to_string(i) +
                            " sum to " + std::to_string(sum) + ", expected 1");
    }
  }
}

std::span<const std::size_t> CorrespondenceMap::readings_of(std::size_t outcome) const {
  return assignment_.at(outcome);
}

std::span<const double> CorrespondenceMap::weights_of(std::size_t outcome) const {
  return weights_.at(outcome);
}

std::optional<double> CorrespondenceMap::weight(std::size_t outcome, std::size_t reading) const {
  const auto& set = assignment_.at(outcome);
  auto it = std::find(set.begin(), set.end(), reading);
  if (it == set.end()) return std::nullopt;
  return weights_[outcome][static_cast<std::size_t>(it - set.begin())];
}

bool CorrespondenceMap::is_one_to_one() const noexcept {
  if (outcomes_ != readings_) return false;
  for (std::size_t i = 0; i < outcomes_; ++i) {
    if (assignment_[i].size() != 1 || assignment_[i][0] != i) return false;
  }
  return true;
}

}  // namespace collapse
