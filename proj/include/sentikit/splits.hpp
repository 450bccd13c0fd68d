#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sentikit/random.hpp"
#include "sentikit/types.hpp"

namespace sentikit {

struct SplitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ClassTooSmall : SplitError {
  explicit ClassTooSmall(Polarity p)
      : SplitError("split: class '" + std::string(to_string(p)) + "' has fewer than 2 examples") {}
};
struct TooFewExamplesPerClass : SplitError {
  TooFewExamplesPerClass(Polarity p, int folds)
      : SplitError("folds: class '" + std::string(to_string(p)) + "' has fewer than " +
                   std::to_string(folds) + " examples") {}
};

/// Stratified fold assignment: shuffles each class independently (seeded) and
/// deals examples round-robin, so per-fold class counts differ by at most one.
/// Every present class must have at least `folds` examples.
inline std::vector<int> stratified_fold_assignment(std::span<const Polarity> labels, int folds,
                                                   std::uint64_t seed) {
  if (folds < 2) throw SplitError("folds must be >= 2");
  std::array<std::vector<std::size_t>, 3> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[index_of(labels[i])].push_back(i);

  SplitMix64 rng(seed);
  std::vector<int> fold_of(labels.size(), -1);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < static_cast<std::size_t>(folds))
      throw TooFewExamplesPerClass(static_cast<Polarity>(c), folds);
    shuffle(members, rng);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold_of[members[i]] = static_cast<int>((i + c) % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified train/test partition: per-class counts in train land within one
/// example of train_fraction * class size, and both sides keep every class.
inline SplitIndices stratified_split_indices(std::span<const Polarity> labels,
                                             double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw SplitError("train_fraction must be in (0, 1)");
  std::array<std::vector<std::size_t>, 3> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[index_of(labels[i])].push_back(i);

  SplitMix64 rng(seed);
  SplitIndices split;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < 2) throw ClassTooSmall(static_cast<Polarity>(c));
    shuffle(members, rng);
    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(members.size())));
    n_train = std::min(std::max<std::size_t>(n_train, 1), members.size() - 1);
    for (std::size_t i = 0; i < members.size(); ++i)
      (i < n_train ? split.train : split.test).push_back(members[i]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace sentikit
