#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "markovloss/hmm.hpp"

namespace markovloss {

/// Costs of the six error classes of a pairwise loss, plus the cost of
/// calling the wrong non-null state when there are several.
struct CostSet {
  double tp = 0.0;
  double fpc = 1.0;
  double fnc = 1.0;
  double fpt = 1.0;
  double fnt = 1.0;
  double dft = 1.0;
  std::optional<double> mc;  // defaults to fpc

  double miscall() const { return mc.value_or(fpc); }

  /// Throws InputError on negative or non-finite costs.
  void validate() const;

  /// Soft design checks (dft should dominate fpt and fnt).
  std::vector<std::string> warnings() const;

  CostSet scaled(double factor) const;
};

/// Pairwise loss l(pred pair | truth pair). Pairs are indexed j * K + k for
/// the ordered pair (j, k); entries are stored pred-pair-major.
class LossMatrix {
 public:
  LossMatrix() = default;

  /// Wraps an explicit (K^2 x K^2) table after validating shape and entries.
  static LossMatrix from_entries(std::size_t num_states, std::vector<double> entries);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_pairs() const { return num_states_ * num_states_; }

  double at(std::size_t pred_pair, std::size_t truth_pair) const {
    return entries_[pred_pair * num_pairs() + truth_pair];
  }
  double at(int pred_from, int pred_to, int truth_from, int truth_to) const {
    const auto k = num_states_;
    return at(static_cast<std::size_t>(pred_from) * k + static_cast<std::size_t>(pred_to),
              static_cast<std::size_t>(truth_from) * k + static_cast<std::size_t>(truth_to));
  }

  const std::vector<double>& entries() const { return entries_; }

  LossMatrix scaled(double factor) const;

 private:
  LossMatrix(std::size_t k, std::vector<double> entries) : num_states_(k), entries_(std::move(entries)) {}

  std::size_t num_states_ = 0;
  std::vector<double> entries_;
};

/// The 4x4 binary pair-loss table. Each off-diagonal cell is a transition
/// term plus a call term charged on the second element of the pair.
LossMatrix build_binary_loss_matrix(const CostSet& costs);

/// The same decomposition over states 0..num_states-1. Distinct non-null
/// calls cost `mc`; two transitioning pairs that differ cost `dft`.
LossMatrix build_multistate_loss_matrix(const CostSet& costs, std::size_t num_states);

/// Cost set with all transition costs zero: the per-position loss embedded
/// in the pairwise machinery.
CostSet marginal_costs(double fpc, double fnc);

/// Posterior expectation of the summed pair loss of `prediction`.
double expected_loss(const StatePath& prediction, const PosteriorMarginals& marginals, const LossMatrix& loss);

}  // namespace markovloss
