#pragma once

#include <cstddef>
#include <vector>

#include "markovloss/hmm.hpp"
#include "markovloss/loss.hpp"

namespace markovloss {

struct DecodeResult {
  StatePath path;
  double expected_loss = 0.0;
  /// Expected pair loss of the chosen pair at each of the n-1 boundaries.
  std::vector<double> per_boundary_loss;
};

/// Expected loss of every predicted pair at every boundary:
/// table[i * K^2 + p] = sum_t loss(p | t) * P(pair t at boundary i).
/// Each entry is summed in a fixed order.
std::vector<double> boundary_loss_table(const PosteriorMarginals& marginals, const LossMatrix& loss);

/// Minimum-expected-loss path under a pairwise loss, by dynamic programming
/// over boundaries. O(K^4 n) to build the boundary table, O(K^2 n) to decode.
/// Ties go to the lowest state index. A length-1 sequence decodes to the
/// unary argmax with zero loss.
DecodeResult decode_markov_loss(const PosteriorMarginals& marginals, const LossMatrix& loss);

/// Per-position minimum-expected-loss call under the generalized marginal
/// loss (fpc for a non-null call on null truth, fnc for a null call on
/// non-null truth, fpc for a wrong non-null call). Ties go to the null state.
StatePath decode_marginal(const PosteriorMarginals& marginals, double fpc, double fnc);

struct OracleResult {
  DecodeResult best;
  /// Number of paths whose expected loss ties the minimum (within 1e-12 relative).
  std::size_t minimizers = 0;

  bool unique() const { return minimizers == 1; }
};

/// Largest state space brute_force_mel will enumerate.
inline constexpr double kBruteForceLimit = 1e6;

/// Exhaustive search over all K^n paths; returns the lexicographically
/// smallest minimizer. Throws CapacityError beyond kBruteForceLimit paths.
OracleResult brute_force_mel_with_ties(const PosteriorMarginals& marginals, const LossMatrix& loss);

inline DecodeResult brute_force_mel(const PosteriorMarginals& marginals, const LossMatrix& loss) {
  return brute_force_mel_with_ties(marginals, loss).best;
}

}  // namespace markovloss
