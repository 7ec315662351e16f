#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace markovloss {

/// A decoded or true hidden-state sequence. State 0 is the null state.
using StatePath = std::vector<int>;

/// Two-component Gaussian mixture emission:
///   (1 - outlier_prob) * N(main_mean, main_var) + outlier_prob * N(outlier_mean, outlier_var)
struct EmissionModel {
  double main_mean = 0.0;
  double main_var = 1.0;
  double outlier_prob = 0.0;
  double outlier_mean = 0.0;
  double outlier_var = 1.0;

  double log_density(double y) const;
  void validate() const;
};

/// Dense row-major table of per-position log emission likelihoods,
/// rows = positions, cols = states. Entries may be -inf.
struct LogLikelihoods {
  std::size_t length = 0;
  std::size_t num_states = 0;
  std::vector<double> values;

  LogLikelihoods() = default;
  LogLikelihoods(std::size_t n, std::size_t k) : length(n), num_states(k), values(n * k, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * num_states + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * num_states + j]; }
};

struct HmmSpec {
  std::vector<double> initial;
  /// Row-major (S+1)x(S+1); transitions[j * K + k] = P(x_i = k | x_{i-1} = j).
  std::vector<double> transitions;
  std::vector<EmissionModel> emissions;

  std::size_t num_states() const { return initial.size(); }
  double transition(std::size_t from, std::size_t to) const {
    return transitions[from * num_states() + to];
  }

  /// Throws ModelError unless every invariant holds.
  void validate() const;

  /// Evaluates every emission density at every observation.
  LogLikelihoods log_likelihoods(std::span<const double> observations) const;
};

/// Unary and pairwise posterior marginals of one sequence.
struct PosteriorMarginals {
  std::size_t length = 0;
  std::size_t num_states = 0;
  std::vector<double> unary;     // length x K
  std::vector<double> pairwise;  // (length-1) x K x K
  double log_evidence = 0.0;

  PosteriorMarginals() = default;
  PosteriorMarginals(std::size_t n, std::size_t k)
      : length(n), num_states(k), unary(n * k, 0.0),
        pairwise(n > 0 ? (n - 1) * k * k : 0, 0.0) {}

  std::size_t boundaries() const { return length > 0 ? length - 1 : 0; }

  double& unary_at(std::size_t i, std::size_t j) { return unary[i * num_states + j]; }
  double unary_at(std::size_t i, std::size_t j) const { return unary[i * num_states + j]; }

  double& pair_at(std::size_t i, std::size_t j, std::size_t k) {
    return pairwise[(i * num_states + j) * num_states + k];
  }
  double pair_at(std::size_t i, std::size_t j, std::size_t k) const {
    return pairwise[(i * num_states + j) * num_states + k];
  }

  /// The K*K slab for boundary i (positions i, i+1), pair index j*K+k.
  std::span<const double> pair_slab(std::size_t i) const {
    const std::size_t kk = num_states * num_states;
    return {pairwise.data() + i * kk, kk};
  }

  /// Largest absolute violation of the sum-to-one and marginalization
  /// constraints. Zero for exact marginals.
  double max_consistency_error() const;
};

/// Scaled forward-backward on a Gaussian-mixture HMM.
PosteriorMarginals forward_backward(const HmmSpec& model, std::span<const double> observations);

/// Scaled forward-backward given precomputed log emission likelihoods. Only
/// `model.initial` and `model.transitions` are consulted.
PosteriorMarginals forward_backward(const HmmSpec& model, const LogLikelihoods& loglik);

/// Maximum a posteriori path. Ties prefer the lower state index.
StatePath viterbi(const HmmSpec& model, std::span<const double> observations);
StatePath viterbi(const HmmSpec& model, const LogLikelihoods& loglik);

/// log[nu(x1) prod T(x_{i-1}, x_i) prod p(y_i | x_i)]; -inf if any factor is zero.
double log_joint(const HmmSpec& model, const StatePath& path, std::span<const double> observations);
double log_joint(const HmmSpec& model, const StatePath& path, const LogLikelihoods& loglik);

/// Two-state model used by the synthetic study: means {0, 1}, unit variance,
/// switch probabilities 0.01 (0 -> 1) and 0.05 (1 -> 0), uniform start, and
/// outlier contamination `outlier_prob` from N(0, 9).
HmmSpec two_state_cnv_model(double outlier_prob = 0.01);

/// Same model with the outlier component removed from every emission.
HmmSpec without_outliers(HmmSpec model);

}  // namespace markovloss
