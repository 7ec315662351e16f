#include "markovloss/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "markovloss/errors.hpp"

namespace markovloss {
namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_pdf(double y, double mean, double var) {
  const double d = y - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

void check_probability_vector(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw ModelError(what + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kStochasticTol) {
    throw ModelError(what + " sums to " + std::to_string(sum) + ", expected 1");
  }
}

void validate_chain(const HmmSpec& model) {
  const std::size_t k = model.num_states();
  if (k < 2) throw ModelError("model needs at least two states");
  check_probability_vector(model.initial, "initial distribution");
  if (model.transitions.size() != k * k) throw ModelError("transition matrix must be (S+1)x(S+1)");
  for (std::size_t j = 0; j < k; ++j) {
    check_probability_vector(std::span(model.transitions).subspan(j * k, k),
                             "transition row " + std::to_string(j));
  }
}

void validate_loglik(const HmmSpec& model, const LogLikelihoods& ll) {
  if (ll.length == 0) throw InputError("observation sequence is empty");
  if (ll.num_states != model.num_states()) throw InputError("likelihood table has wrong number of states");
  if (ll.values.size() != ll.length * ll.num_states) throw InputError("likelihood table has wrong size");
  for (double v : ll.values) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw InputError("log-likelihood table contains NaN or +inf");
    }
  }
}

std::vector<double> log_transitions(const HmmSpec& model) {
  std::vector<double> out(model.transitions.size());
  std::transform(model.transitions.begin(), model.transitions.end(), out.begin(),
                 [](double p) { return p > 0.0 ? std::log(p) : kNegInf; });
  return out;
}

}  // namespace

double EmissionModel::log_density(double y) const {
  const double main = log_normal_pdf(y, main_mean, main_var);
  if (outlier_prob <= 0.0) return main;
  const double a = std::log1p(-outlier_prob) + main;
  const double b = std::log(outlier_prob) + log_normal_pdf(y, outlier_mean, outlier_var);
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void EmissionModel::validate() const {
  if (!std::isfinite(main_mean) || !std::isfinite(outlier_mean)) throw ModelError("emission mean must be finite");
  if (!(main_var > 0.0) || !std::isfinite(main_var)) throw ModelError("emission variance must be positive");
  if (!(outlier_prob >= 0.0 && outlier_prob < 1.0)) throw ModelError("outlier probability must lie in [0, 1)");
  if (!(outlier_var > 0.0) || !std::isfinite(outlier_var)) throw ModelError("outlier variance must be positive");
}

void HmmSpec::validate() const {
  validate_chain(*this);
  if (emissions.size() != num_states()) throw ModelError("need one emission model per state");
  for (const auto& e : emissions) e.validate();
}

LogLikelihoods HmmSpec::log_likelihoods(std::span<const double> observations) const {
  validate();
  if (observations.empty()) throw InputError("observation sequence is empty");
  const std::size_t k = num_states();
  LogLikelihoods ll(observations.size(), k);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const double y = observations[i];
    if (!std::isfinite(y)) throw InputError("observation " + std::to_string(i + 1) + " is not finite");
    for (std::size_t j = 0; j < k; ++j) ll(i, j) = emissions[j].log_density(y);
  }
  return ll;
}

double PosteriorMarginals::max_consistency_error() const {
  const std::size_t k = num_states;
  double worst = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += unary_at(i, j);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  for (std::size_t i = 0; i + 1 < length; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double row = 0.0;
      double col = 0.0;
      for (std::size_t m = 0; m < k; ++m) {
        row += pair_at(i, j, m);
        col += pair_at(i, m, j);
      }
      total += row;
      worst = std::max(worst, std::abs(row - unary_at(i, j)));
      worst = std::max(worst, std::abs(col - unary_at(i + 1, j)));
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

PosteriorMarginals forward_backward(const HmmSpec& model, std::span<const double> observations) {
  return forward_backward(model, model.log_likelihoods(observations));
}

PosteriorMarginals forward_backward(const HmmSpec& model, const LogLikelihoods& loglik) {
  validate_chain(model);
  validate_loglik(model, loglik);
  const std::size_t n = loglik.length;
  const std::size_t k = model.num_states();

  // Emissions rescaled per position so the largest is exactly 1.
  std::vector<double> emit(n * k);
  std::vector<double> emit_shift(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = kNegInf;
    for (std::size_t j = 0; j < k; ++j) mx = std::max(mx, loglik(i, j));
    if (mx == kNegInf) {
      throw ConsistencyError("observation " + std::to_string(i + 1) + " has zero likelihood under every state");
    }
    emit_shift[i] = mx;
    for (std::size_t j = 0; j < k; ++j) emit[i * k + j] = std::exp(loglik(i, j) - mx);
  }

  std::vector<double> alpha(n * k);
  std::vector<double> scale(n);
  double log_evidence = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double c = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
      double prior = 0.0;
      if (i == 0) {
        prior = model.initial[m];
      } else {
        for (std::size_t j = 0; j < k; ++j) prior += alpha[(i - 1) * k + j] * model.transition(j, m);
      }
      alpha[i * k + m] = prior * emit[i * k + m];
      c += alpha[i * k + m];
    }
    if (!(c > 0.0)) {
      throw ConsistencyError("observations have zero probability under the model (position " +
                             std::to_string(i + 1) + ")");
    }
    for (std::size_t m = 0; m < k; ++m) alpha[i * k + m] /= c;
    scale[i] = c;
    log_evidence += std::log(c) + emit_shift[i];
  }

  std::vector<double> beta(n * k, 1.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t m = 0; m < k; ++m) {
        s += model.transition(j, m) * emit[(i + 1) * k + m] * beta[(i + 1) * k + m];
      }
      beta[i * k + j] = s / scale[i + 1];
    }
  }

  PosteriorMarginals out(n, k);
  out.log_evidence = log_evidence;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out.unary_at(i, j) = alpha[i * k + j] * beta[i * k + j];
      s += out.unary_at(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) out.unary_at(i, j) /= s;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t m = 0; m < k; ++m) {
        const double v = alpha[i * k + j] * model.transition(j, m) * emit[(i + 1) * k + m] *
                         beta[(i + 1) * k + m] / scale[i + 1];
        out.pair_at(i, j, m) = v;
        s += v;
      }
    }
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t m = 0; m < k; ++m) out.pair_at(i, j, m) /= s;
  }
  return out;
}

StatePath viterbi(const HmmSpec& model, std::span<const double> observations) {
  return viterbi(model, model.log_likelihoods(observations));
}

StatePath viterbi(const HmmSpec& model, const LogLikelihoods& loglik) {
  validate_chain(model);
  validate_loglik(model, loglik);
  const std::size_t n = loglik.length;
  const std::size_t k = model.num_states();
  const std::vector<double> log_t = log_transitions(model);

  std::vector<double> score(k);
  std::vector<double> next(k);
  std::vector<int> back(n * k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    score[j] = (model.initial[j] > 0.0 ? std::log(model.initial[j]) : kNegInf) + loglik(0, j);
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t m = 0; m < k; ++m) {
      double best = kNegInf;
      int arg = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const double cand = score[j] + log_t[j * k + m];
        if (cand > best) {
          best = cand;
          arg = static_cast<int>(j);
        }
      }
      next[m] = best + loglik(i, m);
      back[i * k + m] = arg;
    }
    std::swap(score, next);
  }

  double best = kNegInf;
  int last = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (score[j] > best) {
      best = score[j];
      last = static_cast<int>(j);
    }
  }
  if (best == kNegInf) throw ConsistencyError("every state path has zero probability");

  StatePath path(n);
  path[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) path[i - 1] = back[i * k + static_cast<std::size_t>(path[i])];
  return path;
}

double log_joint(const HmmSpec& model, const StatePath& path, std::span<const double> observations) {
  if (path.size() != observations.size()) throw InputError("path and observations differ in length");
  return log_joint(model, path, model.log_likelihoods(observations));
}

double log_joint(const HmmSpec& model, const StatePath& path, const LogLikelihoods& loglik) {
  validate_chain(model);
  validate_loglik(model, loglik);
  if (path.size() != loglik.length) throw InputError("path and observations differ in length");
  const std::size_t k = model.num_states();
  for (int s : path) {
    if (s < 0 || static_cast<std::size_t>(s) >= k) throw InputError("path state out of range");
  }
  const auto at = [](int s) { return static_cast<std::size_t>(s); };

  double p0 = model.initial[at(path[0])];
  if (p0 <= 0.0) return kNegInf;
  double total = std::log(p0) + loglik(0, at(path[0]));
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double t = model.transition(at(path[i - 1]), at(path[i]));
    if (t <= 0.0) return kNegInf;
    total += std::log(t) + loglik(i, at(path[i]));
  }
  return total;
}

HmmSpec two_state_cnv_model(double outlier_prob) {
  constexpr double kGain = 0.01;  // 0 -> 1
  constexpr double kLoss = 0.05;  // 1 -> 0
  HmmSpec m;
  m.initial = {0.5, 0.5};
  m.transitions = {1.0 - kGain, kGain, kLoss, 1.0 - kLoss};
  m.emissions = {
      EmissionModel{0.0, 1.0, outlier_prob, 0.0, 9.0},
      EmissionModel{1.0, 1.0, outlier_prob, 0.0, 9.0},
  };
  return m;
}

HmmSpec without_outliers(HmmSpec model) {
  for (auto& e : model.emissions) e.outlier_prob = 0.0;
  return model;
}

}  // namespace markovloss
