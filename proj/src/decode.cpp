#include "markovloss/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "markovloss/errors.hpp"

namespace markovloss {
namespace {

void check_inputs(const PosteriorMarginals& marginals, const LossMatrix& loss) {
  if (marginals.length == 0) throw InputError("marginals are empty");
  if (loss.num_states() != marginals.num_states) throw InputError("loss matrix state count does not match marginals");
  const std::size_t k = marginals.num_states;
  if (marginals.unary.size() != marginals.length * k ||
      marginals.pairwise.size() != marginals.boundaries() * k * k) {
    throw InputError("marginal tables have inconsistent dimensions");
  }
  for (double v : marginals.unary) {
    if (!std::isfinite(v)) throw InputError("unary marginals contain non-finite values");
  }
  for (double v : marginals.pairwise) {
    if (!std::isfinite(v)) throw InputError("pairwise marginals contain non-finite values");
  }
}

int argmax_unary(const PosteriorMarginals& marginals, std::size_t i) {
  int best = 0;
  for (std::size_t j = 1; j < marginals.num_states; ++j) {
    if (marginals.unary_at(i, j) > marginals.unary_at(i, static_cast<std::size_t>(best))) best = static_cast<int>(j);
  }
  return best;
}

// Two-position marginals holding only boundary i.
PosteriorMarginals boundary_view(const PosteriorMarginals& marginals, std::size_t i) {
  const std::size_t k = marginals.num_states;
  PosteriorMarginals v(2, k);
  for (std::size_t j = 0; j < k; ++j) {
    v.unary_at(0, j) = marginals.unary_at(i, j);
    v.unary_at(1, j) = marginals.unary_at(i + 1, j);
  }
  const auto slab = marginals.pair_slab(i);
  std::copy(slab.begin(), slab.end(), v.pairwise.begin());
  return v;
}

DecodeResult single_position(const PosteriorMarginals& marginals) {
  return DecodeResult{{argmax_unary(marginals, 0)}, 0.0, {}};
}

}  // namespace

std::vector<double> boundary_loss_table(const PosteriorMarginals& marginals, const LossMatrix& loss) {
  check_inputs(marginals, loss);
  const std::size_t pairs = loss.num_pairs();
  const std::size_t b = marginals.boundaries();
  std::vector<double> table(b * pairs);
  for (std::size_t i = 0; i < b; ++i) {
    const auto slab = marginals.pair_slab(i);
    for (std::size_t p = 0; p < pairs; ++p) {
      double s = 0.0;
      for (std::size_t t = 0; t < pairs; ++t) s += loss.at(p, t) * slab[t];
      table[i * pairs + p] = s;
    }
  }
  return table;
}

DecodeResult decode_markov_loss(const PosteriorMarginals& marginals, const LossMatrix& loss) {
  check_inputs(marginals, loss);
  if (marginals.length == 1) return single_position(marginals);

  const std::size_t n = marginals.length;
  const std::size_t k = marginals.num_states;
  const std::size_t pairs = k * k;
  const std::vector<double> table = boundary_loss_table(marginals, loss);

  // cost[k]: least loss of any prefix ending in state k; no boundary charged yet.
  std::vector<double> cost(k, 0.0);
  std::vector<double> next(k);
  std::vector<int> back(n * k, 0);
  for (std::size_t i = 1; i < n; ++i) {
    const double* l = table.data() + (i - 1) * pairs;
    for (std::size_t to = 0; to < k; ++to) {
      double best = cost[0] + l[to];
      int arg = 0;
      for (std::size_t from = 1; from < k; ++from) {
        const double cand = cost[from] + l[from * k + to];
        if (cand < best) {
          best = cand;
          arg = static_cast<int>(from);
        }
      }
      next[to] = best;
      back[i * k + to] = arg;
    }
    std::swap(cost, next);
  }

  int last = 0;
  for (std::size_t j = 1; j < k; ++j) {
    if (cost[j] < cost[static_cast<std::size_t>(last)]) last = static_cast<int>(j);
  }

  DecodeResult out;
  out.path.resize(n);
  out.path[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) {
    out.path[i - 1] = back[i * k + static_cast<std::size_t>(out.path[i])];
  }
  out.per_boundary_loss.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t p = static_cast<std::size_t>(out.path[i]) * k + static_cast<std::size_t>(out.path[i + 1]);
    out.per_boundary_loss[i] = table[i * pairs + p];
    out.expected_loss += out.per_boundary_loss[i];
  }
  return out;
}

StatePath decode_marginal(const PosteriorMarginals& marginals, double fpc, double fnc) {
  if (!std::isfinite(fpc) || !std::isfinite(fnc) || fpc < 0.0 || fnc < 0.0) {
    throw InputError("marginal costs must be finite and non-negative");
  }
  const std::size_t k = marginals.num_states;
  if (marginals.unary.size() != marginals.length * k) throw InputError("unary table has inconsistent dimensions");
  StatePath path(marginals.length);
  for (std::size_t i = 0; i < marginals.length; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t call = 0; call < k; ++call) {
      double risk = 0.0;
      for (std::size_t truth = 0; truth < k; ++truth) {
        if (truth == call) continue;
        const double c = truth == 0 ? fpc : (call == 0 ? fnc : fpc);
        risk += c * marginals.unary_at(i, truth);
      }
      if (!std::isfinite(risk)) throw InputError("unary marginals contain non-finite values");
      if (risk < best) {
        best = risk;
        arg = static_cast<int>(call);
      }
    }
    path[i] = arg;
  }
  return path;
}

OracleResult brute_force_mel_with_ties(const PosteriorMarginals& marginals, const LossMatrix& loss) {
  check_inputs(marginals, loss);
  const std::size_t n = marginals.length;
  const std::size_t k = marginals.num_states;
  if (std::pow(static_cast<double>(k), static_cast<double>(n)) > kBruteForceLimit) {
    throw CapacityError("brute-force search over " + std::to_string(k) + "^" + std::to_string(n) +
                        " paths exceeds the enumeration limit");
  }
  if (n == 1) return OracleResult{single_position(marginals), 1};

  // Scored through expected_loss, independent of boundary_loss_table.
  auto score = [&](const StatePath& p) { return expected_loss(p, marginals, loss); };

  // Odometer with the last position fastest: lexicographic order.
  StatePath cand(n, 0);
  StatePath best_path = cand;
  double best = score(cand);
  std::size_t ties = 1;
  for (;;) {
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (static_cast<std::size_t>(++cand[pos]) < k) break;
      cand[pos] = 0;
      if (pos == 0) {
        pos = n;
        break;
      }
    }
    if (pos == n) break;

    const double s = score(cand);
    const double tol = 1e-12 * std::max(1.0, std::abs(best));
    if (s < best - tol) {
      best = s;
      best_path = cand;
      ties = 1;
    } else if (s <= best + tol) {
      ++ties;
      if (s < best) {
        best = s;
        best_path = cand;
      }
    }
  }

  OracleResult out;
  out.minimizers = ties;
  out.best.path = std::move(best_path);
  out.best.per_boundary_loss.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out.best.per_boundary_loss[i] = expected_loss({out.best.path[i], out.best.path[i + 1]},
                                                  boundary_view(marginals, i), loss);
    out.best.expected_loss += out.best.per_boundary_loss[i];
  }
  return out;
}

}  // namespace markovloss
