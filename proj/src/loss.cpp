#include "markovloss/loss.hpp"

#include <algorithm>
#include <cmath>

#include "markovloss/errors.hpp"

namespace markovloss {

void CostSet::validate() const {
  for (double c : {tp, fpc, fnc, fpt, fnt, dft, miscall()}) {
    if (!std::isfinite(c) || c < 0.0) throw InputError("costs must be finite and non-negative");
  }
}

std::vector<std::string> CostSet::warnings() const {
  std::vector<std::string> out;
  if (dft < std::max(fpt, fnt)) {
    out.emplace_back("dft cost is below max(fpt, fnt); opposite transitions are cheaper than one-sided ones");
  }
  return out;
}

CostSet CostSet::scaled(double factor) const {
  CostSet c = *this;
  c.tp *= factor;
  c.fpc *= factor;
  c.fnc *= factor;
  c.fpt *= factor;
  c.fnt *= factor;
  c.dft *= factor;
  if (c.mc) *c.mc *= factor;
  return c;
}

LossMatrix LossMatrix::from_entries(std::size_t num_states, std::vector<double> entries) {
  if (num_states < 2) throw InputError("loss matrix needs at least two states");
  const std::size_t pairs = num_states * num_states;
  if (entries.size() != pairs * pairs) {
    throw InputError("loss matrix for " + std::to_string(num_states) + " states needs " +
                     std::to_string(pairs * pairs) + " entries, got " + std::to_string(entries.size()));
  }
  for (double v : entries) {
    if (!std::isfinite(v) || v < 0.0) throw InputError("loss matrix entries must be finite and non-negative");
  }
  return LossMatrix(num_states, std::move(entries));
}

LossMatrix LossMatrix::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InputError("scale factor must be positive");
  std::vector<double> e = entries_;
  for (double& v : e) v *= factor;
  return LossMatrix(num_states_, std::move(e));
}

LossMatrix build_binary_loss_matrix(const CostSet& costs) { return build_multistate_loss_matrix(costs, 2); }

LossMatrix build_multistate_loss_matrix(const CostSet& costs, std::size_t num_states) {
  if (num_states < 2) throw InputError("loss matrix needs at least two states");
  costs.validate();
  const std::size_t k = num_states;
  const std::size_t pairs = k * k;
  std::vector<double> e(pairs * pairs);
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t pa = p / k, pb = p % k;
    for (std::size_t t = 0; t < pairs; ++t) {
      const std::size_t ta = t / k, tb = t % k;
      double v;
      if (p == t) {
        v = costs.tp;
      } else {
        const bool pred_moves = pa != pb;
        const bool truth_moves = ta != tb;
        double transition = 0.0;
        if (pred_moves && !truth_moves) transition = costs.fpt;
        else if (truth_moves && !pred_moves) transition = costs.fnt;
        else if (pred_moves && truth_moves) transition = costs.dft;  // pairs differ here

        double call = 0.0;
        if (pb != tb) {
          if (tb == 0) call = costs.fpc;
          else if (pb == 0) call = costs.fnc;
          else call = costs.miscall();
        }
        v = transition + call;
      }
      e[p * pairs + t] = v;
    }
  }
  return LossMatrix::from_entries(k, std::move(e));
}

CostSet marginal_costs(double fpc, double fnc) {
  CostSet c;
  c.tp = 0.0;
  c.fpc = fpc;
  c.fnc = fnc;
  c.fpt = 0.0;
  c.fnt = 0.0;
  c.dft = 0.0;
  c.mc = fpc;
  c.validate();
  return c;
}

double expected_loss(const StatePath& prediction, const PosteriorMarginals& marginals, const LossMatrix& loss) {
  if (prediction.size() != marginals.length) throw InputError("prediction length does not match marginals");
  if (loss.num_states() != marginals.num_states) throw InputError("loss matrix state count does not match marginals");
  const std::size_t k = marginals.num_states;
  for (int s : prediction) {
    if (s < 0 || static_cast<std::size_t>(s) >= k) throw InputError("prediction state out of range");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < prediction.size(); ++i) {
    const std::size_t pred = static_cast<std::size_t>(prediction[i]) * k + static_cast<std::size_t>(prediction[i + 1]);
    const auto slab = marginals.pair_slab(i);
    double boundary = 0.0;
    for (std::size_t t = 0; t < slab.size(); ++t) boundary += loss.at(pred, t) * slab[t];
    total += boundary;
  }
  return total;
}

}  // namespace markovloss
