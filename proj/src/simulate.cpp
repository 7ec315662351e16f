#include "markovloss/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "markovloss/decode.hpp"
#include "markovloss/errors.hpp"

namespace markovloss {
namespace {

std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

int draw_state(std::mt19937_64& rng, std::span<const double> probs) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    acc += probs[j];
    if (u < acc) return static_cast<int>(j);
  }
  // u landed in the rounding slack; take the last state with mass.
  for (std::size_t j = probs.size(); j-- > 0;) {
    if (probs[j] > 0.0) return static_cast<int>(j);
  }
  return 0;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool same_marginal_point(const CostSet& a, const CostSet& b) { return a.fpc == b.fpc && a.fnc == b.fnc; }

}  // namespace

void SimConfig::validate() const {
  if (length < 2) throw InputError("simulated sequences need length >= 2");
  if (num_sequences == 0) throw InputError("need at least one simulated sequence");
  model.validate();
}

SimulatedSequence generate_sequence(const SimConfig& config, std::uint64_t stream) {
  config.validate();
  const HmmSpec& m = config.model;
  const std::size_t k = m.num_states();
  auto rng = stream_engine(config.seed, stream);

  SimulatedSequence out;
  out.truth.resize(config.length);
  out.observations.resize(config.length);
  for (std::size_t i = 0; i < config.length; ++i) {
    const auto probs = i == 0 ? std::span<const double>(m.initial)
                              : std::span<const double>(m.transitions).subspan(
                                    static_cast<std::size_t>(out.truth[i - 1]) * k, k);
    const int s = draw_state(rng, probs);
    out.truth[i] = s;
    const EmissionModel& e = m.emissions[static_cast<std::size_t>(s)];
    double y = std::normal_distribution<double>(e.main_mean, std::sqrt(e.main_var))(rng);
    if (e.outlier_prob > 0.0 && std::bernoulli_distribution(e.outlier_prob)(rng)) {
      y = std::normal_distribution<double>(e.outlier_mean, std::sqrt(e.outlier_var))(rng);
    }
    out.observations[i] = y;
  }
  return out;
}

std::string_view decoder_name(Decoder d) {
  switch (d) {
    case Decoder::Viterbi: return "viterbi";
    case Decoder::Marginal: return "marginal";
    case Decoder::Markov: return "markov";
  }
  return "unknown";
}

Decoder parse_decoder(std::string_view name) {
  if (name == "viterbi") return Decoder::Viterbi;
  if (name == "marginal") return Decoder::Marginal;
  if (name == "markov") return Decoder::Markov;
  throw InputError("unknown decoder '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
  if (decoders.empty()) throw InputError("sweep needs at least one decoder");
  const bool needs_grid = std::any_of(decoders.begin(), decoders.end(), [](Decoder d) { return d != Decoder::Viterbi; });
  if (needs_grid && grid.empty()) throw InputError("sweep grid is empty");
  for (const auto& c : grid) c.validate();
}

std::vector<CostSet> two_arm_grid(std::size_t points, double lo, double hi, double dft) {
  if (points < 2 || !(lo > 0.0) || !(hi > lo)) throw InputError("grid needs >= 2 points over 0 < lo < hi");
  std::vector<double> values(points);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i) {
    const double v = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    values[i] = std::abs(v - 1.0) < 1e-12 ? 1.0 : v;
  }
  std::vector<CostSet> grid;
  auto make = [dft](double fpc, double fpt) {
    CostSet c;
    c.fpc = fpc;
    c.fnc = 1.0;
    c.fpt = fpt;
    c.fnt = 1.0;
    c.dft = dft;
    return c;
  };
  for (double v : values) grid.push_back(make(v, 1.0));
  for (double v : values) {
    if (v != 1.0) grid.push_back(make(1.0, v));
  }
  return grid;
}

std::vector<SweepRow> run_sweep(const SimConfig& sim, const SweepSpec& sweep, std::size_t threads) {
  sim.validate();
  sweep.validate();
  const auto has = [&](Decoder d) { return std::find(sweep.decoders.begin(), sweep.decoders.end(), d) != sweep.decoders.end(); };

  std::vector<SweepRow> rows;
  if (has(Decoder::Viterbi)) rows.push_back(SweepRow{Decoder::Viterbi, std::nullopt, {}});
  if (has(Decoder::Marginal)) {
    std::vector<CostSet> seen;
    for (const auto& c : sweep.grid) {
      if (std::none_of(seen.begin(), seen.end(), [&](const CostSet& s) { return same_marginal_point(s, c); })) {
        seen.push_back(c);
        rows.push_back(SweepRow{Decoder::Marginal, marginal_costs(c.fpc, c.fnc), {}});
      }
    }
  }
  std::vector<LossMatrix> losses(rows.size());
  if (has(Decoder::Markov)) {
    for (const auto& c : sweep.grid) {
      rows.push_back(SweepRow{Decoder::Markov, c, {}});
      losses.push_back(build_multistate_loss_matrix(c, sim.model.num_states()));
    }
  }

  const HmmSpec decoding = sweep.misspecified_emissions ? without_outliers(sim.model) : sim.model;
  const std::size_t n_seq = sim.num_sequences;
  // reports[seq * rows + r]
  std::vector<ErrorReport> reports(n_seq * rows.size());

  auto work = [&](std::size_t seq) {
    const auto data = generate_sequence(sim, seq);
    const LogLikelihoods ll = decoding.log_likelihoods(data.observations);
    const PosteriorMarginals post = forward_backward(decoding, ll);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      StatePath pred;
      switch (rows[r].decoder) {
        case Decoder::Viterbi: pred = viterbi(decoding, ll); break;
        case Decoder::Marginal: pred = decode_marginal(post, rows[r].costs->fpc, rows[r].costs->fnc); break;
        case Decoder::Markov: pred = decode_markov_loss(post, losses[r]).path; break;
      }
      reports[seq * rows.size() + r] = compare_paths(data.truth, pred);
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n_seq);
  if (workers == 1) {
    for (std::size_t s = 0; s < n_seq; ++s) work(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t s = next++; s < n_seq; s = next++) work(s);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<ErrorReport> column(n_seq);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t s = 0; s < n_seq; ++s) column[s] = reports[s * rows.size() + r];
    rows[r].report = aggregate_reports(column);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "decoder,c_fpc,c_fnc,c_fpt,c_fnt,c_dft,c_mc";
  for (const auto& col : ErrorReport::csv_columns()) out += "," + col;
  out += "\n";
  for (const auto& row : rows) {
    out += decoder_name(row.decoder);
    if (row.costs) {
      const CostSet& c = *row.costs;
      for (double v : {c.fpc, c.fnc, c.fpt, c.fnt, c.dft, c.miscall()}) out += "," + fmt17(v);
    } else {
      out += ",,,,,,";
    }
    out += "," + row.report.csv_row() + "\n";
  }
  return out;
}

}  // namespace markovloss
