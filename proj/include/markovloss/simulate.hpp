#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "markovloss/hmm.hpp"
#include "markovloss/loss.hpp"
#include "markovloss/metrics.hpp"

namespace markovloss {

struct SimConfig {
  std::size_t length = 1000;
  std::size_t num_sequences = 1000;
  /// Generating model, outlier contamination included in its emissions.
  HmmSpec model = two_state_cnv_model();
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimulatedSequence {
  StatePath truth;
  std::vector<double> observations;
};

/// Draws sequence `stream` of the study. Each (seed, stream) pair owns an
/// independent generator, so sequences can be produced in any order.
SimulatedSequence generate_sequence(const SimConfig& config, std::uint64_t stream);

enum class Decoder { Viterbi, Marginal, Markov };

std::string_view decoder_name(Decoder d);
Decoder parse_decoder(std::string_view name);

struct SweepSpec {
  std::vector<CostSet> grid;
  std::vector<Decoder> decoders = {Decoder::Viterbi, Decoder::Marginal, Decoder::Markov};
  /// Decode with the outlier component stripped from the model.
  bool misspecified_emissions = false;

  void validate() const;
};

/// Two arms of log-spaced points over [lo, hi]: fpc varies with fpt = 1, and
/// fpt varies with fpc = 1. fnc = fnt = 1 throughout. The shared (1, 1)
/// point appears once.
std::vector<CostSet> two_arm_grid(std::size_t points = 13, double lo = 0.1, double hi = 10.0, double dft = 1000.0);

struct SweepRow {
  Decoder decoder = Decoder::Viterbi;
  std::optional<CostSet> costs;  // empty for Viterbi
  ErrorReport report;
};

/// Simulates, decodes and scores every sequence. Rows: one Viterbi row, one
/// marginal row per distinct (fpc, fnc) in grid order, one Markov row per
/// grid point. Output is independent of `threads`.
std::vector<SweepRow> run_sweep(const SimConfig& sim, const SweepSpec& sweep, std::size_t threads = 1);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace markovloss
