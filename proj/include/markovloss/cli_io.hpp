#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "markovloss/hmm.hpp"
#include "markovloss/loss.hpp"
#include "markovloss/simulate.hpp"

namespace markovloss::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kInternal = 1, kBadInput = 2, kInconsistent = 3 };

/// Loss block of a config: either a cost set or an explicit matrix.
struct LossConfig {
  std::optional<CostSet> costs;
  std::optional<std::vector<double>> matrix;

  LossMatrix build(std::size_t num_states) const;
};

/// Parsed config file. Unknown keys anywhere are rejected.
struct RunConfig {
  std::optional<HmmSpec> model;
  std::optional<LossConfig> loss;
  std::optional<std::string> input;
  std::optional<std::string> truth;
  std::optional<std::string> prediction;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> sequences;
  std::optional<std::size_t> length;
  std::optional<double> marginal_fpc;
  std::optional<double> marginal_fnc;
  std::optional<SweepSpec> sweep;
  bool misspecified_emissions = false;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

HmmSpec parse_model(const nlohmann::json& j);
nlohmann::json model_to_json(const HmmSpec& model);

/// Command-line options; flags override config values.
struct Options {
  std::string command;
  std::optional<std::string> config;
  std::string out_dir = ".";
  std::vector<std::string> inputs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> sequences;
  std::optional<std::size_t> length;
  std::size_t threads = 1;
  bool misspecified_emissions = false;
};

/// Runs one subcommand; diagnostics go to `err`, summaries to `out`.
int run(const Options& opts, std::ostream& out, std::ostream& err);

// --- file formats --------------------------------------------------------

/// Observations TSV: one value per line, or "position<TAB>value". Blank lines
/// and lines starting with '#' are skipped. Errors carry the line number.
std::vector<double> read_observations(const std::filesystem::path& path);

/// Single-column integer state file (same comment rules).
StatePath read_state_path(const std::filesystem::path& path);

/// Pairwise marginals TSV: header comment, then one row per boundary:
/// index (1-based) followed by K^2 probabilities, pair index j*K+k.
void write_pairwise_marginals(const std::filesystem::path& path, const PosteriorMarginals& m);

struct MarginalsReadReport {
  std::size_t renormalized_rows = 0;
};

/// Reads pairwise marginals and derives the unary table from them. Rows off
/// by more than 1e-6 from summing to one, or adjacent boundaries disagreeing
/// on their shared position by more than 1e-6, raise ConsistencyError.
PosteriorMarginals read_pairwise_marginals(const std::filesystem::path& path, MarginalsReadReport* report = nullptr);

/// Formats with 17 significant digits.
std::string format_real(double v);

}  // namespace markovloss::cli
