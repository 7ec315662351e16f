#include <iostream>

#include "CLI11.hpp"
#include "markovloss/cli_io.hpp"

int main(int argc, char** argv) {
  namespace cli = markovloss::cli;
  CLI::App app{"Minimum-expected-loss decoding for hidden Markov models"};
  app.require_subcommand(1);

  cli::Options opts;
  std::uint64_t seed = 0;
  std::size_t sequences = 0;
  std::size_t length = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON configuration file");
    sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--sequences", sequences, "Number of simulated sequences");
    sub->add_option("--length", length, "Length of each simulated sequence");
  };

  auto* decode = app.add_subcommand("decode", "Decode an observation file with Viterbi, marginal and Markov-loss decoders");
  add_common(decode);
  decode->add_option("observations", opts.inputs, "Observation TSV (overrides config 'input')");

  auto* decode_marginals =
      app.add_subcommand("decode-marginals", "Markov-loss decode of externally supplied pairwise marginals");
  add_common(decode_marginals);
  decode_marginals->add_option("marginals", opts.inputs, "Pairwise marginals TSV (overrides config 'input')");

  auto* simulate = app.add_subcommand("simulate", "Write simulated sequences");
  add_common(simulate);
  add_sim(simulate);

  auto* sweep = app.add_subcommand("sweep", "Simulate, decode over a cost grid and tabulate error rates");
  add_common(sweep);
  add_sim(sweep);
  sweep->add_option("--threads", opts.threads, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--misspecified-emissions", opts.misspecified_emissions,
                  "Decode with the outlier component removed from the model");

  auto* compare = app.add_subcommand("compare", "Error taxonomy of a predicted path against the truth");
  add_common(compare);
  compare->add_option("paths", opts.inputs, "Truth and prediction state files")->expected(0, 2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kBadInput;
  }

  for (auto* sub : {decode, decode_marginals, simulate, sweep, compare}) {
    if (sub->parsed()) opts.command = sub->get_name();
  }
  for (auto* sub : {simulate, sweep}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--sequences")) opts.sequences = sequences;
    if (sub->count("--length")) opts.length = length;
  }
  return cli::run(opts, std::cout, std::cerr);
}
