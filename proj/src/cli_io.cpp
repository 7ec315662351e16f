#include "markovloss/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "markovloss/decode.hpp"
#include "markovloss/errors.hpp"
#include "markovloss/metrics.hpp"

namespace markovloss::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kRowSumTol = 1e-6;
constexpr double kRenormalizeTol = 1e-12;

// ---- JSON helpers --------------------------------------------------------

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw InputError(where + " must be a JSON object");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InputError("unknown key '" + key + "' in " + where);
    }
  }
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw InputError(what + " must be a number");
  return j.get<double>();
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  return number(obj.at(key), where + "." + key);
}

double required_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw InputError("missing key '" + std::string(key) + "' in " + where);
  return number(obj.at(key), where + "." + key);
}

std::uint64_t unsigned_integer(const json& j, const std::string& what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw InputError(what + " must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

std::vector<double> number_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], what + "[" + std::to_string(i) + "]"));
  return out;
}

std::string string_value(const json& j, const std::string& what) {
  if (!j.is_string()) throw InputError(what + " must be a string");
  return j.get<std::string>();
}

CostSet parse_costs(const json& j, const std::string& where) {
  check_keys(j, {"tp", "fpc", "fnc", "fpt", "fnt", "dft", "mc"}, where);
  CostSet c;
  c.tp = optional_number(j, "tp", where).value_or(0.0);
  c.fpc = required_number(j, "fpc", where);
  c.fnc = required_number(j, "fnc", where);
  c.fpt = required_number(j, "fpt", where);
  c.fnt = required_number(j, "fnt", where);
  c.dft = required_number(j, "dft", where);
  c.mc = optional_number(j, "mc", where);
  c.validate();
  return c;
}

LossConfig parse_loss(const json& j) {
  check_keys(j, {"costs", "matrix"}, "loss");
  if (j.contains("costs") == j.contains("matrix")) throw InputError("loss needs exactly one of 'costs' or 'matrix'");
  LossConfig lc;
  if (j.contains("costs")) lc.costs = parse_costs(j.at("costs"), "loss.costs");
  else lc.matrix = number_array(j.at("matrix"), "loss.matrix");
  return lc;
}

SweepSpec parse_sweep(const json& j) {
  check_keys(j, {"decoders", "grid", "points", "min", "max", "dft"}, "sweep");
  SweepSpec s;
  if (j.contains("decoders")) {
    const json& d = j.at("decoders");
    if (!d.is_array()) throw InputError("sweep.decoders must be an array");
    s.decoders.clear();
    for (const auto& name : d) s.decoders.push_back(parse_decoder(string_value(name, "sweep.decoders entry")));
  }
  if (j.contains("grid")) {
    for (const char* k : {"points", "min", "max", "dft"}) {
      if (j.contains(k)) throw InputError(std::string("sweep.") + k + " cannot be combined with an explicit grid");
    }
    const json& g = j.at("grid");
    if (!g.is_array()) throw InputError("sweep.grid must be an array");
    for (std::size_t i = 0; i < g.size(); ++i) s.grid.push_back(parse_costs(g[i], "sweep.grid[" + std::to_string(i) + "]"));
  } else {
    const std::size_t points = j.contains("points") ? unsigned_integer(j.at("points"), "sweep.points") : 13;
    s.grid = two_arm_grid(points, optional_number(j, "min", "sweep").value_or(0.1),
                          optional_number(j, "max", "sweep").value_or(10.0),
                          optional_number(j, "dft", "sweep").value_or(1000.0));
  }
  s.validate();
  return s;
}

// ---- TSV helpers ---------------------------------------------------------

struct Line {
  std::size_t number;
  std::vector<std::string> fields;
};

std::vector<Line> read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<Line> rows;
  std::string text;
  std::size_t lineno = 0;
  while (std::getline(in, text)) {
    ++lineno;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string::npos || text[first] == '#') continue;
    std::istringstream ss(text);
    Line l{lineno, {}};
    for (std::string f; ss >> f;) l.fields.push_back(f);
    rows.push_back(std::move(l));
  }
  return rows;
}

std::string where(const fs::path& path, std::size_t line) { return path.string() + ":" + std::to_string(line); }

std::optional<double> to_real(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// A leading row whose first field is not numeric is a header.
void drop_header(std::vector<Line>& rows) {
  if (!rows.empty() && !rows.front().fields.empty() && !to_real(rows.front().fields[0])) rows.erase(rows.begin());
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << contents;
  if (!out) throw InputError("failed writing " + path.string());
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw InputError("output directory " + dir + " is not writable");
  return p;
}

// ---- command plumbing ----------------------------------------------------

RunConfig config_for(const Options& opts) {
  return opts.config ? load_config(*opts.config) : RunConfig{};
}

std::string input_path(const Options& opts, std::size_t index, const std::optional<std::string>& fallback,
                       const char* what) {
  if (opts.inputs.size() > index) return opts.inputs[index];
  if (fallback) return *fallback;
  throw InputError(std::string("missing ") + what + " file (positional argument or config key)");
}

void warn_costs(const LossConfig& loss, std::ostream& err) {
  if (!loss.costs) return;
  for (const auto& w : loss.costs->warnings()) err << "warning: " << w << "\n";
}

std::string segments_tsv(const StatePath& path, const PosteriorMarginals& post) {
  std::string out = "start\tend\tstate\tmean_posterior\n";
  for (const auto& seg : extract_segments(path)) {
    double sum = 0.0;
    for (std::size_t i = seg.start - 1; i + 1 < seg.end; ++i) sum += post.unary_at(i, static_cast<std::size_t>(seg.state));
    const double mean = sum / static_cast<double>(seg.end - seg.start);
    out += std::to_string(seg.start) + "\t" + std::to_string(seg.end) + "\t" + std::to_string(seg.state) + "\t" +
           format_real(mean) + "\n";
  }
  return out;
}

std::size_t called_segments(const StatePath& path) {
  const auto segs = extract_segments(path);
  return static_cast<std::size_t>(std::count_if(segs.begin(), segs.end(), [](const Segment& s) { return s.state != 0; }));
}

std::string posterior_header(std::size_t k) {
  std::string h;
  for (std::size_t j = 0; j < k; ++j) h += "\tpost_" + std::to_string(j);
  return h;
}

std::string posterior_cells(const PosteriorMarginals& post, std::size_t i) {
  std::string c;
  for (std::size_t j = 0; j < post.num_states; ++j) c += "\t" + format_real(post.unary_at(i, j));
  return c;
}

int cmd_decode(const Options& opts, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = config_for(opts);
  if (!cfg.model) throw InputError("decode needs a 'model' in the config");
  if (!cfg.loss) throw InputError("decode needs a 'loss' in the config");
  const HmmSpec& model = *cfg.model;
  const auto obs = read_observations(input_path(opts, 0, cfg.input, "observations"));
  warn_costs(*cfg.loss, err);

  const LogLikelihoods ll = model.log_likelihoods(obs);
  const PosteriorMarginals post = forward_backward(model, ll);
  const StatePath vit = viterbi(model, ll);
  const double fpc = cfg.marginal_fpc.value_or(cfg.loss->costs ? cfg.loss->costs->fpc : 1.0);
  const double fnc = cfg.marginal_fnc.value_or(cfg.loss->costs ? cfg.loss->costs->fnc : 1.0);
  const StatePath marg = decode_marginal(post, fpc, fnc);
  const DecodeResult mel = decode_markov_loss(post, cfg.loss->build(model.num_states()));

  const fs::path dir = ensure_dir(opts.out_dir);
  std::string table = "position\tobservation\tviterbi_state\tmarginal_state\tmarkov_state" +
                      posterior_header(post.num_states) + "\n";
  for (std::size_t i = 0; i < obs.size(); ++i) {
    table += std::to_string(i + 1) + "\t" + format_real(obs[i]) + "\t" + std::to_string(vit[i]) + "\t" +
             std::to_string(marg[i]) + "\t" + std::to_string(mel.path[i]) + posterior_cells(post, i) + "\n";
  }
  write_file(dir / "decode.tsv", table);
  write_file(dir / "segments.tsv", segments_tsv(mel.path, post));
  write_pairwise_marginals(dir / "pairwise.tsv", post);

  out << "positions: " << obs.size() << "\n"
      << "log evidence: " << format_real(post.log_evidence) << "\n"
      << "markov expected loss: " << format_real(mel.expected_loss) << "\n"
      << "non-null segments (viterbi/marginal/markov): " << called_segments(vit) << "/" << called_segments(marg)
      << "/" << called_segments(mel.path) << "\n";
  return kOk;
}

int cmd_decode_marginals(const Options& opts, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = config_for(opts);
  if (!cfg.loss) throw InputError("decode-marginals needs a 'loss' in the config");
  warn_costs(*cfg.loss, err);
  MarginalsReadReport report;
  const PosteriorMarginals post = read_pairwise_marginals(input_path(opts, 0, cfg.input, "pairwise marginals"), &report);
  if (report.renormalized_rows > 0) err << "warning: renormalized " << report.renormalized_rows << " pairwise rows\n";
  const DecodeResult mel = decode_markov_loss(post, cfg.loss->build(post.num_states));

  const fs::path dir = ensure_dir(opts.out_dir);
  std::string table = "position\tmarkov_state" + posterior_header(post.num_states) + "\n";
  for (std::size_t i = 0; i < post.length; ++i) {
    table += std::to_string(i + 1) + "\t" + std::to_string(mel.path[i]) + posterior_cells(post, i) + "\n";
  }
  write_file(dir / "decode.tsv", table);
  write_file(dir / "segments.tsv", segments_tsv(mel.path, post));

  out << "positions: " << post.length << "\n"
      << "markov expected loss: " << format_real(mel.expected_loss) << "\n"
      << "renormalized rows: " << report.renormalized_rows << "\n";
  return kOk;
}

SimConfig sim_config(const Options& opts, const RunConfig& cfg) {
  SimConfig sim;
  if (cfg.model) sim.model = *cfg.model;
  if (auto v = opts.seed ? opts.seed : cfg.seed) sim.seed = *v;
  if (auto v = opts.sequences ? opts.sequences : cfg.sequences) sim.num_sequences = *v;
  if (auto v = opts.length ? opts.length : cfg.length) sim.length = *v;
  sim.validate();
  return sim;
}

int cmd_simulate(const Options& opts, std::ostream& out, std::ostream&) {
  const RunConfig cfg = config_for(opts);
  const SimConfig sim = sim_config(opts, cfg);
  const fs::path dir = ensure_dir(opts.out_dir);
  std::ofstream file(dir / "sequences.tsv", std::ios::binary);
  if (!file) throw InputError("cannot write sequences.tsv");
  file << "sequence\tposition\tstate\tobservation\n";
  for (std::size_t s = 0; s < sim.num_sequences; ++s) {
    const auto seq = generate_sequence(sim, s);
    for (std::size_t i = 0; i < sim.length; ++i) {
      file << s << '\t' << (i + 1) << '\t' << seq.truth[i] << '\t' << format_real(seq.observations[i]) << '\n';
    }
  }
  out << "wrote " << sim.num_sequences << " sequences of length " << sim.length << "\n";
  return kOk;
}

std::string cost_cell(const SweepRow& row, double CostSet::*field) {
  return row.costs ? format_real((*row.costs).*field) : "NA";
}

int cmd_sweep(const Options& opts, std::ostream& out, std::ostream&) {
  const RunConfig cfg = config_for(opts);
  const SimConfig sim = sim_config(opts, cfg);
  SweepSpec sweep = cfg.sweep.value_or(SweepSpec{two_arm_grid()});
  sweep.misspecified_emissions = opts.misspecified_emissions || cfg.misspecified_emissions;
  const auto rows = run_sweep(sim, sweep, opts.threads);

  const fs::path dir = ensure_dir(opts.out_dir);
  write_file(dir / "sweep.csv", sweep_csv(rows));
  std::string calls = "decoder\tc_fpc\tc_fpt\tfpc_rate\tfnc_rate\n";
  std::string transitions = "decoder\tc_fpc\tc_fpt\tfpc_rate\tfpt_rate\tfnt_rate\n";
  for (const auto& r : rows) {
    const std::string head = std::string(decoder_name(r.decoder)) + "\t" + cost_cell(r, &CostSet::fpc) + "\t" +
                             cost_cell(r, &CostSet::fpt) + "\t" + format_real(r.report.fpc.rate());
    calls += head + "\t" + format_real(r.report.fnc.rate()) + "\n";
    transitions += head + "\t" + format_real(r.report.fpt.rate()) + "\t" + format_real(r.report.fnt.rate()) + "\n";
  }
  write_file(dir / "plot_fpc_vs_fnc.tsv", calls);
  write_file(dir / "plot_fpc_vs_fpt.tsv", transitions);

  char line[160];
  std::snprintf(line, sizeof line, "%-9s %8s %8s %9s %9s %9s %9s %9s\n", "decoder", "c_fpc", "c_fpt", "fpc%",
                "fnc%", "fpt%", "fnt%", "segments");
  out << line;
  for (const auto& r : rows) {
    const double c_fpc = r.costs ? r.costs->fpc : NAN;
    const double c_fpt = r.costs ? r.costs->fpt : NAN;
    std::snprintf(line, sizeof line, "%-9s %8.3g %8.3g %9.4f %9.4f %9.4f %9.4f %9zu\n",
                  std::string(decoder_name(r.decoder)).c_str(), c_fpc, c_fpt, 100 * r.report.fpc.rate(),
                  100 * r.report.fnc.rate(), 100 * r.report.fpt.rate(), 100 * r.report.fnt.rate(),
                  r.report.pred_segments);
    out << line;
  }
  return kOk;
}

int cmd_compare(const Options& opts, std::ostream& out, std::ostream&) {
  const RunConfig cfg = config_for(opts);
  const StatePath truth = read_state_path(input_path(opts, 0, cfg.truth, "truth"));
  const StatePath pred = read_state_path(input_path(opts, 1, cfg.prediction, "prediction"));
  const ErrorReport r = compare_paths(truth, pred);
  std::string header;
  for (const auto& c : ErrorReport::csv_columns()) header += (header.empty() ? "" : ",") + c;
  const std::string csv = header + "\n" + r.csv_row() + "\n";
  write_file(ensure_dir(opts.out_dir) / "compare.csv", csv);
  out << csv;
  return kOk;
}

}  // namespace

// ---- public API ----------------------------------------------------------

LossMatrix LossConfig::build(std::size_t num_states) const {
  if (costs) return build_multistate_loss_matrix(*costs, num_states);
  if (matrix) return LossMatrix::from_entries(num_states, *matrix);
  throw InputError("empty loss configuration");
}

HmmSpec parse_model(const json& j) {
  check_keys(j, {"initial", "transitions", "emissions"}, "model");
  for (const char* k : {"initial", "transitions", "emissions"}) {
    if (!j.contains(k)) throw InputError(std::string("missing key '") + k + "' in model");
  }
  HmmSpec m;
  m.initial = number_array(j.at("initial"), "model.initial");
  const json& t = j.at("transitions");
  if (!t.is_array()) throw InputError("model.transitions must be an array of rows");
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto row = number_array(t[r], "model.transitions[" + std::to_string(r) + "]");
    if (row.size() != m.initial.size()) throw ModelError("transition rows must have one entry per state");
    m.transitions.insert(m.transitions.end(), row.begin(), row.end());
  }
  const json& e = j.at("emissions");
  if (!e.is_array()) throw InputError("model.emissions must be an array");
  for (std::size_t s = 0; s < e.size(); ++s) {
    const std::string w = "model.emissions[" + std::to_string(s) + "]";
    check_keys(e[s], {"mean", "var", "outlier_prob", "outlier_mean", "outlier_var"}, w);
    EmissionModel em;
    em.main_mean = required_number(e[s], "mean", w);
    em.main_var = required_number(e[s], "var", w);
    em.outlier_prob = optional_number(e[s], "outlier_prob", w).value_or(0.0);
    em.outlier_mean = optional_number(e[s], "outlier_mean", w).value_or(0.0);
    em.outlier_var = optional_number(e[s], "outlier_var", w).value_or(1.0);
    m.emissions.push_back(em);
  }
  m.validate();
  return m;
}

json model_to_json(const HmmSpec& model) {
  const std::size_t k = model.num_states();
  json t = json::array();
  for (std::size_t r = 0; r < k; ++r) {
    t.push_back(std::vector<double>(model.transitions.begin() + static_cast<std::ptrdiff_t>(r * k),
                                    model.transitions.begin() + static_cast<std::ptrdiff_t>((r + 1) * k)));
  }
  json e = json::array();
  for (const auto& em : model.emissions) {
    e.push_back({{"mean", em.main_mean},
                 {"var", em.main_var},
                 {"outlier_prob", em.outlier_prob},
                 {"outlier_mean", em.outlier_mean},
                 {"outlier_var", em.outlier_var}});
  }
  return {{"initial", model.initial}, {"transitions", t}, {"emissions", e}};
}

RunConfig parse_config(const json& j) {
  check_keys(j,
             {"model", "loss", "input", "truth", "prediction", "seed", "sequences", "length", "marginal", "sweep",
              "misspecified_emissions"},
             "config");
  RunConfig c;
  if (j.contains("model")) c.model = parse_model(j.at("model"));
  if (j.contains("loss")) c.loss = parse_loss(j.at("loss"));
  if (j.contains("input")) c.input = string_value(j.at("input"), "input");
  if (j.contains("truth")) c.truth = string_value(j.at("truth"), "truth");
  if (j.contains("prediction")) c.prediction = string_value(j.at("prediction"), "prediction");
  if (j.contains("seed")) c.seed = unsigned_integer(j.at("seed"), "seed");
  if (j.contains("sequences")) c.sequences = unsigned_integer(j.at("sequences"), "sequences");
  if (j.contains("length")) c.length = unsigned_integer(j.at("length"), "length");
  if (j.contains("marginal")) {
    const json& m = j.at("marginal");
    check_keys(m, {"fpc", "fnc"}, "marginal");
    c.marginal_fpc = optional_number(m, "fpc", "marginal");
    c.marginal_fnc = optional_number(m, "fnc", "marginal");
  }
  if (j.contains("sweep")) c.sweep = parse_sweep(j.at("sweep"));
  if (j.contains("misspecified_emissions")) {
    if (!j.at("misspecified_emissions").is_boolean()) throw InputError("misspecified_emissions must be a boolean");
    c.misspecified_emissions = j.at("misspecified_emissions").get<bool>();
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c = parse_config(j);
  // Relative data paths resolve against the config's directory.
  const fs::path base = path.parent_path();
  for (auto* p : {&c.input, &c.truth, &c.prediction}) {
    if (*p && fs::path(**p).is_relative() && !base.empty()) *p = (base / **p).string();
  }
  return c;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> read_observations(const fs::path& path) {
  auto rows = read_table(path);
  drop_header(rows);
  std::vector<double> obs;
  for (const auto& l : rows) {
    if (l.fields.size() > 2) throw InputError(where(path, l.number) + ": expected 1 or 2 columns");
    if (l.fields.size() == 2) {
      const auto pos = to_integer(l.fields[0]);
      if (!pos || *pos != static_cast<long long>(obs.size() + 1)) {
        throw InputError(where(path, l.number) + ": position column must count up from 1");
      }
    }
    const auto v = to_real(l.fields.back());
    if (!v || !std::isfinite(*v)) throw InputError(where(path, l.number) + ": observation is not a finite number");
    obs.push_back(*v);
  }
  if (obs.empty()) throw InputError(path.string() + ": no observations");
  return obs;
}

StatePath read_state_path(const fs::path& path) {
  auto rows = read_table(path);
  drop_header(rows);
  StatePath states;
  for (const auto& l : rows) {
    if (l.fields.size() != 1) throw InputError(where(path, l.number) + ": expected a single state column");
    const auto v = to_integer(l.fields[0]);
    if (!v || *v < 0 || *v > 1'000'000) throw InputError(where(path, l.number) + ": state is not a non-negative integer");
    states.push_back(static_cast<int>(*v));
  }
  if (states.empty()) throw InputError(path.string() + ": no states");
  return states;
}

void write_pairwise_marginals(const fs::path& path, const PosteriorMarginals& m) {
  const std::size_t k = m.num_states;
  std::string out = "# boundary";
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) out += "\tp_" + std::to_string(a) + "_" + std::to_string(b);
  out += "\n";
  for (std::size_t i = 0; i < m.boundaries(); ++i) {
    out += std::to_string(i + 1);
    for (double v : m.pair_slab(i)) out += "\t" + format_real(v);
    out += "\n";
  }
  write_file(path, out);
}

PosteriorMarginals read_pairwise_marginals(const fs::path& path, MarginalsReadReport* report) {
  const auto rows = read_table(path);
  if (rows.empty()) throw InputError(path.string() + ": no boundary rows");
  const std::size_t cols = rows.front().fields.size();
  const auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(cols > 0 ? cols - 1 : 0))));
  if (k < 2 || k * k + 1 != cols) {
    throw InputError(where(path, rows.front().number) + ": expected an index column plus (S+1)^2 probabilities");
  }
  const std::size_t kk = k * k;
  PosteriorMarginals m(rows.size() + 1, k);
  std::size_t renormalized = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Line& l = rows[i];
    if (l.fields.size() != cols) throw InputError(where(path, l.number) + ": wrong number of columns");
    const auto idx = to_integer(l.fields[0]);
    if (!idx || *idx != static_cast<long long>(i + 1)) {
      throw InputError(where(path, l.number) + ": boundary index must count up from 1");
    }
    double sum = 0.0;
    for (std::size_t p = 0; p < kk; ++p) {
      const auto v = to_real(l.fields[p + 1]);
      if (!v || !std::isfinite(*v) || *v < 0.0) {
        throw InputError(where(path, l.number) + ": probability is not a finite non-negative number");
      }
      m.pairwise[i * kk + p] = *v;
      sum += *v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw ConsistencyError(where(path, l.number) + ": boundary " + std::to_string(i + 1) + " sums to " +
                             format_real(sum));
    }
    if (std::abs(sum - 1.0) > kRenormalizeTol) {
      for (std::size_t p = 0; p < kk; ++p) m.pairwise[i * kk + p] /= sum;
      ++renormalized;
    }
  }

  // Unary from the pairwise tables; adjacent boundaries must agree.
  double worst = 0.0;
  std::size_t worst_boundary = 0;
  for (std::size_t j = 0; j < k; ++j) {
    double row = 0.0;
    for (std::size_t b = 0; b < k; ++b) row += m.pair_at(0, j, b);
    m.unary_at(0, j) = row;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t b = 0; b < k; ++b) {
      double col = 0.0;
      for (std::size_t a = 0; a < k; ++a) col += m.pair_at(i, a, b);
      m.unary_at(i + 1, b) = col;
      if (i + 1 < rows.size()) {
        double next_row = 0.0;
        for (std::size_t c = 0; c < k; ++c) next_row += m.pair_at(i + 1, b, c);
        const double diff = std::abs(next_row - col);
        if (diff > worst) {
          worst = diff;
          worst_boundary = i + 1;
        }
      }
    }
  }
  if (worst > kRowSumTol) {
    throw ConsistencyError(path.string() + ": boundaries " + std::to_string(worst_boundary) + " and " +
                           std::to_string(worst_boundary + 1) + " disagree on position " +
                           std::to_string(worst_boundary + 1) + " by " + format_real(worst));
  }
  if (report) report->renormalized_rows = renormalized;
  return m;
}

int run(const Options& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.command == "decode") return cmd_decode(opts, out, err);
    if (opts.command == "decode-marginals") return cmd_decode_marginals(opts, out, err);
    if (opts.command == "simulate") return cmd_simulate(opts, out, err);
    if (opts.command == "sweep") return cmd_sweep(opts, out, err);
    if (opts.command == "compare") return cmd_compare(opts, out, err);
    err << "error: unknown command '" << opts.command << "'\n";
    return kBadInput;
  } catch (const ConsistencyError& e) {
    err << "error: " << e.what() << "\n";
    return kInconsistent;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace markovloss::cli
