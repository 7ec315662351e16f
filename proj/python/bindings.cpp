#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "markovloss/decode.hpp"
#include "markovloss/errors.hpp"
#include "markovloss/hmm.hpp"
#include "markovloss/loss.hpp"
#include "markovloss/metrics.hpp"
#include "markovloss/simulate.hpp"

namespace py = pybind11;
using namespace markovloss;

namespace {

py::array_t<double> unary_array(const PosteriorMarginals& m) {
  py::array_t<double> a({m.length, m.num_states});
  std::copy(m.unary.begin(), m.unary.end(), a.mutable_data());
  return a;
}

py::array_t<double> pairwise_array(const PosteriorMarginals& m) {
  py::array_t<double> a({m.boundaries(), m.num_states, m.num_states});
  std::copy(m.pairwise.begin(), m.pairwise.end(), a.mutable_data());
  return a;
}

// Builds marginals from a (n-1, K, K) pairwise array; unary rows are the
// pairwise row/column sums.
PosteriorMarginals marginals_from_pairwise(py::array_t<double, py::array::c_style | py::array::forcecast> pw) {
  if (pw.ndim() != 3 || pw.shape(1) != pw.shape(2)) throw InputError("pairwise must have shape (n-1, K, K)");
  const auto b = static_cast<std::size_t>(pw.shape(0));
  const auto k = static_cast<std::size_t>(pw.shape(1));
  if (b == 0) throw InputError("need at least one boundary");
  PosteriorMarginals m(b + 1, k);
  std::copy(pw.data(), pw.data() + pw.size(), m.pairwise.begin());
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t c = 0; c < k; ++c) m.unary_at(0, j) += m.pair_at(0, j, c);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t c = 0; c < k; ++c) m.unary_at(i + 1, c) += m.pair_at(i, a, c);
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Minimum-expected-loss decoding for hidden Markov models";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ConsistencyError>(m, "ConsistencyError", PyExc_RuntimeError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_OverflowError);

  py::class_<EmissionModel>(m, "EmissionModel")
      .def(py::init([](double mean, double var, double outlier_prob, double outlier_mean, double outlier_var) {
             return EmissionModel{mean, var, outlier_prob, outlier_mean, outlier_var};
           }),
           py::arg("mean"), py::arg("var"), py::arg("outlier_prob") = 0.0, py::arg("outlier_mean") = 0.0,
           py::arg("outlier_var") = 1.0)
      .def_readwrite("main_mean", &EmissionModel::main_mean)
      .def_readwrite("main_var", &EmissionModel::main_var)
      .def_readwrite("outlier_prob", &EmissionModel::outlier_prob)
      .def_readwrite("outlier_mean", &EmissionModel::outlier_mean)
      .def_readwrite("outlier_var", &EmissionModel::outlier_var)
      .def("log_density", &EmissionModel::log_density);

  py::class_<HmmSpec>(m, "HmmSpec")
      .def(py::init([](std::vector<double> initial, std::vector<std::vector<double>> transitions,
                       std::vector<EmissionModel> emissions) {
             HmmSpec h;
             h.initial = std::move(initial);
             for (const auto& row : transitions) h.transitions.insert(h.transitions.end(), row.begin(), row.end());
             h.emissions = std::move(emissions);
             h.validate();
             return h;
           }),
           py::arg("initial"), py::arg("transitions"), py::arg("emissions"))
      .def_property_readonly("num_states", &HmmSpec::num_states)
      .def_readonly("initial", &HmmSpec::initial)
      .def_readonly("transitions", &HmmSpec::transitions)
      .def_readonly("emissions", &HmmSpec::emissions);

  py::class_<PosteriorMarginals>(m, "PosteriorMarginals")
      .def_static("from_pairwise", &marginals_from_pairwise, py::arg("pairwise"))
      .def_readonly("length", &PosteriorMarginals::length)
      .def_readonly("num_states", &PosteriorMarginals::num_states)
      .def_readonly("log_evidence", &PosteriorMarginals::log_evidence)
      .def_property_readonly("unary", &unary_array)
      .def_property_readonly("pairwise", &pairwise_array)
      .def("max_consistency_error", &PosteriorMarginals::max_consistency_error);

  py::class_<CostSet>(m, "CostSet")
      .def(py::init([](double tp, double fpc, double fnc, double fpt, double fnt, double dft, std::optional<double> mc) {
             CostSet c{tp, fpc, fnc, fpt, fnt, dft, mc};
             c.validate();
             return c;
           }),
           py::arg("tp") = 0.0, py::arg("fpc") = 1.0, py::arg("fnc") = 1.0, py::arg("fpt") = 1.0,
           py::arg("fnt") = 1.0, py::arg("dft") = 1.0, py::arg("mc") = py::none())
      .def_readwrite("tp", &CostSet::tp)
      .def_readwrite("fpc", &CostSet::fpc)
      .def_readwrite("fnc", &CostSet::fnc)
      .def_readwrite("fpt", &CostSet::fpt)
      .def_readwrite("fnt", &CostSet::fnt)
      .def_readwrite("dft", &CostSet::dft)
      .def_property_readonly("mc", &CostSet::miscall)
      .def("warnings", &CostSet::warnings);

  py::class_<LossMatrix>(m, "LossMatrix")
      .def_static("from_entries", &LossMatrix::from_entries, py::arg("num_states"), py::arg("entries"))
      .def_property_readonly("num_states", &LossMatrix::num_states)
      .def("at", py::overload_cast<int, int, int, int>(&LossMatrix::at, py::const_), py::arg("pred_from"),
           py::arg("pred_to"), py::arg("truth_from"), py::arg("truth_to"))
      .def("entries", &LossMatrix::entries)
      .def("scaled", &LossMatrix::scaled);

  py::class_<DecodeResult>(m, "DecodeResult")
      .def_readonly("path", &DecodeResult::path)
      .def_readonly("expected_loss", &DecodeResult::expected_loss)
      .def_readonly("per_boundary_loss", &DecodeResult::per_boundary_loss);

  py::class_<RateCount>(m, "RateCount")
      .def_readonly("count", &RateCount::count)
      .def_readonly("denominator", &RateCount::denominator)
      .def_property_readonly("rate", &RateCount::rate);

  py::class_<ErrorReport>(m, "ErrorReport")
      .def_readonly("n", &ErrorReport::n)
      .def_readonly("boundaries", &ErrorReport::boundaries)
      .def_readonly("fpc", &ErrorReport::fpc)
      .def_readonly("fnc", &ErrorReport::fnc)
      .def_readonly("fpt", &ErrorReport::fpt)
      .def_readonly("fnt", &ErrorReport::fnt)
      .def_readonly("dft", &ErrorReport::dft)
      .def_readonly("miscall", &ErrorReport::miscall)
      .def_readonly("truth_segments", &ErrorReport::truth_segments)
      .def_readonly("pred_segments", &ErrorReport::pred_segments)
      .def("csv_row", &ErrorReport::csv_row)
      .def_static("csv_columns", &ErrorReport::csv_columns);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("length", &SimConfig::length)
      .def_readwrite("num_sequences", &SimConfig::num_sequences)
      .def_readwrite("model", &SimConfig::model)
      .def_readwrite("seed", &SimConfig::seed);

  m.def("two_state_cnv_model", &two_state_cnv_model, py::arg("outlier_prob") = 0.01);

  m.def("forward_backward",
        [](const HmmSpec& model, std::vector<double> obs) { return forward_backward(model, obs); },
        py::arg("model"), py::arg("observations"));
  m.def("viterbi", [](const HmmSpec& model, std::vector<double> obs) { return viterbi(model, obs); },
        py::arg("model"), py::arg("observations"));
  m.def("log_joint",
        [](const HmmSpec& model, const StatePath& path, std::vector<double> obs) { return log_joint(model, path, obs); },
        py::arg("model"), py::arg("path"), py::arg("observations"));

  m.def("build_binary_loss_matrix", &build_binary_loss_matrix, py::arg("costs"));
  m.def("build_multistate_loss_matrix", &build_multistate_loss_matrix, py::arg("costs"), py::arg("num_states"));
  m.def("marginal_costs", &marginal_costs, py::arg("fpc"), py::arg("fnc"));
  m.def("expected_loss", &expected_loss, py::arg("prediction"), py::arg("marginals"), py::arg("loss"));

  m.def("decode_markov_loss", &decode_markov_loss, py::arg("marginals"), py::arg("loss"));
  m.def("decode_marginal", &decode_marginal, py::arg("marginals"), py::arg("fpc"), py::arg("fnc"));
  m.def("brute_force_mel", &brute_force_mel, py::arg("marginals"), py::arg("loss"));

  m.def("compare_paths", &compare_paths, py::arg("truth"), py::arg("pred"));
  m.def("extract_segments", [](const StatePath& path) {
    std::vector<std::tuple<std::size_t, std::size_t, int>> out;
    for (const auto& s : extract_segments(path)) out.emplace_back(s.start, s.end, s.state);
    return out;
  }, py::arg("path"));

  m.def("generate_sequence", [](const SimConfig& cfg, std::uint64_t stream) {
    auto s = generate_sequence(cfg, stream);
    return py::make_tuple(s.truth, s.observations);
  }, py::arg("config"), py::arg("stream"));
  m.def("two_arm_grid", &two_arm_grid, py::arg("points") = 13, py::arg("lo") = 0.1, py::arg("hi") = 10.0,
        py::arg("dft") = 1000.0);
  m.def("run_sweep",
        [](const SimConfig& sim, const std::vector<CostSet>& grid, const std::vector<std::string>& decoders,
           bool misspecified, std::size_t threads) {
          SweepSpec spec;
          spec.grid = grid;
          spec.decoders.clear();
          for (const auto& d : decoders) spec.decoders.push_back(parse_decoder(d));
          spec.misspecified_emissions = misspecified;
          std::string csv;
          {
            py::gil_scoped_release release;
            csv = sweep_csv(run_sweep(sim, spec, threads));
          }
          return csv;
        },
        py::arg("sim"), py::arg("grid"), py::arg("decoders") = std::vector<std::string>{"viterbi", "marginal", "markov"},
        py::arg("misspecified_emissions") = false, py::arg("threads") = 1,
        "Runs the sweep and returns the CSV table.");
}
