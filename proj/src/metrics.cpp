#include "markovloss/metrics.hpp"

#include <cstdio>

#include "markovloss/errors.hpp"

namespace markovloss {
namespace {

std::size_t non_null_runs(const StatePath& path) {
  std::size_t runs = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] != 0 && (i == 0 || path[i - 1] != path[i])) ++runs;
  }
  return runs;
}

std::string format_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void pool(RateCount& into, const RateCount& from) {
  into.count += from.count;
  into.denominator += from.denominator;
}

}  // namespace

const std::vector<std::string>& ErrorReport::csv_columns() {
  static const std::vector<std::string> cols = {
      "n",         "boundaries", "fpc_count", "fpc_rate",      "fnc_count",      "fnc_rate",
      "fpt_count", "fpt_rate",   "fnt_count", "fnt_rate",      "dft_count",      "dft_rate",
      "miscall_count", "truth_segments", "pred_segments"};
  return cols;
}

std::string ErrorReport::csv_row() const {
  std::string row = std::to_string(n) + "," + std::to_string(boundaries);
  for (const RateCount* rc : {&fpc, &fnc, &fpt, &fnt, &dft}) {
    row += "," + std::to_string(rc->count) + "," + format_rate(rc->rate());
  }
  row += "," + std::to_string(miscall) + "," + std::to_string(truth_segments) + "," + std::to_string(pred_segments);
  return row;
}

ErrorReport compare_paths(const StatePath& truth, const StatePath& pred) {
  if (truth.empty()) throw InputError("cannot compare empty paths");
  if (truth.size() != pred.size()) {
    throw InputError("truth has " + std::to_string(truth.size()) + " positions, prediction has " +
                     std::to_string(pred.size()));
  }
  ErrorReport r;
  r.n = truth.size();
  r.boundaries = r.n - 1;
  for (std::size_t i = 0; i < r.n; ++i) {
    const int t = truth[i];
    const int p = pred[i];
    if (t == 0) {
      ++r.fpc.denominator;
      if (p != 0) ++r.fpc.count;
    } else {
      ++r.fnc.denominator;
      if (p == 0) ++r.fnc.count;
      else if (p != t) ++r.miscall;
    }
  }
  for (std::size_t i = 0; i + 1 < r.n; ++i) {
    const bool t_moves = truth[i] != truth[i + 1];
    const bool p_moves = pred[i] != pred[i + 1];
    if (t_moves) {
      ++r.fnt.denominator;
      ++r.dft.denominator;
      if (!p_moves) ++r.fnt.count;
      else if (pred[i] != truth[i] || pred[i + 1] != truth[i + 1]) ++r.dft.count;
    } else {
      ++r.fpt.denominator;
      if (p_moves) ++r.fpt.count;
    }
  }
  r.truth_segments = non_null_runs(truth);
  r.pred_segments = non_null_runs(pred);
  return r;
}

std::vector<Segment> extract_segments(const StatePath& path) {
  std::vector<Segment> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= path.size(); ++i) {
    if (i == path.size() || path[i] != path[start]) {
      out.push_back(Segment{start + 1, i + 1, path[start]});
      start = i;
    }
  }
  return out;
}

ErrorReport aggregate_reports(std::span<const ErrorReport> reports) {
  if (reports.empty()) throw InputError("no reports to aggregate");
  ErrorReport total;
  for (const auto& r : reports) {
    total.n += r.n;
    total.boundaries += r.boundaries;
    pool(total.fpc, r.fpc);
    pool(total.fnc, r.fnc);
    pool(total.fpt, r.fpt);
    pool(total.fnt, r.fnt);
    pool(total.dft, r.dft);
    total.miscall += r.miscall;
    total.truth_segments += r.truth_segments;
    total.pred_segments += r.pred_segments;
  }
  return total;
}

}  // namespace markovloss
