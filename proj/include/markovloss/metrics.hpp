#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "markovloss/hmm.hpp"

namespace markovloss {

struct RateCount {
  std::size_t count = 0;
  std::size_t denominator = 0;

  double rate() const { return denominator == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(denominator); }
};

/// Error taxonomy of a prediction against the truth.
///
/// Call errors are per position over all n positions: fpc is rated over
/// truth-null positions, fnc over truth-non-null positions. Transition errors
/// are per boundary: fpt over boundaries where the truth does not transition,
/// fnt and dft over boundaries where it does. A boundary contributes to at
/// most one of fpt, fnt, dft.
struct ErrorReport {
  std::size_t n = 0;
  std::size_t boundaries = 0;
  RateCount fpc;
  RateCount fnc;
  RateCount fpt;
  RateCount fnt;
  RateCount dft;
  std::size_t miscall = 0;
  std::size_t truth_segments = 0;  // non-null runs
  std::size_t pred_segments = 0;

  static const std::vector<std::string>& csv_columns();
  /// Flat CSV row in csv_columns() order; rates printed with 17 significant digits.
  std::string csv_row() const;
};

/// Maximal constant run; 1-based half-open [start, end).
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;
  int state = 0;

  bool operator==(const Segment&) const = default;
};

ErrorReport compare_paths(const StatePath& truth, const StatePath& pred);

std::vector<Segment> extract_segments(const StatePath& path);

/// Micro-average: pooled counts over pooled denominators.
ErrorReport aggregate_reports(std::span<const ErrorReport> reports);

}  // namespace markovloss
