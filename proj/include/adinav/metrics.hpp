#ifndef ADINAV_METRICS_HPP
#define ADINAV_METRICS_HPP

// Pixel-level road segmentation metrics and the scale-invariant log depth
// error. All counts run over the evaluation mask only; degenerate ratios
// (zero denominators) evaluate to 0 and raise a flag.

#include "adinav/common.hpp"

#include <cstdint>
#include <span>

namespace adinav::metrics {

using BinaryMap = Grid<std::uint8_t>;  // nonzero = road / evaluated

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

/// Throws ShapeMismatch. `mask` may be null (all pixels evaluated).
ConfusionCounts confusion(const BinaryMap& pred, const BinaryMap& gt, const BinaryMap* mask = nullptr);

struct RatioMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  bool degenerate = false;  // some denominator was zero
};

RatioMetrics metrics_from_counts(const ConfusionCounts& c);

/// Road scores in [0, 1].
using ScoreMap = Grid<double>;

enum class SweepMode { automatic, exact, quantile };

struct SweepResult {
  double max_f = 0.0;             // [0, 1]
  double average_precision = 0.0; // [0, 1]
  /// Score threshold of the best F1 (road iff score >= threshold).
  double threshold = 0.0;
  RatioMetrics at_best;           // metrics at `threshold`
  ConfusionCounts counts_at_best;
  bool exact = true;              // every distinct score was tried
  bool single_class = false;      // ground truth has one class only
};

inline constexpr std::size_t kExactSweepLimit = 100000;
inline constexpr std::size_t kQuantileThresholds = 1000;

/// Threshold sweep: every distinct score plus 0 and 1 (exact), or 1000
/// quantile thresholds once more than kExactSweepLimit pixels with more than
/// kQuantileThresholds distinct scores are evaluated.
/// AP is the mean over recall levels {0, 0.1, ..., 1} of the best precision
/// reached at recall >= level. Throws ShapeMismatch, InvalidArgument (scores
/// outside [0, 1]).
SweepResult max_f_and_ap(const ScoreMap& scores, const BinaryMap& gt, const BinaryMap* mask = nullptr,
                         SweepMode mode = SweepMode::automatic);

/// Counts when classifying road iff score >= threshold.
ConfusionCounts counts_at_threshold(const ScoreMap& scores, const BinaryMap& gt, const BinaryMap* mask,
                                    double threshold);

/// 100 * [ mean(d^2) - mean(d)^2 ],  d = ln(pred) - ln(gt), over mask pixels.
/// Throws NonPositiveDepth, ShapeMismatch, InvalidArgument (empty mask).
double silog(const Grid<double>& pred, const Grid<double>& gt, const BinaryMap* mask = nullptr);

/// Sample form used when masks are implicit (gt > 0).
double silog(std::span<const double> pred, std::span<const double> gt);

}  // namespace adinav::metrics

#endif  // ADINAV_METRICS_HPP
