#include "adinav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace adinav::metrics {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

namespace {

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": shapes differ");
}

double ratio(std::uint64_t num, std::uint64_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts confusion(const BinaryMap& pred, const BinaryMap& gt, const BinaryMap* mask) {
  require_same_shape(pred, gt, "confusion");
  if (mask != nullptr) require_same_shape(pred, *mask, "confusion mask");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask != nullptr && mask->data[i] == 0) continue;
    const bool p = pred.data[i] != 0;
    const bool g = gt.data[i] != 0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

RatioMetrics metrics_from_counts(const ConfusionCounts& c) {
  RatioMetrics m;
  m.precision = ratio(c.tp, c.tp + c.fp, m.degenerate);
  m.recall = ratio(c.tp, c.tp + c.fn, m.degenerate);
  m.fpr = ratio(c.fp, c.fp + c.tn, m.degenerate);
  m.fnr = ratio(c.fn, c.fn + c.tp, m.degenerate);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.degenerate = true;
  }
  return m;
}

ConfusionCounts counts_at_threshold(const ScoreMap& scores, const BinaryMap& gt, const BinaryMap* mask,
                                    double threshold) {
  require_same_shape(scores, gt, "threshold counts");
  BinaryMap pred(scores.rows, scores.cols, 0);
  for (std::size_t i = 0; i < scores.size(); ++i) pred.data[i] = scores.data[i] >= threshold ? 1 : 0;
  return confusion(pred, gt, mask);
}

SweepResult max_f_and_ap(const ScoreMap& scores, const BinaryMap& gt, const BinaryMap* mask, SweepMode mode) {
  require_same_shape(scores, gt, "max_f_and_ap");
  if (mask != nullptr) require_same_shape(scores, *mask, "max_f_and_ap mask");

  std::vector<std::pair<double, bool>> px;  // (score, is_road)
  px.reserve(scores.size());
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mask != nullptr && mask->data[i] == 0) continue;
    const double s = scores.data[i];
    if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorCode::InvalidArgument, "road scores must lie in [0, 1]");
    const bool road = gt.data[i] != 0;
    positives += road ? 1 : 0;
    px.emplace_back(s, road);
  }
  const std::uint64_t negatives = px.size() - positives;
  std::sort(px.begin(), px.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  SweepResult out;
  out.single_class = positives == 0 || negatives == 0;
  std::size_t distinct = px.empty() ? 0 : 1;
  for (std::size_t i = 1; i < px.size(); ++i) distinct += px[i].first != px[i - 1].first ? 1 : 0;
  const bool exact = mode == SweepMode::exact ||
                     (mode == SweepMode::automatic && (px.size() <= kExactSweepLimit || distinct <= kQuantileThresholds));
  out.exact = exact;

  // Candidate thresholds, descending.
  std::vector<double> thresholds{1.0, 0.0};
  if (exact) {
    for (const auto& p : px) thresholds.push_back(p.first);
  } else if (!px.empty()) {
    const std::size_t n = px.size();
    for (std::size_t j = 0; j < kQuantileThresholds; ++j) {
      // px is descending; index from the ascending end.
      const std::size_t asc = j * (n - 1) / (kQuantileThresholds - 1);
      thresholds.push_back(px[n - 1 - asc].first);
    }
  }
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<std::pair<double, double>> operating;  // (recall, precision)
  operating.reserve(thresholds.size());
  std::size_t k = 0;
  ConfusionCounts c;
  c.fn = positives;
  c.tn = negatives;
  bool have_best = false;
  for (double thr : thresholds) {
    while (k < px.size() && px[k].first >= thr) {
      if (px[k].second) {
        ++c.tp;
        --c.fn;
      } else {
        ++c.fp;
        --c.tn;
      }
      ++k;
    }
    const RatioMetrics m = metrics_from_counts(c);
    operating.emplace_back(m.recall, m.precision);
    if (!have_best || m.f1 > out.max_f) {
      have_best = true;
      out.max_f = m.f1;
      out.threshold = thr;
      out.at_best = m;
      out.counts_at_best = c;
    }
  }

  double ap = 0.0;
  for (int level = 0; level <= 10; ++level) {
    const double r = level / 10.0;
    double best = 0.0;
    for (const auto& [rec, prec] : operating) {
      if (rec >= r) best = std::max(best, prec);
    }
    ap += best;
  }
  out.average_precision = ap / 11.0;
  return out;
}

double silog(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::ShapeMismatch, "silog: sample counts differ");
  if (pred.empty()) throw Error(ErrorCode::InvalidArgument, "silog: no samples");
  std::vector<double> d(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(pred[i] > 0.0 && gt[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveDepth, "silog: depths must be positive");
    }
    d[i] = std::log(pred[i]) - std::log(gt[i]);
  }
  const double n = static_cast<double>(d.size());
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= n;
  // Two-pass variance: equals mean(d^2) - mean(d)^2 without the cancellation.
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  return 100.0 * var / n;
}

double silog(const Grid<double>& pred, const Grid<double>& gt, const BinaryMap* mask) {
  require_same_shape(pred, gt, "silog");
  if (mask != nullptr) require_same_shape(pred, *mask, "silog mask");
  std::vector<double> p, g;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask != nullptr && mask->data[i] == 0) continue;
    p.push_back(pred.data[i]);
    g.push_back(gt.data[i]);
  }
  return silog(p, g);
}

}  // namespace adinav::metrics
