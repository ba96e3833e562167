#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "dstpll/dataset.hpp"
#include "dstpll/error.hpp"
#include "dstpll/neighbors.hpp"
#include "dstpll/pll.hpp"

namespace dstpll {

/// Square table of counts indexed [true class][predicted class].
class CountMatrix {
 public:
  CountMatrix() = default;
  explicit CountMatrix(std::size_t l) : l_(l), counts_(l * l, 0) {}

  std::size_t size() const noexcept { return l_; }
  std::size_t& at(std::size_t t, std::size_t p) { return counts_[t * l_ + p]; }
  std::size_t at(std::size_t t, std::size_t p) const { return counts_[t * l_ + p]; }

  std::size_t total() const {
    std::size_t s = 0;
    for (auto c : counts_) s += c;
    return s;
  }
  std::size_t trace() const {
    std::size_t s = 0;
    for (std::size_t k = 0; k < l_; ++k) s += at(k, k);
    return s;
  }
  std::size_t row_sum(std::size_t t) const {
    std::size_t s = 0;
    for (std::size_t p = 0; p < l_; ++p) s += at(t, p);
    return s;
  }
  std::size_t col_sum(std::size_t p) const {
    std::size_t s = 0;
    for (std::size_t t = 0; t < l_; ++t) s += at(t, p);
    return s;
  }

  friend bool operator==(const CountMatrix&, const CountMatrix&) = default;

 private:
  std::size_t l_ = 0;
  std::vector<std::size_t> counts_;
};

inline CountMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted, std::size_t l) {
  if (truth.size() != predicted.size() || truth.empty()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(truth.size()) + " truths vs " +
                                               std::to_string(predicted.size()) + " predictions");
  }
  CountMatrix m(l);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= l || predicted[i] >= l) throw Error(ErrorCode::UniverseMismatch, "label outside [0, l)");
    ++m.at(truth[i], predicted[i]);
  }
  return m;
}

inline double accuracy(const CountMatrix& m) {
  const auto s = m.total();
  return s == 0 ? 0.0 : static_cast<double>(m.trace()) / static_cast<double>(s);
}

/// Multiclass Matthews correlation (covariance form):
///   (c*s - sum_k p_k t_k) / sqrt((s^2 - sum_k p_k^2) (s^2 - sum_k t_k^2))
/// with c the trace, s the total and t_k / p_k the true / predicted class
/// totals. Zero when the denominator vanishes.
inline double mcc(const CountMatrix& m) {
  const double s = static_cast<double>(m.total());
  const double c = static_cast<double>(m.trace());
  double pt = 0.0, pp = 0.0, tt = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double t = static_cast<double>(m.row_sum(k));
    const double p = static_cast<double>(m.col_sum(k));
    pt += p * t;
    pp += p * p;
    tt += t * t;
  }
  const double den = (s * s - pp) * (s * s - tt);
  if (den <= 0.0) return 0.0;
  return std::clamp((c * s - pt) / std::sqrt(den), -1.0, 1.0);
}

struct EvalReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  double mcc = 0.0;
  double frac_confident = 0.0;
  double mcc_confident = 0.0;
  double accuracy_confident = 0.0;
  std::size_t n_confident = 0;
  CountMatrix counts;
  CountMatrix confident_counts;

  /// Column order of csv_row().
  static std::string csv_header() {
    return "n,accuracy,mcc,frac_confident,mcc_confident,accuracy_confident,n_confident";
  }
};

/// Scores all predictions, and separately the confident subset (whose
/// metrics are 0 when nothing is confident).
inline EvalReport evaluate(std::span<const Label> truth, std::span<const Prediction> predictions, std::size_t l) {
  if (truth.size() != predictions.size() || truth.empty()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(truth.size()) + " truths vs " +
                                               std::to_string(predictions.size()) + " predictions");
  }
  EvalReport r;
  r.n = truth.size();
  r.counts = CountMatrix(l);
  r.confident_counts = CountMatrix(l);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= l || predictions[i].label >= l) throw Error(ErrorCode::UniverseMismatch, "label outside [0, l)");
    ++r.counts.at(truth[i], predictions[i].label);
    if (predictions[i].confident) ++r.confident_counts.at(truth[i], predictions[i].label);
  }
  r.accuracy = accuracy(r.counts);
  r.mcc = mcc(r.counts);
  r.n_confident = r.confident_counts.total();
  r.frac_confident = static_cast<double>(r.n_confident) / static_cast<double>(r.n);
  if (r.n_confident > 0) {
    r.accuracy_confident = accuracy(r.confident_counts);
    r.mcc_confident = mcc(r.confident_counts);
  }
  return r;
}

/// O_beta = beta * max(0, o_perf) + (1 - beta) * o_frac.
inline double tradeoff(double o_perf, double o_frac, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorCode::BetaOutOfRange, "beta=" + std::to_string(beta));
  if (!(o_frac >= 0.0 && o_frac <= 1.0) || !(o_perf >= -1.0 && o_perf <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "trade-off operands out of range");
  }
  return beta * std::max(0.0, o_perf) + (1.0 - beta) * o_frac;
}

/// Entry [t][y]: over instances with true class t, how often label y appears
/// in the candidate sets of their k nearest neighbors (the instance itself
/// excluded).
inline CountMatrix cooccurrence_matrix(const PartialDataset& ds, std::size_t k) {
  if (!ds.truth) throw Error(ErrorCode::TruthMissing, "co-occurrence counts need ground truth");
  if (ds.size() == 0 || k > ds.size() - 1) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " with " + std::to_string(ds.size()) + " rows");
  }
  const auto tree = BallTree::build(ds.features);
  CountMatrix m(ds.num_labels);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Label t = (*ds.truth)[i];
    for (const auto& nb : tree.query(ds.features.row(i), k, i)) {
      ds.candidates[nb.index].for_each([&](Label y) { ++m.at(t, y); });
    }
  }
  return m;
}

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Two-sided paired t-test on per-fold scores.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw Error(ErrorCode::LengthMismatch, "paired t-test needs >= 2 pairs");
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double var = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) var += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
  var /= (n - 1.0);
  TTestResult r;
  r.df = n - 1.0;
  if (var == 0.0) {
    r.t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
    r.p_value = mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = mean / std::sqrt(var / n);
  const boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

}  // namespace dstpll
