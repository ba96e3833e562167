#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dstpll/dataset.hpp"
#include "dstpll/error.hpp"
#include "dstpll/evidence.hpp"
#include "dstpll/label_set.hpp"
#include "dstpll/pll.hpp"
#include "dstpll/rng.hpp"

namespace dstpll {

/// Neighborhood label-noise model around a query whose true label is
/// `y_true`. Candidate sets come in three kinds:
///   p1: contain y_true and y_cooccur (but are not the full space),
///   p2: contain y_true but not y_cooccur,
///   p3: miss y_true; the neighbor's own label is uniform inside the set.
/// Within each kind every admissible set is equally likely.
struct NoiseModel {
  std::size_t l = 3;
  Label y_true = 0;
  Label y_cooccur = 1;
  double p1 = 0.4;
  double p2 = 0.35;
  double p3 = 0.25;

  void validate() const {
    if (l < 3) throw Error(ErrorCode::InvalidParameter, "noise model needs l >= 3");
    if (y_true >= l || y_cooccur >= l || y_true == y_cooccur) {
      throw Error(ErrorCode::InvalidParameter, "y_true and y_cooccur must be distinct labels in [0, l)");
    }
    if (!(p3 > 0.0 && p2 >= p3 && p1 >= p2)) throw Error(ErrorCode::InvalidParameter, "need p1 >= p2 >= p3 > 0");
    if (std::abs(p1 + p2 + p3 - 1.0) > 1e-12) throw Error(ErrorCode::InvalidParameter, "p1 + p2 + p3 must be 1");
  }

  /// l = 3, p = (0.4, 0.35, 0.25): the configuration of the expected-belief plot.
  static NoiseModel reference() { return NoiseModel{}; }
};

/// Exact P(S = s, Y = y) under the noise model.
inline double case_probability(const NoiseModel& model, const LabelSet& s, Label y) {
  if (s.width() != model.l) throw Error(ErrorCode::UniverseMismatch, "candidate set width vs model l");
  const int l = static_cast<int>(model.l);
  if (s.empty() || s.is_full()) return 0.0;  // uninformative sets
  if (!s.contains(y)) return 0.0;            // the true label is always a candidate
  if (y != model.y_true && s.contains(model.y_true)) return 0.0;  // y_true is never a false positive
  if (y == model.y_true) {
    if (s.contains(model.y_cooccur)) return model.p1 / (std::ldexp(1.0, l - 2) - 1.0);
    return model.p2 / std::ldexp(1.0, l - 2);
  }
  return model.p3 / ((std::ldexp(1.0, l - 1) - 1.0) * static_cast<double>(s.count()));
}

/// Largest label space whose (set, label) support the sampler enumerates.
inline constexpr std::size_t kMaxSamplerLabels = 16;

/// Draws (candidate set, label) pairs with exactly the case_probability law,
/// by enumerating the support once and inverting its cumulative weights.
class CandidateSampler {
 public:
  explicit CandidateSampler(const NoiseModel& model) : model_(model) {
    model.validate();
    if (model.l > kMaxSamplerLabels) {
      throw Error(ErrorCode::BudgetExceeded, "sampler enumerates 2^l sets; l=" + std::to_string(model.l) +
                                                 " exceeds " + std::to_string(kMaxSamplerLabels));
    }
    std::vector<double> weights;
    const std::uint64_t full = (std::uint64_t{1} << model.l) - 1;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
      LabelSet s(model.l);
      for (Label y = 0; y < model.l; ++y) {
        if ((mask >> y) & 1U) s.insert(y);
      }
      s.for_each([&](Label y) {
        const double p = case_probability(model, s, y);
        if (p > 0.0) {
          support_.emplace_back(s, y);
          weights.push_back(p);
        }
      });
    }
    cumulative_.resize(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cumulative_.begin());
  }

  const NoiseModel& model() const noexcept { return model_; }
  std::span<const std::pair<LabelSet, Label>> support() const noexcept { return support_; }

  const std::pair<LabelSet, Label>& operator()(Rng& rng) const {
    const double u = rng.uniform01() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return support_[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), support_.size() - 1)];
  }

 private:
  NoiseModel model_;
  std::vector<std::pair<LabelSet, Label>> support_;
  std::vector<double> cumulative_;
};

inline std::pair<LabelSet, Label> sample_candidate_set(const NoiseModel& model, Rng& rng) {
  return CandidateSampler(model)(rng);
}

// ---------------------------------------------------------------------------
// Closed-form expected beliefs

/// Default cap on (k+1)^l * k, the work of the nested closed-form sums;
/// admits l = 3 up to k = 60.
inline constexpr double kDefaultClosedFormBudget = 61.0 * 61.0 * 61.0 * 60.0;

namespace detail {

/// log C(n, r) for 0 <= r <= n <= k_max.
class LogBinomials {
 public:
  explicit LogBinomials(std::size_t k_max) : k_max_(k_max), table_((k_max + 1) * (k_max + 1), 0.0L) {
    for (std::size_t n = 0; n <= k_max; ++n) {
      for (std::size_t r = 0; r <= n; ++r) {
        table_[n * (k_max + 1) + r] = std::lgamma(static_cast<long double>(n) + 1) -
                                      std::lgamma(static_cast<long double>(r) + 1) -
                                      std::lgamma(static_cast<long double>(n - r) + 1);
      }
    }
  }
  long double operator()(std::size_t n, std::size_t r) const { return table_[n * (k_max_ + 1) + r]; }

 private:
  std::size_t k_max_;
  std::vector<long double> table_;
};

inline void check_budget(std::size_t l, std::size_t k, double budget) {
  if (k == 0) throw Error(ErrorCode::InvalidParameter, "k must be at least 1");
  const double work = std::pow(static_cast<double>(k + 1), static_cast<double>(l)) * static_cast<double>(k);
  if (work > budget) {
    throw Error(ErrorCode::BudgetExceeded, "closed form for l=" + std::to_string(l) + ", k=" + std::to_string(k) +
                                               " needs ~" + std::to_string(work) + " steps");
  }
}

/// Visits every vector j in [0, n)^m in odometer order.
template <typename F>
void for_each_index_vector(std::size_t m, std::size_t n, F&& f) {
  std::vector<std::size_t> j(m, 0);
  for (;;) {
    f(std::as_const(j));
    std::size_t pos = 0;
    while (pos < m && ++j[pos] == n) j[pos++] = 0;
    if (pos == m) return;
  }
}

/// Sum over h, i, j_1..j_{l-2} of
///   C(k,h) * [sum_{b>=0} (-1)^b C(n,b) C(n-b,i-b) prod_c C(n-b,j_c-b)]
///   * 2^-k * a^i * b^(n-i),      n = k - h,
/// where the bracket counts neighbor set configurations that avoid the full
/// label space. Evaluated term by term in log space; positive and negative
/// inclusion-exclusion terms are accumulated separately.
inline double closed_form_sum(std::size_t l, std::size_t k, double kernel_a, double kernel_b) {
  const LogBinomials lc(k);
  const long double log_a = std::log(static_cast<long double>(kernel_a));
  const long double log_b = std::log(static_cast<long double>(kernel_b));
  const long double log2 = std::log(2.0L);
  long double pos = 0.0L;
  long double neg = 0.0L;
  for (std::size_t h = 0; h < k; ++h) {
    const std::size_t n = k - h;
    for (std::size_t i = 0; i < n; ++i) {
      const long double log_weight = lc(k, h) - static_cast<long double>(k) * log2 +
                                     static_cast<long double>(i) * log_a + static_cast<long double>(n - i) * log_b;
      for_each_index_vector(l - 2, n, [&](const std::vector<std::size_t>& j) {
        std::size_t b_max = i;
        for (std::size_t v : j) b_max = std::min(b_max, v);
        for (std::size_t b = 0; b <= b_max; ++b) {
          long double t = log_weight + lc(n, b) + lc(n - b, i - b);
          for (std::size_t v : j) t += lc(n - b, v - b);
          (b % 2 == 0 ? pos : neg) += std::exp(t);
        }
      });
    }
  }
  return static_cast<double>(pos - neg);
}

}  // namespace detail

/// E[bel({y_true})] for Yager-combined evidence of k neighbors drawn from
/// the noise model (query candidates = whole label space, alpha = 1/2).
inline double expected_belief_true(const NoiseModel& model, std::size_t k, double budget = kDefaultClosedFormBudget) {
  model.validate();
  detail::check_budget(model.l, k, budget);
  const int l = static_cast<int>(model.l);
  return detail::closed_form_sum(model.l, k, model.p1 / (std::ldexp(1.0, l - 2) - 1.0),
                                 model.p2 / std::ldexp(1.0, l - 2));
}

/// E[bel({y_cooccur})], same setting as expected_belief_true.
inline double expected_belief_cooccur(const NoiseModel& model, std::size_t k,
                                      double budget = kDefaultClosedFormBudget) {
  model.validate();
  detail::check_budget(model.l, k, budget);
  const int l = static_cast<int>(model.l);
  return detail::closed_form_sum(model.l, k, model.p1 / (std::ldexp(1.0, l - 2) - 1.0),
                                 model.p3 / (std::ldexp(1.0, l - 1) - 1.0));
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct SimulationResult {
  double mean_true = 0.0;
  double mean_cooccur = 0.0;
  double stderr_true = 0.0;
  double stderr_cooccur = 0.0;
};

/// Averages bel({y_true}) and bel({y_cooccur}) over `trials` independent
/// neighborhoods of k candidate sets drawn from the model and combined as for
/// an unseen query. Trial t uses stream t of `seed`.
inline SimulationResult simulate_expected_belief(const NoiseModel& model, std::size_t k, std::size_t trials,
                                                 std::uint64_t seed) {
  if (trials == 0) throw Error(ErrorCode::InvalidParameter, "trials must be at least 1");
  if (k == 0) throw Error(ErrorCode::InvalidParameter, "k must be at least 1");
  const CandidateSampler sampler(model);
  const LabelSet universe = LabelSet::full(model.l);
  const LabelSet single_true = LabelSet::singleton(model.l, model.y_true);
  const LabelSet single_co = LabelSet::singleton(model.l, model.y_cooccur);
  const Rng root(seed);

  double sum_t = 0.0, sum_tt = 0.0, sum_c = 0.0, sum_cc = 0.0;
  std::vector<Bpa> sources;
  sources.reserve(k);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng = root.split(trial);
    sources.clear();
    for (std::size_t i = 0; i < k; ++i) sources.push_back(neighbor_bpa(universe, sampler(rng).first, 0.5));
    const Bpa m = yager_combine(universe, sources);
    const double bt = belief(m, single_true);
    const double bc = belief(m, single_co);
    sum_t += bt;
    sum_tt += bt * bt;
    sum_c += bc;
    sum_cc += bc * bc;
  }
  const double n = static_cast<double>(trials);
  SimulationResult r;
  r.mean_true = sum_t / n;
  r.mean_cooccur = sum_c / n;
  if (trials > 1) {
    const double var_t = std::max(0.0, (sum_tt - n * r.mean_true * r.mean_true) / (n - 1.0));
    const double var_c = std::max(0.0, (sum_cc - n * r.mean_cooccur * r.mean_cooccur) / (n - 1.0));
    r.stderr_true = std::sqrt(var_t / n);
    r.stderr_cooccur = std::sqrt(var_c / n);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Empirical risk curve

/// Feature geometry for risk_curve. Class c sits at the simplex vertex e_c in
/// d = l dimensions with isotropic Gaussian jitter `sigma`; a training point
/// of class c draws its candidates from the noise model with y_true = c and
/// y_cooccur = (c + 1) mod l. Queries are fresh points of a uniform class c
/// and count as correct when the prediction is c.
struct RiskGeometry {
  double sigma = 0.2;
  std::size_t queries = 500;
};

struct RiskPoint {
  std::size_t n = 0;
  double risk = 0.0;
  double stderr = 0.0;
};

/// The default consistency scenario.
struct RiskScenario {
  NoiseModel model{4, 0, 1, 0.45, 0.45, 0.10};
  std::size_t k = 20;
  std::size_t repetitions = 20;
  std::vector<std::size_t> n_grid{50, 200, 800, 3200};
  RiskGeometry geometry{};
  std::uint64_t seed = 20240601;
};

namespace detail {

struct RiskSample {
  PartialDataset train;  // truth holds each point's own (possibly foreign) label
  std::vector<Label> cluster;
  Matrix queries;
  std::vector<Label> query_class;
};

inline void jitter_point(std::span<double> x, Label c, double sigma, Rng& rng) {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = (j == c ? 1.0 : 0.0) + rng.normal(0.0, sigma);
}

inline RiskSample draw_risk_sample(const NoiseModel& model, std::span<const CandidateSampler> samplers, std::size_t n,
                                   const RiskGeometry& geo, Rng rng) {
  const std::size_t l = model.l;
  RiskSample out;
  out.train.num_labels = l;
  out.train.features = Matrix(n, l);
  out.train.truth.emplace();
  for (std::size_t i = 0; i < n; ++i) {
    const Label c = rng.uniform_index(l);
    jitter_point(out.train.features.row(i), c, geo.sigma, rng);
    const auto& [s, y] = samplers[c](rng);
    out.train.candidates.push_back(s);
    out.train.truth->push_back(y);
    out.cluster.push_back(c);
  }
  out.queries = Matrix(geo.queries, l);
  for (std::size_t q = 0; q < geo.queries; ++q) {
    const Label c = rng.uniform_index(l);
    jitter_point(out.queries.row(q), c, geo.sigma, rng);
    out.query_class.push_back(c);
  }
  return out;
}

inline std::vector<CandidateSampler> class_samplers(const NoiseModel& model) {
  std::vector<CandidateSampler> out;
  for (Label c = 0; c < model.l; ++c) {
    NoiseModel m = model;
    m.y_true = c;
    m.y_cooccur = (c + 1) % model.l;
    out.emplace_back(m);
  }
  return out;
}

}  // namespace detail

/// Mean 0-1 risk of DST-PLL for each training size in `n_grid`, averaged over
/// `repetitions` independent draws. Within a repetition the training sets are
/// nested prefixes of one sample and share the same queries.
inline std::vector<RiskPoint> risk_curve(const NoiseModel& model, std::span<const std::size_t> n_grid, std::size_t k,
                                         std::size_t repetitions, std::uint64_t seed,
                                         const RiskGeometry& geometry = {}) {
  model.validate();
  if (n_grid.empty() || repetitions == 0 || geometry.queries == 0) {
    throw Error(ErrorCode::InvalidParameter, "risk curve needs a grid, repetitions and queries");
  }
  for (std::size_t n : n_grid) {
    if (n < k || k == 0) throw Error(ErrorCode::KTooLarge, "grid size " + std::to_string(n) + " below k");
  }
  const std::size_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
  const auto samplers = detail::class_samplers(model);
  const LabelSet universe = LabelSet::full(model.l);

  std::vector<std::vector<double>> errors(n_grid.size());
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    const auto sample = detail::draw_risk_sample(model, samplers, n_max, geometry, Rng(seed).split(rep));
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
      std::vector<std::size_t> prefix(n_grid[g]);
      for (std::size_t i = 0; i < prefix.size(); ++i) prefix[i] = i;
      PllConfig cfg;
      cfg.k = k;
      cfg.seed = mix64(seed ^ rep);
      const auto pll = PllModel::fit(sample.train.subset(prefix), cfg);
      std::size_t wrong = 0;
      for (std::size_t q = 0; q < sample.queries.rows(); ++q) {
        wrong += pll.predict(sample.queries.row(q), universe, q).label != sample.query_class[q] ? 1 : 0;
      }
      errors[g].push_back(static_cast<double>(wrong) / static_cast<double>(sample.queries.rows()));
    }
  }

  std::vector<RiskPoint> out;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const auto& e = errors[g];
    const double n = static_cast<double>(e.size());
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : e) var += (v - mean) * (v - mean);
    const double se = e.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    out.push_back({n_grid[g], mean, se});
  }
  return out;
}

inline std::vector<RiskPoint> risk_curve(const RiskScenario& sc) {
  return risk_curve(sc.model, sc.n_grid, sc.k, sc.repetitions, sc.seed, sc.geometry);
}

/// Fraction of fresh queries whose k nearest training points (n of them,
/// noiseless) all come from the query's own cluster.
inline double neighborhood_homogeneity(std::size_t l, std::size_t n, std::size_t k, const RiskGeometry& geo,
                                       std::uint64_t seed) {
  Rng rng(seed);
  Matrix train(n, l);
  std::vector<Label> cls;
  for (std::size_t i = 0; i < n; ++i) {
    cls.push_back(rng.uniform_index(l));
    detail::jitter_point(train.row(i), cls.back(), geo.sigma, rng);
  }
  const auto tree = BallTree::build(train);
  std::vector<double> x(l);
  std::size_t homogeneous = 0;
  for (std::size_t q = 0; q < geo.queries; ++q) {
    const Label c = rng.uniform_index(l);
    detail::jitter_point(x, c, geo.sigma, rng);
    bool same = true;
    for (const auto& nb : tree.query(x, k)) same = same && cls[nb.index] == c;
    homogeneous += same ? 1 : 0;
  }
  return static_cast<double>(homogeneous) / static_cast<double>(geo.queries);
}

}  // namespace dstpll
