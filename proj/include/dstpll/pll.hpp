#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dstpll/dataset.hpp"
#include "dstpll/error.hpp"
#include "dstpll/evidence.hpp"
#include "dstpll/label_set.hpp"
#include "dstpll/neighbors.hpp"
#include "dstpll/rng.hpp"

namespace dstpll {

/// How a label is drawn when no singleton in the query's candidate set has
/// positive belief.
enum class Case2Mode {
  /// Uniform over the smallest subset of s~ attaining maximal belief.
  Literal,
  /// Uniform over the heaviest focal subset of s~ (smallest on ties).
  SmallestFocal,
};

enum class DecisionCase { SingletonBelief, SubsetFallback };

struct PllConfig {
  std::size_t k = 10;
  double alpha = 0.5;  // mass kept on s~ by partially overlapping neighbors
  std::uint64_t seed = 0;
  Case2Mode case2_mode = Case2Mode::Literal;
};

struct Prediction {
  Label label = 0;
  bool confident = false;
  std::optional<Bpa> bpa;  // combined evidence; empty for the majority-vote baseline
  DecisionCase decision_case = DecisionCase::SingletonBelief;
};

/// Plausibility within this distance below the best singleton belief still
/// counts as "at least as plausible".
inline constexpr double kConfidenceTieTolerance = 1e-12;

/// Evidence one neighbor with candidates `s_i` lends to a query with
/// candidates `s_tilde`: vacuous on s~ when s_i covers or misses s~
/// entirely, otherwise alpha on s~ and 1 - alpha on s~ & s_i.
inline Bpa neighbor_bpa(const LabelSet& s_tilde, const LabelSet& s_i, double alpha = 0.5) {
  if (s_tilde.empty() || s_i.empty()) throw Error(ErrorCode::EmptyCandidateSet, "neighbor evidence from an empty set");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidParameter, "alpha must lie in (0,1)");
  const std::size_t l = s_tilde.width();
  if (s_tilde.is_subset_of(s_i) || !s_tilde.intersects(s_i)) return bpa_from_focal(l, {{s_tilde, 1.0}});
  return bpa_from_focal(l, {{s_tilde, alpha}, {s_tilde & s_i, 1.0 - alpha}});
}

/// Confidence test: the labels whose singleton plausibility reaches the best
/// singleton belief within s~ must be exactly {label}.
inline bool is_confident(const Bpa& bpa, const LabelSet& s_tilde, Label label) {
  if (s_tilde.width() != bpa.universe_size()) throw Error(ErrorCode::UniverseMismatch, "s~ width");
  const std::size_t l = bpa.universe_size();
  double max_bel = 0.0;
  s_tilde.for_each([&](Label y) { max_bel = std::max(max_bel, belief(bpa, LabelSet::singleton(l, y))); });
  for (Label y = 0; y < l; ++y) {
    const bool dominant = plausibility(bpa, LabelSet::singleton(l, y)) >= max_bel - kConfidenceTieTolerance;
    if (dominant != (y == label)) return false;
  }
  return true;
}

/// Lazy instance-based DST-PLL classifier: fit stores the training set in a
/// ball tree; all inference happens per query.
class PllModel {
 public:
  static PllModel fit(const PartialDataset& train, const PllConfig& config) {
    if (config.k == 0 || config.k > train.size()) {
      throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(config.k) + " with " + std::to_string(train.size()) +
                                            " training rows");
    }
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw Error(ErrorCode::InvalidParameter, "alpha must lie in (0,1)");
    for (std::size_t i = 0; i < train.size(); ++i) {
      const auto& s = train.candidates[i];
      if (s.width() != train.num_labels) throw Error(ErrorCode::UniverseMismatch, "row " + std::to_string(i));
      if (s.empty()) throw Error(ErrorCode::EmptyCandidateSet, "training row " + std::to_string(i));
      if (s.is_full()) {
        throw Error(ErrorCode::InvalidParameter,
                    "training row " + std::to_string(i) + " lists every label as a candidate");
      }
    }
    PllModel m;
    m.tree_ = BallTree::build(train.features);
    m.candidates_ = train.candidates;
    m.num_labels_ = train.num_labels;
    m.config_ = config;
    return m;
  }

  const PllConfig& config() const noexcept { return config_; }
  std::size_t num_labels() const noexcept { return num_labels_; }
  const BallTree& tree() const noexcept { return tree_; }
  std::span<const LabelSet> candidates() const noexcept { return candidates_; }

  LabelSet universe() const { return LabelSet::full(num_labels_); }

  std::vector<Neighbor> neighbors(std::span<const double> x, std::optional<std::size_t> exclude = std::nullopt) const {
    return tree_.query(x, config_.k, exclude);
  }

  /// Combined evidence over the k nearest neighbors; conflict lands on s~.
  Bpa combined_bpa(std::span<const double> x, const LabelSet& s_tilde,
                   std::optional<std::size_t> exclude = std::nullopt) const {
    check_query(s_tilde);
    const auto nn = neighbors(x, exclude);
    std::vector<Bpa> sources;
    sources.reserve(nn.size());
    for (const auto& n : nn) sources.push_back(neighbor_bpa(s_tilde, candidates_[n.index], config_.alpha));
    return yager_combine(s_tilde, sources);
  }

  /// `query_index` selects the random stream used by the fallback case, so a
  /// batch gives the same answers in any order.
  Prediction predict(std::span<const double> x, const LabelSet& s_tilde, std::uint64_t query_index = 0,
                     std::optional<std::size_t> exclude = std::nullopt) const {
    Bpa m = combined_bpa(x, s_tilde, exclude);
    return decide(std::move(m), s_tilde, query_index);
  }

  /// Unseen test instance: s~ is the whole label space.
  Prediction predict(std::span<const double> x, std::uint64_t query_index = 0) const {
    return predict(x, universe(), query_index);
  }

  /// Decision rule applied to an already combined BPA.
  Prediction decide(Bpa m, const LabelSet& s_tilde, std::uint64_t query_index) const {
    const std::size_t l = num_labels_;
    Prediction out;
    double best = 0.0;
    s_tilde.for_each([&](Label y) {
      const double b = belief(m, LabelSet::singleton(l, y));
      if (b > best) {
        best = b;
        out.label = y;
      }
    });
    if (best > 0.0) {
      out.decision_case = DecisionCase::SingletonBelief;
      out.confident = is_confident(m, s_tilde, out.label);
    } else {
      out.decision_case = DecisionCase::SubsetFallback;
      out.confident = false;
      const LabelSet pool = fallback_subset(m, s_tilde);
      Rng rng = Rng(config_.seed).split(query_index);
      const auto members = pool.labels();
      out.label = members[rng.uniform_index(members.size())];
    }
    out.bpa = std::move(m);
    return out;
  }

  /// Majority-vote baseline over the same neighbors: score(y) counts neighbors
  /// listing y, for y in s~; confident when the winner holds more than half
  /// of all votes.
  Prediction plknn_predict(std::span<const double> x, const LabelSet& s_tilde,
                           std::optional<std::size_t> exclude = std::nullopt) const {
    check_query(s_tilde);
    const auto nn = neighbors(x, exclude);
    std::vector<std::size_t> score(num_labels_, 0);
    std::size_t total = 0;
    for (const auto& n : nn) {
      s_tilde.for_each([&](Label y) {
        if (candidates_[n.index].contains(y)) {
          ++score[y];
          ++total;
        }
      });
    }
    Prediction out;
    if (total == 0) {
      out.label = s_tilde.first();
      out.confident = false;
      out.decision_case = DecisionCase::SubsetFallback;
      return out;
    }
    std::size_t best = 0;
    s_tilde.for_each([&](Label y) {
      if (score[y] > best) {
        best = score[y];
        out.label = y;
      }
    });
    out.confident = 2 * best > total;
    out.decision_case = DecisionCase::SingletonBelief;
    return out;
  }

  Prediction plknn_predict(std::span<const double> x) const { return plknn_predict(x, universe()); }

 private:
  void check_query(const LabelSet& s_tilde) const {
    if (s_tilde.width() != num_labels_) {
      throw Error(ErrorCode::UniverseMismatch, "query candidate set has width " + std::to_string(s_tilde.width()));
    }
    if (s_tilde.empty()) throw Error(ErrorCode::EmptyCandidateSet, "query candidate set is empty");
  }

  LabelSet fallback_subset(const Bpa& m, const LabelSet& s_tilde) const {
    if (config_.case2_mode == Case2Mode::Literal) {
      // bel is monotone, so the maximum over non-empty A within s~ is bel(s~);
      // the smallest A reaching it is the union of the focal sets inside s~.
      LabelSet u(num_labels_);
      for (const auto& f : m.focal()) {
        if (f.set.is_subset_of(s_tilde)) u |= f.set;
      }
      return u.empty() ? s_tilde : u;
    }
    const FocalElement* pick = nullptr;
    for (const auto& f : m.focal()) {
      if (!f.set.is_subset_of(s_tilde)) continue;
      // focal() is sorted by cardinality first, so strict > keeps the smallest on ties
      if (pick == nullptr || f.mass > pick->mass) pick = &f;
    }
    return pick ? pick->set : s_tilde;
  }

  BallTree tree_;
  std::vector<LabelSet> candidates_;
  std::size_t num_labels_ = 0;
  PllConfig config_;
};

}  // namespace dstpll
