#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dstpll/error.hpp"
#include "dstpll/label_set.hpp"

namespace dstpll {

/// Allowed |sum of masses - 1| when constructing a BPA.
inline constexpr double kMassTolerance = 1e-9;
/// Combined focal sets lighter than this are dropped before renormalizing.
inline constexpr double kMassDust = 1e-15;

struct FocalElement {
  LabelSet set;
  double mass = 0.0;

  friend bool operator==(const FocalElement&, const FocalElement&) = default;
};

/// Sparse basic probability assignment over the subsets of a label universe.
///
/// Only focal sets (strictly positive mass) are stored, sorted by LabelSet's
/// canonical order. m(empty) is always zero and the masses sum to one.
/// Instances are immutable once built.
class Bpa {
 public:
  std::size_t universe_size() const noexcept { return universe_size_; }
  std::span<const FocalElement> focal() const noexcept { return focal_; }
  std::size_t size() const noexcept { return focal_.size(); }

  /// m(a); zero for non-focal sets.
  double mass(const LabelSet& a) const {
    auto it = std::lower_bound(focal_.begin(), focal_.end(), a,
                               [](const FocalElement& f, const LabelSet& s) { return f.set < s; });
    return (it != focal_.end() && it->set == a) ? it->mass : 0.0;
  }

  friend bool operator==(const Bpa&, const Bpa&) = default;

 private:
  Bpa(std::size_t universe_size, std::vector<FocalElement> sorted)
      : universe_size_(universe_size), focal_(std::move(sorted)) {}

  friend Bpa bpa_from_focal(std::size_t, std::vector<FocalElement>);
  friend Bpa yager_combine(const LabelSet&, std::span<const Bpa>);

  std::size_t universe_size_ = 0;
  std::vector<FocalElement> focal_;
};

/// Validating constructor. Masses within kMassTolerance of summing to one are
/// renormalized to sum exactly (up to rounding) to one.
inline Bpa bpa_from_focal(std::size_t universe_size, std::vector<FocalElement> entries) {
  if (entries.empty()) throw Error(ErrorCode::MassNotNormalized, "no focal sets given");
  double total = 0.0;
  for (const auto& e : entries) {
    if (e.set.width() != universe_size) {
      throw Error(ErrorCode::UniverseMismatch, "focal set " + e.set.to_string() + " has width " +
                                                   std::to_string(e.set.width()) + ", expected " +
                                                   std::to_string(universe_size));
    }
    if (e.set.empty()) throw Error(ErrorCode::EmptyFocalSet, "the empty set cannot carry mass");
    if (!(e.mass > 0.0) || !std::isfinite(e.mass)) {
      throw Error(ErrorCode::NonPositiveMass, "mass " + std::to_string(e.mass) + " on " + e.set.to_string());
    }
    total += e.mass;
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.set < b.set; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].set == entries[i - 1].set) {
      throw Error(ErrorCode::DuplicateFocalSet, "focal set " + entries[i].set.to_string() + " listed twice");
    }
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw Error(ErrorCode::MassNotNormalized, "masses sum to " + std::to_string(total));
  }
  for (auto& e : entries) e.mass /= total;
  return Bpa(universe_size, std::move(entries));
}

/// m(universe) = 1: total ignorance, the identity of combination.
inline Bpa vacuous_bpa(std::size_t universe_size) {
  return bpa_from_focal(universe_size, {{LabelSet::full(universe_size), 1.0}});
}

namespace detail {
inline void check_universe(const Bpa& bpa, const LabelSet& a) {
  if (a.width() != bpa.universe_size()) {
    throw Error(ErrorCode::UniverseMismatch, "query set width " + std::to_string(a.width()) +
                                                 " vs universe " + std::to_string(bpa.universe_size()));
  }
}
}  // namespace detail

/// bel(A): total mass of focal sets contained in A.
inline double belief(const Bpa& bpa, const LabelSet& a) {
  detail::check_universe(bpa, a);
  double sum = 0.0;
  for (const auto& f : bpa.focal()) {
    if (f.set.is_subset_of(a)) sum += f.mass;
  }
  return std::min(sum, 1.0);
}

/// pl(A): total mass of focal sets meeting A.
inline double plausibility(const Bpa& bpa, const LabelSet& a) {
  detail::check_universe(bpa, a);
  double sum = 0.0;
  for (const auto& f : bpa.focal()) {
    if (f.set.intersects(a)) sum += f.mass;
  }
  return std::min(sum, 1.0);
}

namespace detail {

inline void check_sources(const LabelSet& universe, std::span<const Bpa> sources) {
  if (sources.empty()) throw Error(ErrorCode::EmptySourceList, "nothing to combine");
  for (const auto& src : sources) {
    if (src.universe_size() != universe.width()) {
      throw Error(ErrorCode::UniverseMismatch, "source over " + std::to_string(src.universe_size()) +
                                                   " labels, universe has " + std::to_string(universe.width()));
    }
    for (const auto& f : src.focal()) {
      if (!f.set.is_subset_of(universe)) {
        throw Error(ErrorCode::UniverseMismatch,
                    "focal set " + f.set.to_string() + " leaves the frame " + universe.to_string());
      }
    }
  }
}

inline bool focal_less(const Bpa& a, const Bpa& b) {
  const auto fa = a.focal();
  const auto fb = b.focal();
  return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(), fb.end(),
                                      [](const FocalElement& x, const FocalElement& y) {
                                        if (x.set == y.set) return x.mass < y.mass;
                                        return x.set < y.set;
                                      });
}

}  // namespace detail

/// Yager's k-ary rule: q(A) = sum over focal tuples whose intersection is A of
/// the product of their masses; the conflict q(empty) is added to `universe`.
///
/// Evaluated as a streaming fold over the sources, in a canonical source
/// order so that the resulting focal map is bit-identical for every
/// permutation of `sources`. Every focal set of every source must lie inside
/// `universe`.
inline Bpa yager_combine(const LabelSet& universe, std::span<const Bpa> sources) {
  detail::check_sources(universe, sources);
  if (universe.empty()) throw Error(ErrorCode::EmptyFocalSet, "empty frame of discernment");
  if (sources.size() == 1) return sources.front();

  std::vector<const Bpa*> order;
  order.reserve(sources.size());
  for (const auto& s : sources) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(),
                   [](const Bpa* a, const Bpa* b) { return detail::focal_less(*a, *b); });

  std::unordered_map<LabelSet, double, LabelSetHash> current;
  std::unordered_map<LabelSet, double, LabelSetHash> next;
  for (const auto& f : order.front()->focal()) current.emplace(f.set, f.mass);
  double conflict = 0.0;

  for (std::size_t s = 1; s < order.size(); ++s) {
    next.clear();
    next.reserve(current.size() * order[s]->size());
    for (const auto& [a, va] : current) {
      for (const auto& f : order[s]->focal()) {
        LabelSet c = a & f.set;
        const double v = va * f.mass;
        if (c.empty()) {
          conflict += v;
        } else {
          next[std::move(c)] += v;
        }
      }
    }
    current.swap(next);
  }
  if (conflict > 0.0) current[universe] += conflict;

  std::vector<FocalElement> out;
  out.reserve(current.size());
  for (auto& [set, m] : current) {
    if (m >= kMassDust) out.push_back({set, m});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.set < b.set; });
  // Normalizer summed in canonical order, independent of hash iteration order.
  double total = 0.0;
  for (const auto& e : out) total += e.mass;
  for (auto& e : out) e.mass /= total;
  return Bpa(universe.width(), std::move(out));
}

inline Bpa yager_combine(const LabelSet& universe, const std::vector<Bpa>& sources) {
  return yager_combine(universe, std::span<const Bpa>(sources));
}

/// Largest number of focal tuples naive_combine_oracle will enumerate.
inline constexpr double kNaiveTupleLimit = 1e7;

/// Reference Yager combination by exhaustive enumeration of every focal-set
/// tuple, in the order the sources are given. Test oracle for yager_combine.
inline Bpa naive_combine_oracle(const LabelSet& universe, std::span<const Bpa> sources) {
  detail::check_sources(universe, sources);
  double tuples = 1.0;
  for (const auto& s : sources) tuples *= static_cast<double>(s.size());
  if (tuples > kNaiveTupleLimit) {
    throw Error(ErrorCode::CombinatorialBlowup, std::to_string(tuples) + " focal tuples");
  }

  std::map<LabelSet, double> q;
  std::vector<std::size_t> digit(sources.size(), 0);
  for (;;) {
    LabelSet inter = universe;
    double product = 1.0;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const auto& f = sources[s].focal()[digit[s]];
      inter &= f.set;
      product *= f.mass;
    }
    q[inter] += product;

    std::size_t pos = 0;
    while (pos < sources.size() && ++digit[pos] == sources[pos].size()) digit[pos++] = 0;
    if (pos == sources.size()) break;
  }

  const LabelSet none(universe.width());
  double conflict = 0.0;
  if (auto it = q.find(none); it != q.end()) {
    conflict = it->second;
    q.erase(it);
  }
  q[universe] += conflict;

  std::vector<FocalElement> entries;
  for (const auto& [set, m] : q) {
    if (m > 0.0) entries.push_back({set, m});
  }
  return bpa_from_focal(universe.width(), std::move(entries));
}

inline Bpa naive_combine_oracle(const LabelSet& universe, const std::vector<Bpa>& sources) {
  return naive_combine_oracle(universe, std::span<const Bpa>(sources));
}

}  // namespace dstpll
