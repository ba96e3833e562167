#pragma once

#include <catch_amalgamated.hpp>

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "dstpll/error.hpp"
#include "dstpll/evidence.hpp"
#include "dstpll/label_set.hpp"
#include "dstpll/rng.hpp"

namespace testing {

/// Set from 1-based labels, as written in the examples: S(3, {1, 3}).
inline dstpll::LabelSet S(std::size_t l, std::initializer_list<std::size_t> one_based) {
  dstpll::LabelSet s(l);
  for (std::size_t y : one_based) s.insert(y - 1);
  return s;
}

/// Focal set {1} 0.4, {1,2} 0.3, {1,3} 0.3 over three labels.
inline dstpll::Bpa worked_example_bpa() {
  return dstpll::bpa_from_focal(3, {{S(3, {1}), 0.4}, {S(3, {1, 2}), 0.3}, {S(3, {1, 3}), 0.3}});
}

inline dstpll::LabelSet random_nonempty_subset(std::size_t l, dstpll::Rng& rng) {
  for (;;) {
    dstpll::LabelSet s(l);
    for (std::size_t y = 0; y < l; ++y) {
      if (rng.bernoulli(0.5)) s.insert(y);
    }
    if (!s.empty()) return s;
  }
}

/// BPA with 1..max_focal distinct random focal sets and random masses.
inline dstpll::Bpa random_bpa(std::size_t l, std::size_t max_focal, dstpll::Rng& rng) {
  const std::size_t want = 1 + rng.uniform_index(max_focal);
  std::vector<dstpll::FocalElement> entries;
  double total = 0.0;
  for (std::size_t tries = 0; entries.size() < want && tries < 100; ++tries) {
    auto s = random_nonempty_subset(l, rng);
    bool dup = false;
    for (const auto& e : entries) dup = dup || e.set == s;
    if (dup) continue;
    const double m = 0.05 + rng.uniform01();
    entries.push_back({s, m});
    total += m;
  }
  for (auto& e : entries) e.mass /= total;
  return dstpll::bpa_from_focal(l, entries);
}

template <typename F>
dstpll::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const dstpll::Error& e) {
    return e.code();
  }
  FAIL("expected a dstpll::Error");
  return dstpll::ErrorCode::InvalidParameter;
}

}  // namespace testing
