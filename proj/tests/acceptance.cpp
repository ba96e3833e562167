// Acceptance gate: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dstpll/cli.hpp"
#include "dstpll/dataset.hpp"
#include "dstpll/evidence.hpp"
#include "dstpll/metrics.hpp"
#include "dstpll/neighbors.hpp"
#include "dstpll/oracle.hpp"
#include "dstpll/oracle_exact.hpp"
#include "dstpll/pll.hpp"
#include "dstpll/rng.hpp"

using namespace dstpll;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

LabelSet random_subset(std::size_t l, Rng& rng) {
  for (;;) {
    LabelSet s(l);
    for (Label y = 0; y < l; ++y) {
      if (rng.bernoulli(0.5)) s.insert(y);
    }
    if (!s.empty()) return s;
  }
}

/// 1..max_focal distinct focal sets with random masses. When `around` is
/// set, every focal set contains that label.
Bpa random_bpa(std::size_t l, std::size_t max_focal, Rng& rng, std::optional<Label> around = std::nullopt) {
  const std::size_t want = 1 + rng.uniform_index(max_focal);
  std::vector<FocalElement> entries;
  double total = 0.0;
  for (std::size_t tries = 0; entries.size() < want && tries < 64; ++tries) {
    LabelSet s = random_subset(l, rng);
    if (around) s.insert(*around);
    bool dup = false;
    for (const auto& e : entries) dup = dup || e.set == s;
    if (dup) continue;
    const double m = 0.05 + rng.uniform01();
    entries.push_back({s, m});
    total += m;
  }
  for (auto& e : entries) e.mass /= total;
  return bpa_from_focal(l, entries);
}

/// A one-row model whose decide() gives the prediction path for a given BPA.
PllModel decision_model(std::size_t l) {
  PartialDataset ds;
  ds.num_labels = l;
  ds.features = Matrix(1, 1, 0.0);
  ds.candidates = {LabelSet::singleton(l, 0)};
  PllConfig cfg;
  cfg.k = 1;
  return PllModel::fit(ds, cfg);
}

Verdict worked_example() {
  const auto s = [](std::initializer_list<Label> ys) { return LabelSet::of(3, ys); };
  const Bpa m = bpa_from_focal(3, {{s({0}), 0.4}, {s({0, 1}), 0.3}, {s({0, 2}), 0.3}});
  const double bel1 = belief(m, s({0}));
  const double pl1 = plausibility(m, s({0}));
  const double pl2 = plausibility(m, s({1}));
  const double pl3 = plausibility(m, s({2}));
  const auto pred = decision_model(3).decide(m, LabelSet::full(3), 0);
  const bool ok = std::abs(bel1 - 0.4) <= 1e-12 && std::abs(pl1 - 1.0) <= 1e-12 && std::abs(pl2 - 0.3) <= 1e-12 &&
                  std::abs(pl3 - 0.3) <= 1e-12 && pred.label == 0 && pred.confident;
  return {ok, "bel({1})=" + fmt(bel1) + " pl({1})=" + fmt(pl1) + " pl({2})=" + fmt(pl2) + " pl({3})=" + fmt(pl3) +
                  " prediction=" + std::to_string(pred.label + 1) + " confident=" + (pred.confident ? "yes" : "no")};
}

Verdict expected_belief_curve() {
  const auto model = NoiseModel::reference();
  const auto t0 = std::chrono::steady_clock::now();
  bool within = true, dominant = true;
  double worst = 0.0;
  for (std::size_t k = 1; k <= 15; ++k) {
    const double ct = expected_belief_true(model, k);
    const double cc = expected_belief_cooccur(model, k);
    const auto sim = simulate_expected_belief(model, k, 100000, 20240601 + k);
    const double tol_t = std::max(0.005, 3.0 * sim.stderr_true);
    const double tol_c = std::max(0.005, 3.0 * sim.stderr_cooccur);
    within = within && std::abs(ct - sim.mean_true) <= tol_t && std::abs(cc - sim.mean_cooccur) <= tol_c;
    worst = std::max({worst, std::abs(ct - sim.mean_true) / tol_t, std::abs(cc - sim.mean_cooccur) / tol_c});
    dominant = dominant && ct > cc;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {within && dominant && secs < 120.0, "k=1..15, 1e5 trials: worst |closed-sim|/tolerance=" + fmt(worst) +
                                                  ", dominance " + (dominant ? "holds" : "fails") + ", " +
                                                  fmt(secs) + "s"};
}

Verdict anchors() {
  const auto model = NoiseModel::reference();
  const double t = expected_belief_true(model, 1);
  const double c = expected_belief_cooccur(model, 1);
  const bool ok = std::abs(t - 0.0875) <= 1e-12 && std::abs(c - 1.0 / 24.0) <= 1e-12;
  return {ok, "k=1: true=" + fmt(t) + " cooccur=" + fmt(c)};
}

Verdict combination_oracle() {
  Rng rng(4);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t l = 1 + rng.uniform_index(5);
    const std::size_t k = 1 + rng.uniform_index(8);
    const LabelSet universe = rng.bernoulli(0.8) ? LabelSet::full(l) : random_subset(l, rng);
    std::vector<Bpa> sources;
    for (std::size_t i = 0; i < k; ++i) {
      // sources live on the subsets of the universe
      std::vector<FocalElement> entries;
      const Bpa raw = random_bpa(l, 4, rng);
      for (const auto& f : raw.focal()) {
        const LabelSet s = f.set & universe;
        if (s.empty()) continue;
        auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.set == s; });
        if (it == entries.end()) {
          entries.push_back({s, f.mass});
        } else {
          it->mass += f.mass;
        }
      }
      double total = 0.0;
      for (const auto& e : entries) total += e.mass;
      if (entries.empty()) {
        entries.push_back({universe, 1.0});
        total = 1.0;
      }
      for (auto& e : entries) e.mass /= total;
      sources.push_back(bpa_from_focal(l, entries));
    }
    const Bpa fast = yager_combine(universe, sources);
    const Bpa slow = naive_combine_oracle(universe, sources);
    std::set<LabelSet> sets;
    for (const auto& f : fast.focal()) sets.insert(f.set);
    for (const auto& f : slow.focal()) sets.insert(f.set);
    for (const auto& s : sets) worst = std::max(worst, std::abs(fast.mass(s) - slow.mass(s)));
  }
  return {worst <= 1e-9, "1000 instances, max per-focal difference " + fmt(worst)};
}

Verdict confidence_property() {
  Rng rng(5);
  std::size_t majority = 0, flagged = 0, counterexamples = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t l = 2 + rng.uniform_index(5);
    const bool anchored = rng.bernoulli(0.5);
    const Bpa m = random_bpa(l, 5, rng, anchored ? std::optional<Label>(rng.uniform_index(l)) : std::nullopt);
    const auto pred = decision_model(l).decide(m, LabelSet::full(l), static_cast<std::uint64_t>(t));
    double max_bel = 0.0;
    for (Label y = 0; y < l; ++y) max_bel = std::max(max_bel, belief(m, LabelSet::singleton(l, y)));
    if (max_bel > 0.5) {
      ++majority;
      if (pred.confident) ++flagged;
    } else if (pred.confident) {
      ++counterexamples;
    }
  }
  return {majority > 0 && flagged == majority && counterexamples > 0,
          "10000 BPAs: " + std::to_string(flagged) + "/" + std::to_string(majority) +
              " with a singleton belief > 1/2 flagged confident; " + std::to_string(counterexamples) +
              " confident with every singleton belief <= 1/2"};
}

Verdict confident_counts() {
  const std::size_t ls[] = {4, 6};
  const double ps[] = {0.3, 0.7};
  const std::size_t rs[] = {1, 2};
  std::size_t folds = 0, dominated = 0, dst_total = 0, knn_total = 0;
  for (std::size_t b = 0; b < 20; ++b) {
    const std::size_t l = ls[b % 2];
    const double p = ps[(b / 2) % 2];
    const std::size_t r = rs[(b / 4) % 2];
    const std::uint64_t seed = 7000 + b;
    const auto ds = augment_uniform(gaussian_clusters(500, l, l, 9.0, 1.0, seed), r, p, seed + 1);
    cli::BenchmarkOptions opt;
    opt.pll.k = 10;
    opt.pll.seed = seed;
    for (const auto& fold : kfold(ds.size(), 5, seed)) {
      const auto out = cli::run_fold(ds, fold, opt);
      ++folds;
      dominated += out.dst.n_confident >= out.knn.n_confident ? 1 : 0;
      dst_total += out.dst.n_confident;
      knn_total += out.knn.n_confident;
    }
  }
  const std::string counts = std::to_string(dominated) + "/" + std::to_string(folds) + " folds (totals " +
                             std::to_string(dst_total) + " vs " + std::to_string(knn_total) + ")";
  return {dominated == folds,
          "20 benchmarks x 5 folds on simplex clusters (separation 9, sd 1): DST-PLL count >= PL-KNN count in " +
              counts};
}

Verdict risk_trend() {
  const RiskScenario sc;
  const auto curve = risk_curve(sc);
  std::size_t inversions = 0;
  bool small_inversions = true;
  std::string values;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    values += (i ? ", " : "") + std::to_string(curve[i].n) + ":" + fmt(curve[i].risk);
    if (i > 0 && curve[i].risk > curve[i - 1].risk) {
      ++inversions;
      small_inversions = small_inversions && curve[i].risk - curve[i - 1].risk <= 0.005;
    }
  }
  const bool ok = inversions <= 1 && small_inversions && curve.back().risk <= 0.05;
  return {ok, "risk " + values + "; " + std::to_string(inversions) + " inversion(s)"};
}

Verdict exact_check() {
  const auto rep = exact::exact_binomial_check(20);
  std::size_t small_k_violations = 0;
  for (std::size_t k = 1; k <= 12; ++k) {
    small_k_violations += exact::check_bracket_inequality(3, k).violations;
    small_k_violations += exact::check_bracket_inequality(4, k).violations;
  }
  const double rel = std::max(rep.max_rel_error_true, rep.max_rel_error_cooccur);
  return {rep.passed && small_k_violations == 0 && rel <= 1e-9,
          "l=3/4 up to k=20: " + std::to_string(rep.l3.combinations + rep.l4.combinations) + " combinations, " +
              std::to_string(rep.l3.violations + rep.l4.violations) + " violations; float vs exact rel error " +
              fmt(rel)};
}

Verdict tradeoff_row() {
  const double betas[] = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const double want[] = {0.670, 0.723, 0.776, 0.829, 0.882, 0.935};
  bool ok = true;
  std::string got;
  for (std::size_t i = 0; i < 6; ++i) {
    const double v = std::round(tradeoff(0.935, 0.405, betas[i]) * 1000.0) / 1000.0;
    ok = ok && std::abs(v - want[i]) < 1e-9;
    got += (i ? " " : "") + fmt(v);
  }
  return {ok, "O_beta for beta=0.5..1.0: " + got};
}

Verdict knn_equivalence() {
  Rng rng(10);
  std::size_t agree = 0, full_k = 0, with_duplicates = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.uniform_index(400);
    const std::size_t d = 1 + rng.uniform_index(8);
    const bool dup = rng.bernoulli(0.5);
    Matrix pts(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      if (dup && i > 0 && rng.bernoulli(0.3)) {
        const std::size_t src = rng.uniform_index(i);
        for (std::size_t j = 0; j < d; ++j) pts(i, j) = pts(src, j);
      } else {
        // coarse grid values force exact distance ties
        for (std::size_t j = 0; j < d; ++j) pts(i, j) = dup ? std::round(rng.normal(0.0, 2.0)) : rng.normal(0.0, 1.0);
      }
    }
    std::vector<double> x(d);
    for (auto& v : x) v = dup ? std::round(rng.normal(0.0, 2.0)) : rng.normal(0.0, 1.0);
    const std::size_t k = t % 5 == 0 ? n : 1 + rng.uniform_index(n);
    full_k += k == n ? 1 : 0;
    with_duplicates += dup ? 1 : 0;
    const auto tree = BallTree::build(pts);
    agree += tree.query(x, k) == linear_scan(pts, x, k) ? 1 : 0;
  }
  return {agree == 500, std::to_string(agree) + "/500 identical (" + std::to_string(full_k) + " with k=n, " +
                            std::to_string(with_duplicates) + " with duplicates)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Verdict determinism() {
  const auto dir = fs::temp_directory_path() / "dstpll_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto data = dir / "data.csv";
  save_csv(augment_uniform(gaussian_clusters(300, 4, 6, 6.0, 1.0, 3), 1, 0.5, 4), data.string());
  std::ostringstream sink;
  auto run = [&](std::vector<std::string> args, const fs::path& out) {
    args.push_back("-o");
    args.push_back(out.string());
    return cli::run(args, sink, sink) == cli::kOk;
  };
  const std::vector<std::string> bench{"benchmark", "-i", data.string(), "--seed", "17"};
  const std::vector<std::string> sim{"simulate", "--k-max", "8", "--trials", "5000", "--seed", "17"};
  const bool ran = run(bench, dir / "b1.csv") && run(bench, dir / "b2.csv") && run(sim, dir / "s1.csv") &&
                   run(sim, dir / "s2.csv");
  const bool bench_same = ran && slurp(dir / "b1.csv") == slurp(dir / "b2.csv") && !slurp(dir / "b1.csv").empty();
  const bool sim_same = ran && slurp(dir / "s1.csv") == slurp(dir / "s2.csv") && !slurp(dir / "s1.csv").empty();
  fs::remove_all(dir);
  return {bench_same && sim_same, std::string("benchmark rerun ") + (bench_same ? "identical" : "differs") +
                                      ", simulate rerun " + (sim_same ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"worked-example fidelity", worked_example},
      {"expected-belief curve vs simulation", expected_belief_curve},
      {"single-neighbor anchors", anchors},
      {"combination oracle equivalence", combination_oracle},
      {"majority belief implies confidence", confidence_property},
      {"confident-count dominance", confident_counts},
      {"risk decreases with training size", risk_trend},
      {"exact-arithmetic check", exact_check},
      {"trade-off arithmetic", tradeoff_row},
      {"ball tree vs linear scan", knn_equivalence},
      {"deterministic reruns", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << ' ' << i + 1 << ' ' << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
