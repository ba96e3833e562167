#include <cmath>
#include <vector>

#include "dstpll/dataset.hpp"
#include "dstpll/metrics.hpp"
#include "support.hpp"

using namespace dstpll;
using testing::S;

namespace {

Prediction pred(Label y, bool confident) {
  Prediction p;
  p.label = y;
  p.confident = confident;
  return p;
}

CountMatrix from_rows(const std::vector<std::vector<std::size_t>>& rows) {
  CountMatrix m(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t p = 0; p < rows.size(); ++p) m.at(t, p) = rows[t][p];
  }
  return m;
}

}  // namespace

TEST_CASE("confusion: counts") {
  const std::vector<Label> t{0, 1, 2};
  const auto c = confusion(t, t, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(c.at(i, j) == (i == j ? 1U : 0U));
  }
  const std::vector<Label> ones{0, 0}, twos{1, 1};
  const auto d = confusion(ones, twos, 3);
  CHECK(d.at(0, 1) == 2);
  CHECK(d.total() == 2);
  CHECK(d.trace() == 0);
  CHECK(testing::error_code_of([&] { confusion(t, ones, 3); }) == ErrorCode::LengthMismatch);
  CHECK(testing::error_code_of([] { confusion({}, {}, 3); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("mcc: reference values") {
  CHECK(mcc(from_rows({{3, 0}, {0, 2}})) == 1.0);
  CHECK(mcc(from_rows({{1, 1}, {1, 1}})) == 0.0);
  CHECK(mcc(from_rows({{2, 1}, {0, 3}})) == Catch::Approx(6.0 / std::sqrt(72.0)).margin(1e-12));
  CHECK(mcc(from_rows({{0, 3}, {2, 0}})) == -1.0);
  CHECK(mcc(from_rows({{4, 0}, {0, 0}})) == 0.0);  // one class present
  CHECK(mcc(from_rows({{2, 3}, {0, 0}})) == 0.0);  // one class predicted
}

TEST_CASE("mcc: binary case matches the two-by-two formula") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const double tn = static_cast<double>(rng.uniform_index(20)), fp = static_cast<double>(rng.uniform_index(20));
    const double fn = static_cast<double>(rng.uniform_index(20)), tp = static_cast<double>(rng.uniform_index(20));
    const auto m = from_rows({{static_cast<std::size_t>(tn), static_cast<std::size_t>(fp)},
                              {static_cast<std::size_t>(fn), static_cast<std::size_t>(tp)}});
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    const double want = den == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(den);
    CHECK(mcc(m) == Catch::Approx(want).margin(1e-12));
  }
}

TEST_CASE("mcc and accuracy: properties") {
  Rng rng(9);
  for (int t = 0; t < 500; ++t) {
    const std::size_t l = 2 + rng.uniform_index(4);
    CountMatrix m(l);
    const bool diagonal = rng.bernoulli(0.3);
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < l; ++j) m.at(i, j) = (diagonal && i != j) ? 0 : rng.uniform_index(5);
    }
    if (m.total() == 0) continue;
    const double v = mcc(m);
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
    CHECK(accuracy(m) == Catch::Approx(static_cast<double>(m.trace()) / static_cast<double>(m.total())));
    std::size_t present = 0;
    bool off_diagonal = false;
    for (std::size_t i = 0; i < l; ++i) {
      present += m.row_sum(i) > 0 ? 1 : 0;
      for (std::size_t j = 0; j < l; ++j) off_diagonal = off_diagonal || (i != j && m.at(i, j) > 0);
    }
    const bool perfect = !off_diagonal && present >= 2;
    CHECK((std::abs(v - 1.0) < 1e-12) == perfect);
  }
}

TEST_CASE("evaluate: all confident and correct") {
  const std::vector<Label> truth{0, 1, 2, 1};
  std::vector<Prediction> p;
  for (Label y : truth) p.push_back(pred(y, true));
  const auto r = evaluate(truth, p, 3);
  CHECK(r.frac_confident == 1.0);
  CHECK(r.mcc_confident == 1.0);
  CHECK(r.accuracy == 1.0);
  CHECK(r.n_confident == 4);
}

TEST_CASE("evaluate: nothing confident") {
  const std::vector<Label> truth{0, 1};
  const std::vector<Prediction> p{pred(0, false), pred(0, false)};
  const auto r = evaluate(truth, p, 2);
  CHECK(r.frac_confident == 0.0);
  CHECK(r.mcc_confident == 0.0);
  CHECK(r.accuracy_confident == 0.0);
  CHECK(r.accuracy == 0.5);
}

TEST_CASE("evaluate: mixed case") {
  const std::vector<Label> truth{0, 1, 2, 0};
  const std::vector<Prediction> p{pred(0, true), pred(1, true), pred(0, false), pred(1, false)};
  const auto r = evaluate(truth, p, 3);
  CHECK(r.frac_confident == 0.5);
  CHECK(r.accuracy_confident == 1.0);
  CHECK(r.accuracy == 0.5);
  CHECK(testing::error_code_of([&] { evaluate(std::vector<Label>{0}, p, 3); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("evaluate: confident subset scored by filtering equals masked scoring") {
  Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    const std::size_t l = 2 + rng.uniform_index(5);
    const std::size_t n = 1 + rng.uniform_index(60);
    std::vector<Label> truth;
    std::vector<Prediction> preds;
    std::vector<Label> ft, fp;
    for (std::size_t i = 0; i < n; ++i) {
      truth.push_back(rng.uniform_index(l));
      preds.push_back(pred(rng.bernoulli(0.6) ? truth.back() : rng.uniform_index(l), rng.bernoulli(0.5)));
      if (preds.back().confident) {
        ft.push_back(truth.back());
        fp.push_back(preds.back().label);
      }
    }
    const auto r = evaluate(truth, preds, l);
    if (ft.empty()) {
      CHECK(r.mcc_confident == 0.0);
      continue;
    }
    const auto filtered = confusion(ft, fp, l);
    CHECK(r.confident_counts == filtered);
    CHECK(r.mcc_confident == mcc(filtered));
    CHECK(r.accuracy_confident == accuracy(filtered));
  }
}

TEST_CASE("tradeoff: endpoints, published row and linearity") {
  CHECK(tradeoff(0.3, 0.8, 1.0) == 0.3);
  CHECK(tradeoff(0.3, 0.8, 0.0) == 0.8);
  CHECK(tradeoff(0.935, 0.405, 0.8) == Catch::Approx(0.829).margin(5e-4));
  CHECK(tradeoff(-0.4, 0.5, 1.0) == 0.0);  // negative MCC clamps for the objective
  CHECK(testing::error_code_of([] { tradeoff(0.5, 0.5, 1.1); }) == ErrorCode::BetaOutOfRange);
  CHECK(testing::error_code_of([] { tradeoff(0.5, 0.5, -0.1); }) == ErrorCode::BetaOutOfRange);
  CHECK(testing::error_code_of([] { tradeoff(0.5, 1.5, 0.5); }) == ErrorCode::InvalidParameter);

  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const double a = rng.uniform01(), b = rng.uniform01();
    const double f0 = tradeoff(a, b, 0.0), f5 = tradeoff(a, b, 0.5), f1 = tradeoff(a, b, 1.0);
    CHECK(f5 == Catch::Approx((f0 + f1) / 2.0).margin(1e-15));
    const double beta = rng.uniform01();
    CHECK(tradeoff(a, b, beta) == Catch::Approx(f0 + beta * (f1 - f0)).margin(1e-15));
    CHECK(tradeoff(std::min(1.0, a + 0.1), b, beta) >= tradeoff(a, b, beta));
    CHECK(tradeoff(a, std::min(1.0, b + 0.1), beta) >= tradeoff(a, b, beta));
  }
}

TEST_CASE("cooccurrence_matrix: two mutual neighbors") {
  PartialDataset ds;
  ds.num_labels = 2;
  ds.features = Matrix(2, 1, std::vector<double>{0.0, 1.0});
  ds.candidates = {S(2, {1, 2}), S(2, {1})};
  ds.truth = std::vector<Label>{0, 0};
  const auto m = cooccurrence_matrix(ds, 1);
  // row 1 sums the neighbor candidate sets {1} and {1,2}
  CHECK(m.at(0, 0) == 2);
  CHECK(m.at(0, 1) == 1);
  CHECK(m.row_sum(1) == 0);
}

TEST_CASE("cooccurrence_matrix: clean clusters are diagonal dominant") {
  const auto ds = gaussian_clusters(300, 4, 4, 10.0, 0.5, 3);
  const auto m = cooccurrence_matrix(ds, 5);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t y = 0; y < 4; ++y) {
      if (y != t) CHECK(m.at(t, t) > 10 * m.at(t, y));
    }
  }
}

TEST_CASE("cooccurrence_matrix: partner label is the runner-up") {
  const auto ds = augment_cooccur(gaussian_clusters(2000, 5, 5, 10.0, 0.5, 3), 0.8, 0.7, 21);
  const auto partner = partner_map(5, 21);
  const auto m = cooccurrence_matrix(ds, 10);
  for (Label t = 0; t < 5; ++t) {
    for (Label y = 0; y < 5; ++y) {
      if (y != t) CHECK(m.at(t, t) > m.at(t, y));
      if (y != t && y != partner[t]) CHECK(m.at(t, partner[t]) > m.at(t, y));
    }
  }
}

TEST_CASE("cooccurrence_matrix: errors") {
  auto ds = gaussian_clusters(5, 2, 2, 1.0, 1.0, 1);
  CHECK(testing::error_code_of([&] { cooccurrence_matrix(ds, 5); }) == ErrorCode::KTooLarge);
  ds.truth.reset();
  CHECK(testing::error_code_of([&] { cooccurrence_matrix(ds, 1); }) == ErrorCode::TruthMissing);
}

TEST_CASE("paired t-test") {
  const std::vector<double> a{0.9, 0.8, 0.85, 0.95, 0.9};
  const std::vector<double> b{0.7, 0.75, 0.8, 0.85, 0.8};
  const auto r = paired_t_test(a, b);
  // differences 0.2, 0.05, 0.05, 0.1, 0.1: mean 0.1, sd sqrt(0.00375)
  CHECK(r.t == Catch::Approx(0.1 / std::sqrt(0.00375 / 5.0)));
  CHECK(r.df == 4.0);
  CHECK(r.p_value < 0.05);
  CHECK(paired_t_test(a, a).p_value == 1.0);
  CHECK(testing::error_code_of([&] { paired_t_test(a, std::vector<double>{1.0}); }) == ErrorCode::LengthMismatch);
}
