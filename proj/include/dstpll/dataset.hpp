#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dstpll/error.hpp"
#include "dstpll/label_set.hpp"
#include "dstpll/matrix.hpp"
#include "dstpll/rng.hpp"

namespace dstpll {

/// n instances with d real features, a candidate label set each and, for
/// evaluation only, optional ground truth.
struct PartialDataset {
  Matrix features;
  std::vector<LabelSet> candidates;
  std::optional<std::vector<Label>> truth;
  std::size_t num_labels = 0;

  std::size_t size() const noexcept { return candidates.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  bool has_truth() const noexcept { return truth.has_value(); }

  /// Throws unless every row has a non-empty candidate set of the right width
  /// that contains its true label (when truth is known).
  void validate() const {
    if (features.rows() != candidates.size()) {
      throw Error(ErrorCode::LengthMismatch, std::to_string(features.rows()) + " feature rows vs " +
                                                 std::to_string(candidates.size()) + " candidate sets");
    }
    if (truth && truth->size() != candidates.size()) {
      throw Error(ErrorCode::LengthMismatch, "truth column length differs from candidates");
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i].width() != num_labels) {
        throw Error(ErrorCode::UniverseMismatch, "row " + std::to_string(i) + " candidate width");
      }
      if (candidates[i].empty()) throw Error(ErrorCode::EmptyCandidateSet, "row " + std::to_string(i));
      if (truth && !candidates[i].contains((*truth)[i])) {
        throw Error(ErrorCode::TruthNotInCandidates, "row " + std::to_string(i) + ": label " +
                                                         std::to_string((*truth)[i] + 1) + " not in " +
                                                         candidates[i].to_string());
      }
    }
  }

  PartialDataset subset(std::span<const std::size_t> rows) const {
    PartialDataset out;
    out.features = features.select_rows(rows);
    out.num_labels = num_labels;
    out.candidates.reserve(rows.size());
    for (std::size_t r : rows) out.candidates.push_back(candidates[r]);
    if (truth) {
      out.truth.emplace();
      for (std::size_t r : rows) out.truth->push_back((*truth)[r]);
    }
    return out;
  }

  friend bool operator==(const PartialDataset&, const PartialDataset&) = default;
};

// ---------------------------------------------------------------------------
// CSV
//
// Header row with feature columns f0..f{d-1}, an optional `candidates` column
// holding semicolon-separated 1-based labels, and an optional `label` column
// holding the 1-based ground truth. At least one of the two label columns
// must be present; without `candidates` every row gets {label}.

namespace detail {

inline std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": stray quote");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::ParseError, "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::string where(std::size_t row, std::string_view column) {
  return "row " + std::to_string(row) + ", column '" + std::string(column) + "'";
}

inline double parse_real(std::string_view s, std::size_t row, std::string_view column) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::ParseError, where(row, column) + ": not a number: '" + std::string(s) + "'");
  }
  if (!std::isfinite(v)) throw Error(ErrorCode::ParseError, where(row, column) + ": non-finite value");
  return v;
}

inline std::size_t parse_label(std::string_view s, std::size_t row, std::string_view column) {
  s = trim(s);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || v == 0) {
    throw Error(ErrorCode::ParseError, where(row, column) + ": bad 1-based label '" + std::string(s) + "'");
  }
  return v;
}

inline std::string format_real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Parses CSV text. `num_labels`, when given, fixes the universe size;
/// otherwise it is the largest label seen.
inline PartialDataset parse_csv(std::string_view text, std::optional<std::size_t> num_labels = std::nullopt) {
  const auto records = detail::parse_csv_records(text);
  if (records.empty()) throw Error(ErrorCode::ParseError, "missing header row");
  const auto& header = records.front();

  std::map<std::size_t, std::size_t> feature_cols;  // feature index -> column
  std::optional<std::size_t> cand_col;
  std::optional<std::size_t> label_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string_view name = detail::trim(header[c]);
    if (name == "candidates") {
      cand_col = c;
    } else if (name == "label") {
      label_col = c;
    } else if (name.size() > 1 && name.front() == 'f') {
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec != std::errc() || ptr != name.data() + name.size() || feature_cols.count(idx) != 0) {
        throw Error(ErrorCode::ParseError, "header: bad feature column '" + std::string(name) + "'");
      }
      feature_cols[idx] = c;
    } else {
      throw Error(ErrorCode::ParseError, "header: unknown column '" + std::string(name) + "'");
    }
  }
  if (!cand_col && !label_col) throw Error(ErrorCode::ParseError, "header: need a 'candidates' or 'label' column");
  const std::size_t d = feature_cols.size();
  if (d == 0) throw Error(ErrorCode::ParseError, "header: no feature columns");
  if (feature_cols.rbegin()->first != d - 1) throw Error(ErrorCode::ParseError, "header: feature columns must be f0..f{d-1}");

  const std::size_t n = records.size() - 1;
  std::vector<double> values;
  values.reserve(n * d);
  std::vector<std::vector<std::size_t>> cand_labels(n);
  std::vector<std::size_t> truth_1based;
  std::size_t max_label = 0;

  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    const std::size_t row = r + 1;
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                                             " fields, found " + std::to_string(rec.size()));
    }
    for (const auto& [j, c] : feature_cols) values.push_back(detail::parse_real(rec[c], row, header[c]));
    if (label_col) {
      truth_1based.push_back(detail::parse_label(rec[*label_col], row, "label"));
      max_label = std::max(max_label, truth_1based.back());
    }
    if (cand_col) {
      std::string_view field = detail::trim(rec[*cand_col]);
      if (field.empty()) throw Error(ErrorCode::EmptyCandidateSet, detail::where(row, "candidates"));
      std::size_t start = 0;
      while (start <= field.size()) {
        const std::size_t stop = std::min(field.find(';', start), field.size());
        const std::size_t y = detail::parse_label(field.substr(start, stop - start), row, "candidates");
        cand_labels[r].push_back(y);
        max_label = std::max(max_label, y);
        start = stop + 1;
      }
    } else {
      cand_labels[r].push_back(truth_1based.back());
    }
  }

  PartialDataset ds;
  ds.num_labels = num_labels.value_or(max_label);
  if (max_label > ds.num_labels) {
    throw Error(ErrorCode::ParseError, "label " + std::to_string(max_label) + " exceeds configured class count " +
                                           std::to_string(ds.num_labels));
  }
  ds.features = Matrix(n, d, std::move(values));
  ds.candidates.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    LabelSet s(ds.num_labels);
    for (std::size_t y : cand_labels[r]) s.insert(y - 1);
    ds.candidates.push_back(std::move(s));
  }
  if (label_col) {
    ds.truth.emplace();
    for (std::size_t y : truth_1based) ds.truth->push_back(y - 1);
    for (std::size_t r = 0; r < n; ++r) {
      if (!ds.candidates[r].contains((*ds.truth)[r])) {
        throw Error(ErrorCode::TruthNotInCandidates, "row " + std::to_string(r + 1) + ": label " +
                                                         std::to_string(truth_1based[r]) + " not in " +
                                                         ds.candidates[r].to_string());
      }
    }
  }
  return ds;
}

inline PartialDataset load_csv(const std::string& path, std::optional<std::size_t> num_labels = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), num_labels);
}

/// Inverse of parse_csv. Reals use the shortest round-trip representation.
inline std::string to_csv(const PartialDataset& ds) {
  std::string out;
  for (std::size_t j = 0; j < ds.dim(); ++j) out += "f" + std::to_string(j) + ",";
  out += "candidates";
  if (ds.truth) out += ",label";
  out += '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features.row(i)) out += detail::format_real(v) + ",";
    out += '"';
    bool first = true;
    ds.candidates[i].for_each([&](Label y) {
      if (!first) out += ';';
      out += std::to_string(y + 1);
      first = false;
    });
    out += '"';
    if (ds.truth) out += "," + std::to_string((*ds.truth)[i] + 1);
    out += '\n';
  }
  return out;
}

inline void save_csv(const PartialDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << to_csv(ds);
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Candidate augmentation

/// Controlled noise injection: r false positives on a fraction p of the rows;
/// with `epsilon`, r must be 1 and the false positive is the class partner
/// with probability epsilon.
struct AugmentSpec {
  std::size_t r = 1;
  double p = 0.0;
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
};

namespace detail {

inline void require_supervised(const PartialDataset& ds) {
  if (!ds.truth) throw Error(ErrorCode::TruthMissing, "augmentation needs ground-truth labels");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.candidates[i].count() != 1) {
      throw Error(ErrorCode::InvalidParameter, "row " + std::to_string(i + 1) + " is not a singleton candidate set");
    }
  }
}

/// round(p * n), ties up.
inline std::size_t affected_count(double p, std::size_t n) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidParameter, "fraction p must lie in [0,1]");
  return std::min(n, static_cast<std::size_t>(std::floor(p * static_cast<double>(n) + 0.5)));
}

/// Indices of the affected rows, drawn without replacement, ascending.
inline std::vector<std::size_t> choose_rows(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

/// Adds r distinct uniformly drawn false-positive labels to round(p*n)
/// uniformly chosen rows. r is limited to l-2 so no candidate set becomes the
/// full label space.
inline PartialDataset augment_uniform(const PartialDataset& ds, std::size_t r, double p, std::uint64_t seed) {
  detail::require_supervised(ds);
  const std::size_t l = ds.num_labels;
  if (r == 0 || l < 2 || r > l - 2) {
    throw Error(ErrorCode::RTooLarge, "r=" + std::to_string(r) + " false positives with " + std::to_string(l) + " classes");
  }
  Rng rng(seed);
  PartialDataset out = ds;
  const auto rows = detail::choose_rows(ds.size(), detail::affected_count(p, ds.size()), rng);
  std::vector<Label> others;
  for (std::size_t i : rows) {
    const Label y = (*ds.truth)[i];
    others.clear();
    for (Label c = 0; c < l; ++c) {
      if (c != y) others.push_back(c);
    }
    for (std::size_t t = 0; t < r; ++t) {
      std::swap(others[t], others[t + rng.uniform_index(others.size() - t)]);
      out.candidates[i].insert(others[t]);
    }
  }
  return out;
}

/// Fixed-point-free class partner map drawn from `seed` (a random derangement).
inline std::vector<Label> partner_map(std::size_t num_labels, std::uint64_t seed) {
  if (num_labels < 2) throw Error(ErrorCode::InvalidParameter, "partner map needs at least two classes");
  Rng rng = Rng(seed).split(0xC0);
  std::vector<Label> perm(num_labels);
  for (;;) {
    for (Label c = 0; c < num_labels; ++c) perm[c] = c;
    rng.shuffle(perm);
    bool fixed_point = false;
    for (Label c = 0; c < num_labels; ++c) fixed_point = fixed_point || perm[c] == c;
    if (!fixed_point) return perm;
  }
}

/// One false positive on round(p*n) rows: the partner of the true class with
/// probability epsilon, otherwise a uniform label outside {y, partner(y)}.
/// The partner map is partner_map(l, seed).
inline PartialDataset augment_cooccur(const PartialDataset& ds, double p, double epsilon, std::uint64_t seed) {
  detail::require_supervised(ds);
  const std::size_t l = ds.num_labels;
  if (l < 3) throw Error(ErrorCode::RTooLarge, "co-occurrence augmentation needs at least 3 classes");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::InvalidParameter, "epsilon must lie in [0,1]");
  const auto partner = partner_map(l, seed);
  Rng rng(seed);
  PartialDataset out = ds;
  const auto rows = detail::choose_rows(ds.size(), detail::affected_count(p, ds.size()), rng);
  for (std::size_t i : rows) {
    const Label y = (*ds.truth)[i];
    Label extra = partner[y];
    if (!rng.bernoulli(epsilon)) {
      // uniform over the l-2 labels outside {y, partner(y)}
      std::size_t pick = rng.uniform_index(l - 2);
      for (extra = 0;; ++extra) {
        if (extra == y || extra == partner[y]) continue;
        if (pick-- == 0) break;
      }
    }
    out.candidates[i].insert(extra);
  }
  return out;
}

inline PartialDataset augment(const PartialDataset& ds, const AugmentSpec& spec) {
  if (spec.epsilon) {
    if (spec.r != 1) throw Error(ErrorCode::InvalidParameter, "epsilon requires r = 1");
    return augment_cooccur(ds, spec.p, *spec.epsilon, spec.seed);
  }
  return augment_uniform(ds, spec.r, spec.p, spec.seed);
}

// ---------------------------------------------------------------------------
// Cross-validation and scaling

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle split into `folds` disjoint test sets whose sizes differ by
/// at most one (the first n % folds folds get the extra row). Index lists are
/// ascending.
inline std::vector<Fold> kfold(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) {
    throw Error(ErrorCode::TooManyFolds, std::to_string(folds) + " folds for " + std::to_string(n) + " rows");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng(seed).shuffle(perm);

  std::vector<Fold> out(folds);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
    out[f].test.assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(out[f].test.begin(), out[f].test.end());
    pos += size;
  }
  for (auto& fold : out) {
    std::vector<bool> in_test(n, false);
    for (std::size_t i : fold.test) in_test[i] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_test[i]) fold.train.push_back(i);
    }
  }
  return out;
}

struct ScalingStats {
  std::vector<double> mean;
  std::vector<double> sd;  // population standard deviation; 0 marks pass-through columns
};

inline ScalingStats fit_scaling(const Matrix& train) {
  if (train.rows() == 0) throw Error(ErrorCode::EmptyInput, "cannot fit scaling on zero rows");
  ScalingStats st{std::vector<double>(train.cols(), 0.0), std::vector<double>(train.cols(), 0.0)};
  const double n = static_cast<double>(train.rows());
  for (std::size_t i = 0; i < train.rows(); ++i) {
    for (std::size_t j = 0; j < train.cols(); ++j) st.mean[j] += train(i, j);
  }
  for (double& m : st.mean) m /= n;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    for (std::size_t j = 0; j < train.cols(); ++j) {
      const double dv = train(i, j) - st.mean[j];
      st.sd[j] += dv * dv;
    }
  }
  for (double& s : st.sd) s = std::sqrt(s / n);
  return st;
}

inline Matrix apply_scaling(const Matrix& m, const ScalingStats& st) {
  if (m.cols() != st.mean.size()) throw Error(ErrorCode::DimensionMismatch, "scaling stats dimension");
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      if (st.sd[j] > 0.0) out(i, j) = (out(i, j) - st.mean[j]) / st.sd[j];
    }
  }
  return out;
}

struct Standardized {
  Matrix train;
  Matrix other;
  ScalingStats stats;
};

/// z-scores both matrices with statistics of `train` only.
inline Standardized standardize(const Matrix& train, const Matrix& other) {
  auto stats = fit_scaling(train);
  return {apply_scaling(train, stats), apply_scaling(other, stats), std::move(stats)};
}

// ---------------------------------------------------------------------------
// Synthetic fixtures

/// Supervised Gaussian blobs: class c is centred at `separation` * e_c (d >= l)
/// with isotropic noise `sd`; classes are drawn uniformly.
inline PartialDataset gaussian_clusters(std::size_t n, std::size_t num_labels, std::size_t dim, double separation,
                                        double sd, std::uint64_t seed) {
  if (num_labels == 0 || dim < num_labels) {
    throw Error(ErrorCode::InvalidParameter, "need dim >= num_labels > 0 for simplex cluster centres");
  }
  Rng rng(seed);
  PartialDataset ds;
  ds.num_labels = num_labels;
  ds.features = Matrix(n, dim);
  ds.truth.emplace();
  for (std::size_t i = 0; i < n; ++i) {
    const Label y = rng.uniform_index(num_labels);
    for (std::size_t j = 0; j < dim; ++j) ds.features(i, j) = (j == y ? separation : 0.0) + rng.normal(0.0, sd);
    ds.truth->push_back(y);
    ds.candidates.push_back(LabelSet::singleton(num_labels, y));
  }
  return ds;
}

}  // namespace dstpll
