#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "dstpll/error.hpp"

namespace dstpll {

/// Class index, 0-based. File formats use 1-based indices and convert at the
/// I/O boundary.
using Label = std::size_t;

/// Subset of the label universe {0, ..., width-1} stored as a bit vector.
///
/// Universes up to 256 labels live inline; wider ones spill to the heap.
/// Sets of different widths never compare equal and binary set operations on
/// them throw UniverseMismatch.
class LabelSet {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  LabelSet() = default;

  explicit LabelSet(std::size_t width) : width_(width), words_(word_count(width), Word{0}) {}

  static LabelSet full(std::size_t width) {
    LabelSet s(width);
    for (auto& w : s.words_) w = ~Word{0};
    s.trim();
    return s;
  }

  static LabelSet of(std::size_t width, std::initializer_list<Label> labels) {
    LabelSet s(width);
    for (Label y : labels) s.insert(y);
    return s;
  }

  template <typename Range>
  static LabelSet from_range(std::size_t width, const Range& labels) {
    LabelSet s(width);
    for (Label y : labels) s.insert(static_cast<Label>(y));
    return s;
  }

  static LabelSet singleton(std::size_t width, Label y) {
    LabelSet s(width);
    s.insert(y);
    return s;
  }

  std::size_t width() const noexcept { return width_; }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (Word w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  bool empty() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](Word w) { return w == 0; });
  }

  bool is_full() const noexcept { return count() == width_; }

  bool contains(Label y) const noexcept {
    return y < width_ && ((words_[y / kWordBits] >> (y % kWordBits)) & Word{1}) != 0;
  }

  void insert(Label y) {
    check_label(y);
    words_[y / kWordBits] |= Word{1} << (y % kWordBits);
  }

  void erase(Label y) {
    check_label(y);
    words_[y / kWordBits] &= ~(Word{1} << (y % kWordBits));
  }

  LabelSet& operator&=(const LabelSet& other) {
    check_width(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }

  LabelSet& operator|=(const LabelSet& other) {
    check_width(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }

  friend LabelSet operator&(LabelSet a, const LabelSet& b) { return a &= b; }
  friend LabelSet operator|(LabelSet a, const LabelSet& b) { return a |= b; }

  LabelSet complement() const {
    LabelSet s = *this;
    for (auto& w : s.words_) w = ~w;
    s.trim();
    return s;
  }

  bool is_subset_of(const LabelSet& other) const {
    check_width(other);
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if ((words_[i] & ~other.words_[i]) != 0) return false;
    }
    return true;
  }

  bool intersects(const LabelSet& other) const {
    check_width(other);
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if ((words_[i] & other.words_[i]) != 0) return true;
    }
    return false;
  }

  /// Members in ascending order.
  std::vector<Label> labels() const {
    std::vector<Label> out;
    out.reserve(count());
    for_each([&](Label y) { out.push_back(y); });
    return out;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      Word w = words_[i];
      while (w != 0) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(w));
        f(i * kWordBits + bit);
        w &= w - 1;
      }
    }
  }

  /// Smallest member; precondition: non-empty.
  Label first() const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] != 0) return i * kWordBits + static_cast<std::size_t>(std::countr_zero(words_[i]));
    }
    throw Error(ErrorCode::EmptyCandidateSet, "first() on empty label set");
  }

  /// "{1,3}" style rendering with 1-based labels, for diagnostics.
  std::string to_string() const {
    std::string out = "{";
    bool first_label = true;
    for_each([&](Label y) {
      if (!first_label) out += ',';
      out += std::to_string(y + 1);
      first_label = false;
    });
    return out + "}";
  }

  std::size_t hash() const noexcept {
    std::size_t h = std::hash<std::size_t>{}(width_);
    for (Word w : words_) {
      h ^= std::hash<Word>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }

  friend bool operator==(const LabelSet& a, const LabelSet& b) {
    return a.width_ == b.width_ && a.words_ == b.words_;
  }

  /// Total order used to canonicalize focal-set listings: by cardinality,
  /// then by the bit pattern read from the lowest label upward.
  friend bool operator<(const LabelSet& a, const LabelSet& b) {
    if (a.width_ != b.width_) return a.width_ < b.width_;
    const std::size_t ca = a.count();
    const std::size_t cb = b.count();
    if (ca != cb) return ca < cb;
    for (std::size_t i = 0; i < a.words_.size(); ++i) {
      if (a.words_[i] != b.words_[i]) {
        // The set holding the lowest differing label sorts first.
        const Word diff = a.words_[i] ^ b.words_[i];
        const Word low = diff & (~diff + 1);
        return (a.words_[i] & low) != 0;
      }
    }
    return false;
  }

 private:
  static std::size_t word_count(std::size_t width) { return (width + kWordBits - 1) / kWordBits; }

  void trim() {
    const std::size_t tail = width_ % kWordBits;
    if (tail != 0 && !words_.empty()) words_.back() &= (Word{1} << tail) - 1;
  }

  void check_label(Label y) const {
    if (y >= width_) {
      throw Error(ErrorCode::UniverseMismatch,
                  "label " + std::to_string(y) + " outside universe of size " + std::to_string(width_));
    }
  }

  void check_width(const LabelSet& other) const {
    if (width_ != other.width_) {
      throw Error(ErrorCode::UniverseMismatch, "label sets of width " + std::to_string(width_) + " and " +
                                                   std::to_string(other.width_));
    }
  }

  std::size_t width_ = 0;
  boost::container::small_vector<Word, 4> words_;
};

struct LabelSetHash {
  std::size_t operator()(const LabelSet& s) const noexcept { return s.hash(); }
};

}  // namespace dstpll
