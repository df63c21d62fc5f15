#ifndef LCR_PERMUTE_HPP_
#define LCR_PERMUTE_HPP_

#include <cstdint>
#include <iterator>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "lcr/error.hpp"

namespace lcr {

struct PermutationRequest {
  int n = 0;
  int k = 0;
};

inline constexpr int kMaxPermutationItems = 64;

// n!/(n-k)! as the falling factorial n(n-1)...(n-k+1).
// Throws ArgumentError when k > n or n is out of range and
// std::overflow_error when the count does not fit in 64 bits.
std::uint64_t count_permutations(PermutationRequest req);

// Walks the k-permutations of {0..n-1} in lexicographic order without
// materializing them. Each cursor owns its state.
class PermutationCursor {
 public:
  PermutationCursor(int n, int k);

  bool done() const { return done_; }
  std::span<const int> current() const { return indices_; }
  void advance();

 private:
  int n_;
  std::vector<int> indices_;
  std::vector<bool> used_;
  bool done_ = false;
};

// Input range over the ordered k-sequences of `items` (no repetition).
// Yields std::vector<T> by value; `items` must outlive the range.
template <typename T>
class KPermutations {
 public:
  class iterator {
   public:
    using value_type = std::vector<T>;
    using difference_type = std::ptrdiff_t;
    using iterator_category = std::input_iterator_tag;

    iterator() = default;
    iterator(std::span<const T> items, int k) : items_(items), cursor_(
        std::in_place, static_cast<int>(items.size()), k) {}

    value_type operator*() const {
      value_type out;
      out.reserve(cursor_->current().size());
      for (int i : cursor_->current()) out.push_back(items_[i]);
      return out;
    }
    std::span<const int> indices() const { return cursor_->current(); }
    iterator& operator++() {
      cursor_->advance();
      return *this;
    }
    void operator++(int) { ++*this; }
    bool operator==(std::default_sentinel_t) const {
      return !cursor_ || cursor_->done();
    }

   private:
    std::span<const T> items_;
    std::optional<PermutationCursor> cursor_;
  };

  KPermutations(std::span<const T> items, int k) : items_(items), k_(k) {
    if (k < 0 || k > static_cast<int>(items.size()))
      throw ArgumentError("k-permutation length " + std::to_string(k) +
                          " exceeds item count " +
                          std::to_string(items.size()));
  }

  iterator begin() const { return iterator(items_, k_); }
  std::default_sentinel_t end() const { return {}; }

 private:
  std::span<const T> items_;
  int k_;
};

template <typename T>
KPermutations<T> k_permutations(const std::vector<T>& items, int k) {
  return KPermutations<T>(std::span<const T>(items), k);
}

}  // namespace lcr

#endif  // LCR_PERMUTE_HPP_
