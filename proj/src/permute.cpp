#include "lcr/permute.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace lcr {

std::uint64_t count_permutations(PermutationRequest req) {
  if (req.n < 0 || req.k < 0)
    throw ArgumentError("permutation request must be non-negative");
  if (req.n > kMaxPermutationItems)
    throw ArgumentError("permutation item count " + std::to_string(req.n) +
                        " exceeds " + std::to_string(kMaxPermutationItems));
  if (req.k > req.n)
    throw ArgumentError("k = " + std::to_string(req.k) + " exceeds n = " +
                        std::to_string(req.n));
  std::uint64_t count = 1;
  for (int f = req.n; f > req.n - req.k; --f) {
    auto factor = static_cast<std::uint64_t>(f);
    if (count > std::numeric_limits<std::uint64_t>::max() / factor)
      throw std::overflow_error("permutation count " + std::to_string(req.n) +
                                "P" + std::to_string(req.k) +
                                " overflows 64 bits");
    count *= factor;
  }
  return count;
}

PermutationCursor::PermutationCursor(int n, int k)
    : n_(n), indices_(k), used_(n, false) {
  if (k < 0 || k > n)
    throw ArgumentError("k-permutation length " + std::to_string(k) +
                        " exceeds item count " + std::to_string(n));
  for (int i = 0; i < k; ++i) {
    indices_[i] = i;
    used_[i] = true;
  }
}

void PermutationCursor::advance() {
  if (done_) return;
  const int k = static_cast<int>(indices_.size());
  // Find the rightmost slot that can move to a larger unused value, then
  // refill everything after it with the smallest unused values.
  for (int pos = k - 1; pos >= 0; --pos) {
    used_[indices_[pos]] = false;
    int next = indices_[pos] + 1;
    while (next < n_ && used_[next]) ++next;
    if (next < n_) {
      indices_[pos] = next;
      used_[next] = true;
      int fill = 0;
      for (int j = pos + 1; j < k; ++j) {
        while (used_[fill]) ++fill;
        indices_[j] = fill;
        used_[fill] = true;
      }
      return;
    }
  }
  done_ = true;
}

}  // namespace lcr
