#ifndef LCR_NN_GRADCHECK_HPP_
#define LCR_NN_GRADCHECK_HPP_

#include <cstdint>
#include <span>
#include <string>

#include "lcr/nn/network.hpp"

namespace lcr::nn {

struct GradCheckOptions {
  double epsilon = 1e-5;
  // Networks with more parameters than this get a seeded random subsample.
  std::size_t full_check_limit = 10000;
  std::size_t subsample = 2048;
  std::uint64_t seed = 0;
  // Differences in double above this are re-measured in extended precision.
  double refine_above = 1e-6;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;  // a perturbation changed a piecewise branch
  std::size_t total_parameters = 0;
  std::string worst;  // "tensor t, index i"
};

// Central differences of the weighted cross-entropy against the analytic
// gradient, in train mode with a fixed dropout key. Relative error is
// |ga - gn| / max(|ga|, |gn|, 1e-8). Only 64-bit networks are accepted.
template <typename T>
GradCheckResult grad_check(const Network<T>& net, const Tensor<T>& batch,
                           std::span<const int> labels,
                           std::span<const double> class_weights = {},
                           const GradCheckOptions& options = {});

}  // namespace lcr::nn

#endif  // LCR_NN_GRADCHECK_HPP_
