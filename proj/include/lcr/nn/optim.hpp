#ifndef LCR_NN_OPTIM_HPP_
#define LCR_NN_OPTIM_HPP_

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "lcr/nn/tensor.hpp"

namespace lcr::nn {

enum class OptimizerKind { rmsprop, adam };

OptimizerKind parse_optimizer(std::string_view text);
std::string_view optimizer_name(OptimizerKind kind);

struct RmsPropSettings {
  double rho = 0.9;
  double epsilon = 1e-7;
};

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

// Per-parameter moment buffers; created lazily on the first step.
template <typename T>
struct OptimizerState {
  std::vector<Tensor<T>> first;
  std::vector<Tensor<T>> second;
  long long step = 0;
};

template <typename T>
void rmsprop_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads,
                  OptimizerState<T>& state, double lr, const RmsPropSettings& cfg = {});

template <typename T>
void adam_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads,
               OptimizerState<T>& state, double lr, const AdamSettings& cfg = {});

}  // namespace lcr::nn

#endif  // LCR_NN_OPTIM_HPP_
