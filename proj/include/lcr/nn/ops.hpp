#ifndef LCR_NN_OPS_HPP_
#define LCR_NN_OPS_HPP_

#include <cstdint>
#include <span>

#include "lcr/nn/config.hpp"
#include "lcr/nn/tensor.hpp"

namespace lcr::nn {

// Spatial extent after a window of `kernel` with `stride` and symmetric
// `padding`: floor((in + 2*padding - kernel) / stride) + 1. Throws
// ArgumentError when the result is not positive.
int window_output_extent(int in, int kernel, int stride, int padding);

// input (N,H,W,C), filters (KH,KW,C,F), bias (F) -> (N,OH,OW,F).
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& filters,
                         const Tensor<T>& bias, int stride_h, int stride_w,
                         int padding);

// Accumulates into dfilters/dbias; writes dinput when non-null.
template <typename T>
void conv2d_backward(const Tensor<T>& input, const Tensor<T>& filters,
                     const Tensor<T>& dout, int stride_h, int stride_w,
                     int padding, Tensor<T>* dinput, Tensor<T>& dfilters,
                     Tensor<T>& dbias);

template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& input, const MaxPool& pool);

template <typename T>
void maxpool_backward(const Tensor<T>& input, const MaxPool& pool,
                      const Tensor<T>& dout, Tensor<T>& dinput);

// SReLU parameters per channel, laid out as a (4, C) tensor with rows
// t_l, a_l, t_r, a_r.
template <typename T>
Tensor<T> activation_forward(const Tensor<T>& input, const Activation& act,
                             const Tensor<T>* srelu_params = nullptr);

template <typename T>
void activation_backward(const Tensor<T>& input, const Activation& act,
                         const Tensor<T>* srelu_params, const Tensor<T>& dout,
                         Tensor<T>& dinput, Tensor<T>* dparams);

// Row-wise softmax over the trailing (H*W*C) values of each sample.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

template <typename T>
void softmax_backward(const Tensor<T>& probs, const Tensor<T>& dout,
                      Tensor<T>& dlogits);

struct LossResult {
  double value = 0.0;
  int clamped = 0;  // probabilities at the true label raised to the floor
};

inline constexpr double kProbabilityFloor = 1e-12;

// (1/B) * sum_i w[y_i] * -log p[i, y_i]. `class_weights` is indexed by
// class; an empty span means weight 1. When `dprobs` is given it receives
// dLoss/dprobs.
template <typename T>
LossResult weighted_cross_entropy(const Tensor<T>& probs,
                                  std::span<const int> labels,
                                  std::span<const double> class_weights,
                                  Tensor<T>* dprobs = nullptr);

enum class Mode { train, infer };

// Inverted dropout. The mask of unit j of sample n is a pure function of
// (key, sample_offset + n, j).
template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& input, double rate, Mode mode,
                          std::uint64_t key, std::size_t sample_offset = 0);

template <typename T>
void dropout_backward(const Tensor<T>& dout, double rate, Mode mode,
                      std::uint64_t key, std::size_t sample_offset,
                      Tensor<T>& dinput);

template <typename T>
Tensor<T> global_avg_pool_forward(const Tensor<T>& input);

template <typename T>
void global_avg_pool_backward(const Tensor<T>& input, const Tensor<T>& dout,
                              Tensor<T>& dinput);

// input (N, D...) flattened per sample; weights (D, U), bias (U) -> (N,1,1,U).
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weights,
                        const Tensor<T>& bias);

template <typename T>
void dense_backward(const Tensor<T>& input, const Tensor<T>& weights,
                    const Tensor<T>& dout, Tensor<T>* dinput,
                    Tensor<T>& dweights, Tensor<T>& dbias);

// 0 below t_l, 1 in the band, 2 at or above t_r.
template <typename T>
int srelu_region(T x, T t_left, T t_right) {
  if (x <= t_left) return 0;
  if (x >= t_right) return 2;
  return 1;
}

}  // namespace lcr::nn

#endif  // LCR_NN_OPS_HPP_
