#ifndef LCR_NN_LAYER_HPP_
#define LCR_NN_LAYER_HPP_

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "lcr/nn/config.hpp"
#include "lcr/nn/ops.hpp"
#include "lcr/nn/tensor.hpp"

namespace lcr::nn {

struct PassContext {
  Mode mode = Mode::infer;
  std::uint64_t dropout_key = 0;
  std::size_t sample_offset = 0;
  // When set, layers with piecewise behaviour fold the branch taken by every
  // element into this hash so callers can detect kink crossings.
  std::uint64_t* region_signature = nullptr;
};

// Per-call scratch a layer needs between forward and backward.
template <typename T>
struct Trace {
  std::vector<Tensor<T>> activations;
  std::vector<Trace> nested;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerConfig config() const = 0;
  const Shape& input_shape() const { return in_; }
  const Shape& output_shape() const { return out_; }

  virtual void forward(const Tensor<T>& x, Tensor<T>& y, const PassContext& ctx,
                       Trace<T>& trace) const = 0;
  // `grads` is parallel to parameters(); gradients are accumulated.
  virtual void backward(const Tensor<T>& x, const Tensor<T>& y,
                        const Tensor<T>& dy, Tensor<T>* dx,
                        std::span<Tensor<T>> grads, const PassContext& ctx,
                        Trace<T>& trace) const = 0;

  // Flattened learnable tensors, nested layers included, declaration order.
  virtual std::vector<Tensor<T>*> parameters() { return {}; }
  std::vector<const Tensor<T>*> parameters() const {
    auto mutable_params = const_cast<Layer*>(this)->parameters();
    return {mutable_params.begin(), mutable_params.end()};
  }
  virtual void initialize(std::mt19937_64& /*rng*/) {}

 protected:
  Layer(Shape in, Shape out, std::uint64_t id)
      : in_(std::move(in)), out_(std::move(out)), id_(id) {}

  Shape in_;
  Shape out_;
  std::uint64_t id_;
};

// Validates `config` against the per-sample input shape (H, W, C) and
// builds the runtime layer. `next_id` numbers layers in pre-order.
template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerConfig& config,
                                     const Shape& input, std::uint64_t& next_id);

template <typename T>
Tensor<T> residual_forward(const Tensor<T>& input, const Residual& block,
                           std::span<const Tensor<T>> params);

}  // namespace lcr::nn

#endif  // LCR_NN_LAYER_HPP_
