#ifndef LCR_NN_NETWORK_HPP_
#define LCR_NN_NETWORK_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lcr/nn/layer.hpp"

namespace lcr::nn {

// A sequential stack built from a ModelSpec. Parameters are owned by the
// layers and exposed flattened in declaration order.
template <typename T>
class Network {
 public:
  struct Workspace {
    std::vector<Tensor<T>> activations;  // activations[0] is the input
    std::vector<Trace<T>> traces;
  };

  explicit Network(ModelSpec spec, std::uint64_t init_seed = 0);
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const ModelSpec& spec() const { return spec_; }
  Shape output_shape() const;
  int num_outputs() const;

  std::vector<Tensor<T>*> parameters();
  std::vector<const Tensor<T>*> parameters() const;
  std::size_t parameter_count() const;
  std::vector<Tensor<T>> zero_gradients() const;

  // Copies values in; shapes must match parameters().
  void set_parameters(std::span<const Tensor<double>> values);
  std::vector<Tensor<double>> export_parameters() const;

  void forward(const Tensor<T>& batch, const PassContext& ctx, Workspace& ws) const;
  // Accumulates parameter gradients given dLoss/dOutput.
  void backward(Workspace& ws, const Tensor<T>& doutput,
                std::span<Tensor<T>> grads, const PassContext& ctx) const;

  Tensor<T> predict(const Tensor<T>& batch) const;

  // Weighted cross-entropy of the final (softmax) output; gradients are
  // accumulated into `grads` when non-empty.
  LossResult loss(const Tensor<T>& batch, std::span<const int> labels,
                  std::span<const double> class_weights, const PassContext& ctx,
                  std::span<Tensor<T>> grads = {}) const;

 private:
  void build();

  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// Converts a raster-like batch of 8-bit images to (N, H, W, 1) in [0, 1].
template <typename T>
Tensor<T> images_to_tensor(std::span<const std::vector<std::uint8_t>* const> images,
                           int height, int width);

// Index of the largest value per row; ties go to the lowest index.
template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& probs);

}  // namespace lcr::nn

#endif  // LCR_NN_NETWORK_HPP_
