#include "lcr/nn/network.hpp"

#include <random>

namespace lcr::nn {

template <typename T>
Network<T>::Network(ModelSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
  build();
  std::mt19937_64 rng(init_seed);
  for (auto& layer : layers_) layer->initialize(rng);
}

template <typename T>
Network<T>::Network(const Network& other) : spec_(other.spec_) {
  build();
  auto dst = parameters();
  auto src = other.parameters();
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] = *src[i];
}

template <typename T>
Network<T>& Network<T>::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <typename T>
void Network<T>::build() {
  if (spec_.input_h < 1 || spec_.input_w < 1 || spec_.input_c < 1)
    throw ArgumentError("model input extents must be >= 1");
  if (spec_.layers.empty()) throw ArgumentError("model has no layers");
  layers_.clear();
  Shape shape = spec_.input_shape();
  std::uint64_t next_id = 0;
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    try {
      layers_.push_back(make_layer<T>(spec_.layers[i], shape, next_id));
    } catch (const ArgumentError& e) {
      throw ArgumentError("layer " + std::to_string(i) + " " +
                          describe(spec_.layers[i]) + ": " + e.what());
    }
    shape = layers_.back()->output_shape();
  }
}

template <typename T>
Shape Network<T>::output_shape() const {
  return layers_.back()->output_shape();
}

template <typename T>
int Network<T>::num_outputs() const {
  return static_cast<int>(shape_size(output_shape()));
}

template <typename T>
std::vector<Tensor<T>*> Network<T>::parameters() {
  std::vector<Tensor<T>*> out;
  for (auto& layer : layers_)
    for (auto* p : layer->parameters()) out.push_back(p);
  return out;
}

template <typename T>
std::vector<const Tensor<T>*> Network<T>::parameters() const {
  auto all = const_cast<Network*>(this)->parameters();
  return {all.begin(), all.end()};
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

template <typename T>
std::vector<Tensor<T>> Network<T>::zero_gradients() const {
  std::vector<Tensor<T>> out;
  for (const auto* p : parameters()) out.emplace_back(p->shape());
  return out;
}

template <typename T>
void Network<T>::set_parameters(std::span<const Tensor<double>> values) {
  auto dst = parameters();
  if (dst.size() != values.size())
    throw ArgumentError("expected " + std::to_string(dst.size()) +
                        " parameter tensors, got " + std::to_string(values.size()));
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i]->shape() != values[i].shape())
      throw ArgumentError("parameter " + std::to_string(i) + " has shape " +
                          shape_string(values[i].shape()) + ", expected " +
                          shape_string(dst[i]->shape()));
    *dst[i] = tensor_cast<T>(values[i]);
  }
}

template <typename T>
std::vector<Tensor<double>> Network<T>::export_parameters() const {
  std::vector<Tensor<double>> out;
  for (const auto* p : parameters()) out.push_back(tensor_cast<double>(*p));
  return out;
}

template <typename T>
void Network<T>::forward(const Tensor<T>& batch, const PassContext& ctx,
                         Workspace& ws) const {
  const Shape& in = spec_.input_shape();
  if (batch.rank() != 4 || batch.dim(1) != in[0] || batch.dim(2) != in[1] ||
      batch.dim(3) != in[2])
    throw ArgumentError("batch shape " + shape_string(batch.shape()) +
                        " does not match model input " + shape_string(in));
  ws.activations.resize(layers_.size() + 1);
  ws.traces.resize(layers_.size());
  ws.activations[0] = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    layers_[i]->forward(ws.activations[i], ws.activations[i + 1], ctx, ws.traces[i]);
}

template <typename T>
void Network<T>::backward(Workspace& ws, const Tensor<T>& doutput,
                          std::span<Tensor<T>> grads, const PassContext& ctx) const {
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& layer : layers_) {
    offsets.push_back(offset);
    offset += layer->parameters().size();
  }
  if (grads.size() != offset) throw ArgumentError("gradient list size mismatch");
  Tensor<T> upstream = doutput, downstream;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const std::size_t count = layers_[i]->parameters().size();
    layers_[i]->backward(ws.activations[i], ws.activations[i + 1], upstream,
                         i > 0 ? &downstream : nullptr, grads.subspan(offsets[i], count),
                         ctx, ws.traces[i]);
    if (i > 0) std::swap(upstream, downstream);
  }
}

template <typename T>
Tensor<T> Network<T>::predict(const Tensor<T>& batch) const {
  Workspace ws;
  forward(batch, PassContext{}, ws);
  Tensor<T> out = std::move(ws.activations.back());
  out.reshape({batch.dim(0), num_outputs()});
  return out;
}

template <typename T>
LossResult Network<T>::loss(const Tensor<T>& batch, std::span<const int> labels,
                            std::span<const double> class_weights,
                            const PassContext& ctx, std::span<Tensor<T>> grads) const {
  if (static_cast<int>(labels.size()) != batch.dim(0))
    throw ArgumentError("label count does not match batch size");
  Workspace ws;
  forward(batch, ctx, ws);
  if (grads.empty()) return weighted_cross_entropy(ws.activations.back(), labels, class_weights);
  Tensor<T> dprobs;
  LossResult r = weighted_cross_entropy(ws.activations.back(), labels, class_weights, &dprobs);
  backward(ws, dprobs, grads, ctx);
  return r;
}

template <typename T>
Tensor<T> images_to_tensor(std::span<const std::vector<std::uint8_t>* const> images,
                           int height, int width) {
  const std::size_t px = static_cast<std::size_t>(height) * width;
  Tensor<T> out({static_cast<int>(images.size()), height, width, 1});
  for (std::size_t n = 0; n < images.size(); ++n) {
    if (images[n]->size() != px)
      throw ArgumentError("image " + std::to_string(n) + " has " +
                          std::to_string(images[n]->size()) + " pixels, expected " +
                          std::to_string(px));
    for (std::size_t i = 0; i < px; ++i)
      out[n * px + i] = static_cast<T>((*images[n])[i]) / T(255);
  }
  return out;
}

template <typename T>
std::vector<int> argmax_rows(const Tensor<T>& probs) {
  if (probs.rank() < 1) throw ArgumentError("argmax_rows needs a batch axis");
  const int n = probs.dim(0);
  const std::size_t d = n ? probs.size() / n : 0;
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) {
    const T* row = probs.data() + i * d;
    out[i] = static_cast<int>(std::max_element(row, row + d) - row);
  }
  return out;
}

template class Network<float>;
template class Network<double>;
template class Network<long double>;
template Tensor<float> images_to_tensor<float>(std::span<const std::vector<std::uint8_t>* const>, int, int);
template Tensor<double> images_to_tensor<double>(std::span<const std::vector<std::uint8_t>* const>, int, int);
template std::vector<int> argmax_rows(const Tensor<float>&);
template std::vector<int> argmax_rows(const Tensor<double>&);

}  // namespace lcr::nn
