#include <cmath>
#include <string>

#include "lcr/hash.hpp"
#include "lcr/nn/layer.hpp"

namespace lcr::nn {

namespace {

template <typename T>
void fold(std::uint64_t* signature, T value) {
  *signature = splitmix64(*signature ^ static_cast<std::uint64_t>(value));
}

template <typename T>
void fill_uniform(Tensor<T>& t, double limit, std::mt19937_64& rng) {
  for (auto& v : t.values())
    v = static_cast<T>((2.0 * unit_double(rng()) - 1.0) * limit);
}

std::string layer_error(const std::string& what, const Shape& in) {
  return what + " (input " + shape_string(in) + ")";
}

template <typename T>
class ConvLayer final : public Layer<T> {
 public:
  ConvLayer(const Conv2D& cfg, const Shape& in, std::uint64_t id)
      : Layer<T>(in, output_for(cfg, in), id), cfg_(cfg) {
    weights_ = Tensor<T>({cfg.kernel_h, cfg.kernel_w, in[2], cfg.filters});
    bias_ = Tensor<T>({cfg.filters});
  }

  static Shape output_for(const Conv2D& cfg, const Shape& in) {
    if (cfg.filters < 1 || cfg.kernel_h < 1 || cfg.kernel_w < 1 ||
        cfg.stride_h < 1 || cfg.stride_w < 1 || cfg.padding < 0)
      throw ArgumentError(layer_error("conv2d extents must be >= 1", in));
    try {
      return {window_output_extent(in[0], cfg.kernel_h, cfg.stride_h, cfg.padding),
              window_output_extent(in[1], cfg.kernel_w, cfg.stride_w, cfg.padding),
              cfg.filters};
    } catch (const ArgumentError& e) {
      throw ArgumentError(layer_error(std::string("conv2d: ") + e.what(), in));
    }
  }

  LayerConfig config() const override { return cfg_; }

  void forward(const Tensor<T>& x, Tensor<T>& y, const PassContext&,
               Trace<T>&) const override {
    y = conv2d_forward(x, weights_, bias_, cfg_.stride_h, cfg_.stride_w,
                       cfg_.padding);
  }

  void backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                Tensor<T>* dx, std::span<Tensor<T>> grads, const PassContext&,
                Trace<T>&) const override {
    conv2d_backward(x, weights_, dy, cfg_.stride_h, cfg_.stride_w, cfg_.padding,
                    dx, grads[0], grads[1]);
  }

  std::vector<Tensor<T>*> parameters() override { return {&weights_, &bias_}; }

  void initialize(std::mt19937_64& rng) override {
    const double fan_in = static_cast<double>(cfg_.kernel_h) * cfg_.kernel_w *
                          this->in_[2];
    fill_uniform(weights_, std::sqrt(6.0 / fan_in), rng);
    bias_.fill(T(0));
  }

 private:
  Conv2D cfg_;
  Tensor<T> weights_;
  Tensor<T> bias_;
};

template <typename T>
class MaxPoolLayer final : public Layer<T> {
 public:
  MaxPoolLayer(const MaxPool& cfg, const Shape& in, std::uint64_t id)
      : Layer<T>(in, output_for(cfg, in), id), cfg_(cfg) {}

  static Shape output_for(const MaxPool& cfg, const Shape& in) {
    if (cfg.pool_h < 1 || cfg.pool_w < 1 || cfg.stride_h < 1 || cfg.stride_w < 1)
      throw ArgumentError(layer_error("maxpool extents must be >= 1", in));
    if (cfg.pool_h > in[0] || cfg.pool_w > in[1])
      throw ArgumentError(layer_error("maxpool window exceeds input", in));
    return {window_output_extent(in[0], cfg.pool_h, cfg.stride_h, 0),
            window_output_extent(in[1], cfg.pool_w, cfg.stride_w, 0), in[2]};
  }

  LayerConfig config() const override { return cfg_; }

  void forward(const Tensor<T>& x, Tensor<T>& y, const PassContext& ctx,
               Trace<T>&) const override {
    y = maxpool_forward(x, cfg_);
    if (ctx.region_signature) {
      // The argmax pattern is what changes at a kink; recover it from
      // the scatter of a unit gradient.
      Tensor<T> ones(y.shape(), T(1)), mask;
      maxpool_backward(x, cfg_, ones, mask);
      for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] != T(0)) fold(ctx.region_signature, i);
    }
  }

  void backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                Tensor<T>* dx, std::span<Tensor<T>>, const PassContext&,
                Trace<T>&) const override {
    if (dx) maxpool_backward(x, cfg_, dy, *dx);
  }

 private:
  MaxPool cfg_;
};

template <typename T>
class GlobalAveragePoolLayer final : public Layer<T> {
 public:
  GlobalAveragePoolLayer(const Shape& in, std::uint64_t id)
      : Layer<T>(in, {1, 1, in[2]}, id) {}

  LayerConfig config() const override { return GlobalAveragePool{}; }

  void forward(const Tensor<T>& x, Tensor<T>& y, const PassContext&,
               Trace<T>&) const override {
    y = global_avg_pool_forward(x);
  }

  void backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                Tensor<T>* dx, std::span<Tensor<T>>, const PassContext&,
                Trace<T>&) const override {
    if (dx) global_avg_pool_backward(x, dy, *dx);
  }
};

template <typename T>
class DenseLayer final : public Layer<T> {
 public:
  DenseLayer(const Dense& cfg, const Shape& in, std::uint64_t id)
      : Layer<T>(in, {1, 1, cfg.units}, id), cfg_(cfg) {
    if (cfg.units < 1) throw ArgumentError(layer_error("dense units must be >= 1", in));
    weights_ = Tensor<T>({static_cast<int>(shape_size(in)), cfg.units});
    bias_ = Tensor<T>({cfg.units});
  }

  LayerConfig config() const override { return cfg_; }

  void forward(const Tensor<T>& x, Tensor<T>& y, const PassContext&,
               Trace<T>&) const override {
    y = dense_forward(x, weights_, bias_);
  }

  void backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                Tensor<T>* dx, std::span<Tensor<T>> grads, const PassContext&,
                Trace<T>&) const override {
    dense_backward(x, weights_, dy, dx, grads[0], grads[1]);
  }

  std::vector<Tensor<T>*> parameters() override { return {&weights_, &bias_}; }

  void initialize(std::mt19937_64& rng) override {
    fill_uniform(weights_, std::sqrt(6.0 / weights_.dim(0)), rng);
    bias_.fill(T(0));
  }

 private:
  Dense cfg_;
  Tensor<T> weights_;
  Tensor<T> bias_;
};

template <typename T>
class DropoutLayer final : public Layer<T> {
 public:
  DropoutLayer(const Dropout& cfg, const Shape& in, std::uint64_t id)
      : Layer<T>(in, in, id), cfg_(cfg) {
    if (!(cfg.rate >= 0.0 && cfg.rate < 1.0))
      throw ArgumentError("dropout rate must lie in [0, 1)");
  }

  LayerConfig config() const override { return cfg_; }

  void forward(const Tensor<T>& x, Tensor<T>& y, const PassContext& ctx,
               Trace<T>&) const override {
    y = dropout_forward(x, cfg_.rate, ctx.mode, key(ctx), ctx.sample_offset);
  }

  void backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>& dy,
                Tensor<T>* dx, std::span<Tensor<T>>, const PassContext& ctx,
                Trace<T>&) const override {
    if (dx) dropout_backward(dy, cfg_.rate, ctx.mode, key(ctx), ctx.sample_offset, *dx);
  }

 private:
  std::uint64_t key(const PassContext& ctx) const {
    return mix_keys({ctx.dropout_key, this->id_});
  }

  Dropout cfg_;
};

template <typename T>
class ActivationLayer final : public Layer<T> {
 public:
  ActivationLayer(const Activation& cfg, const Shape& in, std::uint64_t id)
      : Layer<T>(in, in, id), cfg_(cfg) {
    if (cfg.kind == ActivationKind::srelu) {
      srelu_ = Tensor<T>({4, in[2]});
      reset_srelu();
    }
  }

  LayerConfig config() const override { return cfg_; }

  void forward(const Tensor<T>& x, Tensor<T>& y, const PassContext& ctx,
               Trace<T>&) const override {
    const Tensor<T>* params = cfg_.kind == ActivationKind::srelu ? &srelu_ : nullptr;
    y = activation_forward(x, cfg_, params);
    if (!ctx.region_signature) return;
    if (params) {
      const int c = srelu_.dim(1);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const int ch = static_cast<int>(i % c);
        fold(ctx.region_signature,
             srelu_region(x[i], srelu_[ch], srelu_[2 * c + ch]));
      }
    } else {
      for (std::size_t i = 0; i < x.size(); ++i)
        fold(ctx.region_signature, x[i] > T(0));
    }
  }

  void backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                Tensor<T>* dx, std::span<Tensor<T>> grads, const PassContext&,
                Trace<T>&) const override {
    const bool srelu = cfg_.kind == ActivationKind::srelu;
    Tensor<T> scratch;
    activation_backward(x, cfg_, srelu ? &srelu_ : nullptr, dy, dx ? *dx : scratch,
                        srelu ? &grads[0] : nullptr);
  }

  std::vector<Tensor<T>*> parameters() override {
    if (cfg_.kind == ActivationKind::srelu) return {&srelu_};
    return {};
  }

  void initialize(std::mt19937_64&) override {
    if (cfg_.kind == ActivationKind::srelu) reset_srelu();
  }

 private:
  // t_l = 0, a_l = 0, t_r = 1, a_r = 1.
  void reset_srelu() {
    const int c = srelu_.dim(1);
    for (int ch = 0; ch < c; ++ch) {
      srelu_[ch] = T(0);
      srelu_[c + ch] = T(0);
      srelu_[2 * c + ch] = T(1);
      srelu_[3 * c + ch] = T(1);
    }
  }

  Activation cfg_;
  Tensor<T> srelu_;
};

template <typename T>
class SoftmaxLayer final : public Layer<T> {
 public:
  SoftmaxLayer(const Shape& in, std::uint64_t id) : Layer<T>(in, in, id) {}

  LayerConfig config() const override { return Softmax{}; }

  void forward(const Tensor<T>& x, Tensor<T>& y, const PassContext&,
               Trace<T>&) const override {
    y = softmax(x);
  }

  void backward(const Tensor<T>&, const Tensor<T>& y, const Tensor<T>& dy,
                Tensor<T>* dx, std::span<Tensor<T>>, const PassContext&,
                Trace<T>&) const override {
    if (dx) softmax_backward(y, dy, *dx);
  }
};

template <typename T>
class ResidualLayer final : public Layer<T> {
 public:
  ResidualLayer(const Residual& cfg, const Shape& in, std::uint64_t& next_id,
                std::uint64_t id)
      : Layer<T>(in, in, id), cfg_(cfg) {
    if (cfg.inner.empty())
      throw ArgumentError(layer_error("residual block has no inner layers", in));
    Shape shape = in;
    for (const auto& c : cfg.inner) {
      inner_.push_back(make_layer<T>(c, shape, next_id));
      shape = inner_.back()->output_shape();
    }
    this->out_ = shape;
    if (shape == in) return;
    if (!cfg.projection)
      throw ArgumentError("residual inner stack maps " + shape_string(in) +
                          " to " + shape_string(shape) +
                          " and no projection is configured");
    stride_h_ = projection_stride(in[0], shape[0]);
    stride_w_ = projection_stride(in[1], shape[1]);
    proj_weights_ = Tensor<T>({1, 1, in[2], shape[2]});
    proj_bias_ = Tensor<T>({shape[2]});
    has_projection_ = true;
  }

  LayerConfig config() const override { return cfg_; }

  void forward(const Tensor<T>& x, Tensor<T>& y, const PassContext& ctx,
               Trace<T>& trace) const override {
    trace.activations.resize(inner_.size());
    trace.nested.resize(inner_.size());
    const Tensor<T>* cur = &x;
    for (std::size_t i = 0; i < inner_.size(); ++i) {
      inner_[i]->forward(*cur, trace.activations[i], ctx, trace.nested[i]);
      cur = &trace.activations[i];
    }
    if (has_projection_) {
      y = conv2d_forward(x, proj_weights_, proj_bias_, stride_h_, stride_w_, 0);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += (*cur)[i];
    } else {
      y = *cur;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
    }
  }

  void backward(const Tensor<T>& x, const Tensor<T>&, const Tensor<T>& dy,
                Tensor<T>* dx, std::span<Tensor<T>> grads, const PassContext& ctx,
                Trace<T>& trace) const override {
    std::vector<std::size_t> offsets;
    std::size_t offset = 0;
    for (const auto& layer : inner_) {
      offsets.push_back(offset);
      offset += layer->parameters().size();
    }
    Tensor<T> upstream = dy, downstream;
    for (std::size_t i = inner_.size(); i-- > 0;) {
      const Tensor<T>& in = i == 0 ? x : trace.activations[i - 1];
      const std::size_t count = inner_[i]->parameters().size();
      const bool need_dx = i > 0 || dx != nullptr;
      inner_[i]->backward(in, trace.activations[i], upstream,
                          need_dx ? &downstream : nullptr,
                          grads.subspan(offsets[i], count), ctx, trace.nested[i]);
      if (need_dx) std::swap(upstream, downstream);
    }
    if (has_projection_) {
      Tensor<T> shortcut;
      conv2d_backward(x, proj_weights_, dy, stride_h_, stride_w_, 0,
                      dx ? &shortcut : nullptr, grads[offset], grads[offset + 1]);
      if (dx) {
        *dx = std::move(upstream);
        for (std::size_t i = 0; i < dx->size(); ++i) (*dx)[i] += shortcut[i];
      }
    } else if (dx) {
      *dx = std::move(upstream);
      for (std::size_t i = 0; i < dx->size(); ++i) (*dx)[i] += dy[i];
    }
  }

  std::vector<Tensor<T>*> parameters() override {
    std::vector<Tensor<T>*> out;
    for (auto& layer : inner_)
      for (auto* p : layer->parameters()) out.push_back(p);
    if (has_projection_) {
      out.push_back(&proj_weights_);
      out.push_back(&proj_bias_);
    }
    return out;
  }

  void initialize(std::mt19937_64& rng) override {
    for (auto& layer : inner_) layer->initialize(rng);
    if (has_projection_) {
      fill_uniform(proj_weights_, std::sqrt(6.0 / this->in_[2]), rng);
      proj_bias_.fill(T(0));
    }
  }

 private:
  static int projection_stride(int in, int out) {
    for (int s = 1; s <= in; ++s)
      if ((in - 1) / s + 1 == out) return s;
    throw ArgumentError("no 1x1 projection stride maps extent " +
                        std::to_string(in) + " to " + std::to_string(out));
  }

  Residual cfg_;
  std::vector<std::unique_ptr<Layer<T>>> inner_;
  bool has_projection_ = false;
  int stride_h_ = 1, stride_w_ = 1;
  Tensor<T> proj_weights_;
  Tensor<T> proj_bias_;
};

}  // namespace

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerConfig& config, const Shape& input,
                                     std::uint64_t& next_id) {
  if (input.size() != 3)
    throw ArgumentError("layer input must be (H, W, C), got " + shape_string(input));
  const std::uint64_t id = next_id++;
  return std::visit(
      [&](const auto& cfg) -> std::unique_ptr<Layer<T>> {
        using C = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<C, Conv2D>) {
          return std::make_unique<ConvLayer<T>>(cfg, input, id);
        } else if constexpr (std::is_same_v<C, MaxPool>) {
          return std::make_unique<MaxPoolLayer<T>>(cfg, input, id);
        } else if constexpr (std::is_same_v<C, GlobalAveragePool>) {
          return std::make_unique<GlobalAveragePoolLayer<T>>(input, id);
        } else if constexpr (std::is_same_v<C, Dense>) {
          return std::make_unique<DenseLayer<T>>(cfg, input, id);
        } else if constexpr (std::is_same_v<C, Dropout>) {
          return std::make_unique<DropoutLayer<T>>(cfg, input, id);
        } else if constexpr (std::is_same_v<C, Activation>) {
          return std::make_unique<ActivationLayer<T>>(cfg, input, id);
        } else if constexpr (std::is_same_v<C, Softmax>) {
          return std::make_unique<SoftmaxLayer<T>>(input, id);
        } else {
          return std::make_unique<ResidualLayer<T>>(cfg, input, next_id, id);
        }
      },
      config.base());
}

template <typename T>
Tensor<T> residual_forward(const Tensor<T>& input, const Residual& block,
                           std::span<const Tensor<T>> params) {
  if (input.rank() != 4) throw ArgumentError("residual_forward expects NHWC input");
  std::uint64_t next_id = 0;
  auto layer = make_layer<T>(block, {input.dim(1), input.dim(2), input.dim(3)}, next_id);
  auto slots = layer->parameters();
  if (slots.size() != params.size())
    throw ArgumentError("residual_forward: expected " + std::to_string(slots.size()) +
                        " parameter tensors, got " + std::to_string(params.size()));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]->shape() != params[i].shape())
      throw ArgumentError("residual_forward: parameter " + std::to_string(i) +
                          " has shape " + shape_string(params[i].shape()) +
                          ", expected " + shape_string(slots[i]->shape()));
    *slots[i] = params[i];
  }
  Tensor<T> out;
  Trace<T> trace;
  layer->forward(input, out, PassContext{}, trace);
  return out;
}

template std::unique_ptr<Layer<float>> make_layer<float>(const LayerConfig&, const Shape&,
                                                         std::uint64_t&);
template std::unique_ptr<Layer<double>> make_layer<double>(const LayerConfig&, const Shape&,
                                                           std::uint64_t&);
template std::unique_ptr<Layer<long double>> make_layer<long double>(
    const LayerConfig&, const Shape&, std::uint64_t&);
template Tensor<float> residual_forward(const Tensor<float>&, const Residual&,
                                        std::span<const Tensor<float>>);
template Tensor<double> residual_forward(const Tensor<double>&, const Residual&,
                                         std::span<const Tensor<double>>);

}  // namespace lcr::nn
