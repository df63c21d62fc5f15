#include "lcr/nn/train.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "lcr/hash.hpp"

namespace lcr::nn {

namespace {

constexpr int kChunks = 4;

template <typename T>
struct ChunkResult {
  std::vector<Tensor<T>> grads;
  double loss_sum = 0.0;  // loss * chunk size
  int correct = 0;
};

}  // namespace

Precision parse_precision(std::string_view text) {
  if (text == "f64" || text == "float64" || text == "double") return Precision::f64;
  if (text == "f32" || text == "float32" || text == "float") return Precision::f32;
  throw ArgumentError("unknown precision '" + std::string(text) +
                      "' (expected float32 or float64)");
}

void validate_train_config(const TrainConfig& c) {
  if (c.epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (c.batch_size < 1) throw ArgumentError("batch size must be >= 1");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate))
    throw ArgumentError("learning rate must be positive");
  for (double w : c.class_weights)
    if (!(w > 0.0)) throw ArgumentError("class weights must be positive");
  if (c.augment) validate_augment(*c.augment);
  if (c.threads < 1) throw ArgumentError("threads must be >= 1");
}

int TrainedModel::num_classes() const {
  return static_cast<int>(Network<double>(spec).num_outputs());
}

template <typename T>
Tensor<T> rasters_to_tensor(std::span<const Raster* const> images) {
  if (images.empty()) throw ArgumentError("empty image batch");
  std::vector<const std::vector<std::uint8_t>*> px;
  for (const Raster* r : images) {
    if (r->width() != images[0]->width() || r->height() != images[0]->height())
      throw ArgumentError("images in a batch must share one size");
    px.push_back(&r->pixels());
  }
  return images_to_tensor<T>(px, images[0]->height(), images[0]->width());
}

template <typename T>
Network<T> instantiate(const TrainedModel& model) {
  Network<T> net(model.spec);
  net.set_parameters(model.params);
  return net;
}

template <typename T>
Evaluation evaluate_images(const Network<T>& net, const LabeledImages& set,
                           std::span<const double> class_weights, int batch_size) {
  Evaluation out;
  const std::size_t n = set.images.size();
  if (n == 0) return out;
  double loss_sum = 0.0;
  int correct = 0;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
    std::span<const Raster* const> imgs(set.images.data() + start, end - start);
    Tensor<T> probs = net.predict(rasters_to_tensor<T>(imgs));
    if (!set.labels.empty()) {
      std::span<const int> labels(set.labels.data() + start, end - start);
      loss_sum += weighted_cross_entropy(probs, labels, class_weights).value *
                  static_cast<double>(end - start);
    }
    for (int p : argmax_rows(probs)) out.predictions.push_back(p);
  }
  if (!set.labels.empty()) {
    for (std::size_t i = 0; i < n; ++i) correct += out.predictions[i] == set.labels[i];
    out.loss = loss_sum / static_cast<double>(n);
    out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  }
  return out;
}

template <typename T>
TrainedModel train(const ModelSpec& spec, const TrainData& data, const TrainConfig& config,
                   const EpochCallback& on_epoch) {
  validate_train_config(config);
  const auto& train_set = data.train;
  const std::size_t n = train_set.images.size();
  if (n == 0) throw DataError("training set for model '" + spec.name + "' is empty");
  if (train_set.labels.size() != n || data.val.labels.size() != data.val.images.size())
    throw ArgumentError("image and label counts differ");

  Network<T> net(spec, mix_keys({config.seed, 0x1417}));
  const int classes = net.num_outputs();
  auto check_labels = [&](const LabeledImages& set) {
    for (int y : set.labels)
      if (y < 0 || y >= classes)
        throw DataError("label " + std::to_string(y) + " outside the " +
                        std::to_string(classes) + " outputs of model '" + spec.name + "'");
  };
  check_labels(train_set);
  check_labels(data.val);
  if (!config.class_weights.empty() &&
      static_cast<int>(config.class_weights.size()) != classes)
    throw ArgumentError("class weight count does not match the model's outputs");

  TrainedModel result;
  result.spec = spec;
  OptimizerState<T> state;
  std::vector<std::size_t> order(n);
  double best_acc = -1.0;
  const std::span<const double> weights = config.class_weights;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::uint64_t shuffle_key =
        mix_keys({config.seed, static_cast<std::uint64_t>(epoch), 0x5u});
    for (std::size_t i = n - 1; i > 0; --i)
      std::swap(order[i], order[splitmix64(shuffle_key ^ i) % (i + 1)]);

    double loss_sum = 0.0;
    int correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const std::size_t bn = end - start;
      std::vector<Raster> augmented;
      std::vector<const Raster*> images;
      std::vector<int> labels;
      if (config.augment) augmented.reserve(bn);
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t s = order[i];
        if (config.augment) {
          augmented.push_back(augment(*train_set.images[s], *config.augment,
                                      static_cast<std::uint64_t>(epoch - 1) * n + s));
          images.push_back(&augmented.back());
        } else {
          images.push_back(train_set.images[s]);
        }
        labels.push_back(train_set.labels[s]);
      }

      const PassContext ctx{Mode::train,
                            mix_keys({config.seed, static_cast<std::uint64_t>(epoch),
                                      batch_index}),
                            0, nullptr};
      std::vector<ChunkResult<T>> chunks(kChunks);
      auto run_chunk = [&](int c) {
        const std::size_t lo = bn * c / kChunks, hi = bn * (c + 1) / kChunks;
        if (lo == hi) return;
        std::span<const Raster* const> imgs(images.data() + lo, hi - lo);
        std::span<const int> lab(labels.data() + lo, hi - lo);
        PassContext cctx = ctx;
        cctx.sample_offset = lo;
        typename Network<T>::Workspace ws;
        net.forward(rasters_to_tensor<T>(imgs), cctx, ws);
        Tensor<T> dprobs;
        auto& out = chunks[c];
        const LossResult lr = weighted_cross_entropy(ws.activations.back(), lab, weights, &dprobs);
        // Rescale from a per-chunk mean to this chunk's share of the batch mean.
        const T share = static_cast<T>(static_cast<double>(hi - lo) / static_cast<double>(bn));
        for (auto& v : dprobs.values()) v *= share;
        out.grads = net.zero_gradients();
        net.backward(ws, dprobs, out.grads, cctx);
        out.loss_sum = lr.value * static_cast<double>(hi - lo);
        const auto pred = argmax_rows(ws.activations.back());
        for (std::size_t i = 0; i < pred.size(); ++i) out.correct += pred[i] == lab[i];
      };
      if (config.threads > 1) {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(kChunks);
        for (int c = 0; c < kChunks; ++c)
          pool.emplace_back([&, c] {
            try {
              run_chunk(c);
            } catch (...) {
              errors[c] = std::current_exception();
            }
          });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
          if (e) std::rethrow_exception(e);
      } else {
        for (int c = 0; c < kChunks; ++c) run_chunk(c);
      }

      std::vector<Tensor<T>> grads = net.zero_gradients();
      for (const auto& chunk : chunks) {
        if (chunk.grads.empty()) continue;
        for (std::size_t g = 0; g < grads.size(); ++g)
          for (std::size_t j = 0; j < grads[g].size(); ++j) grads[g][j] += chunk.grads[g][j];
        loss_sum += chunk.loss_sum;
        correct += chunk.correct;
      }
      if (!std::isfinite(loss_sum))
        throw DivergenceError("training of '" + spec.name + "' diverged at epoch " +
                                  std::to_string(epoch) + " (non-finite loss)",
                              epoch);
      auto params = net.parameters();
      if (config.optimizer == OptimizerKind::adam)
        adam_step<T>(params, grads, state, config.learning_rate);
      else
        rmsprop_step<T>(params, grads, state, config.learning_rate);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    const bool has_val = !data.val.images.empty();
    if (has_val) {
      const Evaluation ev = evaluate_images(net, data.val, weights);
      rec.val_loss = ev.loss;
      rec.val_acc = ev.accuracy;
      if (!std::isfinite(ev.loss))
        throw DivergenceError("validation loss of '" + spec.name +
                                  "' is non-finite at epoch " + std::to_string(epoch),
                              epoch);
    }
    result.history.push_back(rec);
    const double score = has_val ? rec.val_acc : rec.train_acc;
    if (!has_val || score > best_acc) {
      best_acc = score;
      result.best_epoch = epoch;
      result.params = net.export_parameters();
    }
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

TrainedModel train(const ModelSpec& spec, const TrainData& data, const TrainConfig& config,
                   Precision precision, const EpochCallback& on_epoch) {
  return precision == Precision::f32 ? train<float>(spec, data, config, on_epoch)
                                     : train<double>(spec, data, config, on_epoch);
}

#define LCR_INSTANTIATE_TRAIN(T)                                                      \
  template TrainedModel train<T>(const ModelSpec&, const TrainData&, const TrainConfig&, \
                                 const EpochCallback&);                               \
  template Network<T> instantiate<T>(const TrainedModel&);                            \
  template Evaluation evaluate_images(const Network<T>&, const LabeledImages&,        \
                                      std::span<const double>, int);                  \
  template Tensor<T> rasters_to_tensor<T>(std::span<const Raster* const>);

LCR_INSTANTIATE_TRAIN(float)
LCR_INSTANTIATE_TRAIN(double)

}  // namespace lcr::nn
