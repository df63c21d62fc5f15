#include <doctest.h>

#include <cmath>
#include <random>

#include "lcr/nn/gradcheck.hpp"
#include "lcr/nn/model_io.hpp"
#include "lcr/nn/network.hpp"
#include "lcr/nn/optim.hpp"
#include "lcr/nn/presets.hpp"
#include "lcr/nn/train.hpp"
#include "support.hpp"

using namespace lcr;
using namespace lcr::nn;

namespace {

template <typename T = double>
Tensor<T> random_batch(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(u(rng));
  return t;
}

ModelSpec spec_of(std::string name, int h, int w, int c, std::vector<LayerConfig> layers) {
  ModelSpec s;
  s.name = std::move(name);
  s.input_h = h;
  s.input_w = w;
  s.input_c = c;
  s.layers = std::move(layers);
  return s;
}

double check_spec(const ModelSpec& spec, std::uint64_t seed = 1,
                  const std::vector<double>& weights = {}) {
  const Network<double> net(spec, seed);
  const auto batch = random_batch({3, spec.input_h, spec.input_w, spec.input_c}, seed + 10);
  std::vector<int> labels;
  for (int i = 0; i < 3; ++i) labels.push_back(i % net.num_outputs());
  const auto r = grad_check(net, batch, labels, weights);
  CHECK(r.checked > 0);
  CHECK(r.checked == r.total_parameters);
  return r.max_rel_error;
}

// Class 0 inks the left half, class 1 the right half, with random holes.
std::vector<Raster> halves(int count, std::uint64_t seed, std::vector<int>& labels) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution hole(0.2);
  std::vector<Raster> out;
  for (int i = 0; i < count; ++i) {
    const int cls = i % 2;
    Raster r(16, 16);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 8; ++x)
        if (!hole(rng)) r.at(cls == 0 ? x : x + 8, y) = kInk;
    out.push_back(std::move(r));
    labels.push_back(cls);
  }
  return out;
}

LabeledImages view(const std::vector<Raster>& rasters, const std::vector<int>& labels) {
  LabeledImages set;
  for (const auto& r : rasters) set.images.push_back(&r);
  set.labels = labels;
  return set;
}

ModelSpec toy_spec() {
  return spec_of("toy", 16, 16, 1,
                 {Conv2D{4, 3, 3, 1, 1, 1}, Activation{ActivationKind::relu}, MaxPool{},
                  Dense{2}, Softmax{}});
}

struct Toy {
  std::vector<int> train_labels, val_labels;
  std::vector<Raster> train_images = halves(64, 1, train_labels);
  std::vector<Raster> val_images = halves(32, 2, val_labels);
  TrainData data() const {
    return {view(train_images, train_labels), view(val_images, val_labels)};
  }
};

}  // namespace

TEST_SUITE("nn_model") {

TEST_CASE("optimizer steps") {
  Tensor<double> theta({3}, std::vector<double>{1.0, -2.0, 0.5});
  const Tensor<double> original = theta;
  Tensor<double>* params[] = {&theta};
  const std::vector<Tensor<double>> zero{Tensor<double>({3})};
  OptimizerState<double> rs, as;
  rmsprop_step<double>(params, zero, rs, 0.1);
  adam_step<double>(params, zero, as, 0.1);
  CHECK(theta == original);

  Tensor<double> one({1}, 0.0);
  Tensor<double>* p1[] = {&one};
  const std::vector<Tensor<double>> g1{Tensor<double>({1}, 1.0)};
  OptimizerState<double> r1;
  rmsprop_step<double>(p1, g1, r1, 0.001);
  CHECK(one[0] == doctest::Approx(-0.001 / (std::sqrt(0.1) + 1e-7)).epsilon(1e-14));

  one[0] = 0.0;
  OptimizerState<double> a1;
  adam_step<double>(p1, g1, a1, 0.001);
  CHECK(one[0] == doctest::Approx(-0.001 / (1.0 + 1e-7)).epsilon(1e-12));
  CHECK(a1.step == 1);

  CHECK(parse_optimizer("adam") == OptimizerKind::adam);
  CHECK(optimizer_name(OptimizerKind::rmsprop) == "rmsprop");
  CHECK_THROWS_AS(parse_optimizer("sgd"), ArgumentError);
}

TEST_CASE("gradients of single layer types") {
  CHECK(check_spec(spec_of("dense", 1, 1, 6, {Dense{4}, Softmax{}})) < 1e-4);
  CHECK(check_spec(spec_of("conv-pool-dense", 6, 6, 2,
                           {Conv2D{3, 3, 3, 1, 1, 0}, MaxPool{}, Dense{3}, Softmax{}})) < 1e-4);
  CHECK(check_spec(spec_of("strided-padded", 7, 5, 2,
                           {Conv2D{3, 2, 3, 2, 1, 1}, Activation{ActivationKind::leaky_relu, 0.1},
                            Dense{2}, Softmax{}})) < 1e-4);
  CHECK(check_spec(spec_of("gap-dropout", 4, 4, 2,
                           {Conv2D{5, 3, 3, 1, 1, 1}, Activation{ActivationKind::relu},
                            GlobalAveragePool{}, Dropout{0.3}, Dense{3}, Softmax{}})) < 1e-4);
  CHECK(check_spec(spec_of("residual", 4, 4, 2,
                           {Residual{{Conv2D{2, 3, 3, 1, 1, 1}, Activation{ActivationKind::relu},
                                      Conv2D{2, 3, 3, 1, 1, 1}},
                                     false},
                            Residual{{Conv2D{3, 3, 3, 2, 2, 1}}, true}, Dense{2}, Softmax{}})) <
        1e-4);
  CHECK(check_spec(spec_of("weighted", 1, 1, 5, {Dense{3}, Softmax{}}), 3, {350.0, 30.0, 10.0}) <
        1e-4);
}

TEST_CASE("srelu parameter gradients away from the kinks") {
  const ModelSpec spec = spec_of("srelu", 3, 3, 2,
                                 {Conv2D{2, 2, 2, 1, 1, 0}, Activation{ActivationKind::srelu},
                                  Dense{2}, Softmax{}});
  Network<double> net(spec, 4);
  auto params = net.export_parameters();
  // (t_l, a_l, t_r, a_r) rows per channel; every region gets traffic.
  params[2] = Tensor<double>({4, 2}, std::vector<double>{-0.3, -0.25, 0.2, 0.1, 0.35, 0.3,
                                                         1.5, 0.7});
  net.set_parameters(params);
  const auto batch = random_batch({4, 3, 3, 2}, 8);
  const int labels[] = {0, 1, 1, 0};
  const auto r = grad_check(net, batch, labels);
  CHECK(r.max_rel_error < 1e-4);
  CHECK(r.checked + r.skipped_kinks == r.total_parameters);
}

TEST_CASE("shipped presets at 8x8 pass the gradient check") {
  const ModelSpec spec = preset_model("level0", 8, 3);
  const Network<double> net(spec, 5);
  const auto batch = random_batch({2, 8, 8, 1}, 6);
  const int labels[] = {0, 2};
  const auto w = std::vector<double>{350.0, 30.0, 10.0};
  CHECK(grad_check(net, batch, labels, w).max_rel_error < 1e-4);
}

TEST_CASE("gradient check edge cases") {
  const ModelSpec spec = spec_of("zeros", 4, 4, 1,
                                 {Conv2D{2, 3, 3, 1, 1, 1}, Activation{ActivationKind::relu},
                                  Dense{2}, Softmax{}});
  Network<double> net(spec, 1);
  auto params = net.export_parameters();
  for (auto& p : params) p.fill(0.0);
  net.set_parameters(params);
  const auto batch = random_batch({2, 4, 4, 1}, 2);
  const int labels[] = {0, 1};
  const auto r = grad_check(net, batch, labels);
  CHECK(std::isfinite(r.max_rel_error));
  CHECK(r.max_rel_error < 1e-4);

  const Network<float> single(spec, 1);
  CHECK_THROWS_AS(grad_check(single, random_batch<float>({2, 4, 4, 1}, 2), labels),
                  PrecisionError);

  const ModelSpec wide = spec_of("wide", 1, 1, 200, {Dense{60}, Softmax{}});
  const Network<double> big(wide, 1);
  const int l2[] = {3, 7};
  GradCheckOptions opt;
  opt.subsample = 300;
  const auto sub = grad_check(big, random_batch({2, 1, 1, 200}, 3), l2, {}, opt);
  CHECK(sub.total_parameters == 200 * 60 + 60);
  CHECK(sub.checked + sub.skipped_kinks == 300);
  CHECK(sub.max_rel_error < 1e-4);
}

TEST_CASE("network construction") {
  const Network<double> a(toy_spec(), 3), b(toy_spec(), 3), c(toy_spec(), 4);
  CHECK(a.export_parameters() == b.export_parameters());
  CHECK(a.export_parameters() != c.export_parameters());
  CHECK(a.num_outputs() == 2);
  // Bias starts at zero; SReLU starts as (0, 0, 1, 1).
  CHECK(a.export_parameters()[1] == Tensor<double>({4}));
  const Network<double> s(spec_of("s", 2, 2, 3, {Activation{ActivationKind::srelu}}), 1);
  CHECK(s.export_parameters()[0].values()[3] == 0.0);
  CHECK(s.export_parameters()[0].values()[6] == 1.0);
  CHECK(s.export_parameters()[0].values()[11] == 1.0);

  CHECK_THROWS_AS(Network<double>(spec_of("bad", 2, 2, 1, {Conv2D{1, 3, 3, 1, 1, 0}})),
                  ArgumentError);
  const Tensor<double> ties({2, 3}, std::vector<double>{0.4, 0.4, 0.2, 0.1, 0.3, 0.3});
  CHECK(argmax_rows(ties) == std::vector<int>{0, 1});
}

TEST_CASE("training separates a toy problem") {
  const Toy toy;
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.optimizer = OptimizerKind::adam;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 8;
  cfg.seed = 3;
  const TrainedModel m = train<double>(toy_spec(), toy.data(), cfg);
  CHECK(m.history.size() == 5);
  double best = 0.0;
  for (const auto& e : m.history) best = std::max(best, e.val_acc);
  CHECK(best >= 0.99);
  CHECK(m.history.at(m.best_epoch - 1).val_acc == best);
  const auto eval = evaluate_images(instantiate<double>(m), toy.data().val);
  CHECK(eval.accuracy == best);
  CHECK(m.num_classes() == 2);

  cfg.epochs = 0;
  CHECK_THROWS_AS(train<double>(toy_spec(), toy.data(), cfg), ArgumentError);
}

TEST_CASE("training is deterministic") {
  const Toy toy;
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.seed = 11;
  cfg.augment = AugmentParams{5.0, {0.9, 1.1}, true, 11};
  const TrainedModel a = train<double>(toy_spec(), toy.data(), cfg);
  const TrainedModel b = train<double>(toy_spec(), toy.data(), cfg);
  CHECK(a.history == b.history);
  CHECK(a.params == b.params);
  cfg.threads = 3;
  const TrainedModel c = train<double>(toy_spec(), toy.data(), cfg);
  CHECK(a.history == c.history);
  CHECK(a.params == c.params);
  cfg.seed = 12;
  CHECK(train<double>(toy_spec(), toy.data(), cfg).history != a.history);

  cfg.seed = 11;
  cfg.threads = 1;
  const TrainedModel f = train(toy_spec(), toy.data(), cfg, Precision::f32);
  CHECK(f.history.size() == 2);
  CHECK(std::isfinite(f.history.back().train_loss));
}

TEST_CASE("divergence reports the epoch") {
  const Toy toy;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 1e300;
  cfg.optimizer = OptimizerKind::rmsprop;
  cfg.batch_size = 8;
  try {
    train<double>(toy_spec(), toy.data(), cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() >= 1);
  }
}

TEST_CASE("model files") {
  const Toy toy;
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  const TrainedModel m = train<double>(toy_spec(), toy.data(), cfg);
  const std::string bytes = encode_model(m);
  CHECK(bytes.substr(0, 4) == "UCNN");
  const TrainedModel back = decode_model(bytes);
  CHECK(back.spec == m.spec);
  CHECK(back.params == m.params);
  CHECK(encode_model(back) == bytes);

  const ModelSpec deep = preset_model("degree3", 16, 7);
  TrainedModel r;
  r.spec = deep;
  r.params = Network<double>(deep, 2).export_parameters();
  CHECK(decode_model(encode_model(r)).spec == deep);

  CHECK_THROWS_AS(decode_model(bytes.substr(0, bytes.size() - 3)), DataError);
  std::string wrong = bytes;
  wrong[0] = 'X';
  CHECK_THROWS_AS(decode_model(wrong), DataError);

  lcr::testing::TempDir dir("model");
  save_model(m, dir.path() / "m.ucnn");
  CHECK(load_model(dir.path() / "m.ucnn").params == m.params);
  CHECK_THROWS_AS(load_model(dir.path() / "missing.ucnn"), DataError);

  const std::string csv = history_csv({{1, 0.5, 0.25, 0.75, 1.0}});
  CHECK(csv == "epoch,train_loss,train_acc,val_loss,val_acc\n1,0.5,0.25,0.75,1\n");
}

TEST_CASE("presets") {
  for (const auto& name : preset_names()) {
    const TrainingPreset p = training_preset(name);
    CHECK(p.batch_size == 8);
    for (int px : {8, 32, 100}) {
      const ModelSpec spec = preset_model(p.architecture, px, default_class_count(p.architecture));
      CHECK(Network<double>(spec).num_outputs() == default_class_count(p.architecture));
    }
  }
  const TrainingPreset l0 = training_preset("level0");
  CHECK(l0.optimizer == OptimizerKind::adam);
  CHECK(l0.epochs == 5);
  CHECK(l0.learning_rate == 1e-3);
  CHECK(l0.weights == WeightMode::preset);
  CHECK(training_preset("degree1").optimizer == OptimizerKind::rmsprop);
  CHECK(training_preset("degree1-lr1e-4").learning_rate == 1e-4);
  CHECK_THROWS_AS(training_preset("level9"), ArgumentError);
  CHECK(parse_precision("f64") == Precision::f64);
  CHECK_THROWS_AS(parse_precision("f16"), ArgumentError);
}

}
