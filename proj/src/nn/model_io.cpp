#include "lcr/nn/model_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lcr::nn {

namespace {

constexpr char kMagic[4] = {'U', 'C', 'N', 'N'};
constexpr int kMaxNesting = 8;

enum class Tag : std::uint32_t {
  conv = 0, maxpool, gap, dense, dropout, activation, softmax, residual
};

class Writer {
 public:
  void u32(std::uint32_t v) { le(v); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void raw(std::string_view s) { out_ += s; }
  std::string take() { return std::move(out_); }

 private:
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i)
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& origin) : in_(bytes), origin_(origin) {}

  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(le<std::uint32_t>()); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

  DataError error(const std::string& what) const {
    return DataError(origin_ + ": " + what + " (offset " + std::to_string(pos_) + ")");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw error("truncated model file");
  }
  template <typename U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(static_cast<std::uint8_t>(in_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }

  std::string_view in_;
  std::string origin_;
  std::size_t pos_ = 0;
};

void write_layer(Writer& w, const LayerConfig& layer) {
  std::visit(
      [&](const auto& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, Conv2D>) {
          w.u32(static_cast<std::uint32_t>(Tag::conv));
          for (int v : {c.filters, c.kernel_h, c.kernel_w, c.stride_h, c.stride_w, c.padding})
            w.i32(v);
        } else if constexpr (std::is_same_v<C, MaxPool>) {
          w.u32(static_cast<std::uint32_t>(Tag::maxpool));
          for (int v : {c.pool_h, c.pool_w, c.stride_h, c.stride_w}) w.i32(v);
        } else if constexpr (std::is_same_v<C, GlobalAveragePool>) {
          w.u32(static_cast<std::uint32_t>(Tag::gap));
        } else if constexpr (std::is_same_v<C, Dense>) {
          w.u32(static_cast<std::uint32_t>(Tag::dense));
          w.i32(c.units);
        } else if constexpr (std::is_same_v<C, Dropout>) {
          w.u32(static_cast<std::uint32_t>(Tag::dropout));
          w.f64(c.rate);
        } else if constexpr (std::is_same_v<C, Activation>) {
          w.u32(static_cast<std::uint32_t>(Tag::activation));
          w.u32(static_cast<std::uint32_t>(c.kind));
          w.f64(c.alpha);
        } else if constexpr (std::is_same_v<C, Softmax>) {
          w.u32(static_cast<std::uint32_t>(Tag::softmax));
        } else {
          w.u32(static_cast<std::uint32_t>(Tag::residual));
          w.u32(c.projection ? 1 : 0);
          w.u32(static_cast<std::uint32_t>(c.inner.size()));
          for (const auto& inner : c.inner) write_layer(w, inner);
        }
      },
      layer.base());
}

LayerConfig read_layer(Reader& r, int depth) {
  if (depth > kMaxNesting) throw r.error("residual nesting too deep");
  const std::uint32_t tag = r.u32();
  switch (static_cast<Tag>(tag)) {
    case Tag::conv: {
      Conv2D c;
      c.filters = r.i32();
      c.kernel_h = r.i32();
      c.kernel_w = r.i32();
      c.stride_h = r.i32();
      c.stride_w = r.i32();
      c.padding = r.i32();
      return c;
    }
    case Tag::maxpool: {
      MaxPool c;
      c.pool_h = r.i32();
      c.pool_w = r.i32();
      c.stride_h = r.i32();
      c.stride_w = r.i32();
      return c;
    }
    case Tag::gap:
      return GlobalAveragePool{};
    case Tag::dense:
      return Dense{r.i32()};
    case Tag::dropout:
      return Dropout{r.f64()};
    case Tag::activation: {
      const std::uint32_t kind = r.u32();
      if (kind > static_cast<std::uint32_t>(ActivationKind::srelu))
        throw r.error("unknown activation kind " + std::to_string(kind));
      return Activation{static_cast<ActivationKind>(kind), r.f64()};
    }
    case Tag::softmax:
      return Softmax{};
    case Tag::residual: {
      Residual c;
      c.projection = r.u32() != 0;
      const std::uint32_t n = r.u32();
      if (n > r.remaining() / 4) throw r.error("residual child count exceeds file size");
      for (std::uint32_t i = 0; i < n; ++i) c.inner.push_back(read_layer(r, depth + 1));
      return c;
    }
  }
  throw r.error("unknown layer tag " + std::to_string(tag));
}

}  // namespace

std::string encode_model(const TrainedModel& model) {
  Writer w;
  w.raw(std::string_view(kMagic, 4));
  w.u32(kModelFormatVersion);
  w.str(model.spec.name);
  w.i32(model.spec.input_h);
  w.i32(model.spec.input_w);
  w.i32(model.spec.input_c);
  w.u32(static_cast<std::uint32_t>(model.spec.layers.size()));
  for (const auto& l : model.spec.layers) write_layer(w, l);
  std::uint64_t count = 0;
  for (const auto& p : model.params) count += p.size();
  w.u64(count);
  for (const auto& p : model.params)
    for (double v : p.values()) w.f64(v);
  return w.take();
}

TrainedModel decode_model(std::string_view bytes, const std::string& origin) {
  Reader r(bytes, origin);
  if (r.raw(4) != std::string_view(kMagic, 4)) throw r.error("not a UCNN model file");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion)
    throw r.error("unsupported model format version " + std::to_string(version));
  TrainedModel model;
  model.spec.name = r.str();
  model.spec.input_h = r.i32();
  model.spec.input_w = r.i32();
  model.spec.input_c = r.i32();
  const std::uint32_t layers = r.u32();
  if (layers > r.remaining() / 4) throw r.error("layer count exceeds file size");
  for (std::uint32_t i = 0; i < layers; ++i) model.spec.layers.push_back(read_layer(r, 0));

  std::vector<Tensor<double>> shapes;
  try {
    shapes = Network<double>(model.spec).zero_gradients();
  } catch (const ArgumentError& e) {
    throw r.error(std::string("invalid layer table: ") + e.what());
  }
  std::uint64_t expected = 0;
  for (const auto& t : shapes) expected += t.size();
  const std::uint64_t count = r.u64();
  if (count != expected)
    throw r.error("parameter count " + std::to_string(count) + " does not match the " +
                  std::to_string(expected) + " the layer table needs");
  if (r.remaining() != count * 8) throw r.error("parameter block has the wrong length");
  for (auto& t : shapes) {
    for (auto& v : t.values()) v = r.f64();
    model.params.push_back(std::move(t));
  }
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string bytes = encode_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_model(ss.str(), path.string());
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char buf[32];
  auto num = [&](double v) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
  };
  for (const auto& h : history) {
    out += std::to_string(h.epoch);
    for (double v : {h.train_loss, h.train_acc, h.val_loss, h.val_acc}) {
      out += ',';
      num(v);
    }
    out += '\n';
  }
  return out;
}

void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << history_csv(history);
}

}  // namespace lcr::nn
