#pragma once

#include <cstring>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ordepth/context.hpp"
#include "ordepth/layers.hpp"

namespace ordepth {

enum class BlockKind { None, Dense, Bottleneck };

inline std::string block_kind_name(BlockKind k) {
  switch (k) {
    case BlockKind::None: return "none";
    case BlockKind::Dense: return "dense";
    default: return "bottleneck";
  }
}
inline BlockKind block_kind_from_name(const std::string& s) {
  if (s == "none") return BlockKind::None;
  if (s == "dense") return BlockKind::Dense;
  if (s == "bottleneck") return BlockKind::Bottleneck;
  fail("InvalidConfig", "unknown block kind " + s);
}

struct StreamFlags {
  bool patch1 = true, patch2 = true;
  bool scale1 = true, scale2 = true, scale3 = true;
  bool masks = true;

  bool any() const { return patch1 || patch2 || scale1 || scale2 || scale3 || masks; }
};

constexpr int kBlocksPerStream = 4;

struct ModelConfig {
  StreamFlags streams;
  BlockKind block_kind = BlockKind::Dense;
  int dense_layers = 5;  // layers per dense block
  int growth = 5;        // dense growth rate k
  int fc_width = 400;
  uint64_t seed = 0;

  void validate() const {
    if (!streams.any()) fail("InvalidConfig", "no streams enabled");
    if (growth < 1) fail("InvalidConfig", "growth must be >= 1");
    if (dense_layers < 1) fail("InvalidConfig", "dense_layers must be >= 1");
    if (fc_width < 1) fail("InvalidConfig", "fc_width must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"streams",
             {{"patch1", streams.patch1},
              {"patch2", streams.patch2},
              {"scale1", streams.scale1},
              {"scale2", streams.scale2},
              {"scale3", streams.scale3},
              {"masks", streams.masks}}},
            {"block", block_kind_name(block_kind)},
            {"dense_layers", dense_layers},
            {"growth", growth},
            {"fc_width", fc_width},
            {"seed", seed}};
  }
  static ModelConfig from_json(const nlohmann::json& j) {
    ModelConfig c;
    const auto& s = j.at("streams");
    c.streams.patch1 = s.at("patch1").get<bool>();
    c.streams.patch2 = s.at("patch2").get<bool>();
    c.streams.scale1 = s.at("scale1").get<bool>();
    c.streams.scale2 = s.at("scale2").get<bool>();
    c.streams.scale3 = s.at("scale3").get<bool>();
    c.streams.masks = s.at("masks").get<bool>();
    c.block_kind = block_kind_from_name(j.at("block").get<std::string>());
    c.dense_layers = j.at("dense_layers").get<int>();
    c.growth = j.at("growth").get<int>();
    c.fc_width = j.at("fc_width").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
    c.validate();
    return c;
  }
};

// The multi-stream three-way classifier. Patch streams use strided
// 3x3 convolutions (24,24,40,40 outputs at strides 2,1,2,1); scale
// streams use padded stride-1 3x3 convolutions (24,24,48,48 outputs),
// each optionally followed by a dense or bottleneck block and a 2x2
// pool (average for dense, max for bottleneck). Flattened stream
// outputs and the two location masks feed FC(fc_width) -> ReLU ->
// FC(3) -> log-softmax.
template <typename T>
class Net {
 public:
  explicit Net(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();

    if (cfg_.streams.patch1) build_patch_stream(patch1_);
    if (cfg_.streams.patch2) build_patch_stream(patch2_);
    int s1 = 0, s2 = 0, s3 = 0;
    if (cfg_.streams.scale1) s1 = build_scale_stream(scale1_, kScale1Size);
    if (cfg_.streams.scale2) s2 = build_scale_stream(scale2_, kScale2Size);
    if (cfg_.streams.scale3) s3 = build_scale_stream(scale3_, kScale3Size);

    concat_dim_ = 0;
    if (cfg_.streams.patch1) concat_dim_ += kPatchFlat;
    if (cfg_.streams.patch2) concat_dim_ += kPatchFlat;
    concat_dim_ += s1 + s2 + s3;
    if (cfg_.streams.masks) concat_dim_ += 2 * kMaskSize * kMaskSize;

    head_.template add<Linear<T>>("fc1", concat_dim_, cfg_.fc_width);
    head_.template add<ReLU<T>>("relu");
    head_.template add<Linear<T>>("fc2", cfg_.fc_width, 3);
    head_.template add<LogSoftmax<T>>("logsoftmax");

    patch1_.collect("patch1", params_);
    patch2_.collect("patch2", params_);
    scale1_.collect("scale1", params_);
    scale2_.collect("scale2", params_);
    scale3_.collect("scale3", params_);
    head_.collect("head", params_);

    // He fan-in init over weight matrices in registration order; conv
    // weights are (out_ch, in_ch*k*k) and linear weights (out, in), so
    // fan-in is the column count either way. Biases stay zero, batch
    // norm scales stay at their construction defaults.
    Rng rng(cfg_.seed);
    for (auto& p : params_) {
      if (!p.trainable || p.value->shape.size() != 2) continue;
      T std = T(std::sqrt(2.0 / p.value->dim(1)));
      for (auto& w : p.value->data) w = T(rng.normal()) * std;
    }
  }

  const ModelConfig& config() const { return cfg_; }
  int concat_dim() const { return concat_dim_; }
  std::vector<NamedParam<T>>& params() { return params_; }

  // Log-probabilities, one (EQ, GT, LT) row per bundle.
  Tensor<T> forward(const std::vector<const ContextBundle*>& batch, bool train) {
    const int N = int(batch.size());
    if (N == 0) fail("ShapeMismatch", "empty batch");
    Tensor<T> concat({N, concat_dim_});
    split_.clear();

    auto run = [&](Sequential<T>& stream, Tensor<T> in, StreamSlot slot) {
      Tensor<T> out = stream.forward(in, train);
      int len = int(out.numel()) / N;
      append(concat, out.data.data(), len);
      split_.push_back({slot, out.shape, len});
    };

    fill_off_.assign(size_t(N), 0);
    if (cfg_.streams.patch1)
      run(patch1_, gather(batch, &ContextBundle::patch1, 3, kPatchSize, kPatchSize),
          StreamSlot::Patch1);
    if (cfg_.streams.patch2)
      run(patch2_, gather(batch, &ContextBundle::patch2, 3, kPatchSize, kPatchSize),
          StreamSlot::Patch2);
    if (cfg_.streams.scale1)
      run(scale1_, gather(batch, &ContextBundle::scale1, 3, kScale1Size, kScale1Size),
          StreamSlot::Scale1);
    if (cfg_.streams.scale2)
      run(scale2_, gather(batch, &ContextBundle::scale2, 3, kScale2Size, kScale2Size),
          StreamSlot::Scale2);
    if (cfg_.streams.scale3)
      run(scale3_, gather(batch, &ContextBundle::scale3, 3, kScale3Size, kScale3Size),
          StreamSlot::Scale3);
    if (cfg_.streams.masks) {
      Tensor<T> m1 = gather(batch, &ContextBundle::mask1, 1, kMaskSize, kMaskSize);
      Tensor<T> m2 = gather(batch, &ContextBundle::mask2, 1, kMaskSize, kMaskSize);
      append(concat, m1.data.data(), kMaskSize * kMaskSize);
      append(concat, m2.data.data(), kMaskSize * kMaskSize);
      split_.push_back({StreamSlot::Masks, {}, 2 * kMaskSize * kMaskSize});
    }
    return head_.forward(concat, train);
  }

  // Mean NLL of `labels` under `logp`; accumulates parameter gradients.
  double loss_backward(const Tensor<T>& logp, const std::vector<int>& labels) {
    const int N = logp.dim(0);
    if (int(labels.size()) != N) fail("ShapeMismatch", "labels vs batch");
    double loss = 0;
    Tensor<T> g(logp.shape);
    for (int n = 0; n < N; ++n) {
      loss -= double(logp.data[size_t(n) * 3 + labels[n]]);
      g.data[size_t(n) * 3 + labels[n]] = T(-1) / T(N);
    }
    loss /= N;

    Tensor<T> gconcat = head_.backward(g);
    const int Nn = gconcat.dim(0);
    int off = 0;
    for (const auto& part : split_) {
      if (part.slot != StreamSlot::Masks) {
        Tensor<T> gs(part.shape);
        for (int n = 0; n < Nn; ++n)
          std::copy(&gconcat.data[size_t(n) * concat_dim_ + off],
                    &gconcat.data[size_t(n) * concat_dim_ + off + part.len],
                    &gs.data[size_t(n) * part.len]);
        stream_for(part.slot).backward(gs);
      }
      off += part.len;
    }
    return loss;
  }

  void zero_grad() {
    for (auto& p : params_)
      if (p.grad) p.grad->zero();
  }

  // w <- w - lr * (grad + weight_decay * w), trainable parameters only.
  void sgd_step(double lr, double weight_decay) {
    for (auto& p : params_) {
      if (!p.trainable) continue;
      T* w = p.value->data.data();
      const T* g = p.grad->data.data();
      for (size_t i = 0; i < p.value->numel(); ++i)
        w[i] -= T(lr) * (g[i] + T(weight_decay) * w[i]);
    }
  }

 private:
  enum class StreamSlot { Patch1, Patch2, Scale1, Scale2, Scale3, Masks };
  struct SplitPart {
    StreamSlot slot;
    std::vector<int> shape;
    int len;
  };

  static constexpr int kPatchFlat = 40 * 4 * 4;

  Sequential<T>& stream_for(StreamSlot s) {
    switch (s) {
      case StreamSlot::Patch1: return patch1_;
      case StreamSlot::Patch2: return patch2_;
      case StreamSlot::Scale1: return scale1_;
      case StreamSlot::Scale2: return scale2_;
      default: return scale3_;
    }
  }

  void build_patch_stream(Sequential<T>& s) {
    const int outs[4] = {24, 24, 40, 40};
    const int strides[4] = {2, 1, 2, 1};
    int in = 3;
    for (int l = 0; l < 4; ++l) {
      s.template add<Conv2d<T>>("conv" + std::to_string(l + 1), in, outs[l], 3,
                                strides[l], 1);
      s.template add<BatchNorm<T>>("bn" + std::to_string(l + 1), outs[l]);
      s.template add<ReLU<T>>("relu" + std::to_string(l + 1));
      in = outs[l];
    }
  }

  // Returns the flattened output length of the stream.
  int build_scale_stream(Sequential<T>& s, int input_size) {
    const int outs[4] = {24, 24, 48, 48};
    int in = 3, size = input_size;
    for (int l = 0; l < kBlocksPerStream; ++l) {
      s.template add<Conv2d<T>>("conv" + std::to_string(l + 1), in, outs[l], 3, 1,
                                1);
      s.template add<BatchNorm<T>>("bn" + std::to_string(l + 1), outs[l]);
      s.template add<ReLU<T>>("relu" + std::to_string(l + 1));
      in = outs[l];
      if (cfg_.block_kind == BlockKind::Dense) {
        auto* blk = s.template add<DenseBlock<T>>("block" + std::to_string(l + 1),
                                                  in, cfg_.dense_layers, cfg_.growth);
        in = blk->out_channels();
        s.template add<AvgPool2<T>>("pool" + std::to_string(l + 1));
      } else if (cfg_.block_kind == BlockKind::Bottleneck) {
        s.template add<BottleneckBlock<T>>("block" + std::to_string(l + 1), in);
        s.template add<MaxPool2<T>>("pool" + std::to_string(l + 1));
      } else {
        s.template add<AvgPool2<T>>("pool" + std::to_string(l + 1));
      }
      size = (size + 1) / 2;
    }
    return in * size * size;
  }

  ModelConfig cfg_;
  Sequential<T> patch1_, patch2_, scale1_, scale2_, scale3_, head_;
  std::vector<NamedParam<T>> params_;
  int concat_dim_ = 0;
  std::vector<SplitPart> split_;
  std::vector<int> fill_off_;

  Tensor<T> gather(const std::vector<const ContextBundle*>& batch,
                   std::vector<float> ContextBundle::*member, int C, int H, int W) {
    Tensor<T> t({int(batch.size()), C, H, W});
    size_t len = size_t(C) * H * W;
    for (size_t n = 0; n < batch.size(); ++n) {
      const auto& v = (*batch[n]).*member;
      if (v.size() != len) fail("ShapeMismatch", "bundle raster size");
      for (size_t i = 0; i < len; ++i) t.data[n * len + i] = T(v[i]);
    }
    return t;
  }

  void append(Tensor<T>& concat, const T* src, int len) {
    const int N = concat.dim(0);
    for (int n = 0; n < N; ++n) {
      std::copy(src + size_t(n) * len, src + size_t(n + 1) * len,
                &concat.data[size_t(n) * concat_dim_ + fill_off_[n]]);
      fill_off_[n] += len;
    }
  }
};

// ---------------------------------------------------------- checkpoints

// Single binary file: magic, JSON header (config + named shapes),
// little-endian float32 payload in header order.
template <typename T>
void save_checkpoint(Net<T>& net, const std::string& path) {
  nlohmann::json hdr;
  hdr["config"] = net.config().to_json();
  nlohmann::json tensors = nlohmann::json::array();
  for (auto& p : net.params())
    tensors.push_back({{"name", p.name}, {"shape", p.value->shape}});
  hdr["tensors"] = tensors;
  std::string hs = hdr.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoFailure", path);
  out.write("ODCK", 4);
  uint64_t n = hs.size();
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(hs.data(), std::streamsize(hs.size()));
  for (auto& p : net.params()) {
    std::vector<float> buf(p.value->numel());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = float(p.value->data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              std::streamsize(buf.size() * 4));
  }
  if (!out) fail("IoFailure", path);
}

template <typename T>
Net<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("MissingFile", path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "ODCK", 4) != 0)
    fail("CheckpointMismatch", path + ": bad magic");
  uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  std::string hs(n, '\0');
  in.read(hs.data(), std::streamsize(n));
  if (!in) fail("CheckpointMismatch", path + ": truncated header");
  nlohmann::json hdr = nlohmann::json::parse(hs);

  Net<T> net(ModelConfig::from_json(hdr.at("config")));
  auto& params = net.params();
  const auto& tensors = hdr.at("tensors");
  if (tensors.size() != params.size())
    fail("CheckpointMismatch", path + ": tensor count");
  for (size_t i = 0; i < params.size(); ++i) {
    if (tensors[i].at("name").get<std::string>() != params[i].name ||
        tensors[i].at("shape").get<std::vector<int>>() != params[i].value->shape)
      fail("CheckpointMismatch", path + ": " + params[i].name);
    std::vector<float> buf(params[i].value->numel());
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * 4));
    if (!in) fail("CheckpointMismatch", path + ": truncated payload");
    for (size_t k = 0; k < buf.size(); ++k) params[i].value->data[k] = T(buf[k]);
  }
  return net;
}

}  // namespace ordepth
