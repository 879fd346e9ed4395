#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ordepth/rng.hpp"
#include "ordepth/tensor.hpp"

namespace ordepth {

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T>* value;
  Tensor<T>* grad;       // null for running statistics
  bool trainable;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, bool train) = 0;
  virtual Tensor<T> backward(const Tensor<T>& gout) = 0;
  virtual void collect(const std::string& prefix, std::vector<NamedParam<T>>& out) {}
};

// ---------------------------------------------------------------- conv

// kxk convolution via im2col + GEMM, one sample at a time.
// H_out = floor((H + 2*pad - k)/stride) + 1.
template <typename T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad)
      : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), pad_(pad),
        weight_({out_ch, in_ch * kernel * kernel}), bias_({out_ch}),
        gweight_(weight_.shape), gbias_(bias_.shape) {}

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    if (x.dim(1) != in_ch_) fail("ShapeMismatch", "conv input channels");
    const int Ho = (H + 2 * pad_ - k_) / stride_ + 1;
    const int Wo = (W + 2 * pad_ - k_) / stride_ + 1;
    if (Ho < 1 || Wo < 1) fail("ShapeMismatch", "conv output would be empty");
    input_ = x;
    Tensor<T> y({N, out_ch_, Ho, Wo});
    const int K = in_ch_ * k_ * k_, P = Ho * Wo;
    std::vector<T> col(size_t(K) * P);
    for (int n = 0; n < N; ++n) {
      im2col(&x.data[size_t(n) * in_ch_ * H * W], H, W, Ho, Wo, col.data());
      T* out = &y.data[size_t(n) * out_ch_ * P];
      gemm(false, false, out_ch_, P, K, T(1), weight_.data.data(), K, col.data(),
           P, T(0), out, P);
      for (int c = 0; c < out_ch_; ++c)
        for (int p = 0; p < P; ++p) out[size_t(c) * P + p] += bias_.data[c];
    }
    out_h_ = Ho;
    out_w_ = Wo;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const int N = input_.dim(0), H = input_.dim(2), W = input_.dim(3);
    const int Ho = out_h_, Wo = out_w_;
    const int K = in_ch_ * k_ * k_, P = Ho * Wo;
    Tensor<T> gx(input_.shape);
    std::vector<T> col(size_t(K) * P), gcol(size_t(K) * P);
    for (int n = 0; n < N; ++n) {
      const T* g = &gy.data[size_t(n) * out_ch_ * P];
      im2col(&input_.data[size_t(n) * in_ch_ * H * W], H, W, Ho, Wo, col.data());
      // gW += g * col^T ; gcol = W^T * g ; gb += row sums of g.
      gemm(false, true, out_ch_, K, P, T(1), g, P, col.data(), P, T(1),
           gweight_.data.data(), K);
      gemm(true, false, K, P, out_ch_, T(1), weight_.data.data(), K, g, P, T(0),
           gcol.data(), P);
      for (int c = 0; c < out_ch_; ++c) {
        T s = 0;
        for (int p = 0; p < P; ++p) s += g[size_t(c) * P + p];
        gbias_.data[c] += s;
      }
      col2im(gcol.data(), H, W, Ho, Wo, &gx.data[size_t(n) * in_ch_ * H * W]);
    }
    return gx;
  }

  void collect(const std::string& prefix, std::vector<NamedParam<T>>& out) override {
    out.push_back({prefix + ".weight", &weight_, &gweight_, true});
    out.push_back({prefix + ".bias", &bias_, &gbias_, true});
  }

  int fan_in() const { return in_ch_ * k_ * k_; }
  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

 private:
  void im2col(const T* x, int H, int W, int Ho, int Wo, T* col) const {
    for (int c = 0; c < in_ch_; ++c)
      for (int kr = 0; kr < k_; ++kr)
        for (int kc = 0; kc < k_; ++kc) {
          T* dst = col + (size_t(c) * k_ * k_ + size_t(kr) * k_ + kc) * Ho * Wo;
          for (int ro = 0; ro < Ho; ++ro) {
            int r = ro * stride_ - pad_ + kr;
            for (int co = 0; co < Wo; ++co) {
              int cc2 = co * stride_ - pad_ + kc;
              dst[size_t(ro) * Wo + co] =
                  (r >= 0 && r < H && cc2 >= 0 && cc2 < W)
                      ? x[(size_t(c) * H + r) * W + cc2]
                      : T(0);
            }
          }
        }
  }

  void col2im(const T* col, int H, int W, int Ho, int Wo, T* gx) const {
    for (int c = 0; c < in_ch_; ++c)
      for (int kr = 0; kr < k_; ++kr)
        for (int kc = 0; kc < k_; ++kc) {
          const T* src = col + (size_t(c) * k_ * k_ + size_t(kr) * k_ + kc) * Ho * Wo;
          for (int ro = 0; ro < Ho; ++ro) {
            int r = ro * stride_ - pad_ + kr;
            if (r < 0 || r >= H) continue;
            for (int co = 0; co < Wo; ++co) {
              int cc2 = co * stride_ - pad_ + kc;
              if (cc2 >= 0 && cc2 < W)
                gx[(size_t(c) * H + r) * W + cc2] += src[size_t(ro) * Wo + co];
            }
          }
        }
  }

  int in_ch_, out_ch_, k_, stride_, pad_;
  int out_h_ = 0, out_w_ = 0;
  Tensor<T> weight_, bias_, gweight_, gbias_;
  Tensor<T> input_;
};

// ----------------------------------------------------------- batchnorm

// Batch statistics in training, running statistics (momentum 0.9,
// epsilon 1e-5) in inference.
template <typename T>
class BatchNorm : public Layer<T> {
 public:
  explicit BatchNorm(int channels)
      : ch_(channels), gamma_({channels}), beta_({channels}),
        ggamma_({channels}), gbeta_({channels}), run_mean_({channels}),
        run_var_({channels}) {
    std::fill(gamma_.data.begin(), gamma_.data.end(), T(1));
    std::fill(run_var_.data.begin(), run_var_.data.end(), T(1));
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) override {
    if (x.dim(1) != ch_) fail("ShapeMismatch", "bn channels");
    const int N = x.dim(0), HW = int(x.numel() / (size_t(N) * ch_));
    Tensor<T> y(x.shape);
    xhat_ = Tensor<T>(x.shape);
    invstd_.assign(ch_, T(0));
    m_ = N * HW;
    const T eps = T(1e-5);

    for (int c = 0; c < ch_; ++c) {
      T mean, var;
      if (train) {
        T s = 0;
        for (int n = 0; n < N; ++n) {
          const T* p = &x.data[(size_t(n) * ch_ + c) * HW];
          for (int i = 0; i < HW; ++i) s += p[i];
        }
        mean = s / T(m_);
        T v = 0;
        for (int n = 0; n < N; ++n) {
          const T* p = &x.data[(size_t(n) * ch_ + c) * HW];
          for (int i = 0; i < HW; ++i) v += (p[i] - mean) * (p[i] - mean);
        }
        var = v / T(m_);
        run_mean_.data[c] = T(0.9) * run_mean_.data[c] + T(0.1) * mean;
        T unbiased = m_ > 1 ? v / T(m_ - 1) : var;
        run_var_.data[c] = T(0.9) * run_var_.data[c] + T(0.1) * unbiased;
      } else {
        mean = run_mean_.data[c];
        var = run_var_.data[c];
      }
      T inv = T(1) / std::sqrt(var + eps);
      invstd_[c] = inv;
      for (int n = 0; n < N; ++n) {
        const T* p = &x.data[(size_t(n) * ch_ + c) * HW];
        T* xh = &xhat_.data[(size_t(n) * ch_ + c) * HW];
        T* py = &y.data[(size_t(n) * ch_ + c) * HW];
        for (int i = 0; i < HW; ++i) {
          xh[i] = (p[i] - mean) * inv;
          py[i] = gamma_.data[c] * xh[i] + beta_.data[c];
        }
      }
    }
    train_mode_ = train;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const int N = gy.dim(0), HW = int(gy.numel() / (size_t(N) * ch_));
    Tensor<T> gx(gy.shape);
    for (int c = 0; c < ch_; ++c) {
      T sum_g = 0, sum_gx = 0;
      for (int n = 0; n < N; ++n) {
        const T* g = &gy.data[(size_t(n) * ch_ + c) * HW];
        const T* xh = &xhat_.data[(size_t(n) * ch_ + c) * HW];
        for (int i = 0; i < HW; ++i) {
          sum_g += g[i];
          sum_gx += g[i] * xh[i];
        }
      }
      ggamma_.data[c] += sum_gx;
      gbeta_.data[c] += sum_g;
      T ginv = gamma_.data[c] * invstd_[c];
      for (int n = 0; n < N; ++n) {
        const T* g = &gy.data[(size_t(n) * ch_ + c) * HW];
        const T* xh = &xhat_.data[(size_t(n) * ch_ + c) * HW];
        T* gxp = &gx.data[(size_t(n) * ch_ + c) * HW];
        if (train_mode_) {
          for (int i = 0; i < HW; ++i)
            gxp[i] = ginv * (g[i] - sum_g / T(m_) - xh[i] * sum_gx / T(m_));
        } else {
          for (int i = 0; i < HW; ++i) gxp[i] = ginv * g[i];
        }
      }
    }
    return gx;
  }

  void collect(const std::string& prefix, std::vector<NamedParam<T>>& out) override {
    out.push_back({prefix + ".gamma", &gamma_, &ggamma_, true});
    out.push_back({prefix + ".beta", &beta_, &gbeta_, true});
    out.push_back({prefix + ".running_mean", &run_mean_, nullptr, false});
    out.push_back({prefix + ".running_var", &run_var_, nullptr, false});
  }

 private:
  int ch_;
  Tensor<T> gamma_, beta_, ggamma_, gbeta_, run_mean_, run_var_;
  Tensor<T> xhat_;
  std::vector<T> invstd_;
  int m_ = 0;
  bool train_mode_ = true;
};

// ----------------------------------------------------------------- relu

template <typename T>
class ReLU : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    mask_.assign(x.numel(), 0);
    Tensor<T> y(x.shape);
    for (size_t i = 0; i < x.numel(); ++i)
      if (x.data[i] > 0) {
        y.data[i] = x.data[i];
        mask_[i] = 1;
      }
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(gy.shape);
    for (size_t i = 0; i < gy.numel(); ++i)
      if (mask_[i]) gx.data[i] = gy.data[i];
    return gx;
  }

 private:
  std::vector<char> mask_;
};

// ---------------------------------------------------------------- pools

// 2x2, stride 2; an odd trailing row/column forms a partial window
// (ceil-mode), averaged over the pixels actually covered.
template <typename T>
class AvgPool2 : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    in_shape_ = x.shape;
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int Ho = (H + 1) / 2, Wo = (W + 1) / 2;
    Tensor<T> y({N, C, Ho, Wo});
    for (int nc = 0; nc < N * C; ++nc) {
      const T* p = &x.data[size_t(nc) * H * W];
      T* q = &y.data[size_t(nc) * Ho * Wo];
      for (int r = 0; r < Ho; ++r)
        for (int c = 0; c < Wo; ++c) {
          T s = 0;
          int cnt = 0;
          for (int dr = 0; dr < 2; ++dr)
            for (int dc = 0; dc < 2; ++dc) {
              int rr = 2 * r + dr, cc = 2 * c + dc;
              if (rr < H && cc < W) {
                s += p[size_t(rr) * W + cc];
                ++cnt;
              }
            }
          q[size_t(r) * Wo + c] = s / T(cnt);
        }
    }
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    const int N = in_shape_[0], C = in_shape_[1], H = in_shape_[2], W = in_shape_[3];
    const int Ho = (H + 1) / 2, Wo = (W + 1) / 2;
    Tensor<T> gx(in_shape_);
    for (int nc = 0; nc < N * C; ++nc) {
      T* p = &gx.data[size_t(nc) * H * W];
      const T* q = &gy.data[size_t(nc) * Ho * Wo];
      for (int r = 0; r < Ho; ++r)
        for (int c = 0; c < Wo; ++c) {
          int cnt = (std::min(2 * r + 2, H) - 2 * r) * (std::min(2 * c + 2, W) - 2 * c);
          T g = q[size_t(r) * Wo + c] / T(cnt);
          for (int dr = 0; dr < 2; ++dr)
            for (int dc = 0; dc < 2; ++dc) {
              int rr = 2 * r + dr, cc = 2 * c + dc;
              if (rr < H && cc < W) p[size_t(rr) * W + cc] += g;
            }
        }
    }
    return gx;
  }

 private:
  std::vector<int> in_shape_;
};

template <typename T>
class MaxPool2 : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    in_shape_ = x.shape;
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int Ho = (H + 1) / 2, Wo = (W + 1) / 2;
    Tensor<T> y({N, C, Ho, Wo});
    argmax_.assign(y.numel(), 0);
    for (int nc = 0; nc < N * C; ++nc) {
      const T* p = &x.data[size_t(nc) * H * W];
      for (int r = 0; r < Ho; ++r)
        for (int c = 0; c < Wo; ++c) {
          T best = -std::numeric_limits<T>::infinity();
          size_t arg = 0;
          for (int dr = 0; dr < 2; ++dr)
            for (int dc = 0; dc < 2; ++dc) {
              int rr = 2 * r + dr, cc = 2 * c + dc;
              if (rr < H && cc < W && p[size_t(rr) * W + cc] > best) {
                best = p[size_t(rr) * W + cc];
                arg = size_t(rr) * W + cc;
              }
            }
          size_t oi = size_t(nc) * Ho * Wo + size_t(r) * Wo + c;
          y.data[oi] = best;
          argmax_[oi] = arg;
        }
    }
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    const int H = in_shape_[2], W = in_shape_[3];
    const int Ho = (H + 1) / 2, Wo = (W + 1) / 2;
    Tensor<T> gx(in_shape_);
    for (int nc = 0; nc < in_shape_[0] * in_shape_[1]; ++nc)
      for (size_t i = 0; i < size_t(Ho) * Wo; ++i) {
        size_t oi = size_t(nc) * Ho * Wo + i;
        gx.data[size_t(nc) * H * W + argmax_[oi]] += gy.data[oi];
      }
    return gx;
  }

 private:
  std::vector<int> in_shape_;
  std::vector<size_t> argmax_;
};

// ------------------------------------------------------------------- fc

// Fully connected layer; flattens any input to (N, in_features).
template <typename T>
class Linear : public Layer<T> {
 public:
  Linear(int in_features, int out_features)
      : in_(in_features), out_(out_features), weight_({out_features, in_features}),
        bias_({out_features}), gweight_(weight_.shape), gbias_(bias_.shape) {}

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    const int N = x.dim(0);
    if (x.numel() != size_t(N) * in_) fail("ShapeMismatch", "fc input");
    input_ = x;
    Tensor<T> y({N, out_});
    gemm(false, true, N, out_, in_, T(1), x.data.data(), in_,
         weight_.data.data(), in_, T(0), y.data.data(), out_);
    for (int n = 0; n < N; ++n)
      for (int o = 0; o < out_; ++o) y.data[size_t(n) * out_ + o] += bias_.data[o];
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const int N = input_.dim(0);
    gemm(true, false, out_, in_, N, T(1), gy.data.data(), out_,
         input_.data.data(), in_, T(1), gweight_.data.data(), in_);
    for (int n = 0; n < N; ++n)
      for (int o = 0; o < out_; ++o) gbias_.data[o] += gy.data[size_t(n) * out_ + o];
    Tensor<T> gx(input_.shape);
    gemm(false, false, N, in_, out_, T(1), gy.data.data(), out_,
         weight_.data.data(), in_, T(0), gx.data.data(), in_);
    return gx;
  }

  void collect(const std::string& prefix, std::vector<NamedParam<T>>& out) override {
    out.push_back({prefix + ".weight", &weight_, &gweight_, true});
    out.push_back({prefix + ".bias", &bias_, &gbias_, true});
  }

  int fan_in() const { return in_; }
  Tensor<T>& weight() { return weight_; }

 private:
  int in_, out_;
  Tensor<T> weight_, bias_, gweight_, gbias_;
  Tensor<T> input_;
};

// ---------------------------------------------------------- log-softmax

template <typename T>
class LogSoftmax : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool) override {
    const int N = x.dim(0), C = x.dim(1);
    out_ = Tensor<T>(x.shape);
    for (int n = 0; n < N; ++n) {
      const T* p = &x.data[size_t(n) * C];
      T mx = *std::max_element(p, p + C);
      T sum = 0;
      for (int c = 0; c < C; ++c) sum += std::exp(p[c] - mx);
      T lse = mx + std::log(sum);
      for (int c = 0; c < C; ++c) out_.data[size_t(n) * C + c] = p[c] - lse;
    }
    return out_;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    const int N = gy.dim(0), C = gy.dim(1);
    Tensor<T> gx(gy.shape);
    for (int n = 0; n < N; ++n) {
      T s = 0;
      for (int c = 0; c < C; ++c) s += gy.data[size_t(n) * C + c];
      for (int c = 0; c < C; ++c)
        gx.data[size_t(n) * C + c] =
            gy.data[size_t(n) * C + c] -
            std::exp(out_.data[size_t(n) * C + c]) * s;
    }
    return gx;
  }

 private:
  Tensor<T> out_;
};

// ------------------------------------------------------------ sequential

template <typename T>
class Sequential : public Layer<T> {
 public:
  template <typename L, typename... Args>
  L* add(std::string name, Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L* raw = layer.get();
    layers_.push_back(std::move(layer));
    names_.push_back(std::move(name));
    return raw;
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) override {
    Tensor<T> cur = x;
    for (auto& l : layers_) cur = l->forward(cur, train);
    return cur;
  }
  Tensor<T> backward(const Tensor<T>& gout) override {
    Tensor<T> cur = gout;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
      cur = (*it)->backward(cur);
    return cur;
  }
  void collect(const std::string& prefix, std::vector<NamedParam<T>>& out) override {
    for (size_t i = 0; i < layers_.size(); ++i)
      layers_[i]->collect(prefix + "." + names_[i], out);
  }
  bool empty() const { return layers_.empty(); }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::vector<std::string> names_;
};

// ----------------------------------------------------------- dense block

// Layer l consumes the concatenation of the block input and all
// previous layer outputs (BN -> ReLU -> 3x3 conv, zero-pad 1, k output
// channels). Block output has C_in + L*k channels.
template <typename T>
class DenseBlock : public Layer<T> {
 public:
  DenseBlock(int in_ch, int n_layers, int growth)
      : in_ch_(in_ch), L_(n_layers), k_(growth) {
    for (int l = 0; l < L_; ++l) {
      int c = in_ch_ + l * k_;
      auto seq = std::make_unique<Sequential<T>>();
      seq->template add<BatchNorm<T>>("bn", c);
      seq->template add<ReLU<T>>("relu");
      seq->template add<Conv2d<T>>("conv", c, k_, 3, 1, 1);
      layers_.push_back(std::move(seq));
    }
  }

  int out_channels() const { return in_ch_ + L_ * k_; }

  Tensor<T> forward(const Tensor<T>& x, bool train) override {
    const int N = x.dim(0), H = x.dim(2), W = x.dim(3);
    if (x.dim(1) != in_ch_) fail("ShapeMismatch", "dense block input channels");
    h_ = H;
    w_ = W;
    n_ = N;
    Tensor<T> concat({N, out_channels(), H, W});
    copy_channels(x, 0, in_ch_, concat, 0);
    for (int l = 0; l < L_; ++l) {
      Tensor<T> in = slice_channels(concat, 0, in_ch_ + l * k_);
      Tensor<T> out = layers_[l]->forward(in, train);
      copy_channels(out, 0, k_, concat, in_ch_ + l * k_);
    }
    return concat;
  }

  Tensor<T> backward(const Tensor<T>& gout) override {
    // Accumulate gradients over the concat, peeling layers in reverse.
    Tensor<T> gacc = gout;
    for (int l = L_ - 1; l >= 0; --l) {
      Tensor<T> gy = slice_channels(gacc, in_ch_ + l * k_, k_);
      Tensor<T> gin = layers_[l]->backward(gy);  // channels in_ch_ + l*k_
      add_channels(gin, gacc, 0, in_ch_ + l * k_);
    }
    return slice_channels(gacc, 0, in_ch_);
  }

  void collect(const std::string& prefix, std::vector<NamedParam<T>>& out) override {
    for (int l = 0; l < L_; ++l)
      layers_[l]->collect(prefix + ".l" + std::to_string(l + 1), out);
  }

 private:
  Tensor<T> slice_channels(const Tensor<T>& t, int c0, int count) const {
    Tensor<T> out({n_, count, h_, w_});
    size_t hw = size_t(h_) * w_, ct = t.dim(1);
    for (int n = 0; n < n_; ++n)
      std::copy(&t.data[(size_t(n) * ct + c0) * hw],
                &t.data[(size_t(n) * ct + c0 + count) * hw],
                &out.data[size_t(n) * count * hw]);
    return out;
  }
  void copy_channels(const Tensor<T>& src, int sc0, int count, Tensor<T>& dst,
                     int dc0) const {
    size_t hw = size_t(h_) * w_, cs = src.dim(1), cd = dst.dim(1);
    for (int n = 0; n < n_; ++n)
      std::copy(&src.data[(size_t(n) * cs + sc0) * hw],
                &src.data[(size_t(n) * cs + sc0 + count) * hw],
                &dst.data[(size_t(n) * cd + dc0) * hw]);
  }
  void add_channels(const Tensor<T>& src, Tensor<T>& dst, int dc0, int count) const {
    size_t hw = size_t(h_) * w_, cd = dst.dim(1);
    for (int n = 0; n < n_; ++n) {
      const T* s = &src.data[size_t(n) * count * hw];
      T* d = &dst.data[(size_t(n) * cd + dc0) * hw];
      for (size_t i = 0; i < count * hw; ++i) d[i] += s[i];
    }
  }

  int in_ch_, L_, k_;
  int n_ = 0, h_ = 0, w_ = 0;
  std::vector<std::unique_ptr<Sequential<T>>> layers_;
};

// ------------------------------------------------------ bottleneck block

// Pre-activation residual bottleneck: y = x + expand(mid(reduce(x)))
// with 1x1 reduce to C/4, 3x3, 1x1 expand back to C, each preceded by
// BN -> ReLU. Spatial dims and channel count are unchanged.
template <typename T>
class BottleneckBlock : public Layer<T> {
 public:
  explicit BottleneckBlock(int channels) : ch_(channels) {
    int mid = std::max(1, channels / 4);
    f_.template add<BatchNorm<T>>("bn1", channels);
    f_.template add<ReLU<T>>("relu1");
    f_.template add<Conv2d<T>>("reduce", channels, mid, 1, 1, 0);
    f_.template add<BatchNorm<T>>("bn2", mid);
    f_.template add<ReLU<T>>("relu2");
    f_.template add<Conv2d<T>>("conv", mid, mid, 3, 1, 1);
    f_.template add<BatchNorm<T>>("bn3", mid);
    f_.template add<ReLU<T>>("relu3");
    f_.template add<Conv2d<T>>("expand", mid, channels, 1, 1, 0);
  }

  int out_channels() const { return ch_; }

  Tensor<T> forward(const Tensor<T>& x, bool train) override {
    Tensor<T> y = f_.forward(x, train);
    for (size_t i = 0; i < y.numel(); ++i) y.data[i] += x.data[i];
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gout) override {
    Tensor<T> gx = f_.backward(gout);
    for (size_t i = 0; i < gx.numel(); ++i) gx.data[i] += gout.data[i];
    return gx;
  }
  void collect(const std::string& prefix, std::vector<NamedParam<T>>& out) override {
    f_.collect(prefix, out);
  }

 private:
  int ch_;
  Sequential<T> f_;
};

}  // namespace ordepth
