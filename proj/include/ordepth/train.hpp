#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <vector>

#include "ordepth/model.hpp"

namespace ordepth {

struct TrainOptions {
  double lr = 0.01;
  double weight_decay = 5e-4;
  int iterations = 2000;
  int batch_size = 32;
  uint64_t seed = 0;
  double lr_drop_frac = 0.75;  // multiply lr by 0.1 after this fraction
  std::ostream* log = nullptr;
  int log_every = 25;
};

struct TraceRow {
  int iteration;
  double loss;
  double accuracy;  // batch accuracy
};

// Dataset adaptor: bundle + its ordinal label, by index. Returned by
// value so callers can build contexts on demand instead of holding the
// whole set in memory.
struct TrainSample {
  ContextBundle bundle;
  int label;  // 0 EQ, 1 GT, 2 LT
};
using SampleProvider = std::function<TrainSample(size_t)>;

template <typename T>
std::vector<TraceRow> train(Net<T>& net, const SampleProvider& sample, size_t n,
                            const TrainOptions& opt) {
  if (n == 0) fail("EmptyPairSet", "no training samples");
  if (opt.batch_size < 1 || opt.iterations < 1)
    fail("InvalidConfig", "batch_size and iterations must be positive");

  Rng rng(opt.seed);
  std::vector<TraceRow> trace;
  const int drop_at = int(opt.lr_drop_frac * opt.iterations);

  for (int it = 0; it < opt.iterations; ++it) {
    double lr = it >= drop_at ? opt.lr * 0.1 : opt.lr;

    std::vector<TrainSample> samples;
    samples.reserve(size_t(opt.batch_size));
    std::vector<const ContextBundle*> batch(size_t(opt.batch_size));
    std::vector<int> labels(size_t(opt.batch_size));
    for (int b = 0; b < opt.batch_size; ++b) {
      samples.push_back(sample(rng.uniform_int(uint32_t(n))));
      labels[size_t(b)] = samples.back().label;
    }
    for (int b = 0; b < opt.batch_size; ++b) batch[size_t(b)] = &samples[size_t(b)].bundle;

    Tensor<T> logp = net.forward(batch, true);
    net.zero_grad();
    double loss = net.loss_backward(logp, labels);
    if (!std::isfinite(loss)) fail("NonFiniteLoss", "iteration " + std::to_string(it));
    net.sgd_step(lr, opt.weight_decay);

    int correct = 0;
    for (int b = 0; b < opt.batch_size; ++b) {
      const T* row = &logp.data[size_t(b) * 3];
      int arg = 0;
      if (row[1] > row[arg]) arg = 1;
      if (row[2] > row[arg]) arg = 2;
      if (arg == labels[size_t(b)]) ++correct;
    }
    trace.push_back({it, loss, double(correct) / opt.batch_size});
    if (opt.log && (it % opt.log_every == 0 || it + 1 == opt.iterations))
      *opt.log << "iter " << it << " loss " << loss << " acc "
               << double(correct) / opt.batch_size << "\n";
  }
  return trace;
}

inline void write_trace_csv(const std::vector<TraceRow>& trace,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("IoFailure", path);
  out << "iteration,loss,accuracy\n";
  for (const auto& r : trace)
    out << r.iteration << ',' << r.loss << ',' << r.accuracy << "\n";
  if (!out) fail("IoFailure", path);
}

struct GradCheckResult {
  double max_rel_err = 0;
  size_t n_checked = 0;
};

// Central finite differences against the analytic gradient on a random
// subset of trainable parameters. Meant to run with T = double.
template <typename T>
GradCheckResult grad_check(Net<T>& net, const std::vector<const ContextBundle*>& batch,
                           const std::vector<int>& labels, size_t n_params,
                           double eps, uint64_t seed) {
  // One analytic pass in eval mode so batch norm uses fixed statistics
  // (running stats do not change between the FD probes).
  net.zero_grad();
  net.loss_backward(net.forward(batch, false), labels);

  struct Slot {
    Tensor<T>* value;
    Tensor<T>* grad;
    size_t idx;
  };
  std::vector<Slot> slots;
  for (auto& p : net.params()) {
    if (!p.trainable) continue;
    for (size_t i = 0; i < p.value->numel(); ++i) slots.push_back({p.value, p.grad, i});
  }
  Rng rng(seed);
  rng.shuffle(slots);
  if (slots.size() > n_params) slots.resize(n_params);

  auto loss_at = [&]() {
    Tensor<T> logp = net.forward(batch, false);
    double l = 0;
    for (size_t n = 0; n < labels.size(); ++n)
      l -= double(logp.data[n * 3 + size_t(labels[n])]);
    return l / double(labels.size());
  };

  GradCheckResult res;
  for (const auto& s : slots) {
    T saved = s.value->data[s.idx];
    s.value->data[s.idx] = saved + T(eps);
    double lp = loss_at();
    s.value->data[s.idx] = saved - T(eps);
    double lm = loss_at();
    s.value->data[s.idx] = saved;
    double numeric = (lp - lm) / (2 * eps);
    double analytic = double(s.grad->data[s.idx]);
    double rel = std::fabs(analytic - numeric) /
                 std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    res.max_rel_err = std::max(res.max_rel_err, rel);
    ++res.n_checked;
  }
  return res;
}

}  // namespace ordepth
