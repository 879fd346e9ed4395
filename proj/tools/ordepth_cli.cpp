// ordepth: end-to-end pipeline driver.
//
//   synth        generate synthetic scenes + manifest
//   sample-pairs superpixels -> second-order pairs -> labeled CSVs + priors
//   extract      context bundle caches per image
//   train        fit the three-way classifier, write checkpoint + trace
//   predict      per-pair ordinal probabilities from a checkpoint
//   reconstruct  dense relative depth map from probabilities
//   eval         WKDR / accuracy report
//
// All commands are deterministic for a fixed seed and flag set.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ordepth/context.hpp"
#include "ordepth/error.hpp"
#include "ordepth/image.hpp"
#include "ordepth/metrics.hpp"
#include "ordepth/model.hpp"
#include "ordepth/reconstruct.hpp"
#include "ordepth/superpixel.hpp"
#include "ordepth/train.hpp"

namespace fs = std::filesystem;
using namespace ordepth;
using nlohmann::json;

namespace {

// --config JSON overrides command-line flags; unknown keys are errors.
struct Overrides {
  json j;
  std::set<std::string> used;

  static Overrides from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("MissingFile", path);
    Overrides o;
    in >> o.j;
    if (!o.j.is_object()) fail("InvalidConfig", path + ": config must be a JSON object");
    return o;
  }
  template <typename V>
  void opt(const std::string& key, V& v) {
    if (j.contains(key)) {
      v = j.at(key).get<V>();
      used.insert(key);
    }
  }
  void finish() const {
    for (const auto& item : j.items())
      if (!used.count(item.key()))
        fail("InvalidConfig", "unknown config key: " + item.key());
  }
};

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

struct SlicFlags {
  int segments = 100;
  double compactness = 10.0;
  int iterations = 10;

  void add(CLI::App* cmd) {
    cmd->add_option("--segments", segments, "Requested superpixel count")
        ->capture_default_str();
    cmd->add_option("--compactness", compactness, "SLIC compactness")
        ->capture_default_str();
    cmd->add_option("--slic-iters", iterations, "SLIC iterations")
        ->capture_default_str();
  }
  void apply(Overrides& o) {
    o.opt("segments", segments);
    o.opt("compactness", compactness);
    o.opt("slic-iters", iterations);
  }
};

StreamFlags parse_streams(const std::string& s) {
  if (s == "all") return {};
  StreamFlags f;
  f.patch1 = f.patch2 = f.scale1 = f.scale2 = f.scale3 = f.masks = false;
  if (s == "patches") {
    f.patch1 = f.patch2 = true;
    return f;
  }
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t comma = s.find(',', pos);
    std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (tok == "patch1") f.patch1 = true;
    else if (tok == "patch2") f.patch2 = true;
    else if (tok == "scale1") f.scale1 = true;
    else if (tok == "scale2") f.scale2 = true;
    else if (tok == "scale3") f.scale3 = true;
    else if (tok == "masks") f.masks = true;
    else fail("InvalidConfig", "unknown stream: " + tok);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return f;
}

int clampi(long v, int lo, int hi) { return int(std::max(long(lo), std::min(long(hi), v))); }

// Labeled pair candidates for one image: second-order superpixel pairs
// with centroid point coordinates and depth-derived ordinal labels.
std::vector<PairSample> pair_candidates(const SuperpixelMap& sp, const DepthMap& depth,
                                        double delta, double max_radius) {
  AdjacencyGraph g = build_adjacency(sp);
  std::vector<PairSample> out;
  for (auto [i, j] : second_order_pairs(g)) {
    PairSample p;
    p.i = i;
    p.j = j;
    p.r_i = clampi(std::lround(sp.centroids[size_t(i)].first), 0, sp.height - 1);
    p.c_i = clampi(std::lround(sp.centroids[size_t(i)].second), 0, sp.width - 1);
    p.r_j = clampi(std::lround(sp.centroids[size_t(j)].first), 0, sp.height - 1);
    p.c_j = clampi(std::lround(sp.centroids[size_t(j)].second), 0, sp.width - 1);
    p.label = label_pair(depth, p.r_i, p.c_i, p.r_j, p.c_j, delta, max_radius);
    out.push_back(p);
  }
  return out;
}

int ordinal_argmax(const float* logp) {
  int a = 0;
  if (logp[1] > logp[a]) a = 1;
  if (logp[2] > logp[a]) a = 2;
  return a;
}

// ------------------------------------------------------------- synth

int cmd_synth(uint64_t seed, const std::string& config, int n_train, int n_test,
              int width, int height, int objects, std::string out) {
  if (!config.empty()) {
    auto o = Overrides::from_file(config);
    o.opt("seed", seed);
    o.opt("train", n_train);
    o.opt("test", n_test);
    o.opt("width", width);
    o.opt("height", height);
    o.opt("objects", objects);
    o.opt("out", out);
    o.finish();
  }
  if (out.empty()) fail("InvalidConfig", "--out required");
  fs::create_directories(out);
  DatasetManifest manifest;
  int total = n_train + n_test;
  for (int k = 0; k < total; ++k) {
    Image img;
    DepthMap dep;
    synth_scene(seed + uint64_t(k), width, height, objects, img, dep);
    char name[64];
    std::snprintf(name, sizeof(name), "scene_%03d", k);
    std::string img_path = out + "/" + name + ".ppm";
    std::string dep_path = out + "/" + name + ".f32";
    write_ppm(img, img_path);
    write_depth_f32(dep, dep_path);
    manifest.push_back({img_path, dep_path, "", k < n_train ? "train" : "test"});
  }
  std::string mpath = out + "/manifest.jsonl";
  write_manifest(manifest, mpath);
  std::cout << "wrote " << total << " scenes and " << mpath << "\n";
  return 0;
}

// ------------------------------------------------------- sample-pairs

int cmd_sample_pairs(uint64_t seed, const std::string& config, std::string manifest_path,
                     int n_per_image, double delta, double max_radius, SlicFlags slic,
                     std::string out) {
  if (!config.empty()) {
    auto o = Overrides::from_file(config);
    o.opt("seed", seed);
    o.opt("manifest", manifest_path);
    o.opt("n-per-image", n_per_image);
    o.opt("delta", delta);
    o.opt("max-radius", max_radius);
    slic.apply(o);
    o.opt("out", out);
    o.finish();
  }
  if (out.empty()) fail("InvalidConfig", "--out required");
  fs::create_directories(out);
  DatasetManifest manifest = load_manifest(manifest_path);
  DatasetManifest updated;
  std::vector<LabeledDepthPair> prior_pairs;
  size_t counts[3] = {0, 0, 0};

  for (size_t k = 0; k < manifest.size(); ++k) {
    const auto& rec = manifest[k];
    if (rec.depth.empty()) fail("InvalidConfig", rec.image + ": no depth for labeling");
    Image img = load_image(rec.image);
    DepthMap dep = load_depth(rec.depth, 1.0);
    SuperpixelMap sp = slic_segment(img, slic.segments, slic.compactness, slic.iterations);
    auto cands = pair_candidates(sp, dep, delta, max_radius);
    auto picked = sample_pairs(cands, n_per_image, seed + uint64_t(k));
    std::string ppath = out + "/" + stem(rec.image) + ".pairs.csv";
    write_pairs_csv(picked, ppath);
    for (const auto& p : picked) {
      ++counts[int(p.label)];
      if (rec.split == "train")
        prior_pairs.push_back({p.label,
                               depth_at_nearest_valid(dep, p.r_i, p.c_i, max_radius),
                               depth_at_nearest_valid(dep, p.r_j, p.c_j, max_radius)});
    }
    ManifestRecord nr = rec;
    nr.pairs = ppath;
    updated.push_back(nr);
  }
  write_manifest(updated, out + "/manifest.jsonl");
  write_priors_json(slack_priors_from_data(prior_pairs), out + "/priors.json");
  size_t total = counts[0] + counts[1] + counts[2];
  std::cout << "pairs: " << total << "  EQ: " << counts[0] << "  GT: " << counts[1]
            << "  LT: " << counts[2] << "\n";
  return 0;
}

// ------------------------------------------------------------ extract

int cmd_extract(const std::string& config, std::string manifest_path, std::string out,
                bool diw) {
  if (!config.empty()) {
    auto o = Overrides::from_file(config);
    o.opt("manifest", manifest_path);
    o.opt("out", out);
    o.opt("diw", diw);
    o.finish();
  }
  if (out.empty()) fail("InvalidConfig", "--out required");
  fs::create_directories(out);
  DatasetManifest manifest = load_manifest(manifest_path);
  for (const auto& rec : manifest) {
    if (rec.pairs.empty()) fail("InvalidConfig", rec.image + ": no pairs file");
    Image img = load_image(rec.image);
    std::vector<ContextBundle> bundles;
    for (const auto& p : load_pairs_csv(rec.pairs))
      bundles.push_back(build_context(img, p, diw ? ContextMode::Diw : ContextMode::Standard));
    write_bundle_cache(bundles, out + "/" + stem(rec.image) + ".ctx.bin",
                       out + "/" + stem(rec.image) + ".ctx.json");
  }
  std::cout << "extracted contexts for " << manifest.size() << " images\n";
  return 0;
}

// -------------------------------------------------------------- train

struct IndexedPair {
  size_t image;  // index into images vector
  PairSample pair;
};

int cmd_train(uint64_t seed, const std::string& config, std::string manifest_path,
              std::string out, std::string trace_path, int iters, int batch, double lr,
              double wd, std::string streams, std::string block, int k, int layers,
              int fc, std::string split) {
  if (!config.empty()) {
    auto o = Overrides::from_file(config);
    o.opt("seed", seed);
    o.opt("manifest", manifest_path);
    o.opt("out", out);
    o.opt("trace", trace_path);
    o.opt("iters", iters);
    o.opt("batch", batch);
    o.opt("lr", lr);
    o.opt("wd", wd);
    o.opt("streams", streams);
    o.opt("block", block);
    o.opt("k", k);
    o.opt("L", layers);
    o.opt("fc", fc);
    o.opt("split", split);
    o.finish();
  }
  if (out.empty()) fail("InvalidConfig", "--out required");

  std::vector<Image> images;
  std::vector<IndexedPair> data;
  for (const auto& rec : load_manifest(manifest_path)) {
    if (rec.split != split) continue;
    if (rec.pairs.empty()) fail("InvalidConfig", rec.image + ": no pairs file");
    images.push_back(load_image(rec.image));
    for (const auto& p : load_pairs_csv(rec.pairs))
      data.push_back({images.size() - 1, p});
  }
  if (data.empty()) fail("EmptyPairSet", "no pairs in split " + split);

  ModelConfig mc;
  mc.streams = parse_streams(streams);
  mc.block_kind = block_kind_from_name(block);
  mc.growth = k;
  mc.dense_layers = layers;
  mc.fc_width = fc;
  mc.seed = seed;
  Net<float> net(mc);

  auto provider = [&](size_t idx) {
    const auto& ip = data[idx];
    return TrainSample{build_context(images[ip.image], ip.pair), int(ip.pair.label)};
  };

  TrainOptions topt;
  topt.lr = lr;
  topt.weight_decay = wd;
  topt.iterations = iters;
  topt.batch_size = batch;
  topt.seed = seed;
  topt.log = &std::cout;

  std::vector<TraceRow> trace;
  try {
    trace = train(net, provider, data.size(), topt);
  } catch (const Error& e) {
    if (std::string(e.code()) == "NonFiniteLoss") {
      // Weights predate the bad step; keep them so the run is resumable.
      save_checkpoint(net, out);
      std::cerr << "aborted: " << e.what() << " (last good checkpoint kept)\n";
      return 1;
    }
    throw;
  }
  save_checkpoint(net, out);
  if (!trace_path.empty()) write_trace_csv(trace, trace_path);

  // Eval-mode accuracy over the whole training split.
  size_t correct = 0;
  for (size_t base = 0; base < data.size(); base += size_t(batch)) {
    size_t n = std::min(size_t(batch), data.size() - base);
    std::vector<ContextBundle> bundles(n);
    std::vector<const ContextBundle*> ptrs(n);
    for (size_t b = 0; b < n; ++b) {
      bundles[b] = build_context(images[data[base + b].image], data[base + b].pair);
      ptrs[b] = &bundles[b];
    }
    Tensor<float> logp = net.forward(ptrs, false);
    for (size_t b = 0; b < n; ++b)
      if (ordinal_argmax(&logp.data[b * 3]) == int(data[base + b].pair.label)) ++correct;
  }
  std::cout << "final train accuracy: " << double(correct) / double(data.size()) << "\n";
  return 0;
}

// ------------------------------------------------------------ predict

int cmd_predict(const std::string& config, std::string checkpoint,
                std::string manifest_path, std::string out, std::string split,
                int batch) {
  if (!config.empty()) {
    auto o = Overrides::from_file(config);
    o.opt("checkpoint", checkpoint);
    o.opt("manifest", manifest_path);
    o.opt("out", out);
    o.opt("split", split);
    o.opt("batch", batch);
    o.finish();
  }
  if (out.empty()) fail("InvalidConfig", "--out required");
  fs::create_directories(out);
  Net<float> net = load_checkpoint<float>(checkpoint);

  for (const auto& rec : load_manifest(manifest_path)) {
    if (!split.empty() && rec.split != split) continue;
    if (rec.pairs.empty()) fail("InvalidConfig", rec.image + ": no pairs file");
    Image img = load_image(rec.image);
    auto pairs = load_pairs_csv(rec.pairs);
    std::vector<ScoredPair> scored;
    for (size_t base = 0; base < pairs.size(); base += size_t(batch)) {
      size_t n = std::min(size_t(batch), pairs.size() - base);
      std::vector<ContextBundle> bundles(n);
      std::vector<const ContextBundle*> ptrs(n);
      for (size_t b = 0; b < n; ++b) {
        bundles[b] = build_context(img, pairs[base + b]);
        ptrs[b] = &bundles[b];
      }
      Tensor<float> logp = net.forward(ptrs, false);
      for (size_t b = 0; b < n; ++b) {
        const float* row = &logp.data[b * 3];
        scored.push_back({pairs[base + b].i, pairs[base + b].j,
                          {std::exp(double(row[0])), std::exp(double(row[1])),
                           std::exp(double(row[2]))}});
      }
    }
    write_probs_csv(scored, out + "/" + stem(rec.image) + ".probs.csv");
  }
  std::cout << "wrote probabilities to " << out << "\n";
  return 0;
}

// -------------------------------------------------------- reconstruct

int cmd_reconstruct(const std::string& config, std::string image_path,
                    std::string probs_path, std::string priors_path, SlicFlags slic,
                    double tol, int max_iter, double k1, double k2, double rho,
                    double lo, double hi, std::string out) {
  if (!config.empty()) {
    auto o = Overrides::from_file(config);
    o.opt("image", image_path);
    o.opt("probs", probs_path);
    o.opt("priors", priors_path);
    slic.apply(o);
    o.opt("tol", tol);
    o.opt("max-iter", max_iter);
    o.opt("k1", k1);
    o.opt("k2", k2);
    o.opt("rho", rho);
    o.opt("lo", lo);
    o.opt("hi", hi);
    o.opt("out", out);
    o.finish();
  }
  if (out.empty()) fail("InvalidConfig", "--out required");
  fs::create_directories(out);

  Image img = load_image(image_path);
  SuperpixelMap sp = slic_segment(img, slic.segments, slic.compactness, slic.iterations);
  EnergySpec spec;
  spec.n_superpixels = sp.n_segments;
  spec.pairs = load_probs_csv(probs_path);
  spec.priors = load_priors_json(priors_path);
  spec.lo = lo;
  spec.hi = hi;
  spec.k1 = k1;
  spec.k2 = k2;
  spec.rho = rho;
  spec.edges = smoothness_weights(img, sp, spec.pairs, k1, k2, rho);
  spec.validate();

  Solution sol = solve(spec, tol, max_iter);
  DepthMap dep = floodfill(sp, sol.y);
  std::string base = out + "/" + stem(image_path);
  write_depth_pgm(dep, base + ".depth.pgm", lo, hi);
  write_depth_f32(dep, base + ".depth.f32");
  std::ofstream csv(base + ".depth.csv");
  if (!csv) fail("IoFailure", base + ".depth.csv");
  csv << "superpixel,depth\n";
  for (size_t s = 0; s < sol.y.size(); ++s) csv << s << ',' << std::exp(sol.y[s]) << "\n";
  std::cout << "iterations: " << sol.iterations << "  energy: " << sol.energy
            << "  converged: " << (sol.converged ? "true" : "false") << "\n";
  return 0;
}

// --------------------------------------------------------------- eval

int cmd_eval(const std::string& config, std::string depth_path, double depth_scale,
             std::string probs_path, std::string pairs_path, double delta, bool diw,
             std::string out) {
  if (!config.empty()) {
    auto o = Overrides::from_file(config);
    o.opt("depth", depth_path);
    o.opt("depth-scale", depth_scale);
    o.opt("probs", probs_path);
    o.opt("pairs", pairs_path);
    o.opt("delta", delta);
    o.opt("diw", diw);
    o.opt("out", out);
    o.finish();
  }
  if (out.empty()) fail("InvalidConfig", "--out required");
  if (depth_path.empty() == probs_path.empty())
    fail("InvalidConfig", "exactly one of --depth / --probs required");
  auto pairs = load_pairs_csv(pairs_path);

  EvalReport rep;
  if (!depth_path.empty()) {
    DepthMap dep = load_depth(depth_path, depth_scale);
    rep = wkdr_on_map(dep, pairs, delta, diw);
  } else {
    auto probs = load_probs_csv(probs_path);
    if (probs.size() != pairs.size())
      fail("LengthMismatch", "probs rows vs pairs rows");
    std::vector<Ordinal> pred, truth;
    for (size_t k = 0; k < pairs.size(); ++k) {
      const auto& pr = probs[k].probs;
      int a = 0;
      if (pr[1] > pr[a]) a = 1;
      if (pr[2] > pr[a]) a = 2;
      pred.push_back(Ordinal(a));
      truth.push_back(pairs[k].label);
    }
    rep.accuracy = accuracy(pred, truth);
    rep.n_pairs = pairs.size();
  }
  write_report_csv(rep, out);
  if (rep.wkdr) std::cout << "wkdr: " << *rep.wkdr << "\n";
  if (rep.accuracy) std::cout << "accuracy: " << *rep.accuracy << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative depth order estimation pipeline"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  std::string out, configf;
  int jobs = 1;
  app.add_option("--seed", seed, "Global RNG seed")->capture_default_str();
  app.add_option("--out", out, "Output path or directory");
  app.add_option("--jobs", jobs, "Worker count (per-image stages)")->capture_default_str();
  app.add_option("--config", configf, "JSON config file; keys override flags");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic scenes");
  int n_train = 20, n_test = 5, width = 96, height = 96, objects = 4;
  synth->add_option("--train", n_train, "Training scenes")->capture_default_str();
  synth->add_option("--test", n_test, "Test scenes")->capture_default_str();
  synth->add_option("--width", width, "Scene width")->capture_default_str();
  synth->add_option("--height", height, "Scene height")->capture_default_str();
  synth->add_option("--objects", objects, "Rectangles per scene")->capture_default_str();

  // sample-pairs
  auto* sp = app.add_subcommand("sample-pairs", "Sample labeled superpixel pairs");
  std::string manifest;
  int n_per_image = 1600;
  double delta = 0.02, max_radius = 10;
  SlicFlags slic;
  sp->add_option("--manifest", manifest, "Dataset manifest")->required();
  sp->add_option("--n-per-image", n_per_image, "Pairs sampled per image")
      ->capture_default_str();
  sp->add_option("--delta", delta, "Ordinal tolerance")->capture_default_str();
  sp->add_option("--max-radius", max_radius, "Valid-depth search radius")
      ->capture_default_str();
  slic.add(sp);

  // extract
  auto* ex = app.add_subcommand("extract", "Write context bundle caches");
  std::string ex_manifest;
  bool ex_diw = false;
  ex->add_option("--manifest", ex_manifest, "Manifest with pairs paths")->required();
  ex->add_flag("--diw", ex_diw, "Collinear-box context mode");

  // train
  auto* tr = app.add_subcommand("train", "Train the three-way classifier");
  std::string tr_manifest, tr_trace, tr_streams = "all", tr_block = "dense",
                           tr_split = "train";
  int tr_iters = 2000, tr_batch = 32, tr_k = 5, tr_L = 5, tr_fc = 400;
  double tr_lr = 0.01, tr_wd = 5e-4;
  tr->add_option("--manifest", tr_manifest, "Manifest with pairs paths")->required();
  tr->add_option("--trace", tr_trace, "Loss trace CSV path");
  tr->add_option("--iters", tr_iters, "SGD iterations")->capture_default_str();
  tr->add_option("--batch", tr_batch, "Mini-batch size")->capture_default_str();
  tr->add_option("--lr", tr_lr, "Learning rate")->capture_default_str();
  tr->add_option("--wd", tr_wd, "Weight decay")->capture_default_str();
  tr->add_option("--streams", tr_streams,
                 "all | patches | comma list of patch1,patch2,scale1,scale2,scale3,masks")
      ->capture_default_str();
  tr->add_option("--block", tr_block, "none | dense | bottleneck")->capture_default_str();
  tr->add_option("--k", tr_k, "Dense growth rate")->capture_default_str();
  tr->add_option("--L", tr_L, "Layers per dense block")->capture_default_str();
  tr->add_option("--fc", tr_fc, "Hidden FC width")->capture_default_str();
  tr->add_option("--split", tr_split, "Manifest split to train on")->capture_default_str();

  // predict
  auto* pr = app.add_subcommand("predict", "Score pairs with a checkpoint");
  std::string pr_checkpoint, pr_manifest, pr_split = "test";
  int pr_batch = 32;
  pr->add_option("--checkpoint", pr_checkpoint, "Model checkpoint")->required();
  pr->add_option("--manifest", pr_manifest, "Manifest with pairs paths")->required();
  pr->add_option("--split", pr_split, "Split to score (empty = all)")
      ->capture_default_str();
  pr->add_option("--batch", pr_batch, "Inference batch size")->capture_default_str();

  // reconstruct
  auto* rc = app.add_subcommand("reconstruct", "Dense depth from pair probabilities");
  std::string rc_image, rc_probs, rc_priors;
  SlicFlags rc_slic;
  double rc_tol = 1e-8, rc_k1 = 0.5, rc_k2 = 0.5, rc_rho = 0.1, rc_lo = 0.1, rc_hi = 10;
  int rc_max_iter = 20000;
  rc->add_option("--image", rc_image, "Input image")->required();
  rc->add_option("--probs", rc_probs, "Pair probabilities CSV")->required();
  rc->add_option("--priors", rc_priors, "Slack priors JSON")->required();
  rc_slic.add(rc);
  rc->add_option("--tol", rc_tol, "Relative energy tolerance")->capture_default_str();
  rc->add_option("--max-iter", rc_max_iter, "Solver iteration cap")->capture_default_str();
  rc->add_option("--k1", rc_k1, "Appearance smoothness weight")->capture_default_str();
  rc->add_option("--k2", rc_k2, "Equality smoothness weight")->capture_default_str();
  rc->add_option("--rho", rc_rho, "Appearance bandwidth")->capture_default_str();
  rc->add_option("--lo", rc_lo, "Depth lower bound")->capture_default_str();
  rc->add_option("--hi", rc_hi, "Depth upper bound")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "WKDR / accuracy report");
  std::string ev_depth, ev_probs, ev_pairs;
  double ev_scale = 1.0, ev_delta = 0.02;
  bool ev_diw = false;
  ev->add_option("--depth", ev_depth, "Predicted depth map (PGM or F32R)");
  ev->add_option("--depth-scale", ev_scale, "Depth scale factor")->capture_default_str();
  ev->add_option("--probs", ev_probs, "Predicted probabilities CSV");
  ev->add_option("--pairs", ev_pairs, "Labeled pairs CSV")->required();
  ev->add_option("--delta", ev_delta, "Ordinal tolerance")->capture_default_str();
  ev->add_flag("--diw", ev_diw, "Two-class annotation mode");

  CLI11_PARSE(app, argc, argv);
  (void)jobs;  // accepted for interface stability; stages run sequentially

  try {
    if (*synth)
      return cmd_synth(seed, configf, n_train, n_test, width, height, objects, out);
    if (*sp)
      return cmd_sample_pairs(seed, configf, manifest, n_per_image, delta, max_radius,
                              slic, out);
    if (*ex) return cmd_extract(configf, ex_manifest, out, ex_diw);
    if (*tr)
      return cmd_train(seed, configf, tr_manifest, out, tr_trace, tr_iters, tr_batch,
                       tr_lr, tr_wd, tr_streams, tr_block, tr_k, tr_L, tr_fc, tr_split);
    if (*pr) return cmd_predict(configf, pr_checkpoint, pr_manifest, out, pr_split, pr_batch);
    if (*rc)
      return cmd_reconstruct(configf, rc_image, rc_probs, rc_priors, rc_slic, rc_tol,
                             rc_max_iter, rc_k1, rc_k2, rc_rho, rc_lo, rc_hi, out);
    if (*ev)
      return cmd_eval(configf, ev_depth, ev_scale, ev_probs, ev_pairs, ev_delta, ev_diw,
                      out);
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
