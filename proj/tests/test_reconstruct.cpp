#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <queue>

#include "doctest.h"
#include "ordepth/error.hpp"
#include "ordepth/metrics.hpp"
#include "ordepth/reconstruct.hpp"
#include "ordepth/rng.hpp"

using namespace ordepth;

namespace {

// A spec with a single scored pair (0,1) and no smoothness.
EnergySpec one_pair_spec(OrdinalProbs probs, SlackPriors priors) {
  EnergySpec s;
  s.n_superpixels = 2;
  s.pairs = {{0, 1, probs}};
  s.priors = priors;
  return s;
}

SlackPriors wide_priors() {
  SlackPriors p;
  p.mu = {0.0, std::log(2.0), std::log(2.0)};
  p.var = {100.0, 100.0, 100.0};
  return p;
}

EnergySpec random_spec(Rng& rng, int max_s = 4, int max_pairs = 4) {
  EnergySpec s;
  s.n_superpixels = 2 + int(rng.uniform_int(uint32_t(max_s - 1)));
  int np = 1 + int(rng.uniform_int(uint32_t(max_pairs)));
  for (int k = 0; k < np; ++k) {
    int i = int(rng.uniform_int(uint32_t(s.n_superpixels)));
    int j = int(rng.uniform_int(uint32_t(s.n_superpixels)));
    if (i == j) continue;
    double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    double t = a + b + c;
    s.pairs.push_back({i, j, {a / t, b / t, c / t}});
  }
  if (s.pairs.empty()) s.pairs.push_back({0, 1, {1.0, 0.0, 0.0}});
  if (rng.uniform() < 0.5)
    s.edges.push_back({0, 1, rng.uniform(0.01, 1.0)});
  s.priors.mu = {0.0, rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
  s.priors.var = {rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0),
                  rng.uniform(0.01, 1.0)};
  return s;
}

// Exhaustive grid search oracle: 41 points per y variable over
// [log lo, log hi]; for fixed y the optimal slack solves a 1-D quadratic
// in closed form subject to eps >= kSlackMin.
double grid_best_energy(const EnergySpec& spec, int grid = 41) {
  double ylo = std::log(spec.lo), yhi = std::log(spec.hi);
  std::vector<int> idx(size_t(spec.n_superpixels), 0);
  std::vector<double> y(size_t(spec.n_superpixels));
  double best = 1e300;
  while (true) {
    for (int s = 0; s < spec.n_superpixels; ++s)
      y[size_t(s)] = ylo + (yhi - ylo) * idx[size_t(s)] / (grid - 1);
    std::vector<std::array<double, 3>> slack(spec.pairs.size());
    for (size_t p = 0; p < spec.pairs.size(); ++p) {
      double d = y[size_t(spec.pairs[p].i)] - y[size_t(spec.pairs[p].j)];
      double target[3] = {std::fabs(d), d, -d};
      for (int o = 0; o < 3; ++o) {
        // min over e of w*(target-e)^2 + (e-mu)^2/var
        double w = spec.pairs[p].probs[o];
        double inv = 1.0 / spec.priors.var[size_t(o)];
        double e = (w * target[o] + inv * spec.priors.mu[size_t(o)]) / (w + inv);
        slack[p][size_t(o)] = std::max(e, kSlackMin);
      }
    }
    best = std::min(best, energy(spec, y, slack));
    int s = 0;
    while (s < spec.n_superpixels && ++idx[size_t(s)] == grid) idx[size_t(s++)] = 0;
    if (s == spec.n_superpixels) break;
  }
  return best;
}

}  // namespace

TEST_CASE("slack priors from data") {
  std::vector<LabeledDepthPair> pairs;
  for (int k = 0; k < 3; ++k) pairs.push_back({Ordinal::EQ, 2.0, 2.0});
  const double e = std::exp(1.0);
  for (int k = 0; k < 3; ++k) pairs.push_back({Ordinal::GT, e, 1.0});
  pairs.push_back({Ordinal::LT, 1.0, std::exp(0.5)});
  pairs.push_back({Ordinal::LT, 1.0, std::exp(1.5)});
  SlackPriors p = slack_priors_from_data(pairs);
  CHECK(p.mu[0] == doctest::Approx(0.0));
  CHECK(p.var[0] == doctest::Approx(1e-4));  // floored
  CHECK(p.mu[1] == doctest::Approx(1.0));
  CHECK(p.var[1] == doctest::Approx(1e-4));
  CHECK(p.mu[2] == doctest::Approx(1.0));
  CHECK(p.var[2] == doctest::Approx(0.5));  // unbiased over {0.5, 1.5}
}

TEST_CASE("slack priors require two samples per class") {
  std::vector<LabeledDepthPair> pairs{{Ordinal::EQ, 1, 1}, {Ordinal::EQ, 2, 2},
                                      {Ordinal::GT, 2, 1}, {Ordinal::GT, 3, 1},
                                      {Ordinal::LT, 1, 2}};
  CHECK_THROWS_AS(slack_priors_from_data(pairs), Error);
}

TEST_CASE("smoothness weight formula") {
  // Two side-by-side segments with controllable mean colors.
  SuperpixelMap sp;
  sp.width = 2;
  sp.height = 1;
  sp.n_segments = 2;
  sp.labels = {0, 1};
  sp.centroids = {{0.0, 0.0}, {0.0, 1.0}};
  sp.sizes = {1, 1};
  Image img;
  img.width = 2;
  img.height = 1;
  img.channels = 3;

  img.data = {0.3f, 0.4f, 0.5f, 0.3f, 0.4f, 0.5f};  // identical colors
  auto w1 = smoothness_weights(img, sp, {{0, 1, {1.0, 0.0, 0.0}}}, 0.5, 0.5, 0.1);
  REQUIRE(w1.size() == 1);
  CHECK(w1[0].weight == doctest::Approx(1.0));

  auto w2 = smoothness_weights(img, sp, {}, 0.5, 0.5, 0.1);  // unscored pair
  CHECK(w2[0].weight == doctest::Approx(0.5));

  // ||dI||^2 = rho, no equality mass.
  double rho = 0.1;
  img.data = {0.0f, 0.0f, 0.0f, float(std::sqrt(rho)), 0.0f, 0.0f};
  auto w3 = smoothness_weights(img, sp, {{0, 1, {0.0, 1.0, 0.0}}}, 0.5, 0.5, rho);
  CHECK(w3[0].weight == doctest::Approx(0.5 * std::exp(-1.0)));
}

TEST_CASE("energy value instances") {
  SlackPriors p;
  p.mu = {0, 0.5, 0.5};
  p.var = {1, 1, 1};

  // Flat y, slack at the priors, all mass on EQ with mu_EQ = 0.
  EnergySpec s = one_pair_spec({1.0, 0.0, 0.0}, p);
  std::vector<double> y{0.3, 0.3};
  std::vector<std::array<double, 3>> slack{{0.0, 0.5, 0.5}};
  CHECK(energy(s, y, slack) == doctest::Approx(0.0));

  // Certain GT pair, satisfied exactly.
  EnergySpec g = one_pair_spec({0.0, 1.0, 0.0}, p);
  std::vector<double> y2{0.5, 0.0};
  std::vector<std::array<double, 3>> slack2{{0.0, 0.5, 0.5}};
  CHECK(energy(g, y2, slack2) == doctest::Approx(0.0));

  // Certain EQ pair with separation d and zero slack: E = d^2.
  SlackPriors pz;
  pz.mu = {0, 0, 0};
  pz.var = {1, 1, 1};
  EnergySpec e = one_pair_spec({1.0, 0.0, 0.0}, pz);
  std::vector<double> y3{0.7, 0.0};
  std::vector<std::array<double, 3>> slack3{{0.0, 0.0, 0.0}};
  CHECK(energy(e, y3, slack3) == doctest::Approx(0.49));
}

TEST_CASE("energy rejects non-finite input") {
  EnergySpec s = one_pair_spec({1.0, 0.0, 0.0}, wide_priors());
  std::vector<double> y{std::nan(""), 0.0};
  std::vector<std::array<double, 3>> slack{{0.1, 0.1, 0.1}};
  CHECK_THROWS_AS(energy(s, y, slack), Error);
}

TEST_CASE("analytic gradient matches finite differences") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    EnergySpec s = random_spec(rng);
    std::vector<double> y(size_t(s.n_superpixels));
    for (auto& v : y) v = rng.uniform(std::log(s.lo) + 0.1, std::log(s.hi) - 0.1);
    std::vector<std::array<double, 3>> slack(s.pairs.size());
    for (auto& a : slack)
      for (auto& v : a) v = rng.uniform(0.05, 1.0);

    std::vector<double> gy;
    std::vector<std::array<double, 3>> gs;
    energy_grad(s, y, slack, gy, gs);
    const double h = 1e-6;
    for (size_t k = 0; k < y.size(); ++k) {
      auto yp = y, ym = y;
      yp[k] += h;
      ym[k] -= h;
      double fd = (energy(s, yp, slack) - energy(s, ym, slack)) / (2 * h);
      CHECK(gy[k] == doctest::Approx(fd).epsilon(1e-4));
    }
    for (size_t p = 0; p < slack.size(); ++p)
      for (int o = 0; o < 3; ++o) {
        auto sp = slack, sm = slack;
        sp[p][size_t(o)] += h;
        sm[p][size_t(o)] -= h;
        double fd = (energy(s, y, sp) - energy(s, y, sm)) / (2 * h);
        CHECK(gs[p][size_t(o)] == doctest::Approx(fd).epsilon(1e-4));
      }
  }
}

TEST_CASE("certain further-than pair converges to the prior ratio") {
  EnergySpec s = one_pair_spec({0.0, 1.0, 0.0}, wide_priors());
  Solution sol = solve(s);
  double ratio = std::exp(sol.y[0] - sol.y[1]);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("certain equality pair pulls depths together") {
  SlackPriors p = wide_priors();
  p.var = {1e-4, 1.0, 1.0};
  EnergySpec s = one_pair_spec({1.0, 0.0, 0.0}, p);
  Solution sol = solve(s);
  CHECK(std::fabs(sol.y[0] - sol.y[1]) < 1e-3);
}

TEST_CASE("chain of certain orderings is ranked correctly") {
  EnergySpec s;
  s.n_superpixels = 3;
  s.pairs = {{0, 1, {0.0, 1.0, 0.0}}, {1, 2, {0.0, 1.0, 0.0}}};
  s.priors = wide_priors();
  Solution sol = solve(s);
  CHECK(sol.y[0] > sol.y[1]);
  CHECK(sol.y[1] > sol.y[2]);
}

TEST_CASE("solver matches the grid-search oracle on small problems") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    EnergySpec s = random_spec(rng);
    Solution sol = solve(s);
    double oracle = grid_best_energy(s);
    // The grid is coarse; the solver must do at least as well up to the
    // grid's own resolution gap.
    double gap = 0.05 + 0.05 * std::fabs(oracle);
    CHECK(sol.energy <= oracle + gap);
  }
}

TEST_CASE("solver iterates are feasible and energy is monotone") {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    EnergySpec s = random_spec(rng, 6, 8);
    Solution sol = solve(s, 1e-8, 4000);
    for (double v : sol.y) {
      CHECK(v >= std::log(s.lo) - 1e-12);
      CHECK(v <= std::log(s.hi) + 1e-12);
    }
    for (const auto& a : sol.slack)
      for (double e : a) CHECK(e >= kSlackMin);
    for (size_t k = 1; k < sol.trace.size(); ++k)
      CHECK(sol.trace[k] <= sol.trace[k - 1] + 1e-12);
    CHECK(std::isfinite(sol.energy));
  }
}

TEST_CASE("data and smoothness terms are shift invariant") {
  Rng rng(31);
  EnergySpec s = random_spec(rng);
  s.priors.var = {1e6, 1e6, 1e6};  // make R(eps) negligible but nonzero
  std::vector<double> y(size_t(s.n_superpixels));
  for (auto& v : y) v = rng.uniform(-0.5, 0.5);
  std::vector<std::array<double, 3>> slack(s.pairs.size(), {0.3, 0.3, 0.3});
  double e0 = energy(s, y, slack);
  for (auto& v : y) v += 0.37;
  CHECK(energy(s, y, slack) == doctest::Approx(e0).epsilon(1e-9));
}

TEST_CASE("floodfill") {
  SuperpixelMap one;
  one.width = 3;
  one.height = 2;
  one.n_segments = 1;
  one.labels.assign(6, 0);
  DepthMap d1 = floodfill(one, {0.0});
  for (float v : d1.data) CHECK(v == doctest::Approx(1.0));

  SuperpixelMap quad;
  quad.width = 4;
  quad.height = 4;
  quad.n_segments = 4;
  quad.labels.resize(16);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      quad.labels[size_t(r) * 4 + size_t(c)] = (r < 2 ? 0 : 2) + (c < 2 ? 0 : 1);
  DepthMap d4 = floodfill(quad, {0.0, std::log(2.0), std::log(3.0), std::log(4.0)});
  CHECK(d4.at(0, 0) == doctest::Approx(1.0));
  CHECK(d4.at(0, 3) == doctest::Approx(2.0));
  CHECK(d4.at(3, 0) == doctest::Approx(3.0));
  CHECK(d4.at(3, 3) == doctest::Approx(4.0));

  CHECK_THROWS_AS(floodfill(quad, {0.0, 1.0}), Error);  // length mismatch
}

TEST_CASE("probability csv and prior json round trips") {
  auto dir = std::filesystem::temp_directory_path();
  std::vector<ScoredPair> probs{{0, 1, {0.2, 0.5, 0.3}}, {1, 3, {0.6, 0.1, 0.3}}};
  std::string pcsv = (dir / "od_probs.csv").string();
  write_probs_csv(probs, pcsv);
  auto back = load_probs_csv(pcsv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].i == 0);
  CHECK(back[0].probs.p_gt == doctest::Approx(0.5));
  CHECK(back[1].j == 3);

  SlackPriors pr;
  pr.mu = {0.0, 0.4, 0.6};
  pr.var = {1e-4, 0.02, 0.03};
  std::string pj = (dir / "od_priors.json").string();
  write_priors_json(pr, pj);
  SlackPriors pb = load_priors_json(pj);
  for (int o = 0; o < 3; ++o) {
    CHECK(pb.mu[size_t(o)] == doctest::Approx(pr.mu[size_t(o)]));
    CHECK(pb.var[size_t(o)] == doctest::Approx(pr.var[size_t(o)]));
  }
}

TEST_CASE("noiseless round trip recovers pair orderings") {
  Image img;
  DepthMap dep;
  synth_scene(41, 64, 64, 3, img, dep);
  SuperpixelMap sp = slic_segment(img, 18);
  REQUIRE(sp.n_segments <= 20);
  AdjacencyGraph adj = build_adjacency(sp);
  auto pairs = second_order_pairs(adj);
  int n = sp.n_segments;

  // True per-superpixel depth at the centroid.
  auto depth_at = [&](int s) {
    int r = int(std::lround(sp.centroids[size_t(s)].first));
    int c = int(std::lround(sp.centroids[size_t(s)].second));
    return depth_at_nearest_valid(dep, r, c, 10.0);
  };

  // Score every second-order pair with its certain (one-hot) label. The
  // equal prior is tight; further/closer slacks are left nearly free so
  // each scored pair keeps its own margin.
  EnergySpec spec;
  spec.n_superpixels = n;
  for (auto [i, j] : pairs) {
    Ordinal lab = label_from_depths(depth_at(i), depth_at(j), 0.02);
    OrdinalProbs probs{0.0, 0.0, 0.0};
    if (lab == Ordinal::EQ) probs = {1.0, 0.0, 0.0};
    if (lab == Ordinal::GT) probs = {0.0, 1.0, 0.0};
    if (lab == Ordinal::LT) probs = {0.0, 0.0, 1.0};
    spec.pairs.push_back({i, j, probs});
  }
  REQUIRE(spec.pairs.size() > 4);
  spec.priors.mu = {0.0, std::log(1.5), std::log(1.5)};
  spec.priors.var = {1e-4, 100.0, 100.0};
  Solution sol = solve(spec);
  DepthMap rec = floodfill(sp, sol.y);

  // Held-out evaluation pairs: superpixels three adjacency hops apart,
  // which are never scored directly.
  std::vector<PairSample> held_out;
  for (int s = 0; s < n; ++s) {
    std::vector<int> dist(size_t(n), -1);
    std::queue<int> q;
    q.push(s);
    dist[size_t(s)] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj.neighbors[size_t(u)]) {
        if (dist[size_t(v)] < 0) {
          dist[size_t(v)] = dist[size_t(u)] + 1;
          q.push(v);
        }
      }
    }
    for (int t = s + 1; t < n; ++t) {
      if (dist[size_t(t)] != 3) continue;
      PairSample p;
      p.i = s;
      p.j = t;
      p.r_i = int(std::lround(sp.centroids[size_t(s)].first));
      p.c_i = int(std::lround(sp.centroids[size_t(s)].second));
      p.r_j = int(std::lround(sp.centroids[size_t(t)].first));
      p.c_j = int(std::lround(sp.centroids[size_t(t)].second));
      p.label = label_from_depths(depth_at(s), depth_at(t), 0.02);
      held_out.push_back(p);
    }
  }
  REQUIRE(held_out.size() > 4);
  EvalReport rep = wkdr_on_map(rec, held_out, 0.02);
  REQUIRE(rep.wkdr.has_value());
  CHECK(*rep.wkdr < 0.05);
}
