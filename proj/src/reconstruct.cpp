#include "ordepth/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "ordepth/error.hpp"

namespace ordepth {

void EnergySpec::validate() const {
  if (n_superpixels < 1) fail("InvalidConfig", "empty spec");
  if (!(lo > 0 && lo < hi)) fail("InvalidConfig", "need 0 < lo < hi");
  if (!(k1 > 0 && k2 > 0 && rho > 0)) fail("InvalidConfig", "k1,k2,rho > 0");
  for (const auto& p : pairs) {
    if (p.i < 0 || p.i >= n_superpixels || p.j < 0 || p.j >= n_superpixels ||
        p.i == p.j)
      fail("InvalidConfig", "bad pair indices");
    double s = p.probs.p_eq + p.probs.p_gt + p.probs.p_lt;
    if (p.probs.p_eq < 0 || p.probs.p_gt < 0 || p.probs.p_lt < 0 ||
        std::abs(s - 1.0) > 1e-5)
      fail("InvalidConfig", "pair probabilities must be a distribution");
  }
  for (int o = 0; o < 3; ++o)
    if (!(priors.var[o] > 0) || priors.mu[o] < 0)
      fail("InvalidConfig", "bad slack priors");
}

SlackPriors slack_priors_from_data(const std::vector<LabeledDepthPair>& pairs) {
  std::array<std::vector<double>, 3> samples;
  for (const auto& p : pairs) {
    if (p.x_i <= 0 || p.x_j <= 0) fail("NonPositiveDepth", "slack priors");
    samples[int(p.label)].push_back(std::abs(std::log(p.x_i) - std::log(p.x_j)));
  }
  SlackPriors out;
  for (int o = 0; o < 3; ++o) {
    const auto& s = samples[o];
    if (s.size() < 2)
      fail("ClassUnderpopulated", "class " + std::to_string(o) + " has " +
                                      std::to_string(s.size()) + " samples");
    double mean = 0;
    for (double v : s) mean += v;
    mean /= double(s.size());
    double var = 0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= double(s.size() - 1);
    out.mu[o] = mean;
    out.var[o] = std::max(var, 1e-4);
  }
  return out;
}

std::vector<SmoothEdge> smoothness_weights(const Image& image,
                                           const SuperpixelMap& map,
                                           const std::vector<ScoredPair>& probs,
                                           double k1, double k2, double rho) {
  const int S = map.n_segments;
  std::vector<std::array<double, 3>> mean_rgb(S, {0, 0, 0});
  for (int r = 0; r < map.height; ++r)
    for (int c = 0; c < map.width; ++c) {
      int s = map.label_at(r, c);
      for (int ch = 0; ch < 3; ++ch)
        mean_rgb[s][ch] += image.at(r, c, std::min(ch, image.channels - 1));
    }
  for (int s = 0; s < S; ++s)
    for (int ch = 0; ch < 3; ++ch) mean_rgb[s][ch] /= map.sizes[s];

  std::map<std::pair<int, int>, double> p_eq;
  for (const auto& p : probs)
    p_eq[{std::min(p.i, p.j), std::max(p.i, p.j)}] = p.probs.p_eq;

  AdjacencyGraph g = build_adjacency(map);
  std::vector<SmoothEdge> out;
  for (int i = 0; i < S; ++i)
    for (int j : g.neighbors[i]) {
      if (j <= i) continue;
      double d2 = 0;
      for (int ch = 0; ch < 3; ++ch) {
        double d = mean_rgb[i][ch] - mean_rgb[j][ch];
        d2 += d * d;
      }
      auto it = p_eq.find({i, j});
      double w = k1 * std::exp(-d2 / rho) + k2 * (it != p_eq.end() ? it->second : 0.0);
      out.push_back({i, j, w});
    }
  return out;
}

namespace {

// Shared accumulation for value and gradient; grads may be null.
double energy_impl(const EnergySpec& spec, const std::vector<double>& y,
                   const std::vector<std::array<double, 3>>& slack,
                   std::vector<double>* gy,
                   std::vector<std::array<double, 3>>* gs) {
  double e = 0;
  for (size_t k = 0; k < spec.pairs.size(); ++k) {
    const auto& p = spec.pairs[k];
    double d = y[p.i] - y[p.j];
    double sgn = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);  // subgradient 0 at 0
    const double res[3] = {std::abs(d) - slack[k][0], d - slack[k][1],
                           -d - slack[k][2]};
    const double dd[3] = {sgn, 1.0, -1.0};
    for (int o = 0; o < 3; ++o) {
      double w = p.probs[o];
      e += w * res[o] * res[o];
      if (gy) {
        double g = 2.0 * w * res[o];
        (*gy)[p.i] += g * dd[o];
        (*gy)[p.j] -= g * dd[o];
        (*gs)[k][o] += -g;
      }
      // R(eps) runs over all three slacks of every pair.
      double r = slack[k][o] - spec.priors.mu[o];
      e += r * r / spec.priors.var[o];
      if (gs) (*gs)[k][o] += 2.0 * r / spec.priors.var[o];
    }
  }
  for (const auto& edge : spec.edges) {
    double d = y[edge.i] - y[edge.j];
    e += edge.weight * d * d;
    if (gy) {
      (*gy)[edge.i] += 2.0 * edge.weight * d;
      (*gy)[edge.j] -= 2.0 * edge.weight * d;
    }
  }
  if (!std::isfinite(e)) fail("NonFiniteInput", "energy");
  return e;
}

}  // namespace

double energy(const EnergySpec& spec, const std::vector<double>& y,
              const std::vector<std::array<double, 3>>& slack) {
  if (int(y.size()) != spec.n_superpixels || slack.size() != spec.pairs.size())
    fail("LengthMismatch", "energy arguments");
  return energy_impl(spec, y, slack, nullptr, nullptr);
}

void energy_grad(const EnergySpec& spec, const std::vector<double>& y,
                 const std::vector<std::array<double, 3>>& slack,
                 std::vector<double>& gy,
                 std::vector<std::array<double, 3>>& gslack) {
  gy.assign(y.size(), 0.0);
  gslack.assign(slack.size(), {0, 0, 0});
  energy_impl(spec, y, slack, &gy, &gslack);
}

Solution solve(const EnergySpec& spec, double tol, int max_iter) {
  spec.validate();
  const double ylo = std::log(spec.lo), yhi = std::log(spec.hi);

  Solution sol;
  sol.y.assign(spec.n_superpixels, 0.5 * (ylo + yhi));
  sol.slack.assign(spec.pairs.size(), {0, 0, 0});
  for (size_t k = 0; k < spec.pairs.size(); ++k)
    for (int o = 0; o < 3; ++o)
      sol.slack[k][o] = std::max(spec.priors.mu[o], kSlackMin);

  double e = energy_impl(spec, sol.y, sol.slack, nullptr, nullptr);
  sol.trace.push_back(e);

  std::vector<double> gy, y_new(sol.y.size());
  std::vector<std::array<double, 3>> gs, s_new(sol.slack.size());
  double step = 1.0;
  int small_drops = 0;

  for (int it = 0; it < max_iter; ++it) {
    energy_grad(spec, sol.y, sol.slack, gy, gs);

    bool accepted = false;
    double e_new = e;
    while (step > 1e-18) {
      for (size_t i = 0; i < sol.y.size(); ++i)
        y_new[i] = std::clamp(sol.y[i] - step * gy[i], ylo, yhi);
      for (size_t k = 0; k < sol.slack.size(); ++k)
        for (int o = 0; o < 3; ++o)
          s_new[k][o] = std::max(sol.slack[k][o] - step * gs[k][o], kSlackMin);

      // Armijo on the projected step.
      double decrease_bound = 0;
      for (size_t i = 0; i < sol.y.size(); ++i)
        decrease_bound += gy[i] * (sol.y[i] - y_new[i]);
      for (size_t k = 0; k < sol.slack.size(); ++k)
        for (int o = 0; o < 3; ++o)
          decrease_bound += gs[k][o] * (sol.slack[k][o] - s_new[k][o]);

      e_new = energy_impl(spec, y_new, s_new, nullptr, nullptr);
      if (e_new <= e - 1e-4 * decrease_bound && e_new <= e) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      sol.energy = e;
      sol.iterations = it;
      sol.converged = false;  // line search stalled; best iterate kept
      return sol;
    }

    sol.y.swap(y_new);
    sol.slack.swap(s_new);
    sol.iterations = it + 1;
    sol.trace.push_back(e_new);
    double drop = e - e_new;
    e = e_new;
    step = std::min(step * 2.0, 1e6);
    // The accepted drop oscillates with the step-size doubling, so a
    // single small drop is not proof of stationarity; require several
    // consecutive ones.
    if (drop <= tol * std::max(1.0, std::abs(e))) {
      if (++small_drops >= 8) {
        sol.converged = true;
        break;
      }
    } else {
      small_drops = 0;
    }
  }
  sol.energy = e;
  return sol;
}

DepthMap floodfill(const SuperpixelMap& map, const std::vector<double>& y) {
  if (int(y.size()) != map.n_segments) fail("LengthMismatch", "floodfill");
  DepthMap d;
  d.width = map.width;
  d.height = map.height;
  size_t n = size_t(map.width) * map.height;
  d.data.resize(n);
  d.valid.assign(n, 1);
  for (size_t p = 0; p < n; ++p) d.data[p] = float(std::exp(y[map.labels[p]]));
  return d;
}

std::vector<ScoredPair> load_probs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("MissingFile", path);
  std::vector<ScoredPair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind("i,j,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> f;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 5) fail("CorruptHeader", path + ": bad probs row");
    ScoredPair p;
    p.i = std::stoi(f[0]);
    p.j = std::stoi(f[1]);
    p.probs.p_eq = std::stod(f[2]);
    p.probs.p_gt = std::stod(f[3]);
    p.probs.p_lt = std::stod(f[4]);
    out.push_back(p);
  }
  return out;
}

void write_probs_csv(const std::vector<ScoredPair>& probs, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("IoFailure", path);
  out << "i,j,p_eq,p_gt,p_lt\n";
  out.precision(9);
  for (const auto& p : probs)
    out << p.i << "," << p.j << "," << p.probs.p_eq << "," << p.probs.p_gt << ","
        << p.probs.p_lt << "\n";
}

SlackPriors load_priors_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("MissingFile", path);
  nlohmann::json j;
  in >> j;
  SlackPriors p;
  for (int o = 0; o < 3; ++o) {
    p.mu[o] = j.at("mu")[o].get<double>();
    p.var[o] = j.at("var")[o].get<double>();
  }
  return p;
}

void write_priors_json(const SlackPriors& priors, const std::string& path) {
  nlohmann::json j;
  j["mu"] = priors.mu;
  j["var"] = priors.var;
  std::ofstream out(path);
  if (!out) fail("IoFailure", path);
  out << j.dump(2) << "\n";
}

}  // namespace ordepth
