#pragma once

#include <array>
#include <string>
#include <vector>

#include "ordepth/image.hpp"
#include "ordepth/superpixel.hpp"

namespace ordepth {

// Per-pair three-way probabilities; indices follow the EQ/GT/LT order.
struct OrdinalProbs {
  double p_eq = 0, p_gt = 0, p_lt = 0;

  double operator[](int o) const { return o == 0 ? p_eq : (o == 1 ? p_gt : p_lt); }
};

// Gaussian priors on the per-class slack |log x_i - log x_j|.
struct SlackPriors {
  std::array<double, 3> mu = {0, 0, 0};
  std::array<double, 3> var = {1, 1, 1};
};

struct ScoredPair {
  int i = 0, j = 0;
  OrdinalProbs probs;
};

struct SmoothEdge {
  int i = 0, j = 0;
  double weight = 0;
};

// The assembled objective: per-pair data terms, smoothness edges
// between adjacent superpixels, slack priors and box bounds on depth.
struct EnergySpec {
  int n_superpixels = 0;
  std::vector<ScoredPair> pairs;
  std::vector<SmoothEdge> edges;
  SlackPriors priors;
  double lo = 0.1, hi = 10.0;  // depth bounds, 0 < lo < hi
  double k1 = 0.5, k2 = 0.5, rho = 0.1;

  void validate() const;
};

struct Solution {
  std::vector<double> y;                       // per-superpixel log depth
  std::vector<std::array<double, 3>> slack;    // per pair, EQ/GT/LT
  double energy = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // energy after every accepted step
};

constexpr double kSlackMin = 1e-6;

struct LabeledDepthPair {
  Ordinal label;
  double x_i, x_j;  // ground-truth depths, > 0
};

// Per-class mean / unbiased variance of |log x_i - log x_j| over the
// training pairs; variance floored at 1e-4. Needs >= 2 samples per class.
SlackPriors slack_priors_from_data(const std::vector<LabeledDepthPair>& pairs);

// w_ij = k1*exp(-||I_i - I_j||^2 / rho) + k2*p_eq(i,j) for adjacent
// (i,j); p_eq is 0 when the pair was never scored. I_i is the mean RGB
// of superpixel i.
std::vector<SmoothEdge> smoothness_weights(const Image& image,
                                           const SuperpixelMap& map,
                                           const std::vector<ScoredPair>& probs,
                                           double k1, double k2, double rho);

// E = sum_pairs sum_o w_o*theta_o + sum_edges w_ij*(y_i - y_j)^2 + R(eps)
// with theta_EQ = (|y_i-y_j| - e)^2, theta_GT = (y_i-y_j - e)^2,
// theta_LT = (y_j-y_i - e)^2 and R = sum (e_o - mu_o)^2 / var_o.
double energy(const EnergySpec& spec, const std::vector<double>& y,
              const std::vector<std::array<double, 3>>& slack);

void energy_grad(const EnergySpec& spec, const std::vector<double>& y,
                 const std::vector<std::array<double, 3>>& slack,
                 std::vector<double>& gy,
                 std::vector<std::array<double, 3>>& gslack);

// Projected gradient descent with Armijo backtracking. y starts at the
// midpoint of [log lo, log hi], slack at max(mu_o, kSlackMin). Every
// iterate is feasible and the energy trace is non-increasing.
Solution solve(const EnergySpec& spec, double tol = 1e-8, int max_iter = 20000);

// Pixel depth = exp(y[label(pixel)]).
DepthMap floodfill(const SuperpixelMap& map, const std::vector<double>& y);

// CSV `i,j,p_eq,p_gt,p_lt`.
std::vector<ScoredPair> load_probs_csv(const std::string& path);
void write_probs_csv(const std::vector<ScoredPair>& probs, const std::string& path);

SlackPriors load_priors_json(const std::string& path);
void write_priors_json(const SlackPriors& priors, const std::string& path);

}  // namespace ordepth
