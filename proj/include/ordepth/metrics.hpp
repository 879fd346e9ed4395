#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ordepth/image.hpp"
#include "ordepth/superpixel.hpp"

namespace ordepth {

// Rates restricted to an empty pair subset are not-applicable, never 0.
struct EvalReport {
  std::optional<double> wkdr;
  std::optional<double> wkdr_eq;
  std::optional<double> wkdr_neq;
  size_t n_pairs = 0;
  size_t n_eq = 0;   // ground-truth EQ pairs
  size_t n_neq = 0;  // ground-truth GT/LT pairs
  std::optional<double> accuracy;  // set by the ordinal-accuracy path
};

// GT if x_i/x_j > 1+delta, LT if x_j/x_i > 1+delta, else EQ.
Ordinal classify_pair(double x_i, double x_j, double delta);

// Disagreement rates from predicted per-point depths against labeled
// pairs. In DIW mode (no EQ class in the annotations) a pair whose
// predicted ratio falls inside the tolerance band still counts as a
// disagreement against its GT/LT label.
EvalReport wkdr(const std::vector<std::pair<double, double>>& predicted_depths,
                const std::vector<Ordinal>& labels, double delta,
                bool diw_mode = false);

// Depth lookup for a pair's points on a reconstructed map is the value
// at each point's pixel.
EvalReport wkdr_on_map(const DepthMap& depth, const std::vector<PairSample>& pairs,
                       double delta, bool diw_mode = false);

double accuracy(const std::vector<Ordinal>& predicted,
                const std::vector<Ordinal>& labels);

// Report CSV: `metric,value,count`; not-applicable rates print "na".
void write_report_csv(const EvalReport& rep, const std::string& path);

}  // namespace ordepth
