#include "ordepth/metrics.hpp"

#include <fstream>

#include "ordepth/error.hpp"

namespace ordepth {

Ordinal classify_pair(double x_i, double x_j, double delta) {
  if (x_i <= 0 || x_j <= 0) fail("NonPositiveDepth", "classify_pair");
  return label_from_depths(x_i, x_j, delta);
}

EvalReport wkdr(const std::vector<std::pair<double, double>>& predicted_depths,
                const std::vector<Ordinal>& labels, double delta, bool diw_mode) {
  if (predicted_depths.size() != labels.size())
    fail("LengthMismatch", "wkdr inputs");
  if (labels.empty()) fail("EmptyPairSet", "wkdr");

  size_t bad = 0, bad_eq = 0, bad_neq = 0, n_eq = 0, n_neq = 0;
  for (size_t k = 0; k < labels.size(); ++k) {
    Ordinal pred = classify_pair(predicted_depths[k].first,
                                 predicted_depths[k].second, delta);
    bool disagree = pred != labels[k];
    if (labels[k] == Ordinal::EQ) {
      if (diw_mode) fail("InvalidConfig", "EQ label in DIW mode");
      ++n_eq;
      if (disagree) ++bad_eq;
    } else {
      ++n_neq;
      if (disagree) ++bad_neq;
    }
    if (disagree) ++bad;
  }

  EvalReport rep;
  rep.n_pairs = labels.size();
  rep.n_eq = n_eq;
  rep.n_neq = n_neq;
  rep.wkdr = double(bad) / labels.size();
  if (n_eq > 0) rep.wkdr_eq = double(bad_eq) / n_eq;
  if (n_neq > 0) rep.wkdr_neq = double(bad_neq) / n_neq;
  return rep;
}

EvalReport wkdr_on_map(const DepthMap& depth, const std::vector<PairSample>& pairs,
                       double delta, bool diw_mode) {
  std::vector<std::pair<double, double>> pred;
  std::vector<Ordinal> labels;
  pred.reserve(pairs.size());
  for (const auto& p : pairs) {
    pred.emplace_back(depth.at(p.r_i, p.c_i), depth.at(p.r_j, p.c_j));
    labels.push_back(p.label);
  }
  return wkdr(pred, labels, delta, diw_mode);
}

double accuracy(const std::vector<Ordinal>& predicted,
                const std::vector<Ordinal>& labels) {
  if (predicted.size() != labels.size()) fail("LengthMismatch", "accuracy");
  if (labels.empty()) fail("EmptyPairSet", "accuracy");
  size_t hit = 0;
  for (size_t k = 0; k < labels.size(); ++k)
    if (predicted[k] == labels[k]) ++hit;
  return double(hit) / labels.size();
}

void write_report_csv(const EvalReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("IoFailure", path);
  auto line = [&](const char* name, const std::optional<double>& v, size_t n) {
    out << name << ",";
    if (v)
      out << *v;
    else
      out << "na";
    out << "," << n << "\n";
  };
  out << "metric,value,count\n";
  line("wkdr", rep.wkdr, rep.n_pairs);
  line("wkdr_eq", rep.wkdr_eq, rep.n_eq);
  line("wkdr_neq", rep.wkdr_neq, rep.n_neq);
  if (rep.accuracy) line("accuracy", rep.accuracy, rep.n_pairs);
}

}  // namespace ordepth
