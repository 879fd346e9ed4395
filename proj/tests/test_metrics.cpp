#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include "doctest.h"
#include "ordepth/error.hpp"
#include "ordepth/metrics.hpp"
#include "ordepth/rng.hpp"

using namespace ordepth;

namespace {

// Independent brute-force reimplementation of the disagreement rates.
struct BruteRates {
  std::optional<double> all, eq, neq;
};

BruteRates brute_wkdr(const std::vector<std::pair<double, double>>& d,
                      const std::vector<Ordinal>& labels, double delta) {
  size_t bad = 0, bad_eq = 0, bad_neq = 0, n_eq = 0, n_neq = 0;
  for (size_t k = 0; k < d.size(); ++k) {
    Ordinal pred;
    if (d[k].first / d[k].second > 1 + delta) pred = Ordinal::GT;
    else if (d[k].second / d[k].first > 1 + delta) pred = Ordinal::LT;
    else pred = Ordinal::EQ;
    bool dis = pred != labels[k];
    if (dis) ++bad;
    if (labels[k] == Ordinal::EQ) {
      ++n_eq;
      if (dis) ++bad_eq;
    } else {
      ++n_neq;
      if (dis) ++bad_neq;
    }
  }
  BruteRates r;
  r.all = double(bad) / double(d.size());
  if (n_eq) r.eq = double(bad_eq) / double(n_eq);
  if (n_neq) r.neq = double(bad_neq) / double(n_neq);
  return r;
}

}  // namespace

TEST_CASE("pairwise classification rule") {
  CHECK(classify_pair(1.03, 1.00, 0.02) == Ordinal::GT);
  CHECK(classify_pair(1.00, 1.00, 0.02) == Ordinal::EQ);
  CHECK(classify_pair(1.00, 1.03, 0.02) == Ordinal::LT);
  CHECK(classify_pair(1.01, 1.00, 0.02) == Ordinal::EQ);
  CHECK_THROWS_AS(classify_pair(0.0, 1.0, 0.02), Error);
  CHECK_THROWS_AS(classify_pair(1.0, -2.0, 0.02), Error);
}

TEST_CASE("perfect predictions give zero rates") {
  std::vector<std::pair<double, double>> d{{2.0, 1.0}, {1.0, 1.0}, {1.0, 2.0}};
  std::vector<Ordinal> l{Ordinal::GT, Ordinal::EQ, Ordinal::LT};
  EvalReport r = wkdr(d, l, 0.02);
  CHECK(*r.wkdr == 0.0);
  CHECK(*r.wkdr_eq == 0.0);
  CHECK(*r.wkdr_neq == 0.0);
  CHECK(r.n_pairs == 3);
  CHECK(r.n_eq == 1);
  CHECK(r.n_neq == 2);
}

TEST_CASE("one of four disagreements gives a quarter") {
  std::vector<std::pair<double, double>> d{{2, 1}, {2, 1}, {2, 1}, {1, 1}};
  std::vector<Ordinal> l(4, Ordinal::GT);
  EvalReport r = wkdr(d, l, 0.02);
  CHECK(*r.wkdr == doctest::Approx(0.25));
}

TEST_CASE("ratio inside the tolerance band disagrees with an unequal label") {
  std::vector<std::pair<double, double>> d{{1.01, 1.00}};
  EvalReport r = wkdr(d, {Ordinal::GT}, 0.02);
  CHECK(*r.wkdr == 1.0);
  CHECK(*r.wkdr_neq == 1.0);
  CHECK_FALSE(r.wkdr_eq.has_value());  // no EQ pairs: not-applicable, never 0
}

TEST_CASE("empty pair set is rejected") {
  CHECK_THROWS_AS(wkdr({}, {}, 0.02), Error);
}

TEST_CASE("accuracy") {
  std::vector<Ordinal> a{Ordinal::EQ, Ordinal::GT, Ordinal::LT, Ordinal::GT};
  CHECK(accuracy(a, a) == 1.0);
  std::vector<Ordinal> wrong{Ordinal::GT, Ordinal::LT, Ordinal::EQ, Ordinal::EQ};
  CHECK(accuracy(wrong, a) == 0.0);
  std::vector<Ordinal> mixed{Ordinal::EQ, Ordinal::GT, Ordinal::LT, Ordinal::EQ};
  CHECK(accuracy(mixed, a) == doctest::Approx(0.75));
  CHECK_THROWS_AS(accuracy({Ordinal::EQ}, a), Error);
}

TEST_CASE("matches the brute-force oracle on random pair sets") {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    size_t n = 1 + rng.uniform_int(40);
    std::vector<std::pair<double, double>> d;
    std::vector<Ordinal> l;
    for (size_t k = 0; k < n; ++k) {
      d.push_back({rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)});
      l.push_back(Ordinal(rng.uniform_int(3)));
    }
    EvalReport r = wkdr(d, l, 0.02);
    BruteRates b = brute_wkdr(d, l, 0.02);
    CHECK(r.wkdr == b.all);
    CHECK(r.wkdr_eq == b.eq);
    CHECK(r.wkdr_neq == b.neq);
  }
}

TEST_CASE("pair order invariance") {
  Rng rng(78);
  for (int trial = 0; trial < 200; ++trial) {
    double a = rng.uniform(0.5, 3.0), b = rng.uniform(0.5, 3.0);
    Ordinal lab = Ordinal(rng.uniform_int(3));
    Ordinal flipped = lab == Ordinal::GT ? Ordinal::LT
                      : lab == Ordinal::LT ? Ordinal::GT
                                           : Ordinal::EQ;
    EvalReport r1 = wkdr({{a, b}}, {lab}, 0.02);
    EvalReport r2 = wkdr({{b, a}}, {flipped}, 0.02);
    CHECK(r1.wkdr == r2.wkdr);
    CHECK(r1.wkdr_eq == r2.wkdr_eq);
    CHECK(r1.wkdr_neq == r2.wkdr_neq);
  }
}

TEST_CASE("overall rate is the count-weighted average of the class rates") {
  Rng rng(79);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 5 + rng.uniform_int(30);
    std::vector<std::pair<double, double>> d;
    std::vector<Ordinal> l;
    for (size_t k = 0; k < n; ++k) {
      d.push_back({rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)});
      l.push_back(Ordinal(rng.uniform_int(3)));
    }
    EvalReport r = wkdr(d, l, 0.02);
    double weighted = (r.wkdr_eq ? *r.wkdr_eq * double(r.n_eq) : 0.0) +
                      (r.wkdr_neq ? *r.wkdr_neq * double(r.n_neq) : 0.0);
    CHECK(*r.wkdr == doctest::Approx(weighted / double(r.n_pairs)));
  }
}

TEST_CASE("raising delta never moves a pair out of the equality band") {
  Rng rng(80);
  for (int trial = 0; trial < 500; ++trial) {
    double a = rng.uniform(0.5, 3.0), b = rng.uniform(0.5, 3.0);
    if (classify_pair(a, b, 0.02) == Ordinal::EQ)
      CHECK(classify_pair(a, b, 0.10) == Ordinal::EQ);
  }
}

TEST_CASE("two-class mode counts equality-band predictions as disagreements") {
  std::vector<std::pair<double, double>> d{{1.0, 1.0}, {2.0, 1.0}};
  std::vector<Ordinal> l{Ordinal::GT, Ordinal::GT};
  EvalReport r = wkdr(d, l, 0.02, true);
  CHECK(*r.wkdr == doctest::Approx(0.5));
  CHECK(*r.wkdr == *r.wkdr_neq);
  CHECK_THROWS_AS(wkdr(d, {Ordinal::EQ, Ordinal::GT}, 0.02, true), Error);
}

TEST_CASE("depth-map lookup uses the pixel under each point") {
  DepthMap dep;
  dep.width = 4;
  dep.height = 1;
  dep.data = {1.0f, 1.0f, 2.0f, 4.0f};
  dep.valid = {1, 1, 1, 1};
  PairSample p;
  p.r_i = 0;
  p.c_i = 3;
  p.r_j = 0;
  p.c_j = 2;
  p.label = Ordinal::GT;
  EvalReport r = wkdr_on_map(dep, {p}, 0.02);
  CHECK(*r.wkdr == 0.0);
}

TEST_CASE("report csv format") {
  EvalReport r;
  r.wkdr = 0.25;
  r.wkdr_neq = 0.25;
  r.n_pairs = 4;
  r.n_neq = 4;
  r.n_eq = 0;
  auto path = (std::filesystem::temp_directory_path() / "od_report.csv").string();
  write_report_csv(r, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "metric,value,count");
  bool saw_na = false;
  while (std::getline(in, line))
    if (line.find("wkdr_eq,na,") == 0) saw_na = true;
  CHECK(saw_na);
}
