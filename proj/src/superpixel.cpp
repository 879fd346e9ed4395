#include "ordepth/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "ordepth/error.hpp"
#include "ordepth/rng.hpp"

namespace ordepth {

char ordinal_char(Ordinal o) {
  switch (o) {
    case Ordinal::EQ: return 'E';
    case Ordinal::GT: return 'G';
    default: return 'L';
  }
}

Ordinal ordinal_from_char(char c) {
  switch (c) {
    case 'E': return Ordinal::EQ;
    case 'G': return Ordinal::GT;
    case 'L': return Ordinal::LT;
    default: fail("CorruptHeader", std::string("bad ordinal label '") + c + "'");
  }
}

namespace {

struct Cluster {
  double r = 0, c = 0;
  double color[3] = {0, 0, 0};
};

void cluster_color(const Image& img, int r, int c, double out[3]) {
  for (int ch = 0; ch < 3; ++ch)
    out[ch] = img.at(r, c, std::min(ch, img.channels - 1));
}

// Reassign orphan (non-largest) 4-connected components of each label to
// the neighboring label with the longest shared boundary.
void enforce_connectivity(std::vector<int>& labels, int W, int H) {
  const size_t n = size_t(W) * H;
  std::vector<int> comp(n, -1);
  std::vector<int> comp_label;
  std::vector<int> comp_size;
  std::deque<size_t> stack;
  for (size_t start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    int id = int(comp_label.size());
    comp_label.push_back(labels[start]);
    comp_size.push_back(0);
    stack.push_back(start);
    comp[start] = id;
    while (!stack.empty()) {
      size_t p = stack.back();
      stack.pop_back();
      ++comp_size[id];
      int r = int(p) / W, c = int(p) % W;
      const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        int rr = r + dr[k], cc = c + dc[k];
        if (rr < 0 || rr >= H || cc < 0 || cc >= W) continue;
        size_t q = size_t(rr) * W + cc;
        if (comp[q] < 0 && labels[q] == labels[start]) {
          comp[q] = id;
          stack.push_back(q);
        }
      }
    }
  }

  // Largest component per label survives; ties go to the earlier one.
  std::map<int, int> keeper;  // label -> component id
  for (int id = 0; id < int(comp_label.size()); ++id) {
    auto it = keeper.find(comp_label[id]);
    if (it == keeper.end() || comp_size[id] > comp_size[it->second])
      keeper[comp_label[id]] = id;
  }
  std::vector<bool> resolved(comp_label.size());
  for (int id = 0; id < int(comp_label.size()); ++id)
    resolved[id] = (keeper[comp_label[id]] == id);

  bool progress = true;
  while (progress) {
    progress = false;
    for (int id = 0; id < int(comp_label.size()); ++id) {
      if (resolved[id]) continue;
      std::map<int, int> contact;  // neighbor label -> boundary count
      for (size_t p = 0; p < n; ++p) {
        if (comp[p] != id) continue;
        int r = int(p) / W, c = int(p) % W;
        const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          int rr = r + dr[k], cc = c + dc[k];
          if (rr < 0 || rr >= H || cc < 0 || cc >= W) continue;
          size_t q = size_t(rr) * W + cc;
          if (comp[q] != id && resolved[comp[q]]) ++contact[comp_label[comp[q]]];
        }
      }
      if (contact.empty()) continue;
      int best_label = contact.begin()->first, best = 0;
      for (auto& [lab, cnt] : contact)
        if (cnt > best) { best = cnt; best_label = lab; }
      // Absorb: the component takes the winning label and becomes part
      // of that label's resolved region.
      int target = keeper[best_label];
      for (size_t p = 0; p < n; ++p)
        if (comp[p] == id) {
          labels[p] = best_label;
          comp[p] = target;
        }
      resolved[id] = true;
      progress = true;
    }
  }
}

}  // namespace

SuperpixelMap slic_segment(const Image& image, int n_segments,
                           double compactness, int iterations) {
  const int W = image.width, H = image.height;
  if (W <= 0 || H <= 0 || image.data.empty()) fail("EmptyImage", "slic_segment");
  if (n_segments < 1) fail("TooManySegments", "n_segments must be >= 1");
  if (n_segments > W * H)
    fail("TooManySegments", "n_segments exceeds pixel count");
  if (compactness <= 0 || iterations < 1)
    fail("InvalidConfig", "compactness > 0 and iterations >= 1 required");

  const double G = std::sqrt(double(W) * H / n_segments);

  // Seed grid: nx*ny <= n_segments, biased toward the wider axis.
  int nx = std::max(1, int(std::ceil(std::sqrt(double(n_segments) * W / H))));
  nx = std::min(nx, n_segments);
  int ny = std::max(1, n_segments / nx);

  std::vector<Cluster> clusters;
  clusters.reserve(size_t(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Cluster cl;
      cl.r = (j + 0.5) * H / ny;
      cl.c = (i + 0.5) * W / nx;
      int rr = std::min(H - 1, int(cl.r));
      int cc = std::min(W - 1, int(cl.c));
      cluster_color(image, rr, cc, cl.color);
      clusters.push_back(cl);
    }

  const size_t n = size_t(W) * H;
  std::vector<int> labels(n, -1);
  std::vector<double> best_d(n);
  const double window = 2.0 * G;

  for (int it = 0; it < iterations; ++it) {
    std::fill(best_d.begin(), best_d.end(), std::numeric_limits<double>::infinity());
    std::fill(labels.begin(), labels.end(), -1);
    for (int k = 0; k < int(clusters.size()); ++k) {
      const Cluster& cl = clusters[k];
      int r0 = std::max(0, int(std::floor(cl.r - window)));
      int r1 = std::min(H - 1, int(std::ceil(cl.r + window)));
      int c0 = std::max(0, int(std::floor(cl.c - window)));
      int c1 = std::min(W - 1, int(std::ceil(cl.c + window)));
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
          double pc[3];
          cluster_color(image, r, c, pc);
          double dc2 = 0;
          for (int ch = 0; ch < 3; ++ch) {
            double d = pc[ch] - cl.color[ch];
            dc2 += d * d;
          }
              // Pixel centers at +0.5 so even grid intervals split without ties.
          double ds2 = (r + 0.5 - cl.r) * (r + 0.5 - cl.r) +
                       (c + 0.5 - cl.c) * (c + 0.5 - cl.c);
          double D = dc2 + ds2 / (G * G) * compactness * compactness;
          size_t p = size_t(r) * W + c;
          if (D < best_d[p]) {
            best_d[p] = D;
            labels[p] = k;
          }
        }
    }
    // Any pixel outside every search window: nearest cluster spatially.
    for (size_t p = 0; p < n; ++p) {
      if (labels[p] >= 0) continue;
      int r = int(p) / W, c = int(p) % W;
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < int(clusters.size()); ++k) {
        double ds2 = (r + 0.5 - clusters[k].r) * (r + 0.5 - clusters[k].r) +
                     (c + 0.5 - clusters[k].c) * (c + 0.5 - clusters[k].c);
        if (ds2 < best) {
          best = ds2;
          labels[p] = k;
        }
      }
    }
    // Update step.
    std::vector<double> sr(clusters.size()), sc(clusters.size()),
        scol(clusters.size() * 3);
    std::vector<int> cnt(clusters.size());
    for (size_t p = 0; p < n; ++p) {
      int k = labels[p];
      int r = int(p) / W, c = int(p) % W;
      sr[k] += r + 0.5;
      sc[k] += c + 0.5;
      double pc[3];
      cluster_color(image, r, c, pc);
      for (int ch = 0; ch < 3; ++ch) scol[k * 3 + ch] += pc[ch];
      ++cnt[k];
    }
    for (int k = 0; k < int(clusters.size()); ++k) {
      if (cnt[k] == 0) continue;
      clusters[k].r = sr[k] / cnt[k];
      clusters[k].c = sc[k] / cnt[k];
      for (int ch = 0; ch < 3; ++ch) clusters[k].color[ch] = scol[k * 3 + ch] / cnt[k];
    }
  }

  enforce_connectivity(labels, W, H);

  // Compact labels in row-major first-occurrence order.
  std::vector<int> remap(clusters.size(), -1);
  int next = 0;
  for (size_t p = 0; p < n; ++p) {
    if (remap[labels[p]] < 0) remap[labels[p]] = next++;
    labels[p] = remap[labels[p]];
  }

  SuperpixelMap map;
  map.width = W;
  map.height = H;
  map.n_segments = next;
  map.labels = std::move(labels);
  map.grid_interval = G;
  map.centroids.assign(next, {0, 0});
  map.sizes.assign(next, 0);
  for (size_t p = 0; p < n; ++p) {
    int s = map.labels[p];
    map.centroids[s].first += int(p) / W;
    map.centroids[s].second += int(p) % W;
    ++map.sizes[s];
  }
  for (int s = 0; s < next; ++s) {
    map.centroids[s].first /= map.sizes[s];
    map.centroids[s].second /= map.sizes[s];
  }
  return map;
}

AdjacencyGraph build_adjacency(const SuperpixelMap& map) {
  AdjacencyGraph g;
  g.n_nodes = map.n_segments;
  g.neighbors.assign(map.n_segments, {});
  auto add = [&](int a, int b) {
    if (a == b) return;
    auto& v = g.neighbors[a];
    if (std::find(v.begin(), v.end(), b) == v.end()) v.push_back(b);
  };
  for (int r = 0; r < map.height; ++r)
    for (int c = 0; c < map.width; ++c) {
      int s = map.label_at(r, c);
      if (c + 1 < map.width) {
        add(s, map.label_at(r, c + 1));
        add(map.label_at(r, c + 1), s);
      }
      if (r + 1 < map.height) {
        add(s, map.label_at(r + 1, c));
        add(map.label_at(r + 1, c), s);
      }
    }
  for (auto& v : g.neighbors) std::sort(v.begin(), v.end());
  return g;
}

std::vector<std::pair<int, int>> second_order_pairs(const AdjacencyGraph& graph) {
  std::vector<std::pair<int, int>> out;
  std::vector<char> seen(graph.n_nodes);
  for (int i = 0; i < graph.n_nodes; ++i) {
    std::fill(seen.begin(), seen.end(), 0);
    seen[i] = 1;
    for (int a : graph.neighbors[i]) {
      if (!seen[a] && a > i) out.emplace_back(i, a);
      seen[a] = 1;
    }
    for (int a : graph.neighbors[i])
      for (int b : graph.neighbors[a])
        if (!seen[b]) {
          if (b > i) out.emplace_back(i, b);
          seen[b] = 1;
        }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Ordinal label_from_depths(double x_i, double x_j, double delta) {
  if (x_i / x_j > 1.0 + delta) return Ordinal::GT;
  if (x_j / x_i > 1.0 + delta) return Ordinal::LT;
  return Ordinal::EQ;
}

double depth_at_nearest_valid(const DepthMap& depth, int r, int c, double max_radius) {
  r = std::clamp(r, 0, depth.height - 1);
  c = std::clamp(c, 0, depth.width - 1);
  if (depth.is_valid(r, c)) return depth.at(r, c);
  int rad = int(std::floor(max_radius));
  double best_d2 = std::numeric_limits<double>::infinity();
  double best = 0;
  for (int dr = -rad; dr <= rad; ++dr)
    for (int dc = -rad; dc <= rad; ++dc) {
      int rr = r + dr, cc = c + dc;
      if (rr < 0 || rr >= depth.height || cc < 0 || cc >= depth.width) continue;
      if (!depth.is_valid(rr, cc)) continue;
      double d2 = double(dr) * dr + double(dc) * dc;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = depth.at(rr, cc);
      }
    }
  if (!std::isfinite(best_d2))
    fail("NoValidDepthWithinRadius",
         "(" + std::to_string(r) + "," + std::to_string(c) + ")");
  return best;
}

Ordinal label_pair(const DepthMap& depth, int r_i, int c_i, int r_j, int c_j,
                   double delta, double max_radius) {
  double x_i = depth_at_nearest_valid(depth, r_i, c_i, max_radius);
  double x_j = depth_at_nearest_valid(depth, r_j, c_j, max_radius);
  return label_from_depths(x_i, x_j, delta);
}

std::vector<PairSample> sample_pairs(const std::vector<PairSample>& candidates,
                                     int n_per_image, uint64_t seed) {
  if (n_per_image < 1) fail("InvalidConfig", "n_per_image must be >= 1");
  std::vector<PairSample> out;
  if (int(candidates.size()) <= n_per_image) {
    out = candidates;
  } else {
    std::vector<size_t> idx(candidates.size());
    for (size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    Rng rng(seed);
    rng.shuffle(idx);
    for (int k = 0; k < n_per_image; ++k) out.push_back(candidates[idx[k]]);
  }
  std::sort(out.begin(), out.end(), [](const PairSample& a, const PairSample& b) {
    return std::tie(a.i, a.j, a.r_i, a.c_i, a.r_j, a.c_j) <
           std::tie(b.i, b.j, b.r_i, b.c_i, b.r_j, b.c_j);
  });
  return out;
}

std::vector<PairSample> load_pairs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("MissingFile", path);
  std::vector<PairSample> out;
  std::string line;
  bool first = true;
  bool diw = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("i,j,", 0) == 0) continue;        // standard header
      if (line.rfind("r1,", 0) == 0) { diw = true; continue; }  // DIW header
      // Headerless DIW files: 5 comma-separated fields.
      diw = std::count(line.begin(), line.end(), ',') == 4;
    }
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> f;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    PairSample p;
    if (diw) {
      if (f.size() != 5) fail("CorruptHeader", path + ": bad DIW row");
      p.i = p.j = -1;
      p.r_i = std::stoi(f[0]);
      p.c_i = std::stoi(f[1]);
      p.r_j = std::stoi(f[2]);
      p.c_j = std::stoi(f[3]);
      p.label = ordinal_from_char(f[4][0]);
      if (p.label == Ordinal::EQ)
        fail("CorruptHeader", path + ": DIW labels must be G or L");
      p.annotated = true;
    } else {
      if (f.size() != 7) fail("CorruptHeader", path + ": bad pairs row");
      p.i = std::stoi(f[0]);
      p.j = std::stoi(f[1]);
      p.r_i = std::stoi(f[2]);
      p.c_i = std::stoi(f[3]);
      p.r_j = std::stoi(f[4]);
      p.c_j = std::stoi(f[5]);
      p.label = ordinal_from_char(f[6][0]);
    }
    out.push_back(p);
  }
  return out;
}

void write_pairs_csv(const std::vector<PairSample>& pairs, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("IoFailure", path);
  out << "i,j,r_i,c_i,r_j,c_j,label\n";
  for (const auto& p : pairs)
    out << p.i << "," << p.j << "," << p.r_i << "," << p.c_i << "," << p.r_j
        << "," << p.c_j << "," << ordinal_char(p.label) << "\n";
}

}  // namespace ordepth
