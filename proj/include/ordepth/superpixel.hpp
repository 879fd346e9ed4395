#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ordepth/image.hpp"

namespace ordepth {

// Class index mapping is fixed everywhere: EQ=0, GT=1, LT=2.
// GT means point i is further from the camera than point j.
enum class Ordinal : int { EQ = 0, GT = 1, LT = 2 };

char ordinal_char(Ordinal o);            // 'E' / 'G' / 'L'
Ordinal ordinal_from_char(char c);

struct SuperpixelMap {
  int width = 0;
  int height = 0;
  int n_segments = 0;
  std::vector<int> labels;                        // height*width
  std::vector<std::pair<double, double>> centroids;  // (row, col) per segment
  std::vector<int> sizes;
  double grid_interval = 0.0;  // G = sqrt(W*H/n_requested)

  int label_at(int r, int c) const { return labels[size_t(r) * width + c]; }
};

struct AdjacencyGraph {
  int n_nodes = 0;
  std::vector<std::vector<int>> neighbors;  // sorted, symmetric, no self loops

  size_t n_edges() const {
    size_t e = 0;
    for (const auto& v : neighbors) e += v.size();
    return e / 2;
  }
};

struct PairSample {
  int i = -1, j = -1;           // segment ids; -1 for annotated pairs
  int r_i = 0, c_i = 0;         // point pixel coordinates
  int r_j = 0, c_j = 0;
  Ordinal label = Ordinal::EQ;
  bool annotated = false;       // true when loaded from DIW-style annotations
};

// SLIC-style segmentation. Distance metric
//   D = sqrt(d_color^2 + (d_spatial/G)^2 * compactness^2),
// grid interval G = sqrt(W*H/n_segments). Seeds sit at cell centers of
// an nx*ny grid with nx*ny <= n_segments. Post-processing enforces
// 4-connectivity by reassigning orphan components to the dominant
// neighboring label; output labels are compacted in row-major first
// occurrence order, so S <= n_segments.
SuperpixelMap slic_segment(const Image& image, int n_segments,
                           double compactness = 10.0, int iterations = 10);

// Edge (a,b) iff some pixel labeled a has a 4-neighbor labeled b.
AdjacencyGraph build_adjacency(const SuperpixelMap& map);

// Unordered pairs {i,j}, i<j, with BFS distance in {1,2}.
std::vector<std::pair<int, int>> second_order_pairs(const AdjacencyGraph& graph);

// GT if x_i/x_j > 1+delta, LT if x_j/x_i > 1+delta, else EQ.
Ordinal label_from_depths(double x_i, double x_j, double delta);

// Depth value at (r,c), falling back to the nearest valid pixel within
// max_radius (Chebyshev). Throws NoValidDepthWithinRadius otherwise.
double depth_at_nearest_valid(const DepthMap& depth, int r, int c, double max_radius);

Ordinal label_pair(const DepthMap& depth, int r_i, int c_i, int r_j, int c_j,
                   double delta, double max_radius);

// Uniform subsample without replacement; if fewer candidates than n,
// all are returned. Output is always in canonical (i,j) order.
std::vector<PairSample> sample_pairs(const std::vector<PairSample>& candidates,
                                     int n_per_image, uint64_t seed);

// Pairs CSV: header `i,j,r_i,c_i,r_j,c_j,label`, label in {E,G,L}.
// Also accepts DIW-style annotation CSV `r1,c1,r2,c2,label` with label
// in {G,L}; those rows come back with annotated=true and i=j=-1.
std::vector<PairSample> load_pairs_csv(const std::string& path);
void write_pairs_csv(const std::vector<PairSample>& pairs, const std::string& path);

}  // namespace ordepth
