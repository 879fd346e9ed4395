#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "ordepth/image.hpp"
#include "ordepth/superpixel.hpp"

namespace ordepth {

// Axis-aligned rectangle in continuous pixel coordinates: pixel index i
// spans [i, i+1), so a rect over rows r0..r0+h-1 has span [r0, r0+h).
// Coordinates may be negative / out of image before clamping.
struct Rect {
  double r0 = 0, c0 = 0;
  double h = 0, w = 0;

  double area() const { return h * w; }
  bool contains(const Rect& inner) const {
    return inner.r0 > r0 && inner.c0 > c0 && inner.r0 + inner.h < r0 + h &&
           inner.c0 + inner.w < c0 + w;
  }
};

constexpr int kPatchSize = 16;
constexpr int kScale1Size = 32;
constexpr int kScale2Size = 40;
constexpr int kScale3Size = 48;
constexpr int kMaskSize = 32;

// The six network inputs for one pair. Rasters are planar CHW float,
// 3 channels for the crops, 1 for the masks.
struct ContextBundle {
  std::vector<float> patch1, patch2;    // 3*16*16
  std::vector<float> scale1;            // 3*32*32
  std::vector<float> scale2;            // 3*40*40
  std::vector<float> scale3;            // 3*48*48
  std::vector<float> mask1, mask2;      // 1*32*32, values in {0,1}
  PairSample pair_ref;
};

enum class ContextMode { Standard, Diw };

// 16x16 patch footprint centered on the (rounded) point.
Rect patch_footprint(int r, int c);

// Tight bounding rect of both patch footprints, expanded by pad.
Rect scale1_box(int r_i, int c_i, int r_j, int c_j, double pad = 4.0);

// Concentric expansions by 1/4 and 1/2 of width/height per side,
// giving exact area ratios 2.25x and 4x.
std::pair<Rect, Rect> multiscale_boxes(const Rect& b1);

// DIW rule for points sharing a row or column: three rects spanning the
// segment between the points plus a patch half-width on both ends, with
// thickness 20 / 40 / 60 px centered on the connecting line.
std::array<Rect, 3> collinear_boxes(int r_i, int c_i, int r_j, int c_j);

// Bilinear crop-resize with pixel-center alignment; out-of-bounds
// source pixels use edge replication. Output is planar CHW.
std::vector<float> crop_resize(const Image& image, const Rect& r, int out_h, int out_w);

// 32x32 binary masks: each point's patch footprint mapped through the
// same b1 -> 32x32 transform as the scale-1 crop; clipped but never empty.
std::pair<std::vector<float>, std::vector<float>> location_masks(
    const Rect& b1, int r_i, int c_i, int r_j, int c_j);

ContextBundle build_context(const Image& image, const PairSample& pair,
                            ContextMode mode = ContextMode::Standard);

// Bundle cache: per-image binary of little-endian float32 tensors in
// fixed order (patch1, patch2, scale1, scale2, scale3, mask1, mask2 per
// pair) plus a JSON sidecar listing shapes and pair rows.
void write_bundle_cache(const std::vector<ContextBundle>& bundles,
                        const std::string& bin_path, const std::string& json_path);
std::vector<ContextBundle> load_bundle_cache(const std::string& bin_path,
                                             const std::string& json_path);

}  // namespace ordepth
