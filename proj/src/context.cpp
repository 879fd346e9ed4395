#include "ordepth/context.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "ordepth/error.hpp"

namespace ordepth {

Rect patch_footprint(int r, int c) {
  return Rect{double(r - kPatchSize / 2), double(c - kPatchSize / 2),
              double(kPatchSize), double(kPatchSize)};
}

Rect scale1_box(int r_i, int c_i, int r_j, int c_j, double pad) {
  Rect a = patch_footprint(r_i, c_i);
  Rect b = patch_footprint(r_j, c_j);
  double r0 = std::min(a.r0, b.r0) - pad;
  double c0 = std::min(a.c0, b.c0) - pad;
  double r1 = std::max(a.r0 + a.h, b.r0 + b.h) + pad;
  double c1 = std::max(a.c0 + a.w, b.c0 + b.w) + pad;
  return Rect{r0, c0, r1 - r0, c1 - c0};
}

std::pair<Rect, Rect> multiscale_boxes(const Rect& b1) {
  auto expand = [&](double f) {
    return Rect{b1.r0 - b1.h * f, b1.c0 - b1.w * f, b1.h * (1 + 2 * f),
                b1.w * (1 + 2 * f)};
  };
  return {expand(0.25), expand(0.5)};
}

std::array<Rect, 3> collinear_boxes(int r_i, int c_i, int r_j, int c_j) {
  const double half = kPatchSize / 2.0;
  std::array<Rect, 3> out;
  const double thick[3] = {20, 40, 60};
  if (r_i == r_j) {
    double c0 = std::min(c_i, c_j) - half;
    double c1 = std::max(c_i, c_j) + half;
    for (int k = 0; k < 3; ++k)
      out[k] = Rect{r_i - thick[k] / 2, c0, thick[k], c1 - c0};
  } else if (c_i == c_j) {
    double r0 = std::min(r_i, r_j) - half;
    double r1 = std::max(r_i, r_j) + half;
    for (int k = 0; k < 3; ++k)
      out[k] = Rect{r0, c_i - thick[k] / 2, r1 - r0, thick[k]};
  } else {
    fail("NotCollinear", "points share neither row nor column");
  }
  return out;
}

std::vector<float> crop_resize(const Image& image, const Rect& rect, int out_h,
                               int out_w) {
  if (out_h < 1 || out_w < 1) fail("InvalidConfig", "crop_resize output dims");
  const int C = image.channels, H = image.height, W = image.width;
  std::vector<float> out(size_t(C) * out_h * out_w);
  for (int ro = 0; ro < out_h; ++ro) {
    double sr = rect.r0 + (ro + 0.5) * rect.h / out_h - 0.5;
    int r0 = int(std::floor(sr));
    double fr = sr - r0;
    int ra = std::clamp(r0, 0, H - 1), rb = std::clamp(r0 + 1, 0, H - 1);
    for (int co = 0; co < out_w; ++co) {
      double sc = rect.c0 + (co + 0.5) * rect.w / out_w - 0.5;
      int c0 = int(std::floor(sc));
      double fc = sc - c0;
      int ca = std::clamp(c0, 0, W - 1), cb = std::clamp(c0 + 1, 0, W - 1);
      for (int ch = 0; ch < C; ++ch) {
        double top = image.at(ra, ca, ch) * (1 - fc) + image.at(ra, cb, ch) * fc;
        double bot = image.at(rb, ca, ch) * (1 - fc) + image.at(rb, cb, ch) * fc;
        out[(size_t(ch) * out_h + ro) * out_w + co] = float(top * (1 - fr) + bot * fr);
      }
    }
  }
  return out;
}

namespace {

std::vector<float> one_mask(const Rect& b1, int r, int c) {
  std::vector<float> m(size_t(kMaskSize) * kMaskSize, 0.0f);
  Rect fp = patch_footprint(r, c);
  double sy = kMaskSize / b1.h, sx = kMaskSize / b1.w;
  int y0 = int(std::lround((fp.r0 - b1.r0) * sy));
  int y1 = int(std::lround((fp.r0 + fp.h - b1.r0) * sy));
  int x0 = int(std::lround((fp.c0 - b1.c0) * sx));
  int x1 = int(std::lround((fp.c0 + fp.w - b1.c0) * sx));
  y0 = std::clamp(y0, 0, kMaskSize - 1);
  x0 = std::clamp(x0, 0, kMaskSize - 1);
  y1 = std::clamp(y1, y0 + 1, kMaskSize);
  x1 = std::clamp(x1, x0 + 1, kMaskSize);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m[size_t(y) * kMaskSize + x] = 1.0f;
  return m;
}

// Grayscale inputs are replicated to 3 channels so every bundle has a
// fixed layout.
std::vector<float> to3(std::vector<float> raster, int channels, int hw) {
  if (channels == 3) return raster;
  std::vector<float> out(size_t(3) * hw);
  for (int ch = 0; ch < 3; ++ch)
    std::copy(raster.begin(), raster.begin() + hw, out.begin() + size_t(ch) * hw);
  return out;
}

}  // namespace

std::pair<std::vector<float>, std::vector<float>> location_masks(
    const Rect& b1, int r_i, int c_i, int r_j, int c_j) {
  return {one_mask(b1, r_i, c_i), one_mask(b1, r_j, c_j)};
}

ContextBundle build_context(const Image& image, const PairSample& pair,
                            ContextMode mode) {
  if (pair.r_i < 0 || pair.r_i >= image.height || pair.c_i < 0 ||
      pair.c_i >= image.width || pair.r_j < 0 || pair.r_j >= image.height ||
      pair.c_j < 0 || pair.c_j >= image.width)
    fail("InvalidConfig", "pair points outside image");

  ContextBundle b;
  b.pair_ref = pair;
  const int C = image.channels;

  Rect box1, box2, box3;
  bool collinear = (pair.r_i == pair.r_j) || (pair.c_i == pair.c_j);
  if (mode == ContextMode::Diw && collinear) {
    auto boxes = collinear_boxes(pair.r_i, pair.c_i, pair.r_j, pair.c_j);
    box1 = boxes[0];
    box2 = boxes[1];
    box3 = boxes[2];
  } else {
    box1 = scale1_box(pair.r_i, pair.c_i, pair.r_j, pair.c_j);
    auto [b2, b3] = multiscale_boxes(box1);
    box2 = b2;
    box3 = b3;
  }

  b.patch1 = to3(crop_resize(image, patch_footprint(pair.r_i, pair.c_i),
                             kPatchSize, kPatchSize),
                 C, kPatchSize * kPatchSize);
  b.patch2 = to3(crop_resize(image, patch_footprint(pair.r_j, pair.c_j),
                             kPatchSize, kPatchSize),
                 C, kPatchSize * kPatchSize);
  b.scale1 = to3(crop_resize(image, box1, kScale1Size, kScale1Size), C,
                 kScale1Size * kScale1Size);
  b.scale2 = to3(crop_resize(image, box2, kScale2Size, kScale2Size), C,
                 kScale2Size * kScale2Size);
  b.scale3 = to3(crop_resize(image, box3, kScale3Size, kScale3Size), C,
                 kScale3Size * kScale3Size);
  auto [m1, m2] = location_masks(box1, pair.r_i, pair.c_i, pair.r_j, pair.c_j);
  b.mask1 = std::move(m1);
  b.mask2 = std::move(m2);
  return b;
}

void write_bundle_cache(const std::vector<ContextBundle>& bundles,
                        const std::string& bin_path, const std::string& json_path) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) fail("IoFailure", bin_path);
  auto put = [&](const std::vector<float>& v) {
    bin.write(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& b : bundles) {
    put(b.patch1);
    put(b.patch2);
    put(b.scale1);
    put(b.scale2);
    put(b.scale3);
    put(b.mask1);
    put(b.mask2);
    const auto& p = b.pair_ref;
    rows.push_back({p.i, p.j, p.r_i, p.c_i, p.r_j, p.c_j,
                    std::string(1, ordinal_char(p.label))});
  }
  if (!bin) fail("IoFailure", bin_path);

  nlohmann::json j;
  j["order"] = {"patch1", "patch2", "scale1", "scale2", "scale3", "mask1", "mask2"};
  j["shapes"] = {{"patch1", {3, kPatchSize, kPatchSize}},
                 {"patch2", {3, kPatchSize, kPatchSize}},
                 {"scale1", {3, kScale1Size, kScale1Size}},
                 {"scale2", {3, kScale2Size, kScale2Size}},
                 {"scale3", {3, kScale3Size, kScale3Size}},
                 {"mask1", {1, kMaskSize, kMaskSize}},
                 {"mask2", {1, kMaskSize, kMaskSize}}};
  j["pairs"] = rows;
  std::ofstream js(json_path);
  if (!js) fail("IoFailure", json_path);
  js << j.dump(2) << "\n";
}

std::vector<ContextBundle> load_bundle_cache(const std::string& bin_path,
                                             const std::string& json_path) {
  std::ifstream js(json_path);
  if (!js) fail("MissingFile", json_path);
  nlohmann::json j;
  js >> j;
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) fail("MissingFile", bin_path);

  std::vector<ContextBundle> out;
  auto get = [&](std::vector<float>& v, size_t count) {
    v.resize(count);
    bin.read(reinterpret_cast<char*>(v.data()), count * sizeof(float));
    if (!bin) fail("CorruptHeader", bin_path + ": truncated bundle cache");
  };
  for (const auto& row : j.at("pairs")) {
    ContextBundle b;
    b.pair_ref.i = row[0].get<int>();
    b.pair_ref.j = row[1].get<int>();
    b.pair_ref.r_i = row[2].get<int>();
    b.pair_ref.c_i = row[3].get<int>();
    b.pair_ref.r_j = row[4].get<int>();
    b.pair_ref.c_j = row[5].get<int>();
    b.pair_ref.label = ordinal_from_char(row[6].get<std::string>()[0]);
    get(b.patch1, 3 * kPatchSize * kPatchSize);
    get(b.patch2, 3 * kPatchSize * kPatchSize);
    get(b.scale1, 3 * kScale1Size * kScale1Size);
    get(b.scale2, 3 * kScale2Size * kScale2Size);
    get(b.scale3, 3 * kScale3Size * kScale3Size);
    get(b.mask1, kMaskSize * kMaskSize);
    get(b.mask2, kMaskSize * kMaskSize);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace ordepth
