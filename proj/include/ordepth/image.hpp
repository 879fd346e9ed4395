#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ordepth {

// Dense row-major raster, values in [0,1], 1 or 3 channels interleaved.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;  // height*width*channels

  float at(int r, int c, int ch) const {
    return data[(static_cast<size_t>(r) * width + c) * channels + ch];
  }
  float& at(int r, int c, int ch) {
    return data[(static_cast<size_t>(r) * width + c) * channels + ch];
  }
};

// Depth raster; value > 0 where valid[i], undefined where not.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;
  std::vector<uint8_t> valid;

  float at(int r, int c) const { return data[static_cast<size_t>(r) * width + c]; }
  bool is_valid(int r, int c) const { return valid[static_cast<size_t>(r) * width + c] != 0; }
};

struct ManifestRecord {
  std::string image;
  std::string depth;  // empty if absent
  std::string pairs;  // empty if absent
  std::string split;  // "train" or "test"
};

using DatasetManifest = std::vector<ManifestRecord>;

// 8-bit PNG (non-interlaced), PPM (P6/P3) or PGM (P5/P2); values scaled
// by the file's max value to [0,1].
Image load_image(const std::string& path);

// 16-bit big-endian PGM or raw little-endian float32 raster
// ("F32R" magic, uint32 width, uint32 height, then width*height floats).
// Raw value 0 marks an invalid pixel; valid values are multiplied by scale.
DepthMap load_depth(const std::string& path, double scale);

// 16-bit PGM, value = round(65535*clamp((d-lo)/(hi-lo),0,1)); invalid -> 0.
void write_depth_pgm(const DepthMap& map, const std::string& path, double lo, double hi);

// Raw float raster writer (counterpart of load_depth's F32R branch).
void write_depth_f32(const DepthMap& map, const std::string& path);

void write_ppm(const Image& img, const std::string& path);

// Deterministic synthetic scene: background depth is a vertical linear
// ramp (top of the image further away); each object is an axis-aligned
// rectangle of uniform color whose uniform depth is strictly closer
// than everything previously behind it. Object color is tied to object
// identity, not to depth.
void synth_scene(uint64_t seed, int width, int height, int n_objects,
                 Image& image, DepthMap& depth);

DatasetManifest load_manifest(const std::string& path);
void write_manifest(const DatasetManifest& m, const std::string& path);

}  // namespace ordepth
