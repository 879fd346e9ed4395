#include "ordepth/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ordepth/error.hpp"
#include "ordepth/rng.hpp"

namespace ordepth {

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("MissingFile", path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

// ---- PNM (PPM/PGM, ascii and binary) ----

struct PnmHeader {
  int magic = 0;  // 2,3,5,6
  int width = 0, height = 0, maxval = 0;
  size_t data_offset = 0;
};

// Skips whitespace and '#' comments between header tokens.
PnmHeader parse_pnm_header(const std::vector<uint8_t>& b, const std::string& path) {
  if (b.size() < 2 || b[0] != 'P') fail("CorruptHeader", path);
  PnmHeader h;
  h.magic = b[1] - '0';
  size_t pos = 2;
  int fields[3];
  for (int f = 0; f < 3; ++f) {
    while (pos < b.size()) {
      if (b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
      } else if (std::isspace(b[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    int v = 0;
    bool any = false;
    while (pos < b.size() && std::isdigit(b[pos])) {
      v = v * 10 + (b[pos] - '0');
      ++pos;
      any = true;
    }
    if (!any) fail("CorruptHeader", path + ": truncated PNM header");
    fields[f] = v;
  }
  if (pos >= b.size() || !std::isspace(b[pos]))
    fail("CorruptHeader", path + ": missing header terminator");
  ++pos;
  h.width = fields[0];
  h.height = fields[1];
  h.maxval = fields[2];
  h.data_offset = pos;
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535)
    fail("CorruptHeader", path + ": bad PNM dimensions");
  return h;
}

// Reads ascii sample values for P2/P3.
std::vector<int> parse_ascii_samples(const std::vector<uint8_t>& b, size_t pos,
                                     size_t count, const std::string& path) {
  std::vector<int> out;
  out.reserve(count);
  while (out.size() < count && pos < b.size()) {
    while (pos < b.size() && (std::isspace(b[pos]) || b[pos] == '#')) {
      if (b[pos] == '#')
        while (pos < b.size() && b[pos] != '\n') ++pos;
      else
        ++pos;
    }
    int v = 0;
    bool any = false;
    while (pos < b.size() && std::isdigit(b[pos])) {
      v = v * 10 + (b[pos] - '0');
      ++pos;
      any = true;
    }
    if (!any) break;
    out.push_back(v);
  }
  if (out.size() < count) fail("CorruptHeader", path + ": truncated PNM data");
  return out;
}

// ---- minimal PNG reader (8-bit, non-interlaced, gray/RGB/+alpha) ----

uint32_t be32(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

Image decode_png(const std::vector<uint8_t>& b, const std::string& path) {
  static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  if (b.size() < 8 || std::memcmp(b.data(), sig, 8) != 0)
    fail("CorruptHeader", path + ": bad PNG signature");

  uint32_t w = 0, h = 0;
  int bit_depth = 0, color_type = 0;
  std::vector<uint8_t> idat;
  size_t pos = 8;
  bool seen_ihdr = false, seen_iend = false;
  while (pos + 8 <= b.size() && !seen_iend) {
    uint32_t len = be32(&b[pos]);
    if (pos + 12 + len > b.size()) fail("CorruptHeader", path + ": truncated chunk");
    std::string type(reinterpret_cast<const char*>(&b[pos + 4]), 4);
    const uint8_t* data = &b[pos + 8];
    if (type == "IHDR") {
      if (len != 13) fail("CorruptHeader", path + ": bad IHDR");
      w = be32(data);
      h = be32(data + 4);
      bit_depth = data[8];
      color_type = data[9];
      if (data[10] != 0 || data[11] != 0) fail("UnsupportedFormat", path);
      if (data[12] != 0) fail("UnsupportedFormat", path + ": interlaced PNG");
      seen_ihdr = true;
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (type == "IEND") {
      seen_iend = true;
    }
    pos += 12 + len;
  }
  if (!seen_ihdr || w == 0 || h == 0) fail("CorruptHeader", path + ": missing IHDR");
  if (bit_depth != 8) fail("UnsupportedFormat", path + ": only 8-bit PNG supported");
  int src_ch;
  switch (color_type) {
    case 0: src_ch = 1; break;
    case 2: src_ch = 3; break;
    case 4: src_ch = 2; break;
    case 6: src_ch = 4; break;
    default: fail("UnsupportedFormat", path + ": palette PNG not supported");
  }

  size_t stride = size_t(w) * src_ch;
  std::vector<uint8_t> raw(h * (stride + 1));
  uLongf raw_len = raw.size();
  if (uncompress(raw.data(), &raw_len, idat.data(), idat.size()) != Z_OK ||
      raw_len != raw.size())
    fail("CorruptHeader", path + ": PNG inflate failed");

  // Unfilter scanlines in place into `pix`.
  std::vector<uint8_t> pix(h * stride);
  int bpp = src_ch;
  for (uint32_t r = 0; r < h; ++r) {
    const uint8_t* line = &raw[r * (stride + 1)];
    uint8_t filter = line[0];
    uint8_t* cur = &pix[r * stride];
    const uint8_t* up = r > 0 ? &pix[(r - 1) * stride] : nullptr;
    for (size_t i = 0; i < stride; ++i) {
      int x = line[1 + i];
      int a = i >= size_t(bpp) ? cur[i - bpp] : 0;
      int bb = up ? up[i] : 0;
      int c = (up && i >= size_t(bpp)) ? up[i - bpp] : 0;
      switch (filter) {
        case 0: break;
        case 1: x += a; break;
        case 2: x += bb; break;
        case 3: x += (a + bb) / 2; break;
        case 4: x += paeth(a, bb, c); break;
        default: fail("CorruptHeader", path + ": bad PNG filter");
      }
      cur[i] = uint8_t(x);
    }
  }

  Image img;
  img.width = int(w);
  img.height = int(h);
  img.channels = (src_ch >= 3) ? 3 : 1;
  img.data.resize(size_t(w) * h * img.channels);
  for (size_t p = 0; p < size_t(w) * h; ++p)
    for (int ch = 0; ch < img.channels; ++ch)
      img.data[p * img.channels + ch] = pix[p * src_ch + ch] / 255.0f;
  return img;
}

}  // namespace

Image load_image(const std::string& path) {
  auto bytes = read_file(path);
  if (bytes.size() >= 8 && bytes[0] == 137) return decode_png(bytes, path);
  if (bytes.size() < 2 || bytes[0] != 'P') fail("UnsupportedFormat", path);

  PnmHeader h = parse_pnm_header(bytes, path);
  if (h.maxval > 255) fail("UnsupportedFormat", path + ": 16-bit image input");
  Image img;
  img.width = h.width;
  img.height = h.height;
  img.channels = (h.magic == 3 || h.magic == 6) ? 3 : 1;
  size_t n = size_t(h.width) * h.height * img.channels;
  img.data.resize(n);
  float inv = 1.0f / h.maxval;
  if (h.magic == 5 || h.magic == 6) {
    if (h.data_offset + n > bytes.size())
      fail("CorruptHeader", path + ": truncated PNM data");
    for (size_t i = 0; i < n; ++i) img.data[i] = bytes[h.data_offset + i] * inv;
  } else if (h.magic == 2 || h.magic == 3) {
    auto vals = parse_ascii_samples(bytes, h.data_offset, n, path);
    for (size_t i = 0; i < n; ++i) img.data[i] = vals[i] * inv;
  } else {
    fail("UnsupportedFormat", path);
  }
  return img;
}

DepthMap load_depth(const std::string& path, double scale) {
  if (scale <= 0) fail("NonPositiveScale", std::to_string(scale));
  auto bytes = read_file(path);
  DepthMap d;
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "F32R", 4) == 0) {
    if (bytes.size() < 12) fail("CorruptHeader", path);
    uint32_t w, h;
    std::memcpy(&w, &bytes[4], 4);
    std::memcpy(&h, &bytes[8], 4);
    size_t n = size_t(w) * h;
    if (bytes.size() != 12 + n * 4) fail("CorruptHeader", path + ": size mismatch");
    d.width = int(w);
    d.height = int(h);
    d.data.resize(n);
    d.valid.resize(n);
    for (size_t i = 0; i < n; ++i) {
      float v;
      std::memcpy(&v, &bytes[12 + i * 4], 4);
      d.valid[i] = v != 0.0f;
      d.data[i] = d.valid[i] ? float(v * scale) : 0.0f;
    }
    return d;
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    PnmHeader h = parse_pnm_header(bytes, path);
    if (h.maxval <= 255) fail("UnsupportedFormat", path + ": expected 16-bit PGM depth");
    size_t n = size_t(h.width) * h.height;
    if (h.data_offset + n * 2 > bytes.size())
      fail("CorruptHeader", path + ": truncated PGM data");
    d.width = h.width;
    d.height = h.height;
    d.data.resize(n);
    d.valid.resize(n);
    for (size_t i = 0; i < n; ++i) {
      // PGM multi-byte samples are big-endian.
      uint32_t raw = (uint32_t(bytes[h.data_offset + 2 * i]) << 8) |
                     bytes[h.data_offset + 2 * i + 1];
      d.valid[i] = raw != 0;
      d.data[i] = d.valid[i] ? float(raw * scale) : 0.0f;
    }
    return d;
  }
  fail("UnsupportedFormat", path);
}

void write_depth_pgm(const DepthMap& map, const std::string& path, double lo, double hi) {
  if (!(lo < hi)) fail("DegenerateRange", "lo must be < hi");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoFailure", path);
  out << "P5\n" << map.width << " " << map.height << "\n65535\n";
  size_t n = size_t(map.width) * map.height;
  std::vector<uint8_t> buf(n * 2);
  for (size_t i = 0; i < n; ++i) {
    uint32_t v = 0;
    if (map.valid[i]) {
      double t = (map.data[i] - lo) / (hi - lo);
      t = std::clamp(t, 0.0, 1.0);
      v = uint32_t(std::lround(65535.0 * t));
    }
    buf[2 * i] = uint8_t(v >> 8);
    buf[2 * i + 1] = uint8_t(v & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
  if (!out) fail("IoFailure", path);
}

void write_depth_f32(const DepthMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoFailure", path);
  out.write("F32R", 4);
  uint32_t w = map.width, h = map.height;
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  size_t n = size_t(w) * h;
  std::vector<float> buf(map.data);
  for (size_t i = 0; i < n; ++i)
    if (!map.valid[i]) buf[i] = 0.0f;
  out.write(reinterpret_cast<const char*>(buf.data()), n * 4);
  if (!out) fail("IoFailure", path);
}

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoFailure", path);
  out << (img.channels == 3 ? "P6" : "P5") << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::vector<uint8_t> buf(img.data.size());
  for (size_t i = 0; i < img.data.size(); ++i)
    buf[i] = uint8_t(std::lround(std::clamp(img.data[i], 0.0f, 1.0f) * 255.0f));
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
  if (!out) fail("IoFailure", path);
}

void synth_scene(uint64_t seed, int width, int height, int n_objects,
                 Image& image, DepthMap& depth) {
  width = std::max(width, 32);
  height = std::max(height, 32);
  n_objects = std::max(n_objects, 0);
  Rng rng(seed);

  image.width = width;
  image.height = height;
  image.channels = 3;
  image.data.assign(size_t(width) * height * 3, 0.0f);
  depth.width = width;
  depth.height = height;
  depth.data.assign(size_t(width) * height, 0.0f);
  depth.valid.assign(size_t(width) * height, 1);

  // Background: vertical ramp, top of the frame furthest away.
  const double d_far = 8.0, d_near = 2.0;
  float bg_shade = float(rng.uniform(0.55, 0.85));
  for (int r = 0; r < height; ++r) {
    double d = d_far + (d_near - d_far) * (height > 1 ? double(r) / (height - 1) : 0.0);
    for (int c = 0; c < width; ++c) {
      depth.data[size_t(r) * width + c] = float(d);
      for (int ch = 0; ch < 3; ++ch) image.at(r, c, ch) = bg_shade;
    }
  }

  for (int k = 0; k < n_objects; ++k) {
    int ow = std::max(4, int(rng.uniform(width / 8.0, width / 3.0)));
    int oh = std::max(4, int(rng.uniform(height / 8.0, height / 3.0)));
    ow = std::min(ow, width - 2);
    oh = std::min(oh, height - 2);
    int r0 = int(rng.uniform_int(uint32_t(height - oh)));
    int c0 = int(rng.uniform_int(uint32_t(width - ow)));
    float col[3];
    for (float& ch : col) ch = float(rng.uniform(0.05, 0.95));

    // Strictly in front of whatever is currently behind the rectangle.
    float behind = 1e30f;
    for (int r = r0; r < r0 + oh; ++r)
      for (int c = c0; c < c0 + ow; ++c)
        behind = std::min(behind, depth.data[size_t(r) * width + c]);
    float d_obj = behind * float(rng.uniform(0.45, 0.85));

    for (int r = r0; r < r0 + oh; ++r)
      for (int c = c0; c < c0 + ow; ++c) {
        depth.data[size_t(r) * width + c] = d_obj;
        for (int ch = 0; ch < 3; ++ch) image.at(r, c, ch) = col[ch];
      }
  }
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("MissingFile", path);
  DatasetManifest m;
  std::string line;
  auto base = std::filesystem::path(path).parent_path();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    ManifestRecord rec;
    rec.image = j.at("image").get<std::string>();
    if (j.contains("depth") && !j["depth"].is_null()) rec.depth = j["depth"].get<std::string>();
    if (j.contains("pairs") && !j["pairs"].is_null()) rec.pairs = j["pairs"].get<std::string>();
    rec.split = j.at("split").get<std::string>();
    if (rec.split != "train" && rec.split != "test")
      fail("CorruptHeader", path + ": bad split tag " + rec.split);
    // Paths are interpreted relative to the manifest file.
    for (std::string* p : {&rec.image, &rec.depth, &rec.pairs}) {
      if (p->empty()) continue;
      auto full = base / *p;
      if (std::filesystem::exists(full))
        *p = full.string();
      else if (!std::filesystem::exists(*p))
        fail("MissingFile", *p);
    }
    m.push_back(std::move(rec));
  }
  return m;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("IoFailure", path);
  for (const auto& rec : m) {
    nlohmann::json j;
    j["image"] = rec.image;
    j["depth"] = rec.depth.empty() ? nlohmann::json() : nlohmann::json(rec.depth);
    j["pairs"] = rec.pairs.empty() ? nlohmann::json() : nlohmann::json(rec.pairs);
    j["split"] = rec.split;
    out << j.dump() << "\n";
  }
}

}  // namespace ordepth
