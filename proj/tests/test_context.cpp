#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>

#include "doctest.h"
#include "ordepth/context.hpp"
#include "ordepth/error.hpp"
#include "ordepth/rng.hpp"

using namespace ordepth;

namespace {

Image noise_image(int w, int h, uint64_t seed) {
  Rng rng(seed);
  Image img;
  img.width = w;
  img.height = h;
  img.channels = 3;
  img.data.resize(size_t(w) * h * 3);
  for (auto& v : img.data) v = float(rng.uniform());
  return img;
}

PairSample mk_pair(int r_i, int c_i, int r_j, int c_j) {
  PairSample p;
  p.i = 0;
  p.j = 1;
  p.r_i = r_i;
  p.c_i = c_i;
  p.r_j = r_j;
  p.c_j = c_j;
  return p;
}

}  // namespace

TEST_CASE("scale1 box from two footprints") {
  Rect b = scale1_box(20, 20, 20, 40, 0.0);
  CHECK(b.r0 == 12);
  CHECK(b.c0 == 12);
  CHECK(b.h == 16);
  CHECK(b.w == 36);

  Rect padded = scale1_box(20, 20, 20, 40, 4.0);
  CHECK(padded.h == 24);  // 16 + pad on both sides
  CHECK(padded.w == 44);

  Rect near_deg = scale1_box(20, 20, 20, 21, 0.0);
  CHECK(near_deg.h == 16);
  CHECK(near_deg.w == 17);
}

TEST_CASE("multiscale boxes arithmetic instance") {
  Rect b1{10, 10, 20, 40};
  auto [b2, b3] = multiscale_boxes(b1);
  CHECK(b2.r0 == 5);
  CHECK(b2.c0 == 0);
  CHECK(b2.h == 30);
  CHECK(b2.w == 60);
  CHECK(b3.r0 == 0);
  CHECK(b3.c0 == -10);
  CHECK(b3.h == 40);
  CHECK(b3.w == 80);
  // Centers coincide.
  CHECK(b3.r0 + b3.h / 2 == doctest::Approx(b1.r0 + b1.h / 2));
  CHECK(b3.c0 + b3.w / 2 == doctest::Approx(b1.c0 + b1.w / 2));
}

TEST_CASE("multiscale area ratios and nesting on random rects") {
  Rng rng(21);
  for (int k = 0; k < 1000; ++k) {
    Rect b1{rng.uniform(-50, 200), rng.uniform(-50, 200), rng.uniform(1, 120),
            rng.uniform(1, 120)};
    auto [b2, b3] = multiscale_boxes(b1);
    CHECK(b2.area() / b1.area() == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(b3.area() / b1.area() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(b2.contains(b1));
    CHECK(b3.contains(b2));
  }
}

TEST_CASE("collinear boxes") {
  auto row = collinear_boxes(50, 30, 50, 60);  // same row, 30 px apart
  double h[3] = {20, 40, 60};
  for (int k = 0; k < 3; ++k) {
    CHECK(row[size_t(k)].h == h[k]);
    CHECK(row[size_t(k)].c0 == row[0].c0);  // identical horizontal span
    CHECK(row[size_t(k)].w == row[0].w);
    // Thickness centered on the connecting line.
    CHECK(row[size_t(k)].r0 + row[size_t(k)].h / 2 == doctest::Approx(50.0));
  }
  CHECK(row[0].w == doctest::Approx(30 + 16));  // segment + half patch both ends

  auto col = collinear_boxes(10, 7, 40, 7);  // same column
  for (int k = 0; k < 3; ++k) CHECK(col[size_t(k)].w == h[k]);

  CHECK_THROWS_AS(collinear_boxes(1, 2, 3, 4), Error);
}

TEST_CASE("crop_resize identity is exact") {
  Image img = noise_image(9, 7, 3);
  auto out = crop_resize(img, Rect{0, 0, 7, 9}, 7, 9);
  REQUIRE(out.size() == img.data.size());
  // Output is planar, input interleaved.
  for (int ch = 0; ch < 3; ++ch)
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 9; ++c)
        CHECK(out[size_t(ch) * 63 + size_t(r) * 9 + size_t(c)] == img.at(r, c, ch));
}

TEST_CASE("crop_resize checkerboard average") {
  Image img;
  img.width = 2;
  img.height = 2;
  img.channels = 1;
  img.data = {0, 1, 1, 0};
  auto out = crop_resize(img, Rect{0, 0, 2, 2}, 1, 1);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == doctest::Approx(0.5));
}

TEST_CASE("crop fully outside the image replicates the nearest edge pixel") {
  Image img = noise_image(6, 6, 4);
  auto out = crop_resize(img, Rect{-100, -100, 4, 4}, 4, 4);
  for (int ch = 0; ch < 3; ++ch)
    for (int k = 0; k < 16; ++k)
      CHECK(out[size_t(ch) * 16 + size_t(k)] == img.at(0, 0, ch));
}

TEST_CASE("crop_resize translation equivariance on interior crops") {
  Image a = noise_image(40, 40, 5);
  Image b;
  b.width = 40;
  b.height = 40;
  b.channels = 3;
  b.data.resize(a.data.size());
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 40; ++c)
      for (int ch = 0; ch < 3; ++ch)
        b.at(r, c, ch) = a.at((r + 35) % 40, (c + 37) % 40, ch);  // shift by (5,3)
  auto ra = crop_resize(a, Rect{10.3, 12.7, 9.5, 8.25}, 12, 12);
  auto rb = crop_resize(b, Rect{15.3, 15.7, 9.5, 8.25}, 12, 12);
  REQUIRE(ra.size() == rb.size());
  for (size_t k = 0; k < ra.size(); ++k)
    CHECK(ra[k] == doctest::Approx(rb[k]).epsilon(1e-6));
}

TEST_CASE("location masks geometry") {
  // Point at the b1 center: nonzeros form a block symmetric around center.
  Rect b1 = scale1_box(50, 50, 50, 50, 4.0);
  auto [m_center, m2] = location_masks(b1, 50, 50, 50, 50);
  CHECK(m_center == m2);
  int count = 0;
  for (int r = 0; r < kMaskSize; ++r)
    for (int c = 0; c < kMaskSize; ++c) {
      float v = m_center[size_t(r) * kMaskSize + size_t(c)];
      CHECK((v == 0.0f || v == 1.0f));
      if (v == 1.0f) {
        ++count;
        CHECK(m_center[size_t(kMaskSize - 1 - r) * kMaskSize + size_t(kMaskSize - 1 - c)] ==
              1.0f);
      }
    }
  CHECK(count > 0);

  // Point at the top-left of b1 (no pad): nonzeros touch (0,0).
  Rect wide = scale1_box(50, 50, 80, 110, 0.0);
  auto [m_tl, m_br] = location_masks(wide, 50, 50, 80, 110);
  CHECK(m_tl[0] == 1.0f);
  CHECK(m_tl != m_br);
  CHECK(m_br[size_t(kMaskSize) * kMaskSize - 1] == 1.0f);
}

TEST_CASE("masks are never empty even for clipped footprints") {
  Rng rng(6);
  for (int k = 0; k < 200; ++k) {
    int r_i = int(rng.uniform_int(100)), c_i = int(rng.uniform_int(100));
    int r_j = int(rng.uniform_int(100)), c_j = int(rng.uniform_int(100));
    Rect b1 = scale1_box(r_i, c_i, r_j, c_j);
    auto [m1, m2] = location_masks(b1, r_i, c_i, r_j, c_j);
    double s1 = 0, s2 = 0;
    for (float v : m1) s1 += v;
    for (float v : m2) s2 += v;
    CHECK(s1 >= 1);
    CHECK(s2 >= 1);
  }
}

TEST_CASE("bundle sizes and determinism") {
  Image img = noise_image(80, 60, 7);
  PairSample p = mk_pair(20, 30, 40, 50);
  ContextBundle b = build_context(img, p);
  CHECK(b.patch1.size() == 3u * 16 * 16);
  CHECK(b.patch2.size() == 3u * 16 * 16);
  CHECK(b.scale1.size() == 3u * 32 * 32);
  CHECK(b.scale2.size() == 3u * 40 * 40);
  CHECK(b.scale3.size() == 3u * 48 * 48);
  CHECK(b.mask1.size() == 32u * 32);
  CHECK(b.mask2.size() == 32u * 32);
  ContextBundle b2 = build_context(img, p);
  CHECK(b.patch1 == b2.patch1);
  CHECK(b.scale3 == b2.scale3);
  CHECK(b.mask2 == b2.mask2);
}

TEST_CASE("swapping the points swaps patches and masks, not the scale crops") {
  Image img = noise_image(80, 60, 8);
  PairSample p = mk_pair(20, 30, 40, 50);
  PairSample q = mk_pair(40, 50, 20, 30);
  ContextBundle a = build_context(img, p);
  ContextBundle b = build_context(img, q);
  CHECK(a.patch1 == b.patch2);
  CHECK(a.patch2 == b.patch1);
  CHECK(a.mask1 == b.mask2);
  CHECK(a.mask2 == b.mask1);
  CHECK(a.scale1 == b.scale1);
  CHECK(a.scale2 == b.scale2);
  CHECK(a.scale3 == b.scale3);
}

TEST_CASE("diw mode uses collinear boxes only for collinear points") {
  Image img = noise_image(120, 120, 9);
  PairSample collinear = mk_pair(60, 30, 60, 80);
  ContextBundle diw = build_context(img, collinear, ContextMode::Diw);
  ContextBundle std_mode = build_context(img, collinear, ContextMode::Standard);
  CHECK(diw.scale1 != std_mode.scale1);  // 20-px band vs padded union box
  CHECK(diw.patch1 == std_mode.patch1);  // patches are mode-independent

  PairSample skew = mk_pair(30, 30, 70, 80);
  ContextBundle diw2 = build_context(img, skew, ContextMode::Diw);
  ContextBundle std2 = build_context(img, skew, ContextMode::Standard);
  CHECK(diw2.scale1 == std2.scale1);  // falls back to the standard rule
}

TEST_CASE("grayscale input is replicated across channels") {
  Image gray;
  gray.width = 60;
  gray.height = 60;
  gray.channels = 1;
  gray.data.assign(3600, 0.25f);
  ContextBundle b = build_context(gray, mk_pair(20, 20, 30, 40));
  for (float v : b.patch1) CHECK(v == 0.25f);
  CHECK(b.scale1.size() == 3u * 32 * 32);
}

TEST_CASE("bundle cache reload is bit exact") {
  Image img = noise_image(90, 70, 10);
  std::vector<ContextBundle> bundles;
  bundles.push_back(build_context(img, mk_pair(20, 30, 40, 50)));
  bundles.push_back(build_context(img, mk_pair(10, 10, 60, 80)));
  auto dir = std::filesystem::temp_directory_path();
  std::string bin = (dir / "od_ctx.bin").string();
  std::string js = (dir / "od_ctx.json").string();
  write_bundle_cache(bundles, bin, js);
  auto back = load_bundle_cache(bin, js);
  REQUIRE(back.size() == 2);
  for (size_t k = 0; k < 2; ++k) {
    CHECK(back[k].patch1 == bundles[k].patch1);
    CHECK(back[k].patch2 == bundles[k].patch2);
    CHECK(back[k].scale1 == bundles[k].scale1);
    CHECK(back[k].scale2 == bundles[k].scale2);
    CHECK(back[k].scale3 == bundles[k].scale3);
    CHECK(back[k].mask1 == bundles[k].mask1);
    CHECK(back[k].mask2 == bundles[k].mask2);
    CHECK(back[k].pair_ref.r_i == bundles[k].pair_ref.r_i);
    CHECK(back[k].pair_ref.c_j == bundles[k].pair_ref.c_j);
  }
}
