#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "imgeval/error.hpp"
#include "imgeval/preprocess.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace imgeval;
using namespace imgeval::testing;
using imgeval::testing::TempDir;

namespace {

Image with_meta(Image img, Photometric p, Laterality l, std::string id = "src") {
  img.meta().photometric = p;
  img.meta().laterality = l;
  img.meta().source_id = std::move(id);
  return img;
}

}  // namespace

TEST(Otsu, BinBoundariesMatchThresholdComparison) {
  for (int k = 0; k < 255; ++k) {
    const double edge = (k + 1) / 256.0;
    EXPECT_EQ(otsu_bin(edge), k);
    EXPECT_EQ(otsu_bin(std::nextafter(edge, 2.0)), k + 1);
  }
  EXPECT_EQ(otsu_bin(0.0), 0);
  EXPECT_EQ(otsu_bin(-3.0), 0);
  EXPECT_EQ(otsu_bin(1.0), 255);
  EXPECT_EQ(otsu_bin(7.0), 255);
}

TEST(Otsu, BimodalSplitsHalves) {
  Image img(10, 10);
  for (std::size_t i = 0; i < img.size(); ++i) img.pixels()[i] = i % 2 ? 0.9 : 0.1;
  const OtsuResult r = otsu_threshold(img);
  EXPECT_GT(r.threshold, 0.1);
  EXPECT_LT(r.threshold, 0.9);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(r.mask[i], i % 2 ? 1 : 0);
}

TEST(Otsu, ConstantImageHasEmptyMask) {
  const OtsuResult r = otsu_threshold(Image(5, 5, 0.4));
  EXPECT_EQ(r.threshold, 0.4);
  EXPECT_TRUE(std::none_of(r.mask.begin(), r.mask.end(), [](auto m) { return m != 0; }));
}

TEST(Otsu, MatchesExhaustiveOracleOnRandomImages) {
  std::mt19937_64 rng(1234);
  for (int t = 0; t < 1000; ++t) {
    const Image img = random_mixture(rng);
    const OracleOtsu want = otsu_oracle(img);
    const OtsuResult got = otsu_threshold(img);
    if (want.bin < 0) {
      EXPECT_TRUE(std::none_of(got.mask.begin(), got.mask.end(), [](auto m) { return m != 0; }));
      continue;
    }
    ASSERT_EQ(got.bin, want.bin) << "trial " << t;
    ASSERT_EQ(got.threshold, want.threshold);
    for (std::size_t i = 0; i < img.size(); ++i)
      ASSERT_EQ(got.mask[i], img.pixels()[i] > want.threshold ? 1 : 0);
  }
}

TEST(Otsu, TieResolvesToFlooredMeanIndex) {
  // Three equal spikes at bins 10, 20, 30: splits after 10..19 tie with
  // splits after 20..29 by symmetry.
  Image img(3, 1, std::vector<double>{10.5 / 256, 20.5 / 256, 30.5 / 256});
  const OtsuResult r = otsu_threshold(img);
  EXPECT_EQ(r.bin, (10 + 29) / 2);
}

TEST(Segmentation, Monochrome2BackgroundToZero) {
  Image img(4, 1, std::vector<double>{0.05, 0.1, 0.8, 0.9});
  const Image out = segment_background(img);
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_EQ(out(0, 1), 0.0);
  EXPECT_EQ(out(0, 2), 0.8);
  EXPECT_EQ(out(0, 3), 0.9);
}

TEST(Segmentation, Monochrome1BackgroundBecomesZeroAfterInversion) {
  const Image img = with_meta(Image(4, 1, std::vector<double>{0.3, 0.35, 0.95, 0.9}),
                              Photometric::Monochrome1, Laterality::Left);
  const Image out = invert_monochrome1(segment_background(img));
  EXPECT_NEAR(out(0, 0), 0.7, 1e-15);
  EXPECT_NEAR(out(0, 1), 0.65, 1e-15);
  EXPECT_EQ(out(0, 2), 0.0);
  EXPECT_EQ(out(0, 3), 0.0);
  EXPECT_EQ(out.meta().photometric, Photometric::Monochrome2);
}

TEST(Pipeline, InvertAndFlipAreInvolutions) {
  const Image img = with_meta(imgeval::testing::random_image(7, 5, 9), Photometric::Monochrome1,
                              Laterality::Right);
  Image inv = invert_monochrome1(img);
  inv.meta().photometric = Photometric::Monochrome1;
  const Image twice = invert_monochrome1(inv);
  for (std::size_t i = 0; i < img.size(); ++i)
    EXPECT_NEAR(twice.pixels()[i], img.pixels()[i], 1e-15);

  Image flipped = flip_right_laterality(img);
  EXPECT_EQ(flipped.meta().laterality, Laterality::Left);
  EXPECT_EQ(flipped(2, 0), img(2, 6));
  flipped.meta().laterality = Laterality::Right;
  const Image back = flip_right_laterality(flipped);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(back.pixels()[i], img.pixels()[i]);

  const Image left = with_meta(img, Photometric::Monochrome2, Laterality::Left);
  EXPECT_EQ(flip_right_laterality(left).pixels()[3], left.pixels()[3]);
  EXPECT_EQ(invert_monochrome1(left).pixels()[3], left.pixels()[3]);
}

TEST(Pipeline, PadAnchorsTopLeft) {
  PipelineConfig cfg;
  const Image img(2000, 1800, 0.5);
  const Image out = pad_to_canvas(img, cfg);
  EXPECT_EQ(out.width(), 2224u);
  EXPECT_EQ(out.height(), 2224u);
  EXPECT_EQ(out(0, 0), 0.5);
  EXPECT_EQ(out(1799, 1999), 0.5);
  EXPECT_EQ(out(1799, 2000), 0.0);
  EXPECT_EQ(out(1800, 0), 0.0);
  EXPECT_EQ(out(2223, 2223), 0.0);
  EXPECT_THROW(pad_to_canvas(Image(2225, 10), cfg), DimensionError);
}

TEST(Pipeline, AllOnesCanvasGives81Patches) {
  PipelineConfig cfg;
  const auto patches = extract_patches(Image(2224, 2224, 1.0), cfg);
  ASSERT_EQ(patches.size(), 81u);
  std::set<std::pair<std::size_t, std::size_t>> origins;
  for (const auto& p : patches) {
    EXPECT_EQ(p.row % 246, 0u);
    EXPECT_EQ(p.col % 246, 0u);
    EXPECT_LE(p.row + 256, 2224u);
    origins.insert({p.row, p.col});
  }
  EXPECT_EQ(origins.size(), 81u);
}

TEST(Pipeline, NonzeroFractionFilter) {
  PipelineConfig cfg;
  cfg.canvas = 256;
  Image img(256, 256, 1.0);
  for (std::size_t c = 0; c < 6; ++c) img(0, c) = 0.0;  // below 1% zero
  EXPECT_EQ(extract_patches(img, cfg).size(), 1u);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 256; ++c) img(r, c) = 0.0;  // above 1% zero
  EXPECT_EQ(extract_patches(img, cfg).size(), 0u);
}

TEST(Pipeline, AllZeroImageYieldsNoPatches) {
  PipelineConfig cfg;
  cfg.canvas = 600;
  EXPECT_TRUE(run_pipeline(Image(500, 500, 0.0), cfg).empty());
}

TEST(Pipeline, ConfigValidation) {
  PipelineConfig cfg;
  cfg.step = 300;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.nonzero_frac = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.canvas = 100;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Equalize, UniformHistogramIsUnchanged) {
  Patch p;
  p.data = Image(256, 256);
  for (std::size_t i = 0; i < p.data.size(); ++i) p.data.pixels()[i] = (i % 256) / 255.0;
  const Patch out = hist_equalize(p);
  for (std::size_t i = 0; i < p.data.size(); ++i)
    EXPECT_LE(std::abs(out.data.pixels()[i] - p.data.pixels()[i]), 1.0 / 255);
}

TEST(Equalize, NonConstantSpansUnitRangeAndConstantIsKept) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    Patch p;
    p.data = random_mixture(rng);
    const Patch out = hist_equalize(p);
    const auto [lo, hi] = std::minmax_element(out.data.pixels().begin(), out.data.pixels().end());
    const auto [ilo, ihi] = std::minmax_element(p.data.pixels().begin(), p.data.pixels().end());
    if (std::lround(*ilo * 255) == std::lround(*ihi * 255)) continue;
    EXPECT_EQ(*lo, 0.0);
    EXPECT_EQ(*hi, 1.0);
  }
  Patch c;
  c.data = Image(8, 8, 0.3);
  EXPECT_EQ(hist_equalize(c).data.pixels()[5], 0.3);
}

TEST(Pipeline, RunPipelineOrderAndStems) {
  PipelineConfig cfg;
  cfg.canvas = 512;
  cfg.segment = false;
  Image img = imgeval::testing::random_image(512, 300, 3);
  for (double& v : img.pixels()) v = 0.01 + 0.99 * v;
  img = with_meta(img, Photometric::Monochrome2, Laterality::Right, "case1");
  const auto patches = run_pipeline(img, cfg);
  // Rows 0 only: the row-246 window reaches into the zero padding below 300.
  ASSERT_EQ(patches.size(), 2u);
  EXPECT_EQ(patches[1].file_stem(), "case1_r0_c246");
  EXPECT_EQ(patches[0].data.meta().laterality, Laterality::Left);
}

TEST(Pipeline, WritePatchSetManifest) {
  TempDir dir("patches");
  PipelineConfig cfg;
  cfg.canvas = 256;
  Patch p;
  p.data = imgeval::testing::random_image(256, 256, 4);
  p.source_id = "x";
  write_patch_set({p}, cfg, dir.path(), 8);
  EXPECT_TRUE(std::filesystem::exists(dir / "x_r0_c0.png"));
  std::ifstream in(dir / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["patch_count"], 1);
  EXPECT_EQ(j["config"]["step"], 246);
  EXPECT_EQ(j["patches"][0]["file"], "x_r0_c0.png");
}
