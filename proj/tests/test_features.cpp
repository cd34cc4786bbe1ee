#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "imgeval/error.hpp"
#include "imgeval/features.hpp"
#include "imgeval/npy.hpp"
#include "test_support.hpp"

using namespace imgeval;
using imgeval::testing::TempDir;
using imgeval::testing::random_image;

namespace {

MultiLayerActivations single_channel(std::vector<double> maps, std::size_t n, std::size_t h,
                                     std::size_t w) {
  MultiLayerActivations m;
  for (std::size_t i = 0; i < n; ++i) m.images.push_back("img" + std::to_string(i) + ".png");
  LayerActivations l;
  l.name = "conv1";
  l.channels = 1;
  l.height = h;
  l.width = w;
  l.maps = std::move(maps);
  l.alpha = {0.5};
  l.beta = {0.5};
  m.layers.push_back(l);
  m.extractor_id = "hand";
  return m;
}

MultiLayerActivations random_multilayer(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  MultiLayerActivations m;
  m.extractor_id = "random-ml";
  for (std::size_t i = 0; i < n; ++i) m.images.push_back("p" + std::to_string(i) + ".png");
  const std::size_t shapes[2][3] = {{3, 4, 5}, {2, 2, 3}};
  const double per_weight = 1.0 / (2.0 * (3 + 2));
  for (int li = 0; li < 2; ++li) {
    LayerActivations l;
    l.name = "layer" + std::to_string(li);
    l.channels = shapes[li][0];
    l.height = shapes[li][1];
    l.width = shapes[li][2];
    l.maps.resize(n * l.image_stride());
    for (double& v : l.maps) v = u(rng);
    l.alpha.assign(l.channels, per_weight);
    l.beta.assign(l.channels, per_weight);
    m.layers.push_back(l);
  }
  return m;
}

}  // namespace

TEST(Activations, ConstructorValidates) {
  EXPECT_THROW(ActivationSet(2, 3, std::vector<double>(5)), DimensionError);
  EXPECT_THROW(ActivationSet(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()}), FormatError);
}

TEST(Activations, WriteLoadRoundTripIsExact) {
  TempDir dir("acts");
  const ActivationSet a = imgeval::testing::random_activations(17, 9, 3);
  write_activations(a, dir / "a.npy");
  const ActivationSet b = load_activations(dir / "a.npy");
  EXPECT_EQ(b.n(), 17u);
  EXPECT_EQ(b.d(), 9u);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST(Activations, LoadsFloat32AndRejectsWrongRank) {
  TempDir dir("acts32");
  npy::Array arr;
  arr.shape = {2, 2};
  arr.data = {0.25, 0.5, 1.0, 2.0};
  npy::save(dir / "f.npy", arr, npy::Dtype::Float32);
  EXPECT_EQ(load_activations(dir / "f.npy").row(1)[1], 2.0);
  arr.shape = {4};
  npy::save(dir / "g.npy", arr);
  EXPECT_THROW(load_activations(dir / "g.npy"), FormatError);
}

TEST(Activations, SelectPicksRowsInOrder) {
  const ActivationSet a(3, 2, {1, 2, 3, 4, 5, 6});
  const std::vector<std::size_t> idx{2, 0};
  const ActivationSet s = a.select(idx);
  EXPECT_EQ(std::vector<double>(s.data().begin(), s.data().end()),
            (std::vector<double>{5, 6, 1, 2}));
}

TEST(ToyExtract, DeterministicAndSeedSensitive) {
  std::vector<Image> imgs{random_image(40, 30, 1), random_image(40, 30, 2)};
  const ActivationSet a = toy_extract(imgs, 7, 32);
  const ActivationSet b = toy_extract(imgs, 7, 32);
  EXPECT_EQ(a, b);
  const ActivationSet c = toy_extract(imgs, 8, 32);
  EXPECT_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
  EXPECT_EQ(a.extractor_id(), "toy-rp16x16-seed7-d32");
}

TEST(ToyExtract, RectifierProducesExactZeros) {
  std::vector<Image> imgs;
  for (std::uint64_t s = 0; s < 8; ++s) imgs.push_back(random_image(32, 32, s));
  const ActivationSet a = toy_extract(imgs, 0, 64);
  std::size_t zeros = 0;
  for (double v : a.data()) {
    EXPECT_GE(v, 0.0);
    zeros += v == 0.0;
  }
  EXPECT_GT(zeros, 0u);
  EXPECT_LT(zeros, a.data().size());
  const std::vector<Image> black{Image(32, 32, 0.0)};
  const ActivationSet dark = toy_extract(black, 0, 16);
  for (double v : dark.data()) EXPECT_EQ(v, 0.0);
}

TEST(ToyExtract, Errors) {
  EXPECT_THROW(toy_extract({}, 0, 4), DegenerateInputError);
  std::vector<Image> mixed{Image(16, 16), Image(17, 16)};
  EXPECT_THROW(toy_extract(mixed, 0, 4), DimensionError);
}

TEST(Dists, HandCaseIsOne) {
  const auto x = single_channel({1, -1}, 1, 1, 2);
  const auto y = single_channel({-1, 1}, 1, 1, 2);
  EXPECT_NEAR(dists(x, 0, y, 0), 1.0, 1e-6);
}

TEST(Dists, IdentityAndSymmetry) {
  const auto m = random_multilayer(6, 11);
  for (std::size_t i = 0; i < m.count(); ++i) EXPECT_NEAR(dists(m, i, m, i), 0.0, 1e-12);
  for (std::size_t i = 1; i < m.count(); ++i) {
    const double d = dists(m, 0, m, i);
    EXPECT_GT(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_NEAR(d, dists(m, i, m, 0), 1e-15);
  }
}

TEST(Dists, WeightMismatchAndShapeErrors) {
  auto x = random_multilayer(2, 1);
  auto y = random_multilayer(2, 2);
  y.layers[0].alpha[0] += 0.01;
  y.layers[0].beta[0] -= 0.01;
  EXPECT_THROW(dists(x, 0, y, 0), MetadataError);
  auto z = random_multilayer(2, 3);
  z.layers[1].width = 2;
  EXPECT_THROW(dists(x, 0, z, 0), DimensionError);
}

TEST(MultiLayer, ManifestRoundTrip) {
  TempDir dir("ml");
  const auto m = random_multilayer(3, 5);
  write_multilayer(m, dir.path());
  const auto back = load_multilayer(dir.path());
  EXPECT_EQ(back.images, m.images);
  EXPECT_EQ(back.extractor_id, m.extractor_id);
  ASSERT_EQ(back.layers.size(), 2u);
  EXPECT_EQ(back.layers[0].maps, m.layers[0].maps);
  EXPECT_EQ(back.layers[1].alpha, m.layers[1].alpha);
  EXPECT_EQ(back.index_of("p2.png"), 2u);
  EXPECT_THROW(back.index_of("zz.png"), DimensionError);

  std::ifstream in(dir / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["layers"][0]["channels"], 3);
  EXPECT_TRUE(std::filesystem::exists(dir / j["layers"][0]["file"].get<std::string>()));
}

TEST(MultiLayer, WeightsMustSumToOne) {
  auto m = random_multilayer(2, 4);
  EXPECT_NO_THROW(m.validate());
  m.layers[0].alpha[0] += 1e-3;
  EXPECT_THROW(m.validate(), MetadataError);
  m.layers[0].alpha[0] = -0.1;
  EXPECT_THROW(m.validate(), MetadataError);
}

TEST(MultiLayer, LoadRejectsShapeMismatch) {
  TempDir dir("mlbad");
  const auto m = random_multilayer(2, 6);
  write_multilayer(m, dir.path());
  std::ifstream in(dir / "manifest.json");
  auto j = nlohmann::json::parse(in);
  in.close();
  j["layers"][0]["height"] = 9;
  std::ofstream(dir / "manifest.json") << j.dump();
  EXPECT_THROW(load_multilayer(dir.path()), Error);
}
