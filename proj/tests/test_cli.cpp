#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "cli_support.hpp"
#include "imgeval/fileio.hpp"
#include "imgeval/report.hpp"

using namespace imgeval;
using namespace imgeval::testing;
using nlohmann::json;

namespace {

json read_json(const std::filesystem::path& p) { return json::parse(read_file(p)); }

class Cli : public ::testing::Test {
 protected:
  TempDir dir{"cli"};
  Corpus corpus{dir.path()};
};

}  // namespace

TEST_F(Cli, UnknownSubcommandAndMissingFlagsExitOne) {
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"preprocess", "--input", corpus.path("source")}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(Cli, PreprocessRejectsStepLargerThanPatch) {
  const auto r = run_cli({"preprocess", "--input", corpus.path("source"), "--out",
                          corpus.path("p"), "--step", "300"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("step"), std::string::npos) << r.err;
}

TEST_F(Cli, PreprocessEmptyDirectory) {
  std::filesystem::create_directories(dir / "empty");
  const auto r = run_cli({"preprocess", "--input", corpus.path("empty"), "--out", corpus.path("p")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("no input images"), std::string::npos) << r.err;
}

TEST_F(Cli, PreprocessWritesPatchesManifestAndConfig) {
  const auto r = run_cli({"preprocess", "--input", corpus.path("source"), "--out",
                          corpus.path("p"), "--patch-size", "32", "--step", "16", "--canvas",
                          "64", "--no-segment"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = read_json(dir / "p" / "manifest.json");
  EXPECT_GT(m["patch_count"].get<int>(), 0);
  EXPECT_LE(m["patch_count"].get<int>(), 4 * 9);
  const json c = read_json(dir / "p" / "config.json");
  EXPECT_EQ(c["command"], "preprocess");
  EXPECT_EQ(c["options"]["step"], "16");
}

TEST_F(Cli, EvalFullrefReport) {
  const auto r = run_cli({"eval-fullref", "--source", corpus.path("source"), "--adapted",
                          corpus.path("adapted"), "--out", corpus.path("fr"), "--metrics",
                          "mse,psnr,ssim,cwssim,fsim,dists", "--dists-source",
                          corpus.path("ml_src"), "--dists-adapted", corpus.path("ml_adp")});
  ASSERT_EQ(r.code, 0) << r.err;
  const MetricReport rep = load_report(dir / "fr" / "report.csv");
  EXPECT_EQ(rep.rows.size(), 4u);
  EXPECT_EQ(rep.metrics.size(), 6u);
  const json j = read_json(dir / "fr" / "report.json");
  EXPECT_EQ(j["params"]["ssim"]["window"], 11);
  EXPECT_TRUE(j["params"].contains("cwssim"));
}

TEST_F(Cli, EvalFullrefIdenticalDirsGiveInfPsnr) {
  const auto r = run_cli({"eval-fullref", "--source", corpus.path("source"), "--adapted",
                          corpus.path("source"), "--out", corpus.path("fr"), "--metrics",
                          "psnr,ssim"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir / "fr" / "report.csv");
  EXPECT_NE(csv.find("img0.png,inf,1\n"), std::string::npos) << csv;
}

TEST_F(Cli, EvalFullrefUnmatchedFiles) {
  std::filesystem::remove(dir / "adapted" / "img3.png");
  auto r = run_cli({"eval-fullref", "--source", corpus.path("source"), "--adapted",
                    corpus.path("adapted"), "--out", corpus.path("fr"), "--metrics", "mse"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("img3.png"), std::string::npos) << r.err;
  r = run_cli({"eval-fullref", "--source", corpus.path("source"), "--adapted",
               corpus.path("adapted"), "--out", corpus.path("fr"), "--metrics", "mse",
               "--allow-partial"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_report(dir / "fr" / "report.csv").rows.size(), 3u);
}

TEST_F(Cli, EvalFullrefPairsCsv) {
  std::ofstream(dir / "pairs.csv") << "source,adapted,pair_id\nimg0.png,img1.png,cross\n";
  const auto r = run_cli({"eval-fullref", "--source", corpus.path("source"), "--adapted",
                          corpus.path("adapted"), "--out", corpus.path("fr"), "--metrics", "mse",
                          "--pairs", corpus.path("pairs.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const MetricReport rep = load_report(dir / "fr" / "report.json");
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].pair_id, "cross");
}

TEST_F(Cli, DistsWithoutActivationsPointsAtExtractor) {
  const auto r = run_cli({"eval-fullref", "--source", corpus.path("source"), "--adapted",
                          corpus.path("adapted"), "--out", corpus.path("fr"), "--metrics",
                          "ssim,dists"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("vgg-multilayer"), std::string::npos) << r.err;
}

TEST_F(Cli, EvalDistResultsAndSeparateTiming) {
  const auto r = run_cli({"eval-dist", "--adapted-acts", corpus.path("acts/adapted.npy"),
                          "--target-acts", corpus.path("acts/target.npy"), "--source-acts",
                          corpus.path("acts/source.npy"), "--out", corpus.path("d"), "--metric",
                          "fid,kid", "--subsets", "5", "--subset-size", "50", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = read_json(dir / "d" / "results.json");
  EXPECT_TRUE(j["fid"]["improved"].get<bool>());
  EXPECT_EQ(j["kid"]["config"]["seed"], 3);
  const json t = read_json(dir / "d" / "timing.json");
  EXPECT_TRUE(t.contains("fid_adapted_seconds"));
}

TEST_F(Cli, EvalDistPrecisionsAgree) {
  double v[2];
  int k = 0;
  for (const char* prec : {"f32", "f64"}) {
    const std::string out = corpus.path(std::string("d_") + prec);
    const auto r = run_cli({"eval-dist", "--adapted-acts", corpus.path("acts/adapted.npy"),
                            "--target-acts", corpus.path("acts/target.npy"), "--out", out,
                            "--metric", "fid", "--precision", prec});
    ASSERT_EQ(r.code, 0) << r.err;
    v[k++] = read_json(std::filesystem::path(out) / "results.json")["fid"]["adapted"].get<double>();
    EXPECT_TRUE(read_json(std::filesystem::path(out) / "timing.json").contains("fid_adapted_seconds"));
  }
  EXPECT_LT(std::abs(v[0] - v[1]), 1e-2);
}

TEST_F(Cli, EvalDistBadSubsetSize) {
  const auto r = run_cli({"eval-dist", "--adapted-acts", corpus.path("acts/adapted.npy"),
                          "--target-acts", corpus.path("acts/target.npy"), "--out",
                          corpus.path("d"), "--metric", "kid", "--subset-size", "500"});
  EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, RegisterRecoversShifts) {
  const auto r = run_cli({"register", "--moving", corpus.path("adapted"), "--fixed",
                          corpus.path("source"), "--out", corpus.path("reg"), "--crop", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = read_json(dir / "reg" / "shifts.json");
  ASSERT_EQ(j["pairs"].size(), 4u);
  for (const auto& p : j["pairs"]) {
    EXPECT_EQ(p["dx"], -2);
    EXPECT_EQ(p["dy"], 1);
  }
  EXPECT_EQ(read_image(dir / "reg" / "registered" / "img0.png").width(), 54u);
}

TEST_F(Cli, CorrelateFiveMetrics) {
  ASSERT_EQ(run_cli({"eval-fullref", "--source", corpus.path("source"), "--adapted",
                     corpus.path("adapted"), "--out", corpus.path("fr"), "--metrics",
                     "mse,psnr,ssim,cwssim,fsim"})
                .code,
            0);
  const auto r = run_cli({"correlate", "--report", corpus.path("fr/report.csv"), "--out",
                          corpus.path("corr"), "--scatter", "ssim,cwssim"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = read_json(dir / "corr" / "correlation.json");
  ASSERT_EQ(j["matrix"].size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(j["matrix"][i][i], 1.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "corr" / "scatter.csv"));
}

TEST_F(Cli, DistortAndExtractToy) {
  auto r = run_cli({"distort", "--input", corpus.path("source"), "--out", corpus.path("blur"),
                    "--kind", "blur", "--sigma", "1.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "blur" / "img2.png"));
  r = run_cli({"distort", "--input", corpus.path("source"), "--out", corpus.path("x"), "--kind",
               "warp"});
  EXPECT_EQ(r.code, 1);
  r = run_cli({"extract-toy", "--input", corpus.path("source"), "--out", corpus.path("toy"),
               "--dim", "16"});
  ASSERT_EQ(r.code, 0) << r.err;
  const ActivationSet a = load_activations(dir / "toy" / "activations.npy");
  EXPECT_EQ(a.n(), 4u);
  EXPECT_EQ(a.d(), 16u);
}

TEST_F(Cli, RerunsAreByteIdentical) {
  const std::vector<std::vector<std::string>> commands = {
      {"eval-dist", "--adapted-acts", corpus.path("acts/adapted.npy"), "--target-acts",
       corpus.path("acts/target.npy"), "--out", corpus.path("run"), "--metric", "fid,kid",
       "--subsets", "4", "--subset-size", "30", "--seed", "9", "--workers", "3"},
      {"extract-toy", "--input", corpus.path("source"), "--out", corpus.path("run"), "--seed", "2"}};
  for (const auto& cmd : commands) {
    std::filesystem::remove_all(dir / "run");
    ASSERT_EQ(run_cli(cmd).code, 0);
    const auto first = snapshot(dir / "run");
    std::filesystem::remove_all(dir / "run");
    ASSERT_EQ(run_cli(cmd).code, 0);
    EXPECT_EQ(snapshot(dir / "run"), first) << cmd[0];
  }
}
