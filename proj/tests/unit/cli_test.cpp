#include <superdiff/eval.hpp>
#include <superdiff/ingest.hpp>
#include <superdiff/train.hpp>
#include <superdiff_tools/cli.hpp>
#include <superdiff_tools/synth.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace superdiff;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fixtures::TempDir("cli");
    tools::SynthParams p;
    p.n_images = 6;
    p.rows = 60;
    p.cols = 80;
    p.slic.n_target = 50;
    tools::write_synth_dataset(root(), p, 1);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }

  static fs::path root() { return dir_->path() / "data"; }
  static fs::path out(const std::string& name) { return dir_->path() / name; }

  static std::vector<std::string> base(const std::string& command, const std::string& output) {
    return {command, "--dataset", root().string(), "--n-superpixels", "50", "--color-spaces", "lab",
            "--sigma2", "10,15", "--output", out(output).string()};
  }

  static int run(std::vector<std::string> args, std::initializer_list<std::string> extra = {}) {
    args.insert(args.end(), extra.begin(), extra.end());
    return tools::run_cli(args);
  }

  static std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static json read_json(const fs::path& path) { return json::parse(slurp(path)); }

  static fixtures::TempDir* dir_;
};

fixtures::TempDir* CliTest::dir_ = nullptr;

}  // namespace

TEST_F(CliTest, TrainThenDetectMatchesInProcessInference) {
  ASSERT_EQ(run(base("train", "train")), 0);
  const fs::path weights = out("train") / "weights.json";
  const WeightVector w = load_weights(weights);
  EXPECT_EQ(w.n_columns(), 2 * 4 + 4);
  EXPECT_EQ(w.n_samples, 3);
  const json report = read_json(out("train") / "training_report.json");
  EXPECT_EQ(report["n_columns"], 12);
  const json manifest = read_json(out("train") / "manifest.json");
  EXPECT_EQ(manifest["command"], "train");
  EXPECT_EQ(manifest["settings_hash"], w.settings_hash);

  const fs::path image = root() / "images" / "img_0001.png";
  ASSERT_EQ(run(base("detect", "detect"), {"--weights", weights.string(), "--features-dir",
                                           (root() / "features").string(), image.string()}),
            0);
  const Grid<std::uint8_t> written = read_gray(out("detect") / "img_0001.png");

  const ImageSample sample = load_sample(image);
  SlicParams slic;
  slic.n_target = 50;
  const SuperpixelSegmentation seg = segment(sample, slic);
  GridSettings grid;
  grid.spaces = {ColorSpace::Lab};
  grid.sigma2_list = {10, 15};
  const FeatureBank features = load_feature_bank(root() / "features" / "img_0001.csv", seg);
  const ColumnBank bank = build_column_bank(seg, grid, &features);
  EXPECT_EQ(written.data, quantize(infer(bank, w, seg)).data);
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  ASSERT_EQ(run(base("train", "rep_w")), 0);
  const std::string weights = (out("rep_w") / "weights.json").string();
  ASSERT_EQ(run(base("evaluate", "rep_a"), {"--weights", weights}), 0);
  ASSERT_EQ(run(base("evaluate", "rep_b"), {"--weights", weights, "--jobs", "3"}), 0);
  const std::string a = slurp(out("rep_a") / "pr.csv");
  EXPECT_EQ(a.substr(0, 17), "recall,precision\n");
  EXPECT_EQ(a, slurp(out("rep_b") / "pr.csv"));
  EXPECT_EQ(slurp(out("rep_a") / "metrics.json"), slurp(out("rep_b") / "metrics.json"));
}

TEST_F(CliTest, ZeroWeightsGiveTheConstantMapBaseline) {
  ASSERT_EQ(run(base("train", "zero_src")), 0);
  WeightVector w = load_weights(out("zero_src") / "weights.json");
  w.w.setZero();
  save_weights(out("zero.json"), w);
  ASSERT_EQ(run(base("evaluate", "zero"), {"--weights", out("zero.json").string()}), 0);

  // A zero map thresholds at 0, so every pixel is predicted salient.
  const DatasetIndex index = index_dataset(root());
  const DatasetSplit split = split_by_parity(index);
  double precision = 0.0;
  for (const std::size_t i : split.test) {
    const Mask gt = binarize_mask(read_gray(*index.entries[i].mask_path));
    double fg = 0.0;
    for (const auto v : gt.data) fg += v;
    precision += fg / static_cast<double>(gt.size()) / static_cast<double>(split.test.size());
  }
  const json metrics = read_json(out("zero") / "metrics.json");
  EXPECT_NEAR(metrics["precision"].get<double>(), precision, 1e-12);
  EXPECT_NEAR(metrics["recall"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(metrics["f_measure"].get<double>(), f_beta(precision, 1.0), 1e-12);
}

TEST_F(CliTest, ConfigFileMatchesFlags) {
  const fs::path config = out("run.cfg");
  {
    std::ofstream cfg(config);
    cfg << "dataset_root=" << root().string() << "\n"
        << "n_superpixels=50\n"
        << "color_spaces=lab\n"
        << "sigma2_list=10,15\n"
        << "var_threshold=0.05\n";
  }
  ASSERT_EQ(run({"cose", "--config", config.string(), "--output", out("cfg").string()}), 0);
  ASSERT_EQ(run(base("cose", "flags")), 0);
  EXPECT_EQ(read_json(out("cfg") / "manifest.json")["settings_hash"],
            read_json(out("flags") / "manifest.json")["settings_hash"]);
  EXPECT_EQ(slurp(out("cfg") / "cose.csv"), slurp(out("flags") / "cose.csv"));
  EXPECT_EQ(slurp(out("flags") / "cose.csv").substr(0, 21), "seed_percent,accuracy");
}

TEST_F(CliTest, JobsFromEnvironment) {
  ::setenv("SUPERDIFF_JOBS", "2", 1);
  const int status = run(base("promote", "env"), {"--method", "noisy"});
  ::unsetenv("SUPERDIFF_JOBS");
  ASSERT_EQ(status, 0);
  const json manifest = read_json(out("env") / "manifest.json");
  EXPECT_EQ(manifest["config"]["jobs"], 2);
  EXPECT_EQ(manifest["n_images"], 6);
  EXPECT_TRUE(fs::exists(out("env") / "pr_after.csv"));
}

TEST_F(CliTest, Failures) {
  EXPECT_NE(run({"nonsense"}), 0);
  EXPECT_NE(run({"train", "--output", out("nodata").string()}), 0);
  EXPECT_NE(run(base("train", "badspace"), {"--color-spaces", "cmyk"}), 0);
  EXPECT_NE(run(base("detect", "missing"), {"--weights", (out("nope") / "w.json").string(),
                                           (root() / "images" / "img_0000.png").string()}),
            0);
}
