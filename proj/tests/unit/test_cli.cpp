#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "certipose/cli.hpp"

using namespace certipose;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "certipose");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("certipose_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(path("cfg.json")) << R"({"target": "stripes", "partition": {"epsilonRate": 0.25},
                                           "samples": 4, "seed": 3, "volumeSamples": 2000})";
    unsetenv("CERTIPOSE_STORE");
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(CliConfig, DefaultsAreTheDeskScenario) {
  const ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.camera, (CameraParams{125, 100, 100}));
  EXPECT_EQ(c.target, "stripes");
  const ExperimentConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(back.space, c.space);
  EXPECT_EQ(back.partition, c.partition);
}

TEST(CliConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json(nlohmann::json{{"nope", 1}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"camera", {{"fov", 1}}}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"seed", "x"}}), ConfigError);
  ExperimentConfig c = config_from_json(nlohmann::json{{"target", "missing-target"}});
  EXPECT_THROW(c.validate(), ConfigError);
  c = config_from_json(nlohmann::json{{"partition", {{"splitDims", 5}}}});
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST_F(CliTest, TargetsListsBuiltins) {
  const CliResult r = cli({"targets", "--out", path("t")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("stripes"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("t/sign.json")));
}

TEST_F(CliTest, RenderAndDenoiseRoundTrip) {
  ASSERT_EQ(cli({"render", "--pose", "0,0,5,0.2,0,0", "--out", path("a.pbm")}).code, kExitOk);
  ASSERT_EQ(cli({"denoise", path("a.pbm"), "--out", path("b.pbm")}).code, kExitOk);
  EXPECT_EQ(slurp(path("a.pbm")), slurp(path("b.pbm")));
}

TEST_F(CliTest, RenderSamplesIntoDirectory) {
  const CliResult r = cli({"--config", path("cfg.json"), "render", "--out", path("imgs"), "--noise", "20"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(path("imgs/sample_0003.pbm")));
  EXPECT_TRUE(fs::exists(path("imgs/poses.csv")));
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, kExitConfig);
  EXPECT_EQ(cli({"render", "--pose", "1,2,3", "--out", path("x.pbm")}).code, kExitConfig);
  EXPECT_EQ(cli({"estimate", path("missing.pbm"), "--store", path("st")}).code, kExitConfig);
  std::ofstream(path("bad.json")) << "{ not json";
  EXPECT_EQ(cli({"--config", path("bad.json"), "partition"}).code, kExitConfig);
  EXPECT_EQ(cli({"precompute"}).code, kExitConfig);  // no store anywhere
}

TEST_F(CliTest, PartitionWritesBoxes) {
  const CliResult r = cli({"--config", path("cfg.json"), "partition", "--out", path("boxes.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("boxes.json")));
  EXPECT_GT(j.at("count").get<int>(), 1);
  EXPECT_EQ(j.at("boxes").size(), j.at("count").get<std::size_t>());
}

TEST_F(CliTest, PrecomputeEstimateExperiment) {
  ASSERT_EQ(cli({"--config", path("cfg.json"), "precompute", "--store", path("st")}).code, kExitOk);
  ASSERT_EQ(cli({"render", "--pose", "0.1,-0.1,5,0.2,0.01,0", "--out", path("a.pbm")}).code, kExitOk);

  // store taken from the environment
  setenv("CERTIPOSE_STORE", path("st").c_str(), 1);
  CliResult r = cli({"--config", path("cfg.json"), "estimate", path("a.pbm"), "--out", path("e.json"),
               "--emit-overlay", path("ov.json"), "--truth", "0.1,-0.1,5,0.2,0.01,0"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto e = nlohmann::json::parse(slurp(path("e.json")));
  EXPECT_GE(e.at("summary").at("candidatesAfterFilter").get<int>(), 1);
  EXPECT_TRUE(e.at("pieces").at(0).contains("Gdiag"));
  EXPECT_FALSE(nlohmann::json::parse(slurp(path("ov.json"))).at("candidates").empty());

  // a pose far from the image cannot be in the estimate
  r = cli({"--config", path("cfg.json"), "estimate", path("a.pbm"), "--truth", "-0.5,0.5,4,0,0.08,0.08"});
  EXPECT_EQ(r.code, kExitSoundness);

  r = cli({"--config", path("cfg.json"), "experiment", "--out", path("x.csv"), "--zero-timings"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = slurp(path("x.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "sample,contained,candidatesAfterFilter,timeFilter_s,timeRefine_s,normVolFilter,normVolOurs");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(csv.find("false"), std::string::npos);
  ASSERT_EQ(cli({"--config", path("cfg.json"), "experiment", "--out", path("y.csv"), "--zero-timings"}).code, kExitOk);
  EXPECT_EQ(csv, slurp(path("y.csv")));

  r = cli({"--config", path("cfg.json"), "experiment", "--out", path("n.csv"), "--noise", "100", "--denoise",
           "--threads", "1"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
}

TEST_F(CliTest, StoreMismatchExitsThree) {
  ASSERT_EQ(cli({"--config", path("cfg.json"), "precompute", "--store", path("st")}).code, kExitOk);
  ASSERT_EQ(cli({"render", "--pose", "0,0,5,0.2,0,0", "--out", path("a.pbm")}).code, kExitOk);
  std::ofstream(path("other.json")) << R"({"target": "sign"})";
  EXPECT_EQ(cli({"--config", path("other.json"), "estimate", path("a.pbm"), "--store", path("st")}).code,
            kExitStore);
  std::ofstream(path("st/manifest.json"), std::ios::app) << "garbage";
  EXPECT_EQ(cli({"--config", path("cfg.json"), "estimate", path("a.pbm"), "--store", path("st")}).code,
            kExitStore);
}
