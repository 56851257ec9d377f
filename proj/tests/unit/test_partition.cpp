#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "certipose/partition.hpp"
#include "../support/random_sets.hpp"

using namespace certipose;
using namespace certipose::testing;
namespace fs = std::filesystem;

namespace {

const CameraParams kCam{125, 100, 100};

PoseSpace smallSpace() {
  Vec lo(6), hi(6);
  lo << -0.1, -0.1, 4.8, 0.1, -0.02, -0.02;
  hi << 0.1, 0.1, 5.2, 0.2, 0.02, 0.02;
  return {Interval(lo, hi)};
}

PartitionConfig smallConfig() {
  PartitionConfig cfg;
  cfg.epsilonRate = 0.03;
  cfg.maxDepth = 4;
  return cfg;
}

Vec samplePose(std::mt19937_64& rng, const Interval& box) {
  Vec p(6);
  for (int i = 0; i < 6; ++i) p(i) = uniform(rng, box.lo(i), box.hi(i));
  return p;
}

fs::path freshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("certipose_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<char> readBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const CandidateStore& sharedStore() {
  static const CandidateStore store =
      precompute_store(builtin_target("stripes"), kCam, smallSpace(), smallConfig());
  return store;
}

}  // namespace

TEST(Partition, ValidatesConfig) {
  PartitionConfig cfg;
  cfg.splitDims = 4;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.splitDims = 6;
  cfg.epsilonRate = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  PoseSpace s = smallSpace();
  s.bounds.hi(3) = s.bounds.lo(3);
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Partition, InfiniteEpsilonGivesOneCandidate) {
  PartitionConfig cfg;
  cfg.epsilonRate = std::numeric_limits<double>::infinity();
  const auto boxes = partition(builtin_target("stripes"), kCam, smallSpace(), cfg);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].box.lo, smallSpace().bounds.lo);
  EXPECT_EQ(boxes[0].box.hi, smallSpace().bounds.hi);
}

TEST(Partition, LeavesMeetThresholdUnlessCapped) {
  const auto& store = sharedStore();
  EXPECT_GT(store.size(), 1u);
  for (const auto& c : store.candidates) {
    if (c.depthCapped) {
      EXPECT_EQ(c.depth, smallConfig().maxDepth);
      continue;
    }
    EXPECT_LE(c.artifacts.errorRatio, smallConfig().epsilonRate);
    // recomputing the leaf gives the same ratio
    const auto art = forward_enclose(builtin_target("stripes"), c.artifacts.pose, kCam);
    EXPECT_EQ(art.errorRatio, c.artifacts.errorRatio);
  }
}

TEST(Partition, LeavesTileTheSpace) {
  const auto& store = sharedStore();
  double total = 0;
  for (const auto& c : store.candidates) total += box_volume(c.artifacts.pose.box);
  EXPECT_NEAR(total, smallSpace().volume(), 1e-12 * smallSpace().volume());
  std::mt19937_64 rng(5);
  for (int s = 0; s < 500; ++s) {
    const Vec p = samplePose(rng, smallSpace().bounds);
    int hits = 0;
    for (const auto& c : store.candidates) hits += c.artifacts.pose.box.contains(p);
    EXPECT_EQ(hits, 1);
    const std::size_t at = store.locate(p);
    ASSERT_LT(at, store.size());
    EXPECT_TRUE(store.candidates[at].artifacts.pose.box.contains(p));
  }
}

TEST(Partition, LocateBreaksTiesToSmallestBox) {
  const auto& store = sharedStore();
  // a shared face: the centre of the space lies on the first cut
  const Vec c = smallSpace().bounds.center();
  const std::size_t at = store.locate(c);
  ASSERT_LT(at, store.size());
  for (const auto& cand : store.candidates)
    if (cand.artifacts.pose.box.contains(c))
      EXPECT_FALSE(std::lexicographical_compare(cand.artifacts.pose.box.lo.begin(), cand.artifacts.pose.box.lo.end(),
                                                store.candidates[at].artifacts.pose.box.lo.begin(),
                                                store.candidates[at].artifacts.pose.box.lo.end()));
}

TEST(Partition, DroppedBoxesAreInvisible) {
  // the target leaves the field of view for large lateral offsets
  Vec lo(6), hi(6);
  lo << 1.0, -0.1, 4.0, 0.0, -0.02, -0.02;
  hi << 5.0, 0.1, 4.4, 0.1, 0.02, 0.02;
  const PoseSpace space{Interval(lo, hi)};
  PartitionConfig cfg;
  cfg.epsilonRate = 1e-3;
  cfg.maxDepth = 6;
  cfg.splitDims = 1;
  const Target t = builtin_target("stripes");
  CandidateStore store = precompute_store(t, kCam, space, cfg);
  EXPECT_GT(store.size(), 0u);
  double kept = 0;
  for (const auto& c : store.candidates) kept += box_volume(c.artifacts.pose.box);
  EXPECT_LT(kept, space.volume());
  std::mt19937_64 rng(9);
  int outside = 0;
  for (int s = 0; s < 400; ++s) {
    const Vec p = samplePose(rng, space.bounds);
    if (store.locate(p) != store.size()) continue;
    ++outside;
    EXPECT_EQ(t.render(kCam, Pose::fromVector(p)).count(), 0u);
  }
  EXPECT_GT(outside, 0);
}

TEST(Partition, BehindCameraBoxesAreKeptConservatively) {
  Vec lo(6), hi(6);
  lo << -0.1, -0.1, -1.0, 0.0, -0.02, -0.02;
  hi << 0.1, 0.1, 5.0, 0.1, 0.02, 0.02;
  PartitionConfig cfg;
  cfg.epsilonRate = 10;
  cfg.maxDepth = 2;
  const auto leaves = partition_space(builtin_target("stripes"), kCam, {Interval(lo, hi)}, cfg);
  bool sawConservative = false;
  for (const auto& c : leaves) {
    if (!c.artifacts.conservative) continue;
    sawConservative = true;
    EXPECT_TRUE(c.depthCapped);
    EXPECT_EQ(c.artifacts.outerImage.count(), kCam.width * 1u * kCam.height);
  }
  EXPECT_TRUE(sawConservative);
}

TEST(Partition, SensitivityZeroForFixedDimension) {
  Vec lo(6), hi(6);
  lo << -0.1, -0.1, 5.0, 0.1, -0.02, -0.02;
  hi << 0.1, 0.1, 5.0, 0.2, 0.02, 0.02;
  const Target t = builtin_target("stripes");
  const auto art = forward_enclose(t, UncertainPose(Interval(lo, hi)), kCam);
  const auto s = sensitivity_scores(t, kCam, art);
  EXPECT_EQ(s[2], 0.0);
  for (int j : {0, 1, 3, 4, 5}) EXPECT_GT(s[static_cast<std::size_t>(j)], 0.0);
  const auto dims = split_dimensions(s, art.pose, 6);
  EXPECT_EQ(dims.size(), 5u);
  EXPECT_TRUE(std::find(dims.begin(), dims.end(), 2) == dims.end());
}

TEST(Partition, SensitivityFavoursTranslationForPureShift) {
  // rotations fixed: only x, y, z move the image
  Vec lo(6), hi(6);
  lo << -0.2, -0.2, 4.9, 0.1, 0.0, 0.0;
  hi << 0.2, 0.2, 5.1, 0.1, 0.0, 0.0;
  const Target t = builtin_target("sign");
  const auto art = forward_enclose(t, UncertainPose(Interval(lo, hi)), kCam);
  const auto s = sensitivity_scores(t, kCam, art);
  EXPECT_GT(s[0], 0.0);
  EXPECT_GT(s[1], 0.0);
  for (int j : {3, 4, 5}) EXPECT_EQ(s[static_cast<std::size_t>(j)], 0.0);
  const auto dims = split_dimensions(s, art.pose, 2);
  EXPECT_EQ(dims, (std::vector<int>{0, 1}));
}

TEST(Partition, SplitDimensionsOrderAndTies) {
  UncertainPose U(Interval(-Vec::Ones(6), Vec::Ones(6)));
  std::array<double, kPoseDim> s{1, 3, 3, 0, 2, 0};
  EXPECT_EQ(split_dimensions(s, U, 1), (std::vector<int>{1}));
  EXPECT_EQ(split_dimensions(s, U, 2), (std::vector<int>{1, 2}));
  EXPECT_EQ(split_dimensions(s, U, 3), (std::vector<int>{1, 2, 4}));
}

TEST(Store, CandidateBlobRoundTrip) {
  for (const auto& c : sharedStore().candidates) {
    const auto blob = encode_candidate(c);
    const StoredCandidate back = decode_candidate(blob);
    EXPECT_EQ(encode_candidate(back), blob);
    EXPECT_EQ(back.artifacts.outerImage, c.artifacts.outerImage);
    EXPECT_EQ(back.artifacts.errorRatio, c.artifacts.errorRatio);
  }
}

TEST(Store, TruncatedBlobIsCorrupt) {
  auto blob = encode_candidate(sharedStore().candidates.front());
  blob.resize(blob.size() / 2);
  EXPECT_THROW(decode_candidate(blob), StoreCorrupt);
}

TEST(Store, SaveLoadSaveIsByteIdentical) {
  const fs::path a = freshDir("a"), b = freshDir("b");
  save_store(sharedStore(), a);
  const CandidateStore loaded = load_store(a);
  EXPECT_EQ(loaded.size(), sharedStore().size());
  EXPECT_EQ(loaded.camera, kCam);
  EXPECT_EQ(loaded.space, smallSpace());
  EXPECT_EQ(loaded.partition, smallConfig());
  save_store(loaded, b);
  EXPECT_EQ(readBytes(a / "manifest.json"), readBytes(b / "manifest.json"));
  for (const auto& entry : fs::directory_iterator(a / "candidates"))
    EXPECT_EQ(readBytes(entry.path()), readBytes(b / "candidates" / entry.path().filename()));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Store, TamperedByteIsCorrupt) {
  const fs::path dir = freshDir("tamper");
  save_store(sharedStore(), dir);
  const fs::path victim = dir / "candidates" / "000000.bin";
  auto bytes = readBytes(victim);
  bytes[bytes.size() / 2] ^= 0x01;
  std::ofstream(victim, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  EXPECT_THROW(load_store(dir), StoreCorrupt);
  fs::remove_all(dir);
}

TEST(Store, MissingManifestIsCorrupt) {
  EXPECT_THROW(load_store(freshDir("missing")), StoreCorrupt);
}

TEST(Store, RequireChecksCameraAndTarget) {
  const auto& store = sharedStore();
  EXPECT_NO_THROW(store.require(kCam, builtin_target("stripes")));
  EXPECT_THROW(store.require(kCam, builtin_target("sign")), StoreMismatch);
  EXPECT_THROW(store.require(CameraParams{120, 100, 100}, builtin_target("stripes")), StoreMismatch);
}

TEST(Store, ParallelAndSerialPrecomputeAgree) {
  const Target t = builtin_target("stripes");
  const auto serial = precompute_store(t, kCam, smallSpace(), smallConfig(), Execution::Serial);
  ASSERT_EQ(serial.size(), sharedStore().size());
  for (std::size_t c = 0; c < serial.size(); ++c)
    EXPECT_EQ(encode_candidate(serial.candidates[c]), encode_candidate(sharedStore().candidates[c]));
}
