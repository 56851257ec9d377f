#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "certipose/binary_image.hpp"

using namespace certipose;

namespace {
BinaryImage randomImage(std::mt19937_64& rng, int w, int h, double density = 0.5) {
  BinaryImage img(w, h);
  std::bernoulli_distribution on(density);
  for (int qy = 1; qy <= h; ++qy)
    for (int qx = 1; qx <= w; ++qx)
      if (on(rng)) img.set(qx, qy);
  return img;
}
}  // namespace

TEST(BinaryImage, IndexingIsRowMajorOneBased) {
  BinaryImage img(7, 3);
  img.set(1, 1);
  img.set(7, 3);
  img.set(2, 2);
  EXPECT_TRUE(img.get(1, 1));
  EXPECT_EQ(img.words()[0] & 1u, 1u);
  EXPECT_TRUE((img.words()[0] >> 8) & 1u);   // (2,2) -> 7 + 1
  EXPECT_TRUE((img.words()[0] >> 20) & 1u);  // (7,3) -> 14 + 6
  EXPECT_EQ(img.count(), 3u);
  const auto px = img.onPixels();
  ASSERT_EQ(px.size(), 3u);
  EXPECT_EQ(px[0], (Pixel{1, 1}));
  EXPECT_EQ(px[1], (Pixel{2, 2}));
  EXPECT_EQ(px[2], (Pixel{7, 3}));
}

TEST(BinaryImage, SetAlgebra) {
  std::mt19937_64 rng(1);
  const BinaryImage a = randomImage(rng, 67, 13);
  const BinaryImage b = randomImage(rng, 67, 13);
  EXPECT_EQ(a | b, b | a);
  EXPECT_EQ(a | a, a);
  EXPECT_EQ((a | b) | a, a | b);
  EXPECT_TRUE((a & b).subsetOf(a));
  EXPECT_TRUE(a.subsetOf(a | b));
  std::size_t outside = 0;
  for (const auto& p : a.onPixels())
    if (!b.get(p)) ++outside;
  EXPECT_EQ(a.countOutside(b), outside);
  EXPECT_EQ(a.intersects(b), (a & b).count() > 0);
  EXPECT_THROW(a | BinaryImage(3, 3), std::invalid_argument);
}

TEST(BinaryImage, FilledKeepsPaddingClear) {
  const BinaryImage f = BinaryImage::filled(10, 7);
  EXPECT_EQ(f.count(), 70u);
  EXPECT_THROW(BinaryImage::fromWords(10, 7, {0, ~0ULL}), std::invalid_argument);
}

TEST(Pbm, RoundTripBothEncodings) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = std::uniform_int_distribution<int>(1, 40)(rng);
    const int h = std::uniform_int_distribution<int>(1, 30)(rng);
    const BinaryImage img = randomImage(rng, w, h);
    for (auto enc : {PbmEncoding::Ascii, PbmEncoding::Packed}) {
      std::stringstream ss;
      write_pbm(img, ss, enc);
      const std::string first = ss.str();
      const BinaryImage back = read_pbm(ss);
      ASSERT_EQ(back, img);
      std::stringstream again;
      write_pbm(back, again, enc);
      ASSERT_EQ(again.str(), first);
    }
  }
}

TEST(Pbm, ReadsCommentsAndRejectsGarbage) {
  std::stringstream ss("P1\n# a comment\n3 2\n1 0 1\n0 1 0\n");
  const BinaryImage img = read_pbm(ss);
  EXPECT_TRUE(img.get(1, 1));
  EXPECT_FALSE(img.get(2, 1));
  EXPECT_TRUE(img.get(2, 2));
  std::stringstream bad("P5\n3 2\n");
  EXPECT_THROW(read_pbm(bad), ImageFormatError);
  std::stringstream truncated("P4\n16 2\n\x01");
  EXPECT_THROW(read_pbm(truncated), ImageFormatError);
}

TEST(Noise, ZeroBudgetIsIdentity) {
  std::mt19937_64 rng(3);
  const BinaryImage img = randomImage(rng, 20, 20);
  EXPECT_EQ(apply_noise(img, 0, rng, BinaryImage(20, 20)), img);
}

TEST(Noise, FlipsExactlyBudgetAndRespectsProtection) {
  std::mt19937_64 rng(4);
  const BinaryImage img = randomImage(rng, 30, 20, 0.3);
  BinaryImage prot(30, 20);
  for (const auto& p : img.onPixels())
    if (p.qx % 2 == 0) prot.set(p.qx, p.qy);
  const BinaryImage noisy = apply_noise(img, 60, rng, prot);
  BinaryImage diff(30, 20);
  for (int qy = 1; qy <= 20; ++qy)
    for (int qx = 1; qx <= 30; ++qx)
      if (noisy.get(qx, qy) != img.get(qx, qy)) diff.set(qx, qy);
  EXPECT_EQ(diff.count(), 60u);
  EXPECT_FALSE(diff.intersects(prot));
}

TEST(Noise, FullBudgetReachesEverything) {
  std::mt19937_64 rng(5);
  const BinaryImage empty(6, 5);
  EXPECT_EQ(apply_noise(empty, 30, rng, empty), BinaryImage::filled(6, 5));
}

TEST(Denoise, CleanImageUnchanged) {
  BinaryImage img(10, 10);
  for (int qy = 3; qy <= 6; ++qy)
    for (int qx = 2; qx <= 8; ++qx) img.set(qx, qy);
  EXPECT_EQ(denoise(img), img);
}

TEST(Denoise, RemovesIsolatedPixels) {
  BinaryImage img(10, 10);
  img.set(1, 1);
  img.set(5, 5);
  img.set(6, 6);
  img.set(9, 2);
  const BinaryImage d = denoise(img);
  EXPECT_FALSE(d.get(1, 1));
  EXPECT_FALSE(d.get(9, 2));
  EXPECT_TRUE(d.get(5, 5));
  EXPECT_TRUE(d.get(6, 6));
  EXPECT_EQ(denoise(d), d);
}
