#pragma once

// Bit-packed binary images. Pixels are addressed 1-based as (qx, qy) in
// [1, width] x [1, height]; bit (qy-1)*width + (qx-1) of the flat row-major
// bit string holds the pixel. Bits past width*height are always zero.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace certipose {

struct Pixel {
  int qx = 0;
  int qy = 0;
  auto operator<=>(const Pixel&) const = default;
};

class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int width, int height);
  static BinaryImage fromWords(int width, int height, std::vector<std::uint64_t> words);
  static BinaryImage filled(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t numPixels() const { return static_cast<std::size_t>(width_) * height_; }
  const std::vector<std::uint64_t>& words() const { return words_; }

  bool inBounds(int qx, int qy) const {
    return qx >= 1 && qx <= width_ && qy >= 1 && qy <= height_;
  }
  bool get(int qx, int qy) const {
    const std::size_t i = bitIndex(qx, qy);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(int qx, int qy, bool on = true) {
    const std::size_t i = bitIndex(qx, qy);
    if (on)
      words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    else
      words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }
  bool get(Pixel p) const { return get(p.qx, p.qy); }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<Pixel> onPixels() const;

  /// Number of on-pixels of *this that are off in other.
  std::size_t countOutside(const BinaryImage& other) const;
  bool intersects(const BinaryImage& other) const;
  bool subsetOf(const BinaryImage& other) const { return countOutside(other) == 0; }

  BinaryImage& operator|=(const BinaryImage& other);
  BinaryImage& operator&=(const BinaryImage& other);
  friend BinaryImage operator|(BinaryImage a, const BinaryImage& b) { return a |= b; }
  friend BinaryImage operator&(BinaryImage a, const BinaryImage& b) { return a &= b; }
  bool operator==(const BinaryImage& other) const = default;

  /// Number of 8-neighbours of (qx, qy) that are on.
  int onNeighbours(int qx, int qy) const;

 private:
  std::size_t bitIndex(int qx, int qy) const {
    return static_cast<std::size_t>(qy - 1) * width_ + static_cast<std::size_t>(qx - 1);
  }
  void checkSameShape(const BinaryImage& other) const;

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> words_;
};

class ImageFormatError : public std::runtime_error {
 public:
  explicit ImageFormatError(const std::string& what) : std::runtime_error(what) {}
};

enum class PbmEncoding { Ascii, Packed };  // P1, P4

void write_pbm(const BinaryImage& img, std::ostream& out, PbmEncoding enc = PbmEncoding::Packed);
BinaryImage read_pbm(std::istream& in);
void save_pbm(const BinaryImage& img, const std::string& path,
              PbmEncoding enc = PbmEncoding::Packed);
BinaryImage load_pbm(const std::string& path);

/// Flips exactly min(mu, #unprotected) distinct unprotected pixels chosen uniformly.
BinaryImage apply_noise(const BinaryImage& img, std::size_t mu, std::mt19937_64& rng,
                        const BinaryImage& protectedPixels);

/// Removes on-pixels without any on 8-neighbour, repeated to a fixpoint.
BinaryImage denoise(const BinaryImage& img);

}  // namespace certipose
