#include "certipose/binary_image.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace certipose {

namespace {
std::size_t wordsFor(std::size_t bits) { return (bits + 63) / 64; }
}  // namespace

BinaryImage::BinaryImage(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative image size");
  words_.assign(wordsFor(numPixels()), 0);
}

BinaryImage BinaryImage::fromWords(int width, int height, std::vector<std::uint64_t> words) {
  BinaryImage img(width, height);
  if (words.size() != img.words_.size())
    throw std::invalid_argument("fromWords: word count does not match image size");
  const std::size_t tail = img.numPixels() & 63;
  if (tail != 0 && (words.back() >> tail) != 0)
    throw std::invalid_argument("fromWords: padding bits must be zero");
  img.words_ = std::move(words);
  return img;
}

BinaryImage BinaryImage::filled(int width, int height) {
  BinaryImage img(width, height);
  std::fill(img.words_.begin(), img.words_.end(), ~std::uint64_t{0});
  const std::size_t tail = img.numPixels() & 63;
  if (tail != 0) img.words_.back() &= (std::uint64_t{1} << tail) - 1;
  return img;
}

void BinaryImage::checkSameShape(const BinaryImage& other) const {
  if (width_ != other.width_ || height_ != other.height_)
    throw std::invalid_argument("binary images differ in size");
}

std::size_t BinaryImage::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<Pixel> BinaryImage::onPixels() const {
  std::vector<Pixel> out;
  for (std::size_t wi = 0; wi < words_.size(); ++wi) {
    std::uint64_t w = words_[wi];
    while (w) {
      const int b = std::countr_zero(w);
      const std::size_t i = wi * 64 + static_cast<std::size_t>(b);
      out.push_back({static_cast<int>(i % width_) + 1, static_cast<int>(i / width_) + 1});
      w &= w - 1;
    }
  }
  return out;
}

std::size_t BinaryImage::countOutside(const BinaryImage& other) const {
  checkSameShape(other);
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size(); ++i)
    n += static_cast<std::size_t>(std::popcount(words_[i] & ~other.words_[i]));
  return n;
}

bool BinaryImage::intersects(const BinaryImage& other) const {
  checkSameShape(other);
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & other.words_[i]) return true;
  return false;
}

BinaryImage& BinaryImage::operator|=(const BinaryImage& other) {
  checkSameShape(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

BinaryImage& BinaryImage::operator&=(const BinaryImage& other) {
  checkSameShape(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

int BinaryImage::onNeighbours(int qx, int qy) const {
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      if ((dx || dy) && inBounds(qx + dx, qy + dy) && get(qx + dx, qy + dy)) ++n;
  return n;
}

// -- PBM ------------------------------------------------------------------------

void write_pbm(const BinaryImage& img, std::ostream& out, PbmEncoding enc) {
  if (enc == PbmEncoding::Ascii) {
    out << "P1\n" << img.width() << ' ' << img.height() << '\n';
    for (int qy = 1; qy <= img.height(); ++qy) {
      for (int qx = 1; qx <= img.width(); ++qx) {
        out << (img.get(qx, qy) ? '1' : '0');
        out << (qx == img.width() ? '\n' : ' ');
      }
    }
    return;
  }
  out << "P4\n" << img.width() << ' ' << img.height() << '\n';
  const int rowBytes = (img.width() + 7) / 8;
  std::vector<char> row(static_cast<std::size_t>(rowBytes));
  for (int qy = 1; qy <= img.height(); ++qy) {
    std::fill(row.begin(), row.end(), 0);
    for (int qx = 1; qx <= img.width(); ++qx)
      if (img.get(qx, qy)) row[(qx - 1) / 8] |= static_cast<char>(0x80 >> ((qx - 1) % 8));
    out.write(row.data(), rowBytes);
  }
}

namespace {
// Reads the next header token, skipping whitespace and '#' comments.
std::string headerToken(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parseDim(const std::string& tok) {
  try {
    const int v = std::stoi(tok);
    if (v <= 0) throw ImageFormatError("non-positive image dimension");
    return v;
  } catch (const std::logic_error&) {
    throw ImageFormatError("bad PBM dimension '" + tok + "'");
  }
}
}  // namespace

BinaryImage read_pbm(std::istream& in) {
  const std::string magic = headerToken(in);
  if (magic != "P1" && magic != "P4") throw ImageFormatError("not a PBM file (magic " + magic + ")");
  const int w = parseDim(headerToken(in));
  const int h = parseDim(headerToken(in));
  BinaryImage img(w, h);
  if (magic == "P1") {
    for (int qy = 1; qy <= h; ++qy)
      for (int qx = 1; qx <= w; ++qx) {
        int c;
        do {
          c = in.get();
          if (c == '#')
            while (c != EOF && c != '\n') c = in.get();
        } while (c != EOF && c != '0' && c != '1');
        if (c == EOF) throw ImageFormatError("truncated P1 data");
        if (c == '1') img.set(qx, qy);
      }
    return img;
  }
  const int rowBytes = (w + 7) / 8;
  std::vector<char> row(static_cast<std::size_t>(rowBytes));
  for (int qy = 1; qy <= h; ++qy) {
    if (!in.read(row.data(), rowBytes)) throw ImageFormatError("truncated P4 data");
    for (int qx = 1; qx <= w; ++qx)
      if (static_cast<unsigned char>(row[(qx - 1) / 8]) & (0x80 >> ((qx - 1) % 8)))
        img.set(qx, qy);
  }
  return img;
}

void save_pbm(const BinaryImage& img, const std::string& path, PbmEncoding enc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageFormatError("cannot write " + path);
  write_pbm(img, out, enc);
}

BinaryImage load_pbm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageFormatError("cannot read " + path);
  return read_pbm(in);
}

// -- noise ------------------------------------------------------------------------

BinaryImage apply_noise(const BinaryImage& img, std::size_t mu, std::mt19937_64& rng,
                        const BinaryImage& protectedPixels) {
  std::vector<std::size_t> free;
  free.reserve(img.numPixels());
  for (int qy = 1; qy <= img.height(); ++qy)
    for (int qx = 1; qx <= img.width(); ++qx)
      if (!protectedPixels.get(qx, qy))
        free.push_back(static_cast<std::size_t>(qy - 1) * img.width() + (qx - 1));
  const std::size_t flips = std::min(mu, free.size());
  BinaryImage out = img;
  for (std::size_t i = 0; i < flips; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, free.size() - 1);
    std::swap(free[i], free[pick(rng)]);
    const int qx = static_cast<int>(free[i] % img.width()) + 1;
    const int qy = static_cast<int>(free[i] / img.width()) + 1;
    out.set(qx, qy, !out.get(qx, qy));
  }
  return out;
}

BinaryImage denoise(const BinaryImage& img) {
  BinaryImage cur = img;
  for (;;) {
    std::vector<Pixel> drop;
    for (const Pixel& p : cur.onPixels())
      if (cur.onNeighbours(p.qx, p.qy) == 0) drop.push_back(p);
    if (drop.empty()) return cur;
    for (const Pixel& p : drop) cur.set(p.qx, p.qy, false);
  }
}

}  // namespace certipose
