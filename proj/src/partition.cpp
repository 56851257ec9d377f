#include "certipose/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace certipose {

namespace fs = std::filesystem;
using Index = Eigen::Index;

void PoseSpace::validate() const {
  if (bounds.dim() != kPoseDim) throw std::invalid_argument("pose space must have 6 dimensions");
  for (Index i = 0; i < kPoseDim; ++i)
    if (!std::isfinite(bounds.lo(i)) || !std::isfinite(bounds.hi(i)) || !(bounds.lo(i) < bounds.hi(i)))
      throw std::invalid_argument("pose space bounds need lo < hi in dimension " + std::to_string(i));
}

void PartitionConfig::validate() const {
  if (!(epsilonRate > 0)) throw std::invalid_argument("epsilonRate must be positive");
  if (maxDepth < 0) throw std::invalid_argument("maxDepth must be non-negative");
  if (splitDims != 1 && splitDims != 2 && splitDims != 3 && splitDims != 6)
    throw std::invalid_argument("splitDims must be 1, 2, 3 or 6");
}

// -- sensitivity -------------------------------------------------------------

namespace {

double totalErrorRadius(const Target& target, const CameraParams& cam, const UncertainPose& U) {
  double sum = 0.0;
  for (const auto& poly : enclose_vertices(target, U, cam))
    for (const auto& set : poly) sum += VertexEnclosure::fromSet(set, cam).errorRadius();
  return sum;
}

}  // namespace

std::array<double, kPoseDim> sensitivity_scores(const Target& target, const CameraParams& cam,
                                                const PoseCandidateArtifacts& art) {
  std::array<double, kPoseDim> s{};
  const Vec r = art.pose.radius();
  if (art.conservative) {
    // no enclosure to analyse: cut depth first, then the widest dimensions
    for (int j = 0; j < kPoseDim; ++j) s[static_cast<std::size_t>(j)] = r(j);
    s[2] = r(2) > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    return s;
  }
  const std::size_t n = art.numVertices();
  if (n == 0) return s;
  double fullError = 0.0;
  for (const auto& poly : art.vertices)
    for (const auto& v : poly) {
      fullError += v.errorRadius();
      for (int j = 0; j < kPoseDim; ++j) s[static_cast<std::size_t>(j)] += v.linGen.col(j).cwiseAbs().sum();
    }
  for (int j = 0; j < kPoseDim; ++j) {
    if (r(j) == 0.0) {
      s[static_cast<std::size_t>(j)] = 0.0;
      continue;
    }
    Interval collapsed = art.pose.box;
    collapsed.lo(j) = collapsed.hi(j) = art.pose.center()(j);
    const double drop = fullError - totalErrorRadius(target, cam, UncertainPose(collapsed));
    s[static_cast<std::size_t>(j)] += std::max(0.0, drop);
    s[static_cast<std::size_t>(j)] /= static_cast<double>(n);
  }
  return s;
}

std::vector<int> split_dimensions(const std::array<double, kPoseDim>& scores, const UncertainPose& U,
                                  int count) {
  const Vec r = U.radius();
  std::vector<int> dims;
  for (int j = 0; j < kPoseDim; ++j)
    if (r(j) > 0) dims.push_back(j);
  std::stable_sort(dims.begin(), dims.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  if (static_cast<int>(dims.size()) > count) dims.resize(static_cast<std::size_t>(count));
  std::sort(dims.begin(), dims.end());
  return dims;
}

// -- partitioning ------------------------------------------------------------

namespace {

struct Node {
  Interval box;
  int depth = 0;
};

enum class Outcome { Leaf, Split, Drop };

struct NodeResult {
  Outcome outcome = Outcome::Drop;
  StoredCandidate leaf;
  std::vector<int> splitDims;
};

NodeResult processNode(const Target& target, const CameraParams& cam, const PartitionConfig& cfg,
                       const Node& node) {
  NodeResult res;
  const UncertainPose U(node.box);
  PoseCandidateArtifacts art;
  try {
    art = forward_enclose(target, U, cam, cfg.hull, Execution::Serial);
  } catch (const InvisibleCandidate& e) {
    if (e.reason == InvisibleCandidate::Reason::EmptyImage) return res;
    art = conservative_artifacts(U, target, cam);
  }
  const bool capped = node.depth >= cfg.maxDepth;
  if (capped || (!art.conservative && art.errorRatio <= cfg.epsilonRate)) {
    res.outcome = Outcome::Leaf;
    res.leaf.depth = node.depth;
    res.leaf.depthCapped = art.conservative || art.errorRatio > cfg.epsilonRate;
    res.leaf.artifacts = std::move(art);
    return res;
  }
  res.splitDims = split_dimensions(sensitivity_scores(target, cam, art), U, cfg.splitDims);
  if (res.splitDims.empty()) {
    // a point box that still fails the threshold cannot be refined further
    res.outcome = Outcome::Leaf;
    res.leaf.depth = node.depth;
    res.leaf.depthCapped = true;
    res.leaf.artifacts = std::move(art);
    return res;
  }
  res.outcome = Outcome::Split;
  return res;
}

void appendChildren(const Node& node, const std::vector<int>& dims, std::vector<Node>& out) {
  const std::size_t k = dims.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    Node child{node.box, node.depth + 1};
    for (std::size_t b = 0; b < k; ++b) {
      const int j = dims[b];
      const double mid = 0.5 * (node.box.lo(j) + node.box.hi(j));
      if (mask & (std::size_t{1} << b))
        child.box.lo(j) = mid;
      else
        child.box.hi(j) = mid;
    }
    out.push_back(std::move(child));
  }
}

}  // namespace

std::vector<StoredCandidate> partition_space(const Target& target, const CameraParams& cam,
                                             const PoseSpace& space, const PartitionConfig& cfg,
                                             Execution exec) {
  cam.validate();
  space.validate();
  cfg.validate();
  std::vector<StoredCandidate> leaves;
  std::vector<Node> level{{space.bounds, 0}};
  while (!level.empty()) {
    std::vector<NodeResult> results(level.size());
    const auto n = static_cast<std::ptrdiff_t>(level.size());
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
      for (std::ptrdiff_t i = 0; i < n; ++i)
        results[static_cast<std::size_t>(i)] = processNode(target, cam, cfg, level[static_cast<std::size_t>(i)]);
    } else {
      for (std::ptrdiff_t i = 0; i < n; ++i)
        results[static_cast<std::size_t>(i)] = processNode(target, cam, cfg, level[static_cast<std::size_t>(i)]);
    }
    std::vector<Node> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (results[i].outcome == Outcome::Leaf) leaves.push_back(std::move(results[i].leaf));
      if (results[i].outcome == Outcome::Split) appendChildren(level[i], results[i].splitDims, next);
    }
    level = std::move(next);
  }
  return leaves;
}

std::vector<UncertainPose> partition(const Target& target, const CameraParams& cam,
                                     const PoseSpace& space, const PartitionConfig& cfg) {
  std::vector<UncertainPose> boxes;
  for (const auto& c : partition_space(target, cam, space, cfg)) boxes.push_back(c.artifacts.pose);
  return boxes;
}

// -- store -------------------------------------------------------------------

std::size_t CandidateStore::locate(const Vec& pose) const {
  std::size_t best = candidates.size();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Interval& box = candidates[c].artifacts.pose.box;
    if (!box.contains(pose)) continue;
    if (best == candidates.size() ||
        std::lexicographical_compare(box.lo.begin(), box.lo.end(),
                                     candidates[best].artifacts.pose.box.lo.begin(),
                                     candidates[best].artifacts.pose.box.lo.end()))
      best = c;
  }
  return best;
}

void CandidateStore::require(const CameraParams& cam, const Target& target) const {
  if (!(cam == camera))
    throw StoreMismatch("store was built for a different camera");
  if (target.fingerprint() != targetFingerprint)
    throw StoreMismatch("store was built for target " + targetName + " (" + targetFingerprint +
                        "), got " + target.fingerprint());
}

CandidateStore precompute_store(const Target& target, const CameraParams& cam, const PoseSpace& space,
                                const PartitionConfig& cfg, Execution exec) {
  CandidateStore s;
  s.camera = cam;
  s.targetName = target.name();
  s.targetFingerprint = target.fingerprint();
  s.space = space;
  s.partition = cfg;
  s.candidates = partition_space(target, cam, space, cfg, exec);
  return s;
}

namespace {

constexpr char kMagic[4] = {'C', 'P', 'C', 'B'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void size(Index n) { u32(static_cast<std::uint32_t>(n)); }
  template <class Derived>
  void doubles(const Eigen::DenseBase<Derived>& m) {  // column-major
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) f64(m(i, j));
  }
  void image(const BinaryImage& img) {
    u32(static_cast<std::uint32_t>(img.width()));
    u32(static_cast<std::uint32_t>(img.height()));
    u32(static_cast<std::uint32_t>(img.words().size()));
    for (auto w : img.words()) u64(w);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  const std::uint8_t* need(std::size_t n) {
    if (in_.size() - pos_ < n) throw StoreCorrupt("candidate blob truncated");
    const std::uint8_t* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint8_t u8() { return *need(1); }
  std::uint32_t u32() {
    const auto* p = need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto* p = need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  Index size(std::uint32_t limit = 1u << 24) {
    const std::uint32_t n = u32();
    if (n > limit) throw StoreCorrupt("implausible count in candidate blob");
    return static_cast<Index>(n);
  }
  Mat doubles(Index rows, Index cols) {
    Mat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = f64();
    return m;
  }
  BinaryImage image() {
    const auto w = static_cast<int>(size(1u << 16));
    const auto h = static_cast<int>(size(1u << 16));
    const auto n = static_cast<std::size_t>(size());
    std::vector<std::uint64_t> words(n);
    for (auto& x : words) x = u64();
    try {
      return BinaryImage::fromWords(w, h, std::move(words));
    } catch (const std::exception& e) {
      throw StoreCorrupt(std::string("bad bitmap in candidate blob: ") + e.what());
    }
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void writeZonotope(Writer& w, const PolyZonotope& p) {
  w.size(p.dim());
  w.size(p.numDep());
  w.size(p.numIndep());
  w.size(static_cast<Index>(p.ids().size()));
  w.doubles(p.offset());
  w.doubles(p.dep());
  w.doubles(p.indep());
  for (Index j = 0; j < p.exponents().cols(); ++j)
    for (Index i = 0; i < p.exponents().rows(); ++i) w.i32(p.exponents()(i, j));
  for (int id : p.ids()) w.i32(id);
}

PolyZonotope readZonotope(Reader& r) {
  const Index dim = r.size(), nd = r.size(), ni = r.size(), nid = r.size();
  Vec offset = r.doubles(dim, 1);
  Mat dep = r.doubles(dim, nd);
  Mat indep = r.doubles(dim, ni);
  ExpMat e(nid, nd);
  for (Index j = 0; j < nd; ++j)
    for (Index i = 0; i < nid; ++i) e(i, j) = r.i32();
  IdList ids(static_cast<std::size_t>(nid));
  for (auto& id : ids) id = r.i32();
  try {
    return PolyZonotope(std::move(offset), std::move(dep), std::move(indep), std::move(e), std::move(ids));
  } catch (const std::exception& ex) {
    throw StoreCorrupt(std::string("bad set in candidate blob: ") + ex.what());
  }
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string candidateFile(std::size_t c) {
  std::ostringstream os;
  os << "candidates/" << std::setw(6) << std::setfill('0') << c << ".bin";
  return os.str();
}

nlohmann::json intervalJson(const Interval& iv) {
  return {{"lo", std::vector<double>(iv.lo.data(), iv.lo.data() + iv.lo.size())},
          {"hi", std::vector<double>(iv.hi.data(), iv.hi.data() + iv.hi.size())}};
}

Interval intervalFromJson(const nlohmann::json& j) {
  const auto lo = j.at("lo").get<std::vector<double>>(), hi = j.at("hi").get<std::vector<double>>();
  if (lo.size() != hi.size()) throw StoreCorrupt("interval bounds differ in length");
  return Interval(Eigen::Map<const Vec>(lo.data(), static_cast<Index>(lo.size())),
                  Eigen::Map<const Vec>(hi.data(), static_cast<Index>(hi.size())));
}

}  // namespace

std::vector<std::uint8_t> encode_candidate(const StoredCandidate& c) {
  const PoseCandidateArtifacts& a = c.artifacts;
  Writer w;
  w.raw(kMagic, 4);
  w.u32(CandidateStore::kFormatVersion);
  w.i32(c.depth);
  w.u8(c.depthCapped);
  w.u8(a.conservative);
  w.doubles(a.pose.box.lo);
  w.doubles(a.pose.box.hi);
  w.f64(a.errorRatio);
  w.image(a.outerImage);
  w.size(static_cast<Index>(a.polygonImages.size()));
  for (const auto& img : a.polygonImages) w.image(img);
  w.size(static_cast<Index>(a.hulls.size()));
  for (const auto& h : a.hulls) {
    w.size(h.A.rows());
    w.doubles(h.A);
    w.doubles(h.b);
  }
  w.size(static_cast<Index>(a.vertices.size()));
  for (const auto& poly : a.vertices) {
    w.size(static_cast<Index>(poly.size()));
    for (const auto& v : poly) {
      writeZonotope(w, v.set);
      w.doubles(v.linOffset);
      w.doubles(v.linGen);
      w.size(v.errGens.cols());
      w.doubles(v.errGens);
      w.image(v.bitmap);
      w.u8(v.insideImage);
    }
  }
  return w.take();
}

StoredCandidate decode_candidate(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (std::memcmp(r.need(4), kMagic, 4) != 0) throw StoreCorrupt("bad candidate magic");
  if (r.u32() != CandidateStore::kFormatVersion) throw StoreCorrupt("unsupported candidate version");
  StoredCandidate c;
  c.depth = r.i32();
  c.depthCapped = r.u8() != 0;
  PoseCandidateArtifacts& a = c.artifacts;
  a.conservative = r.u8() != 0;
  Vec lo = r.doubles(kPoseDim, 1), hi = r.doubles(kPoseDim, 1);
  a.pose = UncertainPose(Interval(std::move(lo), std::move(hi)));
  a.errorRatio = r.f64();
  a.outerImage = r.image();
  a.polygonImages.resize(static_cast<std::size_t>(r.size()));
  for (auto& img : a.polygonImages) img = r.image();
  a.hulls.resize(static_cast<std::size_t>(r.size()));
  for (auto& h : a.hulls) {
    const Index k = r.size();
    h.A = r.doubles(k, 2);
    h.b = r.doubles(k, 1);
  }
  a.vertices.resize(static_cast<std::size_t>(r.size()));
  for (auto& poly : a.vertices) {
    poly.resize(static_cast<std::size_t>(r.size()));
    for (auto& v : poly) {
      v.set = readZonotope(r);
      v.linOffset = r.doubles(2, 1);
      v.linGen = r.doubles(2, kPoseDim);
      const Index e = r.size();
      v.errGens = r.doubles(2, e);
      v.bitmap = r.image();
      v.insideImage = r.u8() != 0;
    }
  }
  if (!r.done()) throw StoreCorrupt("trailing bytes in candidate blob");
  return c;
}

void save_store(const CandidateStore& store, const fs::path& dir) {
  fs::create_directories(dir / "candidates");
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t c = 0; c < store.size(); ++c) {
    const auto blob = encode_candidate(store.candidates[c]);
    const std::string name = candidateFile(c);
    std::ofstream out(dir / name, std::ios::binary);
    out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    files.push_back({{"file", name}, {"bytes", blob.size()}, {"fnv1a64", hex64(fnv1a64(blob.data(), blob.size()))}});
  }
  const auto& p = store.partition;
  const nlohmann::json manifest = {
      {"format", "certipose-store"},
      {"version", CandidateStore::kFormatVersion},
      {"camera", {{"focal", store.camera.focal}, {"width", store.camera.width}, {"height", store.camera.height}}},
      {"target", {{"name", store.targetName}, {"fingerprint", store.targetFingerprint}}},
      {"poseSpace", intervalJson(store.space.bounds)},
      {"partition",
       {{"epsilonRate", p.epsilonRate},
        {"maxDepth", p.maxDepth},
        {"splitDims", p.splitDims},
        {"hull", {{"edgeNormals", p.hull.edgeNormals}, {"centerDirections", p.hull.centerDirections}, {"refine", p.hull.refine}}}}},
      {"candidateCount", store.size()},
      {"candidates", std::move(files)},
  };
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
}

CandidateStore load_store(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw StoreCorrupt("missing " + (dir / "manifest.json").string());
  CandidateStore s;
  nlohmann::json files;
  try {
    const auto m = nlohmann::json::parse(in);
    if (m.at("format") != "certipose-store") throw StoreCorrupt("not a candidate store");
    if (m.at("version").get<int>() != CandidateStore::kFormatVersion)
      throw StoreCorrupt("unsupported store version " + m.at("version").dump());
    const auto& cam = m.at("camera");
    s.camera = {cam.at("focal").get<double>(), cam.at("width").get<int>(), cam.at("height").get<int>()};
    s.targetName = m.at("target").at("name").get<std::string>();
    s.targetFingerprint = m.at("target").at("fingerprint").get<std::string>();
    s.space.bounds = intervalFromJson(m.at("poseSpace"));
    const auto& p = m.at("partition");
    s.partition.epsilonRate = p.at("epsilonRate").get<double>();
    s.partition.maxDepth = p.at("maxDepth").get<int>();
    s.partition.splitDims = p.at("splitDims").get<int>();
    s.partition.hull = {p.at("hull").at("edgeNormals").get<bool>(), p.at("hull").at("centerDirections").get<bool>(),
                        p.at("hull").at("refine").get<bool>()};
    files = m.at("candidates");
    if (files.size() != m.at("candidateCount").get<std::size_t>())
      throw StoreCorrupt("candidate count does not match the file list");
  } catch (const nlohmann::json::exception& e) {
    throw StoreCorrupt(std::string("bad manifest: ") + e.what());
  }

  s.candidates.resize(files.size());
  for (std::size_t c = 0; c < files.size(); ++c) {
    const fs::path path = dir / files[c].at("file").get<std::string>();
    std::ifstream bin(path, std::ios::binary);
    if (!bin) throw StoreCorrupt("missing " + path.string());
    std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    if (blob.size() != files[c].at("bytes").get<std::size_t>())
      throw StoreCorrupt("size mismatch in " + path.string());
    if (hex64(fnv1a64(blob.data(), blob.size())) != files[c].at("fnv1a64").get<std::string>())
      throw StoreCorrupt("checksum mismatch in " + path.string());
    s.candidates[c] = decode_candidate(blob);
    const auto& a = s.candidates[c].artifacts;
    if (a.outerImage.width() != s.camera.width || a.outerImage.height() != s.camera.height)
      throw StoreCorrupt("image size in " + path.string() + " does not match the camera");
  }
  return s;
}

}  // namespace certipose
