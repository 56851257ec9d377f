#include "certipose/target.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace certipose {

namespace {

ConvexPolygon3 rect(double x0, double y0, double x1, double y1) {
  Eigen::Matrix3Xd v(3, 4);
  v << x0, x1, x1, x0,  //
      y0, y0, y1, y1,   //
      0, 0, 0, 0;
  return ConvexPolygon3(v);
}

ConvexPolygon3 poly(std::initializer_list<std::pair<double, double>> pts) {
  Eigen::Matrix3Xd v(3, pts.size());
  Eigen::Index i = 0;
  for (auto [x, y] : pts) v.col(i++) = Eigen::Vector3d(x, y, 0);
  return ConvexPolygon3(v);
}

void appendDouble(std::vector<unsigned char>& buf, double x) {
  unsigned char b[8];
  std::memcpy(b, &x, 8);
  buf.insert(buf.end(), b, b + 8);
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

Target::Target(std::string name, std::vector<ConvexPolygon3> polygons)
    : name_(std::move(name)), polygons_(std::move(polygons)) {
  if (polygons_.empty()) throw InvalidGeometry("target has no polygons");
}

std::size_t Target::numVertices() const {
  std::size_t n = 0;
  for (const auto& p : polygons_) n += static_cast<std::size_t>(p.numVertices());
  return n;
}

std::string Target::fingerprint() const {
  std::vector<unsigned char> buf;
  const auto count = static_cast<std::uint64_t>(polygons_.size());
  buf.insert(buf.end(), reinterpret_cast<const unsigned char*>(&count),
             reinterpret_cast<const unsigned char*>(&count) + 8);
  for (const auto& p : polygons_) {
    appendDouble(buf, static_cast<double>(p.numVertices()));
    for (Eigen::Index k = 0; k < p.numVertices(); ++k)
      for (int r = 0; r < 3; ++r) appendDouble(buf, p.vertices()(r, k));
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(buf.data(), buf.size());
  return os.str();
}

std::vector<Polygon2> Target::project(const CameraParams& cam, const Pose& pose) const {
  std::vector<Polygon2> out;
  out.reserve(polygons_.size());
  for (const auto& p : polygons_) out.push_back(certipose::project(cam, pose, p.vertices()).pcf);
  return out;
}

BinaryImage Target::render(const CameraParams& cam, const Pose& pose) const {
  return rasterize(project(cam, pose), cam);
}

BinaryImage Target::edges(const CameraParams& cam, const Pose& pose) const {
  return edge_pixels(project(cam, pose), cam);
}

std::vector<std::string> builtin_target_names() { return {"stripes", "digits", "letter", "sign"}; }

Target builtin_target(const std::string& name) {
  if (name == "stripes") {
    // three vertical bars, 0.3 m wide and 1.6 m tall
    return Target(name, {rect(-0.75, -0.8, -0.45, 0.8), rect(-0.15, -0.8, 0.15, 0.8),
                         rect(0.45, -0.8, 0.75, 0.8)});
  }
  if (name == "digits") {
    // a blocky "3" next to a blocky "0"
    return Target(name, {
                            rect(-0.9, 0.6, -0.25, 0.8),    // 3: top bar
                            rect(-0.8, -0.1, -0.25, 0.1),   // 3: middle bar
                            rect(-0.9, -0.8, -0.25, -0.6),  // 3: bottom bar
                            poly({{-0.25, -0.8}, {-0.05, -0.8}, {-0.05, 0.8}, {-0.25, 0.8}}),
                            rect(0.15, 0.6, 0.9, 0.8),    // 0: top
                            rect(0.15, -0.8, 0.9, -0.6),  // 0: bottom
                            rect(0.15, -0.6, 0.35, 0.6),  // 0: left
                            rect(0.7, -0.6, 0.9, 0.6),    // 0: right
                        });
  }
  if (name == "letter") {
    // an "L" with a slanted serif
    return Target(name, {rect(-0.6, -0.4, -0.3, 0.9), rect(-0.6, -0.8, 0.6, -0.4),
                         poly({{0.3, -0.4}, {0.6, -0.4}, {0.45, -0.1}})});
  }
  if (name == "sign") {
    // square frame around a diamond
    return Target(name, {rect(-0.9, 0.7, 0.9, 0.9), rect(-0.9, -0.9, 0.9, -0.7),
                         rect(-0.9, -0.7, -0.7, 0.7), rect(0.7, -0.7, 0.9, 0.7),
                         poly({{0.0, -0.45}, {0.45, 0.0}, {0.0, 0.45}, {-0.45, 0.0}})});
  }
  throw std::invalid_argument("unknown built-in target '" + name + "'");
}

nlohmann::json target_to_json(const Target& t) {
  nlohmann::json polys = nlohmann::json::array();
  for (const auto& p : t.polygons()) {
    nlohmann::json verts = nlohmann::json::array();
    for (Eigen::Index k = 0; k < p.numVertices(); ++k)
      verts.push_back({p.vertices()(0, k), p.vertices()(1, k), p.vertices()(2, k)});
    polys.push_back({{"vertices", verts}});
  }
  return {{"name", t.name()}, {"polygons", polys}};
}

Target target_from_json(const nlohmann::json& j, const std::string& fallbackName) {
  if (!j.is_object() || !j.contains("polygons") || !j["polygons"].is_array())
    throw InvalidGeometry("target JSON needs a 'polygons' array");
  std::vector<ConvexPolygon3> polys;
  for (const auto& pj : j["polygons"]) {
    const auto& vj = pj.at("vertices");
    Eigen::Matrix3Xd v(3, static_cast<Eigen::Index>(vj.size()));
    for (std::size_t k = 0; k < vj.size(); ++k) {
      if (vj[k].size() != 3) throw InvalidGeometry("target vertex needs 3 coordinates");
      for (int r = 0; r < 3; ++r) v(r, static_cast<Eigen::Index>(k)) = vj[k][r].get<double>();
    }
    polys.emplace_back(v);
  }
  return Target(j.value("name", fallbackName), std::move(polys));
}

Target load_target(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open target file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidGeometry(std::string("bad target JSON: ") + e.what());
  }
  return target_from_json(j, std::filesystem::path(path).stem().string());
}

void save_target(const Target& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << target_to_json(t).dump(2) << '\n';
}

Target resolve_target(const std::string& nameOrPath) {
  for (const auto& n : builtin_target_names())
    if (n == nameOrPath) return builtin_target(n);
  return load_target(nameOrPath);
}

}  // namespace certipose
