#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "certipose/geometry.hpp"

namespace certipose {

class Target {
 public:
  Target() = default;
  Target(std::string name, std::vector<ConvexPolygon3> polygons);

  const std::string& name() const { return name_; }
  const std::vector<ConvexPolygon3>& polygons() const { return polygons_; }
  std::size_t numPolygons() const { return polygons_.size(); }
  std::size_t numVertices() const;

  /// FNV-1a 64 hash of the vertex coordinates, as 16 hex digits.
  std::string fingerprint() const;

  /// Projects all polygons; throws BehindCamera.
  std::vector<Polygon2> project(const CameraParams& cam, const Pose& pose) const;
  BinaryImage render(const CameraParams& cam, const Pose& pose) const;
  BinaryImage edges(const CameraParams& cam, const Pose& pose) const;

 private:
  std::string name_;
  std::vector<ConvexPolygon3> polygons_;
};

std::vector<std::string> builtin_target_names();
/// Throws std::invalid_argument for unknown names.
Target builtin_target(const std::string& name);

nlohmann::json target_to_json(const Target& t);
Target target_from_json(const nlohmann::json& j, const std::string& fallbackName = "custom");
Target load_target(const std::string& path);
void save_target(const Target& t, const std::string& path);

/// Built-in name, or else a path to a JSON target file.
Target resolve_target(const std::string& nameOrPath);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace certipose
