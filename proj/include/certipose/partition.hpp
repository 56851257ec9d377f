#pragma once

// Offline side: split the pose space into candidate boxes small enough for
// tight image enclosures, enclose each one and persist the results.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "certipose/pose_forward.hpp"
#include "certipose/preimage.hpp"

namespace certipose {

class StoreCorrupt : public std::runtime_error {
 public:
  explicit StoreCorrupt(const std::string& what) : std::runtime_error(what) {}
};

/// The store was built for another camera or target.
class StoreMismatch : public std::runtime_error {
 public:
  explicit StoreMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct PoseSpace {
  Interval bounds;  // x, y, z in metres, angles in radians

  void validate() const;
  double volume() const { return box_volume(bounds); }
  bool operator==(const PoseSpace& o) const { return bounds.lo == o.bounds.lo && bounds.hi == o.bounds.hi; }
};

struct PartitionConfig {
  double epsilonRate = 0.5;
  int maxDepth = 8;
  int splitDims = 2;  // 1, 2, 3 or 6
  HullConfig hull;

  void validate() const;
  bool operator==(const PartitionConfig&) const = default;
};

struct StoredCandidate {
  PoseCandidateArtifacts artifacts;
  int depth = 0;
  bool depthCapped = false;  // accepted because maxDepth was reached
};

/// Per dimension: how much it contributes to the vertex enclosures. The
/// linear part is the mean |linGen column| over vertices; the error part is
/// the drop in total error radius when that dimension is collapsed to its
/// centre.
std::array<double, kPoseDim> sensitivity_scores(const Target& target, const CameraParams& cam,
                                                const PoseCandidateArtifacts& art);

/// Dimensions to bisect, highest score first, ties to the lower index. Zero
/// width dimensions are never chosen.
std::vector<int> split_dimensions(const std::array<double, kPoseDim>& scores,
                                  const UncertainPose& U, int count);

/// Breadth-first bisection. Boxes whose outer image is empty are dropped;
/// boxes reaching the camera plane are split further and kept with
/// conservative artifacts at maxDepth. Leaves are ordered by discovery.
std::vector<StoredCandidate> partition_space(const Target& target, const CameraParams& cam,
                                             const PoseSpace& space, const PartitionConfig& cfg,
                                             Execution exec = Execution::Parallel);

std::vector<UncertainPose> partition(const Target& target, const CameraParams& cam,
                                     const PoseSpace& space, const PartitionConfig& cfg);

struct CandidateStore {
  static constexpr int kFormatVersion = 1;

  CameraParams camera;
  std::string targetName;
  std::string targetFingerprint;
  PoseSpace space;
  PartitionConfig partition;
  std::vector<StoredCandidate> candidates;

  std::size_t size() const { return candidates.size(); }
  /// Index of the first candidate whose box contains the pose, or size().
  std::size_t locate(const Vec& pose) const;
  /// Throws StoreMismatch unless camera and target agree.
  void require(const CameraParams& cam, const Target& target) const;
};

CandidateStore precompute_store(const Target& target, const CameraParams& cam, const PoseSpace& space,
                                const PartitionConfig& cfg, Execution exec = Execution::Parallel);

/// Writes manifest.json and candidates/NNNNNN.bin under dir (created).
void save_store(const CandidateStore& store, const std::filesystem::path& dir);
/// Throws StoreCorrupt on a missing file, bad version or checksum mismatch.
CandidateStore load_store(const std::filesystem::path& dir);

/// Little-endian blob of one candidate, and its inverse.
std::vector<std::uint8_t> encode_candidate(const StoredCandidate& c);
/// Throws StoreCorrupt on truncated or malformed input.
StoredCandidate decode_candidate(std::span<const std::uint8_t> bytes);

}  // namespace certipose
