#pragma once

// Online side: filter stored candidates against an observed image and refine
// the survivors into constrained pose sets.

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "certipose/partition.hpp"
#include "certipose/preimage.hpp"
#include "certipose/witness.hpp"

namespace certipose {

struct EstimateConfig {
  std::size_t noise = 0;  // at most this many pixels of obs are flipped
  bool triangleFilter = true;  // used only when noise == 0
  std::size_t volumeSamples = 20000;
  std::uint64_t seed = 0;
  Execution exec = Execution::Parallel;
};

/// (a) at most `noise` on-pixels of obs lie outside the outer image and (b)
/// every vertex bitmap inside the image meets an on-pixel of obs.
bool filter_candidate(const BinaryImage& obs, const PoseCandidateArtifacts& art, std::size_t noise);

/// One flag per candidate, in order.
std::vector<std::uint8_t> filter_candidates(const BinaryImage& obs,
                                            std::span<const StoredCandidate> candidates,
                                            std::size_t noise, Execution exec);

/// Witness-driven constraints for every vertex inside the image. A vertex
/// without witnesses yields the infeasible sentinel.
ConstrainedPoseSet refine_candidate(const BinaryImage& obs, const PoseCandidateArtifacts& art,
                                    const EstimateConfig& cfg);

struct EstimatePiece {
  std::size_t candidateIndex = 0;
  ConstrainedPoseSet set;
  bool feasible = true;
  VolumeEstimate volume;
};

struct CertifiedPoseEstimate {
  std::vector<EstimatePiece> pieces;  // survivors, by candidate index
  std::size_t numCandidates = 0;
  std::size_t numAfterFilter = 0;
  double timeFilter_s = 0.0;
  double timeRefine_s = 0.0;
  double timeVolume_s = 0.0;
  double poseSpaceVolume = 0.0;
  double volumeFilter = 0.0;  // summed survivor boxes
  double volumeOurs = 0.0;    // summed feasible piece estimates

  double normVolFilter() const { return volumeFilter / poseSpaceVolume; }
  double normVolOurs() const { return volumeOurs / poseSpaceVolume; }
  bool contains(const Vec& pose, double tol = kMemberTol) const;
};

/// Volume samples for candidate c use a generator seeded from (seed, c), so
/// results do not depend on thread count.
CertifiedPoseEstimate estimate(const BinaryImage& obs, const CandidateStore& store,
                               const EstimateConfig& cfg);
/// As above after checking the store against camera and target.
CertifiedPoseEstimate estimate(const BinaryImage& obs, const CandidateStore& store,
                               const CameraParams& cam, const Target& target,
                               const EstimateConfig& cfg);

/// Timings are left out when withTimings is false so that two runs compare
/// equal byte for byte.
nlohmann::json to_json(const CertifiedPoseEstimate& e, bool withTimings = true);

}  // namespace certipose
