#include "certipose/estimator.hpp"

#include <chrono>

#include <nlohmann/json.hpp>

namespace certipose {

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::mt19937_64 candidateRng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Witnesses for vertex k of polygon i, tightened when nothing else can
// reach the vertex region.
WitnessSet vertexWitnesses(const BinaryImage& obs, const PoseCandidateArtifacts& art, std::size_t i,
                           std::size_t k, const EstimateConfig& cfg) {
  const auto& vs = art.vertices[i];
  const std::size_t n = vs.size();
  const VertexEnclosure& v = vs[k];
  WitnessSet W = collect_witnesses(obs, v.bitmap);

  std::vector<BinaryImage> others, otherPolys;
  for (std::size_t k2 = 0; k2 < n; ++k2)
    if (k2 != k) others.push_back(vs[k2].bitmap);
  for (std::size_t i2 = 0; i2 < art.polygonImages.size(); ++i2)
    if (i2 != i) otherPolys.push_back(art.polygonImages[i2]);
  if (!is_standalone(v.bitmap, others, otherPolys)) return W;

  const Eigen::Vector2d out =
      vertex_outward(vs[(k + n - 1) % n].linOffset, v.linOffset, vs[(k + 1) % n].linOffset);
  W = tighten_boundary(W, out, cfg.noise, obs);
  if (cfg.noise > 0 || !cfg.triangleFilter) return W;

  std::vector<Interval> hulls;
  hulls.reserve(n);
  for (const auto& u : vs) hulls.push_back(u.hull());
  if (meets_other_edges(v.bitmap, hulls, k)) return W;
  return triangle_filter(W, Eigen::Vector2d(-out.y(), out.x()), obs);
}

}  // namespace

bool filter_candidate(const BinaryImage& obs, const PoseCandidateArtifacts& art, std::size_t noise) {
  if (obs.countOutside(art.outerImage) > noise) return false;
  for (const auto& poly : art.vertices)
    for (const auto& v : poly)
      if (v.insideImage && !v.bitmap.intersects(obs)) return false;
  return true;
}

std::vector<std::uint8_t> filter_candidates(const BinaryImage& obs,
                                            std::span<const StoredCandidate> candidates,
                                            std::size_t noise, Execution exec) {
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
  std::vector<std::uint8_t> keep(candidates.size(), 0);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t c = 0; c < n; ++c)
      keep[static_cast<std::size_t>(c)] = filter_candidate(obs, candidates[static_cast<std::size_t>(c)].artifacts, noise);
  } else {
    for (std::ptrdiff_t c = 0; c < n; ++c)
      keep[static_cast<std::size_t>(c)] = filter_candidate(obs, candidates[static_cast<std::size_t>(c)].artifacts, noise);
  }
  return keep;
}

ConstrainedPoseSet refine_candidate(const BinaryImage& obs, const PoseCandidateArtifacts& art,
                                    const EstimateConfig& cfg) {
  std::vector<LinearConstraints> blocks;
  for (std::size_t i = 0; i < art.vertices.size(); ++i) {
    for (std::size_t k = 0; k < art.vertices[i].size(); ++k) {
      const VertexEnclosure& v = art.vertices[i][k];
      if (!v.insideImage) continue;
      try {
        const WitnessSet W = vertexWitnesses(obs, art, i, k, cfg);
        blocks.push_back(preimage_constraints(v, witness_polytope(W)));
      } catch (const EmptyWitness&) {
        return ConstrainedPoseSet::sentinel(art.pose);
      }
    }
  }
  ConstrainedPoseSet S{art.pose, stack(blocks), false};
  S.infeasible = is_certainly_empty(S);
  return S;
}

bool CertifiedPoseEstimate::contains(const Vec& pose, double tol) const {
  for (const auto& p : pieces)
    if (p.feasible && certipose::contains(p.set, pose, tol)) return true;
  return false;
}

CertifiedPoseEstimate estimate(const BinaryImage& obs, const CandidateStore& store,
                               const EstimateConfig& cfg) {
  if (obs.width() != store.camera.width || obs.height() != store.camera.height)
    throw StoreMismatch("observed image is " + std::to_string(obs.width()) + "x" +
                        std::to_string(obs.height()) + ", store camera is " +
                        std::to_string(store.camera.width) + "x" + std::to_string(store.camera.height));
  CertifiedPoseEstimate e;
  e.numCandidates = store.size();
  e.poseSpaceVolume = store.space.volume();

  auto t0 = Clock::now();
  const auto keep = filter_candidates(obs, store.candidates, cfg.noise, cfg.exec);
  std::vector<std::size_t> survivors;
  for (std::size_t c = 0; c < keep.size(); ++c)
    if (keep[c]) survivors.push_back(c);
  e.timeFilter_s = secondsSince(t0);
  e.numAfterFilter = survivors.size();

  e.pieces.resize(survivors.size());
  const auto ns = static_cast<std::ptrdiff_t>(survivors.size());
  auto refineOne = [&](std::ptrdiff_t s) {
    const std::size_t c = survivors[static_cast<std::size_t>(s)];
    EstimatePiece& p = e.pieces[static_cast<std::size_t>(s)];
    p.candidateIndex = c;
    p.set = refine_candidate(obs, store.candidates[c].artifacts, cfg);
    p.feasible = !p.set.infeasible;
  };
  t0 = Clock::now();
  if (cfg.exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t s = 0; s < ns; ++s) refineOne(s);
  } else {
    for (std::ptrdiff_t s = 0; s < ns; ++s) refineOne(s);
  }
  e.timeRefine_s = secondsSince(t0);

  auto volumeOne = [&](std::ptrdiff_t s) {
    EstimatePiece& p = e.pieces[static_cast<std::size_t>(s)];
    if (!p.feasible) return;
    auto rng = candidateRng(cfg.seed, p.candidateIndex);
    p.volume = volume_estimate(p.set, cfg.volumeSamples, rng);
  };
  t0 = Clock::now();
  if (cfg.exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t s = 0; s < ns; ++s) volumeOne(s);
  } else {
    for (std::ptrdiff_t s = 0; s < ns; ++s) volumeOne(s);
  }
  e.timeVolume_s = secondsSince(t0);

  // summed in index order so the totals do not depend on scheduling
  for (const auto& p : e.pieces) {
    e.volumeFilter += box_volume(p.set.base.box);
    e.volumeOurs += p.volume.volume;
  }
  return e;
}

CertifiedPoseEstimate estimate(const BinaryImage& obs, const CandidateStore& store,
                               const CameraParams& cam, const Target& target,
                               const EstimateConfig& cfg) {
  store.require(cam, target);
  return estimate(obs, store, cfg);
}

nlohmann::json to_json(const CertifiedPoseEstimate& e, bool withTimings) {
  using nlohmann::json;
  json pieces = json::array();
  for (const auto& p : e.pieces) {
    const Vec o = p.set.base.center(), g = p.set.base.radius();
    json C = json::array();
    for (Eigen::Index r = 0; r < p.set.C().rows(); ++r) {
      json row = json::array();
      for (Eigen::Index j = 0; j < p.set.C().cols(); ++j) row.push_back(p.set.C()(r, j));
      C.push_back(std::move(row));
    }
    pieces.push_back({
        {"candidateIndex", p.candidateIndex},
        {"o", std::vector<double>(o.data(), o.data() + o.size())},
        {"Gdiag", std::vector<double>(g.data(), g.data() + g.size())},
        {"C", std::move(C)},
        {"d", std::vector<double>(p.set.d().data(), p.set.d().data() + p.set.d().size())},
        {"feasible", p.feasible},
        {"volumeEstimate", p.volume.volume},
        {"volumeStdError", p.volume.stderror},
    });
  }
  json summary = {
      {"candidates", e.numCandidates},
      {"candidatesAfterFilter", e.numAfterFilter},
      {"feasiblePieces", std::count_if(e.pieces.begin(), e.pieces.end(),
                                       [](const EstimatePiece& p) { return p.feasible; })},
      {"poseSpaceVolume", e.poseSpaceVolume},
      {"normVolFilter", e.normVolFilter()},
      {"normVolOurs", e.normVolOurs()},
  };
  if (withTimings) {
    summary["timeFilter_s"] = e.timeFilter_s;
    summary["timeRefine_s"] = e.timeRefine_s;
    summary["timeVolume_s"] = e.timeVolume_s;
  }
  return {{"pieces", std::move(pieces)}, {"summary", std::move(summary)}};
}

}  // namespace certipose
