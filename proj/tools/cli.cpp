#include "certipose/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "certipose/estimator.hpp"
#include "certipose/parallel.hpp"

namespace certipose {

namespace fs = std::filesystem;
using nlohmann::json;

// -- configuration -------------------------------------------------------------

PoseSpace ExperimentConfig::desk_pose_space() {
  constexpr double deg = std::numbers::pi / 180.0;
  Vec lo(6), hi(6);
  lo << -0.5, -0.5, 4.0, 0.0, -5 * deg, -5 * deg;
  hi << 0.5, 0.5, 6.0, 30 * deg, 5 * deg, 5 * deg;
  return {Interval(lo, hi)};
}

PartitionConfig ExperimentConfig::desk_partition_config() {
  PartitionConfig p;
  p.epsilonRate = 0.22;
  p.maxDepth = 8;
  p.splitDims = 2;
  return p;
}

void ExperimentConfig::validate() const {
  try {
    camera.validate();
    space.validate();
    partition.validate();
    (void)resolve_target(target);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (samples == 0) throw ConfigError("samples must be positive");
  if (volumeSamples == 0) throw ConfigError("volumeSamples must be positive");
  if (noise > static_cast<std::size_t>(camera.width) * static_cast<std::size_t>(camera.height))
    throw ConfigError("noise exceeds the number of pixels");
}

namespace {

void rejectUnknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

Vec vec6(const json& j, const std::string& where) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != kPoseDim) throw ConfigError(where + " needs 6 numbers");
  return Eigen::Map<const Vec>(v.data(), kPoseDim);
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    rejectUnknown(j, {"target", "camera", "poseSpace", "partition", "noise", "protectEdges", "denoise",
                      "samples", "seed", "volumeSamples", "store"},
                  "config");
    if (j.contains("target")) c.target = j.at("target").get<std::string>();
    if (j.contains("camera")) {
      const auto& cam = j.at("camera");
      rejectUnknown(cam, {"focal", "width", "height"}, "camera");
      if (cam.contains("focal")) c.camera.focal = cam.at("focal").get<double>();
      if (cam.contains("width")) c.camera.width = cam.at("width").get<int>();
      if (cam.contains("height")) c.camera.height = cam.at("height").get<int>();
    }
    if (j.contains("poseSpace")) {
      const auto& s = j.at("poseSpace");
      rejectUnknown(s, {"lo", "hi"}, "poseSpace");
      c.space.bounds = Interval(vec6(s.at("lo"), "poseSpace.lo"), vec6(s.at("hi"), "poseSpace.hi"));
    }
    if (j.contains("partition")) {
      const auto& p = j.at("partition");
      rejectUnknown(p, {"epsilonRate", "maxDepth", "splitDims"}, "partition");
      if (p.contains("epsilonRate")) c.partition.epsilonRate = p.at("epsilonRate").get<double>();
      if (p.contains("maxDepth")) c.partition.maxDepth = p.at("maxDepth").get<int>();
      if (p.contains("splitDims")) c.partition.splitDims = p.at("splitDims").get<int>();
    }
    if (j.contains("noise")) c.noise = j.at("noise").get<std::size_t>();
    if (j.contains("protectEdges")) c.protectEdges = j.at("protectEdges").get<bool>();
    if (j.contains("denoise")) c.denoise = j.at("denoise").get<bool>();
    if (j.contains("samples")) c.samples = j.at("samples").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("volumeSamples")) c.volumeSamples = j.at("volumeSamples").get<std::size_t>();
    if (j.contains("store")) c.store = j.at("store").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  const Vec& lo = c.space.bounds.lo;
  const Vec& hi = c.space.bounds.hi;
  return {
      {"target", c.target},
      {"camera", {{"focal", c.camera.focal}, {"width", c.camera.width}, {"height", c.camera.height}}},
      {"poseSpace", {{"lo", std::vector<double>(lo.data(), lo.data() + lo.size())},
                     {"hi", std::vector<double>(hi.data(), hi.data() + hi.size())}}},
      {"partition", {{"epsilonRate", c.partition.epsilonRate},
                     {"maxDepth", c.partition.maxDepth},
                     {"splitDims", c.partition.splitDims}}},
      {"noise", c.noise},
      {"protectEdges", c.protectEdges},
      {"denoise", c.denoise},
      {"samples", c.samples},
      {"seed", c.seed},
      {"volumeSamples", c.volumeSamples},
      {"store", c.store},
  };
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
}

// -- commands ------------------------------------------------------------------

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> noise;
  int threads = 0;
  std::string store;
  std::string out;
  std::string overlay;
  std::optional<std::size_t> samples;
  bool denoise = false;
  bool ascii = false;
  bool zeroTimings = false;
  std::vector<std::string> poses;
  std::string truth;
  std::string input;
};

ExperimentConfig resolveConfig(const Options& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.noise) c.noise = *o.noise;
  if (o.samples) c.samples = *o.samples;
  if (o.denoise) c.denoise = true;
  if (!o.store.empty()) {
    c.store = o.store;
  } else if (c.store.empty()) {
    if (const char* env = std::getenv("CERTIPOSE_STORE")) c.store = env;
  }
  c.validate();
  return c;
}

std::string requireStore(const ExperimentConfig& c) {
  if (c.store.empty()) throw ConfigError("no store given (--store, config 'store' or CERTIPOSE_STORE)");
  return c.store;
}

Vec parsePose(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad pose component '" + item + "' in '" + s + "'");
    }
  }
  if (v.size() != kPoseDim) throw ConfigError("a pose needs 6 comma-separated numbers: " + s);
  return Eigen::Map<const Vec>(v.data(), kPoseDim);
}

Vec samplePose(std::mt19937_64& rng, const PoseSpace& space) {
  Vec p(kPoseDim);
  for (int i = 0; i < kPoseDim; ++i)
    p(i) = std::uniform_real_distribution<double>(space.bounds.lo(i), space.bounds.hi(i))(rng);
  return p;
}

BinaryImage observe(const Target& t, const ExperimentConfig& c, const Pose& pose, std::mt19937_64& rng) {
  BinaryImage img = t.render(c.camera, pose);
  if (c.noise > 0) {
    const BinaryImage guard = c.protectEdges ? t.edges(c.camera, pose) : BinaryImage(c.camera.width, c.camera.height);
    img = apply_noise(img, c.noise, rng, guard);
  }
  return img;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void writeText(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

EstimateConfig estimateConfig(const ExperimentConfig& c) {
  EstimateConfig e;
  e.noise = c.noise;
  e.volumeSamples = c.volumeSamples;
  e.seed = c.seed;
  e.exec = max_threads() > 1 ? Execution::Parallel : Execution::Serial;
  return e;
}

CandidateStore openStore(const ExperimentConfig& c, const Target& t) {
  CandidateStore store = load_store(requireStore(c));
  store.require(c.camera, t);
  return store;
}

int cmdTargets(const Options& o, std::ostream& out) {
  if (!o.out.empty()) fs::create_directories(o.out);
  for (const auto& name : builtin_target_names()) {
    const Target t = builtin_target(name);
    out << name << "\tpolygons=" << t.numPolygons() << "\tvertices=" << t.numVertices()
        << "\tfingerprint=" << t.fingerprint() << "\n";
    if (!o.out.empty()) save_target(t, (fs::path(o.out) / (name + ".json")).string());
  }
  return kExitOk;
}

int cmdRender(const Options& o, std::ostream& out) {
  const ExperimentConfig c = resolveConfig(o);
  const Target t = resolve_target(c.target);
  if (o.out.empty()) throw ConfigError("render needs --out");
  const PbmEncoding enc = o.ascii ? PbmEncoding::Ascii : PbmEncoding::Packed;
  std::mt19937_64 rng(c.seed);
  if (o.poses.size() == 1) {
    save_pbm(observe(t, c, Pose::fromVector(parsePose(o.poses[0])), rng), o.out, enc);
    out << "wrote " << o.out << "\n";
    return kExitOk;
  }
  std::vector<Vec> poses;
  for (const auto& s : o.poses) poses.push_back(parsePose(s));
  if (poses.empty())
    for (std::size_t s = 0; s < c.samples; ++s) poses.push_back(samplePose(rng, c.space));
  fs::create_directories(o.out);
  std::ostringstream csv;
  csv << "sample,file,x,y,z,thetaX,thetaY,thetaZ\n";
  for (std::size_t s = 0; s < poses.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%04zu.pbm", s);
    save_pbm(observe(t, c, Pose::fromVector(poses[s]), rng), (fs::path(o.out) / name).string(), enc);
    csv << s << "," << name;
    for (int i = 0; i < kPoseDim; ++i) csv << "," << num(poses[s](i));
    csv << "\n";
  }
  writeText((fs::path(o.out) / "poses.csv").string(), csv.str(), out);
  out << "wrote " << poses.size() << " images to " << o.out << "\n";
  return kExitOk;
}

json boxJson(const Interval& b) {
  return {{"lo", std::vector<double>(b.lo.data(), b.lo.data() + b.lo.size())},
          {"hi", std::vector<double>(b.hi.data(), b.hi.data() + b.hi.size())}};
}

int cmdPartition(const Options& o, std::ostream& out) {
  const ExperimentConfig c = resolveConfig(o);
  const Target t = resolve_target(c.target);
  const auto leaves = partition_space(t, c.camera, c.space, c.partition);
  json boxes = json::array();
  std::size_t capped = 0;
  for (const auto& leaf : leaves) {
    json b = boxJson(leaf.artifacts.pose.box);
    b["depth"] = leaf.depth;
    b["depthCapped"] = leaf.depthCapped;
    b["errorRatio"] = leaf.artifacts.errorRatio;
    capped += leaf.depthCapped;
    boxes.push_back(std::move(b));
  }
  const json doc = {{"target", t.name()}, {"count", leaves.size()}, {"depthCapped", capped}, {"boxes", std::move(boxes)}};
  writeText(o.out, doc.dump(2) + "\n", out);
  if (!o.out.empty()) out << leaves.size() << " candidates (" << capped << " depth-capped)\n";
  return kExitOk;
}

int cmdPrecompute(const Options& o, std::ostream& out) {
  const ExperimentConfig c = resolveConfig(o);
  const Target t = resolve_target(c.target);
  const std::string dir = requireStore(c);
  const CandidateStore store = precompute_store(t, c.camera, c.space, c.partition);
  save_store(store, dir);
  out << "stored " << store.size() << " candidates for " << t.name() << " in " << dir << "\n";
  return kExitOk;
}

json overlayJson(const CandidateStore& store, const CertifiedPoseEstimate& e) {
  json cands = json::array();
  for (const auto& p : e.pieces) {
    const auto& art = store.candidates[p.candidateIndex].artifacts;
    json polys = json::array();
    for (const auto& poly : art.vertices) {
      json vs = json::array();
      for (const auto& v : poly) {
        const Interval h = v.hull();
        vs.push_back({h.lo(0), h.lo(1), h.hi(0), h.hi(1)});
      }
      polys.push_back(std::move(vs));
    }
    cands.push_back({{"candidateIndex", p.candidateIndex},
                     {"box", boxJson(art.pose.box)},
                     {"feasible", p.feasible},
                     {"vertexBoxes", std::move(polys)}});
  }
  return {{"format", "pixel boxes [xlo, ylo, xhi, yhi] per polygon vertex"}, {"candidates", std::move(cands)}};
}

int cmdEstimate(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = resolveConfig(o);
  const Target t = resolve_target(c.target);
  if (o.input.empty()) throw ConfigError("estimate needs an input image");
  BinaryImage obs;
  try {
    obs = load_pbm(o.input);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (c.denoise) obs = denoise(obs);
  const CandidateStore store = openStore(c, t);
  const CertifiedPoseEstimate e = estimate(obs, store, estimateConfig(c));
  json doc = to_json(e);
  doc["summary"]["denoise"] = c.denoise ? "isolated-pixel removal" : "none";
  doc["summary"]["noise"] = c.noise;
  doc["summary"]["seed"] = c.seed;
  writeText(o.out, doc.dump(2) + "\n", out);
  if (!o.overlay.empty()) writeText(o.overlay, overlayJson(store, e).dump(2) + "\n", out);
  if (!o.truth.empty()) {
    const Vec p = parsePose(o.truth);
    if (!e.contains(p)) {
      err << "soundness violation: the given true pose is not in the estimate\n";
      return kExitSoundness;
    }
  }
  return kExitOk;
}

int cmdExperiment(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = resolveConfig(o);
  const Target t = resolve_target(c.target);
  const CandidateStore store = openStore(c, t);
  if (!(store.space == c.space)) throw StoreMismatch("store was built for a different pose space");
  const EstimateConfig ec = estimateConfig(c);

  std::mt19937_64 rng(c.seed);
  std::ostringstream csv;
  csv << "sample,contained,candidatesAfterFilter,timeFilter_s,timeRefine_s,normVolFilter,normVolOurs\n";
  std::size_t contained = 0;
  double sumFilter = 0, sumOurs = 0;
  for (std::size_t s = 0; s < c.samples; ++s) {
    const Vec p = samplePose(rng, c.space);
    BinaryImage obs = observe(t, c, Pose::fromVector(p), rng);
    if (c.denoise) obs = denoise(obs);
    const CertifiedPoseEstimate e = estimate(obs, store, ec);
    const bool in = e.contains(p);
    contained += in;
    sumFilter += e.normVolFilter();
    sumOurs += e.normVolOurs();
    csv << s << "," << (in ? "true" : "false") << "," << e.numAfterFilter << ","
        << num(o.zeroTimings ? 0.0 : e.timeFilter_s) << "," << num(o.zeroTimings ? 0.0 : e.timeRefine_s) << ","
        << num(e.normVolFilter()) << "," << num(e.normVolOurs()) << "\n";
  }
  writeText(o.out, csv.str(), out);
  const double n = static_cast<double>(c.samples);
  (o.out.empty() || o.out == "-" ? err : out)
      << "contained " << contained << "/" << c.samples << "  mean normVolFilter " << sumFilter / n
      << "  mean normVolOurs " << sumOurs / n << "  noise " << c.noise
      << "  denoise " << (c.denoise ? "isolated-pixel removal" : "none") << "  seed " << c.seed << "\n";
  if (contained != c.samples) {
    err << "soundness violation: " << c.samples - contained << " true poses not contained\n";
    return kExitSoundness;
  }
  return kExitOk;
}

int cmdDenoise(const Options& o, std::ostream& out) {
  if (o.input.empty() || o.out.empty()) throw ConfigError("denoise needs an input image and --out");
  BinaryImage img;
  try {
    img = load_pbm(o.input);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const BinaryImage clean = denoise(img);
  save_pbm(clean, o.out, o.ascii ? PbmEncoding::Ascii : PbmEncoding::Packed);
  out << "removed " << img.count() - clean.count() << " isolated pixels\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified camera pose estimation from binary images"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "RNG seed (sampling, noise, volume estimates)");
  app.add_option("--noise", o.noise, "Number of flipped pixels; also the noise budget");
  app.add_option("--threads", o.threads, "Worker threads (0: all)")->check(CLI::NonNegativeNumber);
  app.add_option("--store", o.store, "Store directory (default: $CERTIPOSE_STORE)");
  app.add_option("--out", o.out, "Output file or directory");

  auto* targets = app.add_subcommand("targets", "List built-in targets; --out DIR writes their JSON");
  auto* render = app.add_subcommand("render", "Render PBM images for given or sampled poses");
  render->add_option("--pose", o.poses, "x,y,z,thetaX,thetaY,thetaZ (metres, radians); repeatable");
  render->add_option("--samples", o.samples, "Number of sampled poses when no --pose is given");
  render->add_flag("--ascii", o.ascii, "Write P1 instead of P4");
  auto* part = app.add_subcommand("partition", "Partition the pose space and write the boxes as JSON");
  auto* pre = app.add_subcommand("precompute", "Partition, enclose and save a candidate store");
  auto* est = app.add_subcommand("estimate", "Certified pose estimate for one PBM image");
  est->add_option("image", o.input, "Observed PBM image")->required();
  est->add_option("--emit-overlay", o.overlay, "Write vertex-enclosure boxes of the survivors as JSON");
  est->add_option("--truth", o.truth, "Known pose; exit 4 if the estimate misses it");
  est->add_flag("--denoise", o.denoise, "Remove isolated on-pixels first");
  auto* exp = app.add_subcommand("experiment", "Sample poses, estimate each and write a CSV");
  exp->add_option("--samples", o.samples, "Number of scenes");
  exp->add_flag("--denoise", o.denoise, "Remove isolated on-pixels before estimating");
  exp->add_flag("--zero-timings", o.zeroTimings, "Write 0 for timings so output is byte-reproducible");
  auto* den = app.add_subcommand("denoise", "Remove isolated on-pixels until none are left");
  den->add_option("image", o.input, "Input PBM image")->required();
  den->add_flag("--ascii", o.ascii, "Write P1 instead of P4");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    set_max_threads(o.threads);
    if (targets->parsed()) return cmdTargets(o, out);
    if (render->parsed()) return cmdRender(o, out);
    if (part->parsed()) return cmdPartition(o, out);
    if (pre->parsed()) return cmdPrecompute(o, out);
    if (est->parsed()) return cmdEstimate(o, out, err);
    if (exp->parsed()) return cmdExperiment(o, out, err);
    if (den->parsed()) return cmdDenoise(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const StoreMismatch& e) {
    err << "store mismatch: " << e.what() << "\n";
    return kExitStore;
  } catch (const StoreCorrupt& e) {
    err << "store unreadable: " << e.what() << "\n";
    return kExitStore;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}

}  // namespace certipose
