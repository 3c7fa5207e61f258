#include "nanorod/errors.hpp"
#include "nanorod/geometry.hpp"
#include "nanorod/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nanorod {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    std::string where = origin_;
    int line = locate(path);
    if (line > 0) where += ":" + std::to_string(line);
    throw Error(ErrorCode::ConfigError, where + ": field '" + path + "': " + msg);
  }

  void keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items())
      if (!allowed.count(key)) fail(join(path, key), "unknown key");
  }

  double number(const json& obj, const std::string& path, const std::string& key, double def) const {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) fail(join(path, key), "expected a finite number");
    return d;
  }

  double positive(const json& obj, const std::string& path, const std::string& key, double def) const {
    double d = number(obj, path, key, def);
    if (!(d > 0.0)) fail(join(path, key), "must be positive");
    return d;
  }

  long long integer(const json& obj, const std::string& path, const std::string& key, long long def) const {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    return v.get<long long>();
  }

  std::string string(const json& obj, const std::string& path, const std::string& key, const std::string& def) const {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
  }

  Vec3 vec3(const json& v, const std::string& path) const {
    if (!v.is_array() || v.size() != 3) fail(path, "expected an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) fail(path, "expected an array of 3 numbers");
      out(i) = v[i].get<double>();
    }
    if (!out.allFinite()) fail(path, "entries must be finite");
    return out;
  }

  std::vector<int> increasing_ks(const json& v, const std::string& path) const {
    if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of integers");
    std::vector<int> ks;
    for (const json& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 1 || e.get<long long>() > 1 << 20)
        fail(path, "entries must be positive integers");
      ks.push_back(e.get<int>());
    }
    for (std::size_t i = 1; i < ks.size(); ++i)
      if (ks[i] <= ks[i - 1]) fail(path, "must be strictly increasing");
    return ks;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  // Line of the last named key of the path, or 0.
  int locate(const std::string& path) const {
    std::string key = path;
    auto dot = key.find_last_of('.');
    if (dot != std::string::npos) key = key.substr(dot + 1);
    auto br = key.find('[');
    if (br != std::string::npos) key = key.substr(0, br);
    if (key.empty()) return 0;
    auto pos = text_.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

  const std::string& text_;
  std::string origin_;
};

PairPotentialModel parse_potential(const Reader& rd, const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("type")) rd.fail(path, "expected an object with a 'type'");
  std::string type = rd.string(j, path, "type", "");
  if (type == "ljts") {
    rd.keys(j, path, {"type", "depth"});
    return {LJTS{rd.positive(j, path, "depth", 1.0)}};
  }
  if (type == "trunc_harmonic") {
    rd.keys(j, path, {"type", "stiffness", "plateau_plus", "plateau_minus"});
    return {TruncHarmonic{rd.positive(j, path, "stiffness", 1.0), rd.positive(j, path, "plateau_plus", 0.3),
                          rd.positive(j, path, "plateau_minus", 0.3)}};
  }
  if (type == "splined") {
    rd.keys(j, path, {"type", "stiffness", "omega", "plateau_power", "range_power"});
    SplinedPair s;
    s.core = ElasticCore::harmonic(rd.positive(j, path, "stiffness", 1.0));
    s.omega = rd.positive(j, path, "omega", s.omega);
    s.plateau_power = rd.positive(j, path, "plateau_power", s.plateau_power);
    s.range_power = rd.positive(j, path, "range_power", s.range_power);
    return {s};
  }
  rd.fail(Reader::join(path, "type"), "unknown potential type '" + type + "' (ljts, trunc_harmonic, splined)");
}

CellEnergyModel parse_model(const Reader& rd, const json& j) {
  const std::string path = "model";
  rd.keys(j, path, {"pair", "nn", "nnn", "simplified_min", "penalty"});
  OrientationPenalty pen;
  if (j.contains("penalty")) {
    const json& p = j.at("penalty");
    std::string pp = "model.penalty";
    rd.keys(p, pp, {"strength", "radius"});
    pen.strength = rd.number(p, pp, "strength", pen.strength);
    pen.radius = rd.number(p, pp, "radius", pen.radius);
    if (pen.strength < 0.0 || pen.radius < 0.0) rd.fail(pp, "strength and radius must be nonnegative");
  }
  int kinds = static_cast<int>(j.contains("pair")) + static_cast<int>(j.contains("nn") || j.contains("nnn")) +
              static_cast<int>(j.contains("simplified_min"));
  if (kinds != 1) rd.fail(path, "give exactly one of 'pair', 'nn' + 'nnn', or 'simplified_min'");
  if (j.contains("pair")) return CellEnergyModel::pair(parse_potential(rd, j.at("pair"), "model.pair"), pen);
  if (j.contains("simplified_min")) {
    const json& s = j.at("simplified_min");
    std::string sp = "model.simplified_min";
    rd.keys(s, sp, {"stiffness", "cbar1"});
    return CellEnergyModel::simplified_min({rd.positive(s, sp, "stiffness", 1.0), rd.positive(s, sp, "cbar1", 0.3)},
                                           pen);
  }
  if (!j.contains("nn") || !j.contains("nnn")) rd.fail(path, "'nn' and 'nnn' must be given together");
  return CellEnergyModel::pair(parse_potential(rd, j.at("nn"), "model.nn"),
                               parse_potential(rd, j.at("nnn"), "model.nnn"), pen);
}

void parse_frame(const Reader& rd, const json& j, StudyConfig& cfg) {
  rd.keys(j, "frame", {"segments", "jumps"});
  if (!j.contains("segments") || !j.at("segments").is_array() || j.at("segments").empty())
    rd.fail("frame.segments", "expected a nonempty array");
  int i = 0;
  for (const json& s : j.at("segments")) {
    std::string p = "frame.segments[" + std::to_string(i++) + "]";
    rd.keys(s, p, {"kind", "length", "kappa", "tau", "plane"});
    SegmentSpec spec;
    std::string kind = rd.string(s, p, "kind", "straight");
    if (kind == "straight")
      spec.kind = SegmentSpec::Kind::Straight;
    else if (kind == "arc")
      spec.kind = SegmentSpec::Kind::Arc;
    else if (kind == "helix")
      spec.kind = SegmentSpec::Kind::Helix;
    else
      rd.fail(Reader::join(p, "kind"), "unknown segment kind '" + kind + "' (straight, arc, helix)");
    spec.length = rd.positive(s, p, "length", 1.0);
    spec.kappa = rd.number(s, p, "kappa", 0.0);
    spec.tau = rd.number(s, p, "tau", 0.0);
    spec.plane = static_cast<int>(rd.integer(s, p, "plane", 2));
    if (spec.plane != 2 && spec.plane != 3) rd.fail(Reader::join(p, "plane"), "must be 2 or 3");
    cfg.segments.push_back(spec);
  }
  if (j.contains("jumps")) {
    if (!j.at("jumps").is_array()) rd.fail("frame.jumps", "expected an array");
    i = 0;
    for (const json& s : j.at("jumps")) {
      std::string p = "frame.jumps[" + std::to_string(i++) + "]";
      rd.keys(s, p, {"sigma", "u", "axis", "angle"});
      JumpSpec js;
      if (!s.contains("sigma")) rd.fail(p, "missing 'sigma'");
      js.sigma = rd.number(s, p, "sigma", 0.0);
      if (s.contains("u")) js.u = rd.vec3(s.at("u"), Reader::join(p, "u"));
      if (s.contains("axis")) js.axis = rd.vec3(s.at("axis"), Reader::join(p, "axis"));
      if (js.axis.norm() == 0.0) rd.fail(Reader::join(p, "axis"), "must be nonzero");
      js.angle = rd.number(s, p, "angle", 0.0);
      cfg.jumps.push_back(js);
    }
  }
}

void parse_phi(const Reader& rd, const json& j, StudyConfig& cfg) {
  const std::string p = "phi";
  rd.keys(j, p,
          {"schedule", "starts", "u", "rotation", "max_iterations", "perturbation", "reactivation_rounds",
           "reactivation_attempts"});
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    if (!s.is_array() || s.empty()) rd.fail("phi.schedule", "expected a nonempty array");
    cfg.phi_schedule.clear();
    int i = 0;
    for (const json& e : s) {
      std::string ep = "phi.schedule[" + std::to_string(i++) + "]";
      rd.keys(e, ep, {"r", "k"});
      ScheduleEntry se{rd.number(e, ep, "r", 0.0), static_cast<int>(rd.integer(e, ep, "k", 0))};
      if (!(se.r > 0.0 && se.r < 1.0)) rd.fail(Reader::join(ep, "r"), "must lie in (0, 1)");
      if (se.k < 1 || half_layers(se) < 8) rd.fail(ep, "needs k >= 1 and r k >= 8");
      cfg.phi_schedule.push_back(se);
    }
  }
  PhiOptions& o = cfg.phi_options;
  o.starts = static_cast<int>(rd.integer(j, p, "starts", o.starts));
  if (o.starts < 1) rd.fail("phi.starts", "must be at least 1");
  o.max_iterations = static_cast<int>(rd.integer(j, p, "max_iterations", o.max_iterations));
  o.perturbation = rd.number(j, p, "perturbation", o.perturbation);
  o.reactivation_rounds = static_cast<int>(rd.integer(j, p, "reactivation_rounds", o.reactivation_rounds));
  o.reactivation_attempts = static_cast<int>(rd.integer(j, p, "reactivation_attempts", o.reactivation_attempts));
  if (j.contains("u")) cfg.phi_u = rd.vec3(j.at("u"), "phi.u");
  if (j.contains("rotation")) {
    const json& r = j.at("rotation");
    rd.keys(r, "phi.rotation", {"axis", "angle"});
    Vec3 axis = r.contains("axis") ? rd.vec3(r.at("axis"), "phi.rotation.axis") : Vec3::UnitZ();
    if (axis.norm() == 0.0) rd.fail("phi.rotation.axis", "must be nonzero");
    cfg.phi_rotation = rotation_from_axis_angle(axis, rd.number(r, "phi.rotation", "angle", 0.0));
  }
}

}  // namespace

StudyConfig parse_config(const std::string& text, const std::string& origin) {
  Reader rd(text, origin);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw Error(ErrorCode::ConfigError, origin + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  rd.keys(j, "",
          {"model", "cross_section", "frame", "k_list", "correctors", "splice_radius", "c_e", "seed", "threads",
           "output", "format", "phi", "qrel", "check", "deformation"});
  StudyConfig cfg;
  cfg.phi_schedule = {{0.5, 16}, {0.25, 64}};
  if (j.contains("model")) cfg.model = parse_model(rd, j.at("model"));
  if (j.contains("cross_section")) {
    const json& c = j.at("cross_section");
    if (!c.is_array()) rd.fail("cross_section", "expected an array of [i, j] pairs");
    cfg.midpoints.clear();
    for (const json& e : c) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        rd.fail("cross_section", "expected an array of [i, j] integer pairs");
      cfg.midpoints.push_back({e[0].get<int>(), e[1].get<int>()});
    }
  }
  try {
    cfg.cs = build_cross_section(cfg.midpoints);
  } catch (const Error& e) {
    rd.fail("cross_section", e.what());
  }
  if (j.contains("frame"))
    parse_frame(rd, j.at("frame"), cfg);
  else
    cfg.segments = {SegmentSpec{}};
  if (j.contains("k_list")) cfg.k_list = rd.increasing_ks(j.at("k_list"), "k_list");
  cfg.correctors = rd.string(j, "", "correctors", cfg.correctors);
  if (cfg.correctors != "none" && cfg.correctors != "optimal") rd.fail("correctors", "must be 'none' or 'optimal'");
  cfg.splice_radius = rd.number(j, "", "splice_radius", 0.0);
  cfg.c_e = rd.number(j, "", "c_e", 1.0);
  if (cfg.c_e < 1.0) rd.fail("c_e", "must be >= 1");
  long long seed = rd.integer(j, "", "seed", 1);
  if (seed < 0) rd.fail("seed", "must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.phi_options.seed = cfg.seed;
  cfg.threads = static_cast<int>(rd.integer(j, "", "threads", 1));
  if (cfg.threads < 1) rd.fail("threads", "must be at least 1");
  cfg.phi_options.threads = cfg.threads;
  cfg.output = rd.string(j, "", "output", "");
  cfg.format = rd.string(j, "", "format", "csv");
  if (cfg.format != "csv" && cfg.format != "json") rd.fail("format", "must be 'csv' or 'json'");
  if (j.contains("phi")) parse_phi(rd, j.at("phi"), cfg);
  if (j.contains("qrel")) {
    const json& q = j.at("qrel");
    rd.keys(q, "qrel", {"generators"});
    if (q.contains("generators")) {
      if (!q.at("generators").is_array()) rd.fail("qrel.generators", "expected an array of axial vectors");
      for (const json& g : q.at("generators")) cfg.qrel_generators.push_back(rd.vec3(g, "qrel.generators"));
    }
  }
  if (j.contains("check")) {
    const json& c = j.at("check");
    rd.keys(c, "check", {"k_list", "samples"});
    if (c.contains("k_list")) cfg.check_k_list = rd.increasing_ks(c.at("k_list"), "check.k_list");
    cfg.check_samples = rd.integer(c, "check", "samples", cfg.check_samples);
    if (cfg.check_samples < 1) rd.fail("check.samples", "must be at least 1");
  }
  cfg.deformation = rd.string(j, "", "deformation", "");
  try {
    frame_of(cfg);
  } catch (const Error& e) {
    rd.fail("frame", e.what());
  }
  return cfg;
}

StudyConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::ConfigError, path + ": cannot open configuration file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

FrameCurve frame_of(const StudyConfig& cfg) { return build_frame_curve(cfg.segments, cfg.jumps); }

}  // namespace nanorod
