#include "swarm/scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace swarm::scenario {

namespace fs = std::filesystem;

namespace {

enum class Type { Number, OptNumber, Integer, Seed, String, Bool };

struct Field {
  const char* section;  // "" for top-level scalars, "beams" / "beams.taper" for per-beam keys
  const char* key;
  Type type;
  const char* unit;
  json def;
  bool required;
  const char* description;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"geometry", "kind", Type::String, "rectangular-lattice|sparse-square|sunflower|elsa", nullptr, true,
       "element layout family"},
      {"geometry", "n_platforms", Type::Integer, "count", nullptr, true, "number of platforms N_p"},
      {"geometry", "radiators_per_platform", Type::Integer, "count", 1, false, "elements per platform N_r"},
      {"geometry", "spacing_m", Type::Number, "m", 0.0749481145, false, "lattice platform pitch d"},
      {"geometry", "radial_scale_m", Type::Number, "m", 1.0, false, "spiral radial scale a"},
      {"geometry", "n_arms", Type::Integer, "count", 5, false, "spiral arms (elsa)"},
      {"geometry", "growth_rate", Type::Number, "1/rad", 0.2, false, "log-spiral growth rate b (elsa)"},
      {"geometry", "min_spacing_m", Type::Number, "m", 0.0749481145, false, "minimum element separation d_min"},
      {"geometry", "frequency_hz", Type::Number, "Hz", 2.0e9, false, "carrier frequency"},
      {"geometry", "nx", Type::Integer, "count", 0, false, "lattice columns (0 = square from n_platforms)"},
      {"geometry", "ny", Type::Integer, "count", 0, false, "lattice rows (0 = square from n_platforms)"},
      {"beams", "u", Type::Number, "direction cosine", 0.0, false, "steering u"},
      {"beams", "v", Type::Number, "direction cosine", 0.0, false, "steering v"},
      {"beams.taper", "kind", Type::String, "uniform|radial-hann|radial-hamming|radial-taylor-approx", "uniform",
       false, "amplitude taper"},
      {"beams.taper", "pedestal", Type::Number, "amplitude", 0.01, false, "radial-hann edge amplitude"},
      {"beams.taper", "sll_db", Type::Number, "dB", -30.0, false, "radial-taylor-approx design sidelobe level"},
      {"beams.taper", "nbar", Type::Integer, "count", 5, false, "radial-taylor-approx n-bar"},
      {"grid", "n_u", Type::Integer, "count", 1024, false, "samples along u"},
      {"grid", "n_v", Type::Integer, "count", 1024, false, "samples along v"},
      {"grid", "u_min", Type::Number, "direction cosine", -1.0, false, "grid lower u"},
      {"grid", "u_max", Type::Number, "direction cosine", 1.0, false, "grid upper u"},
      {"grid", "v_min", Type::Number, "direction cosine", -1.0, false, "grid lower v"},
      {"grid", "v_max", Type::Number, "direction cosine", 1.0, false, "grid upper v"},
      {"element", "kind", Type::String, "isotropic|cosine-q", "isotropic", false, "element pattern"},
      {"element", "q", Type::Number, "exponent", 1.0, false, "cosine-q exponent"},
      {"analysis", "mask_factor", Type::Number, "x full HPBW", 1.5, false, "main-lobe mask semi-axis"},
      {"analysis", "gl_threshold_db", Type::Number, "dB", -10.0, false, "grating-lobe detection threshold"},
      {"", "altitude_m", Type::Number, "m", 500e3, false, "orbit altitude for the footprint radius"},
      {"link", "element_power_w", Type::Number, "W", 1.0, false, "transmit power per element"},
      {"link", "element_gain_dbi", Type::Number, "dBi", 5.0, false, "element gain"},
      {"link", "ue_gain_dbi", Type::Number, "dBi", 0.0, false, "handheld antenna gain"},
      {"link", "misc_losses_db", Type::Number, "dB", 3.0, false, "aggregate extra losses"},
      {"link", "ue_sensitivity_dbm", Type::Number, "dBm", -100.0, false, "handheld sensitivity for the margin"},
      {"link", "target_p_rx_dbm", Type::Number, "dBm", -75.0, false, "received-power target for min elements"},
      {"link", "distance_m", Type::OptNumber, "m", nullptr, false, "slant range (null = altitude)"},
      {"perturbation", "sigma_pos_m", Type::Number, "m", 0.0, false, "position error std per axis"},
      {"perturbation", "sigma_phase_rad", Type::Number, "rad", 0.0, false, "phase error std"},
      {"perturbation", "failure_prob", Type::Number, "probability", 0.0, false, "per-element failure probability"},
      {"perturbation", "trials", Type::Integer, "count", 100, false, "Monte Carlo trials"},
      {"perturbation", "master_seed", Type::Seed, "u64", 1, false, "counter-based RNG key"},
      {"perturbation", "grid_n", Type::Integer, "count", 65, false, "samples per axis of the zoomed grid"},
      {"perturbation", "window_hpbw", Type::Number, "x full HPBW", 4.0, false, "zoomed grid half-width"},
      {"perturbation", "per_trial_csv", Type::Bool, "flag", false, false, "also write per-trial records"},
      {"outputs", "dir", Type::String, "path", "out", false, "output directory"},
      {"outputs", "pattern_csv", Type::Bool, "flag", true, false, "write the pattern CSVs"},
  };
  return table;
}

const std::vector<std::string> kTopLevel = {"geometry", "beams",        "grid",   "element", "analysis",
                                            "altitude_m", "link",       "perturbation", "outputs"};

const char* type_name(Type t) {
  switch (t) {
    case Type::Number: return "number";
    case Type::OptNumber: return "number or null";
    case Type::Integer: return "integer";
    case Type::Seed: return "unsigned 64-bit integer";
    case Type::String: return "string";
    case Type::Bool: return "boolean";
  }
  return "?";
}

bool type_ok(Type t, const json& v) {
  switch (t) {
    case Type::Number: return v.is_number();
    case Type::OptNumber: return v.is_number() || v.is_null();
    case Type::Integer: return v.is_number_integer() && v.get<long long>() >= INT32_MIN && v.get<long long>() <= INT32_MAX;
    case Type::Seed: return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    case Type::String: return v.is_string();
    case Type::Bool: return v.is_boolean();
  }
  return false;
}

std::string nearest(const std::string& key, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = SIZE_MAX;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d) best_d = d, best = c;
  }
  return best;
}

std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Fills one object section from the schema, recording defaults and rejecting strays.
json resolve_section(const std::string& section, const json& in, const std::string& path,
                     std::vector<std::string>& defaults_applied, const std::vector<std::string>& nested = {}) {
  if (!in.is_object()) throw ConfigError(path + ": expected an object");
  std::vector<std::string> known;
  for (const auto& f : fields())
    if (f.section == section) known.emplace_back(f.key);
  for (const auto& n : nested) known.push_back(n);
  for (const auto& [k, v] : in.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError("unknown key '" + join_path(path, k) + "'; did you mean '" + join_path(path, nearest(k, known)) +
                        "'?");
  }
  json out = json::object();
  for (const auto& f : fields()) {
    if (f.section != section) continue;
    const std::string p = join_path(path, f.key);
    if (in.contains(f.key)) {
      const auto& v = in.at(f.key);
      if (!type_ok(f.type, v))
        throw ConfigError(p + ": expected " + type_name(f.type) + " [" + f.unit + "], got " + v.type_name());
      out[f.key] = v;
    } else if (f.required) {
      throw ConfigError("missing required key '" + p + "' (" + type_name(f.type) + " [" + f.unit + "])");
    } else {
      out[f.key] = f.def;
      defaults_applied.push_back(p);
    }
  }
  return out;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

}  // namespace

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

json schema() {
  json out = json::array();
  for (const auto& f : fields()) {
    std::string path = f.section;
    if (path == "beams") path = "beams[].";
    else if (path == "beams.taper") path = "beams[].taper.";
    else if (!path.empty()) path += ".";
    out.push_back({{"path", path + f.key},
                   {"type", type_name(f.type)},
                   {"unit", f.unit},
                   {"default", f.def},
                   {"required", f.required},
                   {"description", f.description}});
  }
  return out;
}

json defaults() {
  json out = json::object();
  json beam = json::object(), taper = json::object();
  for (const auto& f : fields()) {
    const std::string s = f.section;
    if (s.empty()) out[f.key] = f.def;
    else if (s == "beams") beam[f.key] = f.def;
    else if (s == "beams.taper") taper[f.key] = f.def;
    else out[s][f.key] = f.def;
  }
  beam["taper"] = taper;
  out["beams"] = json::array({beam});
  json ordered = json::object();
  for (const auto& k : kTopLevel)
    if (out.contains(k)) ordered[k] = out[k];
  return ordered;
}

link::LinkBudgetParams ScenarioConfig::link_params() const {
  link::LinkBudgetParams p;
  p.frequency_hz = geometry.frequency_hz;
  p.distance_m = link.distance_m.value_or(altitude_m);
  p.element_power_w = link.element_power_w;
  p.element_gain_dbi = link.element_gain_dbi;
  p.n_elements = geometry.total_elements();
  p.ue_gain_dbi = link.ue_gain_dbi;
  p.misc_losses_db = link.misc_losses_db;
  p.ue_sensitivity_dbm = link.ue_sensitivity_dbm;
  return p;
}

ScenarioConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a top-level object");
  for (const auto& [k, v] : doc.items()) {
    if (std::find(kTopLevel.begin(), kTopLevel.end(), k) == kTopLevel.end())
      throw ConfigError("unknown key '" + k + "'; did you mean '" + nearest(k, kTopLevel) + "'?");
  }
  ScenarioConfig c;
  auto& applied = c.defaults_applied;
  auto section = [&](const char* name) {
    return resolve_section(name, doc.contains(name) ? doc.at(name) : json::object(), name, applied);
  };

  if (!doc.contains("geometry")) throw ConfigError("missing required section 'geometry'");
  const json g = section("geometry");
  c.geometry.kind = geometry::kind_from_string(g["kind"].get<std::string>());
  c.geometry.n_platforms = g["n_platforms"].get<int>();
  c.geometry.radiators_per_platform = g["radiators_per_platform"].get<int>();
  c.geometry.spacing_m = g["spacing_m"].get<double>();
  c.geometry.radial_scale_m = g["radial_scale_m"].get<double>();
  c.geometry.n_arms = g["n_arms"].get<int>();
  c.geometry.growth_rate = g["growth_rate"].get<double>();
  c.geometry.min_spacing_m = g["min_spacing_m"].get<double>();
  c.geometry.frequency_hz = g["frequency_hz"].get<double>();
  c.geometry.nx = g["nx"].get<int>();
  c.geometry.ny = g["ny"].get<int>();
  c.geometry.validate();

  json beams = doc.contains("beams") ? doc.at("beams") : json::array({json::object()});
  if (!doc.contains("beams")) applied.push_back("beams");
  if (!beams.is_array() || beams.empty()) throw ConfigError("beams: expected a non-empty array of objects");
  for (std::size_t i = 0; i < beams.size(); ++i) {
    const std::string path = "beams[" + std::to_string(i) + "]";
    const json b = resolve_section("beams", beams[i], path, applied, {"taper"});
    const json t = resolve_section("beams.taper", beams[i].is_object() && beams[i].contains("taper") ? beams[i]["taper"]
                                                                                                    : json::object(),
                                   path + ".taper", applied);
    beam::Beam beam;
    beam.direction = {b["u"].get<double>(), b["v"].get<double>()};
    if (beam.direction.u * beam.direction.u + beam.direction.v * beam.direction.v > 1.0)
      throw DomainError(path + ": steering direction outside the visible region");
    beam.taper.kind = beam::taper_from_string(t["kind"].get<std::string>());
    beam.taper.pedestal = t["pedestal"].get<double>();
    beam.taper.sll_db = t["sll_db"].get<double>();
    beam.taper.nbar = t["nbar"].get<int>();
    c.beams.push_back(beam);
  }

  const json gr = section("grid");
  c.grid = {gr["u_min"].get<double>(), gr["u_max"].get<double>(), gr["v_min"].get<double>(),
            gr["v_max"].get<double>(), gr["n_u"].get<int>(),    gr["n_v"].get<int>()};
  c.grid.validate();

  const json el = section("element");
  const auto ek = el["kind"].get<std::string>();
  if (ek == "isotropic") c.element.kind = beam::ElementModel::Kind::Isotropic;
  else if (ek == "cosine-q") c.element.kind = beam::ElementModel::Kind::CosineQ;
  else throw ConfigError("element.kind: unknown element '" + ek + "' (isotropic|cosine-q)");
  c.element.q = el["q"].get<double>();
  if (!(c.element.q >= 0)) throw ConfigError("element.q must be >= 0");

  const json an = section("analysis");
  c.analysis.mask_factor = an["mask_factor"].get<double>();
  c.analysis.gl_threshold_db = an["gl_threshold_db"].get<double>();
  if (!(c.analysis.mask_factor > 0)) throw ConfigError("analysis.mask_factor must be > 0");

  const Field* alt = find_field("", "altitude_m");
  if (doc.contains("altitude_m")) {
    if (!type_ok(alt->type, doc["altitude_m"]))
      throw ConfigError(std::string("altitude_m: expected number [m], got ") + doc["altitude_m"].type_name());
    c.altitude_m = doc["altitude_m"].get<double>();
  } else {
    c.altitude_m = alt->def.get<double>();
    applied.push_back("altitude_m");
  }
  if (!(c.altitude_m > 0)) throw ConfigError("altitude_m must be > 0 [m]");
  c.analysis.altitude_m = c.altitude_m;

  const json l = section("link");
  c.link.element_power_w = l["element_power_w"].get<double>();
  c.link.element_gain_dbi = l["element_gain_dbi"].get<double>();
  c.link.ue_gain_dbi = l["ue_gain_dbi"].get<double>();
  c.link.misc_losses_db = l["misc_losses_db"].get<double>();
  c.link.ue_sensitivity_dbm = l["ue_sensitivity_dbm"].get<double>();
  c.link.target_p_rx_dbm = l["target_p_rx_dbm"].get<double>();
  if (!l["distance_m"].is_null()) c.link.distance_m = l["distance_m"].get<double>();
  c.link_params().validate();

  if (doc.contains("perturbation")) {
    const json p = section("perturbation");
    PerturbationConfig pc;
    pc.spec.sigma_pos_m = p["sigma_pos_m"].get<double>();
    pc.spec.sigma_phase_rad = p["sigma_phase_rad"].get<double>();
    pc.spec.failure_prob = p["failure_prob"].get<double>();
    pc.spec.trials = p["trials"].get<int>();
    pc.spec.master_seed = p["master_seed"].get<std::uint64_t>();
    pc.grid_n = p["grid_n"].get<int>();
    pc.window_hpbw = p["window_hpbw"].get<double>();
    pc.per_trial_csv = p["per_trial_csv"].get<bool>();
    pc.spec.validate();
    if (pc.grid_n < 9) throw ConfigError("perturbation.grid_n must be >= 9");
    if (!(pc.window_hpbw > 0)) throw ConfigError("perturbation.window_hpbw must be > 0");
    c.perturbation = pc;
  }

  const json o = section("outputs");
  c.outputs.dir = o["dir"].get<std::string>();
  c.outputs.pattern_csv = o["pattern_csv"].get<bool>();
  return c;
}

ScenarioConfig parse_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json serialize(const ScenarioConfig& c) {
  json out;
  const auto& g = c.geometry;
  out["geometry"] = {{"kind", geometry::to_string(g.kind)},
                     {"n_platforms", g.n_platforms},
                     {"radiators_per_platform", g.radiators_per_platform},
                     {"spacing_m", g.spacing_m},
                     {"radial_scale_m", g.radial_scale_m},
                     {"n_arms", g.n_arms},
                     {"growth_rate", g.growth_rate},
                     {"min_spacing_m", g.min_spacing_m},
                     {"frequency_hz", g.frequency_hz},
                     {"nx", g.nx},
                     {"ny", g.ny}};
  out["beams"] = json::array();
  for (const auto& b : c.beams) {
    out["beams"].push_back({{"u", b.direction.u},
                            {"v", b.direction.v},
                            {"taper",
                             {{"kind", beam::to_string(b.taper.kind)},
                              {"pedestal", b.taper.pedestal},
                              {"sll_db", b.taper.sll_db},
                              {"nbar", b.taper.nbar}}}});
  }
  out["grid"] = {{"n_u", c.grid.n_u},     {"n_v", c.grid.n_v},     {"u_min", c.grid.u_min},
                 {"u_max", c.grid.u_max}, {"v_min", c.grid.v_min}, {"v_max", c.grid.v_max}};
  out["element"] = {{"kind", c.element.isotropic() ? "isotropic" : "cosine-q"}, {"q", c.element.q}};
  out["analysis"] = {{"mask_factor", c.analysis.mask_factor}, {"gl_threshold_db", c.analysis.gl_threshold_db}};
  out["altitude_m"] = c.altitude_m;
  out["link"] = {{"element_power_w", c.link.element_power_w},
                 {"element_gain_dbi", c.link.element_gain_dbi},
                 {"ue_gain_dbi", c.link.ue_gain_dbi},
                 {"misc_losses_db", c.link.misc_losses_db},
                 {"ue_sensitivity_dbm", c.link.ue_sensitivity_dbm},
                 {"target_p_rx_dbm", c.link.target_p_rx_dbm},
                 {"distance_m", c.link.distance_m ? json(*c.link.distance_m) : json(nullptr)}};
  if (c.perturbation) {
    const auto& p = *c.perturbation;
    out["perturbation"] = {{"sigma_pos_m", p.spec.sigma_pos_m},     {"sigma_phase_rad", p.spec.sigma_phase_rad},
                           {"failure_prob", p.spec.failure_prob},   {"trials", p.spec.trials},
                           {"master_seed", p.spec.master_seed},     {"grid_n", p.grid_n},
                           {"window_hpbw", p.window_hpbw},          {"per_trial_csv", p.per_trial_csv}};
  }
  out["outputs"] = {{"dir", c.outputs.dir}, {"pattern_csv", c.outputs.pattern_csv}};
  return out;
}

// ---- bundle -----------------------------------------------------------------

namespace {

struct Evaluated {
  std::shared_ptr<const geometry::ArrayGeometry> geom;
  geometry::GeometryStats stats;
  std::vector<beam::Pattern> patterns;
  std::vector<analysis::PatternMetrics> metrics;
};

Evaluated evaluate(const ScenarioConfig& c, const RunOptions& opt, bool with_patterns, bool with_metrics) {
  Evaluated e;
  e.geom = std::make_shared<const geometry::ArrayGeometry>(geometry::generate(c.geometry));
  e.stats = geometry::compute_stats(*e.geom);
  if (!with_patterns) return e;
  e.patterns = beam::evaluate_multibeam(e.geom, c.beams, c.grid, c.element, opt.threads);
  if (with_metrics)
    for (const auto& p : e.patterns) e.metrics.push_back(analysis::compute_metrics(p, c.analysis));
  return e;
}

json geometry_stats_json(const geometry::GeometryStats& s) {
  return {{"n_elements", s.n_elements},
          {"d_ave_m", s.d_ave ? json(*s.d_ave) : json(nullptr)},
          {"aperture_diameter_m", s.aperture_diameter},
          {"virtual_aperture_m2", s.virtual_aperture}};
}

std::vector<Artifact> pattern_files(const ScenarioConfig& c, const Evaluated& e) {
  std::vector<Artifact> out;
  for (std::size_t i = 0; i < e.patterns.size(); ++i) {
    const std::string stem = "pattern_beam" + std::to_string(i);
    if (c.outputs.pattern_csv) out.push_back({stem + ".csv", beam::pattern_csv(e.patterns[i])});
    out.push_back({stem + ".json", beam::pattern_sidecar_json(e.patterns[i])});
  }
  return out;
}

Artifact metrics_file(const Evaluated& e) {
  json m = json::parse(analysis::metrics_json(e.metrics.front()));
  m["geometry"] = geometry_stats_json(e.stats);
  if (e.patterns.size() > 1) {
    m["beams"] = json::array();
    for (const auto& pm : e.metrics) m["beams"].push_back(json::parse(analysis::metrics_json(pm)));
    std::vector<Direction> centers;
    for (const auto& p : e.patterns) centers.push_back(p.weights.steer);
    const auto cc = analysis::cochannel_ci(e.patterns, centers);
    json ci = json::array();
    for (const auto& v : cc.ci_db) ci.push_back(v ? json(*v) : json(nullptr));
    m["cochannel_ci_db"] = ci;
  }
  return {"metrics.json", m.dump(2) + "\n"};
}

std::vector<Artifact> perturbation_files(const ScenarioConfig& c, const Evaluated& e, const RunOptions& opt) {
  const auto& pc = *c.perturbation;
  const auto& pat = e.patterns.front();
  const auto lobe = analysis::measure_main_lobe(pat, c.analysis);
  const double half = pc.window_hpbw * std::max(lobe.width_u, lobe.width_v);
  const auto zoom = beam::AngularGrid::around(c.beams.front().direction, half, pc.grid_n);
  perturb::MonteCarloOptions mo;
  mo.element = c.element;
  mo.metrics = c.analysis;
  mo.threads = opt.threads;
  mo.keep_records = pc.per_trial_csv;
  const auto weights = pat.weights;
  const auto stats = perturb::monte_carlo_degradation(e.geom, weights, zoom, pc.spec, mo);
  json j = json::parse(perturb::stats_json(pc.spec, stats));
  j["grid"] = {{"u_min", zoom.u_min}, {"u_max", zoom.u_max}, {"v_min", zoom.v_min},
               {"v_max", zoom.v_max}, {"n_u", zoom.n_u},     {"n_v", zoom.n_v}};
  std::vector<Artifact> out{{"perturbation.json", j.dump(2) + "\n"}};
  if (pc.per_trial_csv) out.push_back({"perturbation_trials.csv", perturb::trials_csv(stats)});
  return out;
}

}  // namespace

Artifact geometry_artifact(const ScenarioConfig& c) {
  return {"geometry.csv", geometry::to_csv(geometry::generate(c.geometry))};
}

std::vector<Artifact> pattern_artifacts(const ScenarioConfig& c, const RunOptions& opt) {
  return pattern_files(c, evaluate(c, opt, true, false));
}

std::vector<Artifact> metrics_artifacts(const ScenarioConfig& c, const RunOptions& opt) {
  return {metrics_file(evaluate(c, opt, true, true))};
}

Artifact link_artifact(const ScenarioConfig& c) {
  const auto params = c.link_params();
  const auto result = link::received_power(params);
  json j = json::parse(link::result_json(params, result));
  j["target_p_rx_dbm"] = c.link.target_p_rx_dbm;
  try {
    j["min_elements_for_target"] = link::min_elements_for_power(params, c.link.target_p_rx_dbm);
  } catch (const InfeasibleError& err) {
    j["min_elements_for_target"] = nullptr;
    j["min_elements_error"] = err.what();
  }
  return {"link.json", j.dump(2) + "\n"};
}

std::vector<Artifact> perturbation_artifacts(const ScenarioConfig& c, const RunOptions& opt) {
  if (!c.perturbation) throw ConfigError("config has no perturbation section");
  ScenarioConfig single = c;
  single.beams.resize(1);
  return perturbation_files(single, evaluate(single, opt, true, false), opt);
}

std::vector<Artifact> build_bundle(const ScenarioConfig& c, const RunOptions& opt) {
  const Evaluated e = evaluate(c, opt, true, true);
  std::vector<Artifact> out;
  out.push_back({"geometry.csv", geometry::to_csv(*e.geom)});
  for (auto& a : pattern_files(c, e)) out.push_back(std::move(a));
  out.push_back(metrics_file(e));
  out.push_back(link_artifact(c));
  if (c.perturbation)
    for (auto& a : perturbation_files(c, e, opt)) out.push_back(std::move(a));
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("internal", "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

void write_atomic(const fs::path& target, const std::string& content) {
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move '" + tmp.string() + "' into place");
  }
}

std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void write_bundle(const fs::path& dir, const std::vector<Artifact>& artifacts, const std::string& command,
                  const std::optional<ScenarioConfig>& config) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
  json manifest;
  manifest["command"] = command;
  manifest["created_utc"] = utc_timestamp();
  manifest["artifacts"] = json::array();
  for (const auto& a : artifacts) {
    write_atomic(dir / a.name, a.content);
    manifest["artifacts"].push_back({{"file", a.name}, {"bytes", a.content.size()}, {"sha256", sha256_hex(a.content)}});
  }
  if (config) {
    manifest["config"] = serialize(*config);
    manifest["defaults_applied"] = config->defaults_applied;
  }
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---- sweep ------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

// "beams[0].taper.sll_db" -> ("/beams/0/taper/sll_db", section "beams.taper", key "sll_db")
struct ParsedPath {
  json::json_pointer pointer;
  std::string section;
  std::string key;
};

ParsedPath parse_param_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string section;
  std::string token;
  std::stringstream ss(path);
  while (std::getline(ss, token, '.')) {
    if (token.empty()) throw ConfigError("sweep parameter '" + path + "' is malformed");
    const auto br = token.find('[');
    if (br != std::string::npos) {
      if (token.back() != ']') throw ConfigError("sweep parameter '" + path + "' is malformed");
      parts.push_back(token.substr(0, br));
      parts.push_back(token.substr(br + 1, token.size() - br - 2));
      section += (section.empty() ? "" : ".") + token.substr(0, br);
    } else {
      parts.push_back(token);
      section += (section.empty() ? "" : ".") + token;
    }
  }
  if (parts.empty()) throw ConfigError("sweep parameter is empty");
  ParsedPath out;
  out.key = parts.back();
  const auto dot = section.rfind('.');
  out.section = dot == std::string::npos ? "" : section.substr(0, dot);
  std::string pointer;
  for (const auto& p : parts) pointer += "/" + p;
  out.pointer = json::json_pointer(pointer);
  return out;
}

}  // namespace

std::string sweep(const ScenarioConfig& base, const std::string& param_path, const std::vector<double>& values,
                  const RunOptions& opt) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const ParsedPath pp = parse_param_path(param_path);
  const Field* f = find_field(pp.section, pp.key);
  if (!f) throw ConfigError("sweep parameter '" + param_path + "' is not a config field");
  if (f->type == Type::String || f->type == Type::Bool)
    throw ConfigError("sweep parameter '" + param_path + "' is not numeric (" + type_name(f->type) + ")");

  std::string out = "param,value,metric,result,error\n";
  const json doc = serialize(base);
  for (double value : values) {
    const std::string prefix = csv_field(param_path) + "," + fmt(value) + ",";
    auto row = [&](const std::string& metric, std::optional<double> result, const std::string& err = {}) {
      out += prefix + metric + "," + (result ? fmt(*result) : "") + "," + csv_field(err) + "\n";
    };
    try {
      json d = doc;
      const bool integral = f->type == Type::Integer || f->type == Type::Seed;
      if (integral && value == std::floor(value)) d[pp.pointer] = static_cast<long long>(value);
      else d[pp.pointer] = value;
      const ScenarioConfig c = parse_config(d);
      ScenarioConfig single = c;
      single.beams.resize(1);
      const Evaluated e = evaluate(single, opt, true, true);
      const auto& m = e.metrics.front();
      const auto lr = link::received_power(c.link_params());
      row("n_elements", static_cast<double>(e.stats.n_elements));
      row("d_ave_m", e.stats.d_ave);
      row("aperture_diameter_m", e.stats.aperture_diameter);
      row("hpbw_rad", std::max(m.main_lobe.hpbw_u, m.main_lobe.hpbw_v));
      row("r_b_m", m.footprint_radius_m);
      row("directivity_dbi", m.directivity_dbi, m.directivity_error.value_or(""));
      row("psll_db", m.sidelobes.psll_db);
      row("asll_db", m.sidelobes.asll_db);
      row("gl_count", static_cast<double>(m.sidelobes.grating_lobes.size()));
      row("p_rx_dbm", lr.p_rx_dbm);
      row("margin_db", lr.margin_db);
    } catch (const Error& err) {
      row("", std::nullopt, err.kind() + ": " + err.what());
    }
  }
  return out;
}

// ---- compare ----------------------------------------------------------------

DesignRow evaluate_design(const std::string& name, const ScenarioConfig& c, const RunOptions& opt) {
  ScenarioConfig single = c;
  single.beams.resize(1);
  const Evaluated e = evaluate(single, opt, true, true);
  const auto& m = e.metrics.front();
  const auto lr = link::received_power(c.link_params());
  DesignRow r;
  r.design = name;
  r.kind = geometry::to_string(c.geometry.kind);
  r.n_elements = e.stats.n_elements;
  r.d_ave_m = e.stats.d_ave;
  r.aperture_diameter_m = e.stats.aperture_diameter;
  r.hpbw_rad = std::max(m.main_lobe.hpbw_u, m.main_lobe.hpbw_v);
  r.r_b_m = m.footprint_radius_m;
  r.psll_db = m.sidelobes.psll_db;
  r.asll_db = m.sidelobes.asll_db;
  r.gl_count = m.sidelobes.grating_lobes.size();
  r.p_rx_dbm = lr.p_rx_dbm;
  r.margin_db = lr.margin_db;
  return r;
}

Comparison compare_designs(const std::vector<std::pair<std::string, ScenarioConfig>>& designs, const RunOptions& opt) {
  if (designs.empty()) throw ConfigError("compare needs at least one design");
  const auto& ref = designs.front().second;
  for (const auto& [name, c] : designs) {
    if (c.geometry.frequency_hz != ref.geometry.frequency_hz)
      throw ComparabilityError("design '" + name + "' uses " + fmt(c.geometry.frequency_hz) + " Hz but '" +
                               designs.front().first + "' uses " + fmt(ref.geometry.frequency_hz) + " Hz");
    if (c.altitude_m != ref.altitude_m)
      throw ComparabilityError("design '" + name + "' uses altitude " + fmt(c.altitude_m) + " m but '" +
                               designs.front().first + "' uses " + fmt(ref.altitude_m) + " m");
  }
  Comparison out;
  for (const auto& [name, c] : designs) out.rows.push_back(evaluate_design(name, c, opt));
  return out;
}

std::string Comparison::csv() const {
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  std::string out =
      "design,kind,n_elements,d_ave_m,aperture_diameter_m,hpbw_rad,r_b_m,psll_db,asll_db,gl_count,p_rx_dbm,margin_db\n";
  for (const auto& r : rows) {
    out += csv_field(r.design) + "," + r.kind + "," + std::to_string(r.n_elements) + "," + opt(r.d_ave_m) + "," +
           fmt(r.aperture_diameter_m) + "," + fmt(r.hpbw_rad) + "," + fmt(r.r_b_m) + "," + opt(r.psll_db) + "," +
           opt(r.asll_db) + "," + std::to_string(r.gl_count) + "," + fmt(r.p_rx_dbm) + "," + fmt(r.margin_db) + "\n";
  }
  return out;
}

std::string Comparison::json_text() const {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"design", r.design},
                   {"kind", r.kind},
                   {"n_elements", r.n_elements},
                   {"d_ave_m", opt(r.d_ave_m)},
                   {"aperture_diameter_m", r.aperture_diameter_m},
                   {"hpbw_rad", r.hpbw_rad},
                   {"r_b_m", r.r_b_m},
                   {"psll_db", opt(r.psll_db)},
                   {"asll_db", opt(r.asll_db)},
                   {"gl_count", r.gl_count},
                   {"p_rx_dbm", r.p_rx_dbm},
                   {"margin_db", r.margin_db}});
  }
  return json{{"designs", arr}}.dump(2) + "\n";
}

}  // namespace swarm::scenario
