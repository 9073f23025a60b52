#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "swarm/analysis.hpp"
#include "swarm/linkbudget.hpp"
#include "swarm/perturbation.hpp"

namespace swarm::scenario {

using json = nlohmann::ordered_json;

struct LinkConfig {
  double element_power_w = 1.0;
  double element_gain_dbi = 5.0;
  double ue_gain_dbi = 0.0;
  double misc_losses_db = 3.0;
  double ue_sensitivity_dbm = -100.0;
  double target_p_rx_dbm = -75.0;
  std::optional<double> distance_m;  // defaults to the altitude (nadir)
};

struct PerturbationConfig {
  perturb::PerturbationSpec spec;
  int grid_n = 65;             // samples per axis of the zoomed Monte Carlo grid
  double window_hpbw = 4.0;    // zoom half-width in multiples of the baseline half-power width
  bool per_trial_csv = false;
};

struct OutputConfig {
  std::string dir = "out";
  bool pattern_csv = true;
};

struct ScenarioConfig {
  geometry::GeometrySpec geometry;
  std::vector<beam::Beam> beams;
  beam::AngularGrid grid;
  beam::ElementModel element;
  analysis::MetricOptions analysis;  // altitude_m mirrors the top-level altitude
  double altitude_m = 500e3;
  LinkConfig link;
  std::optional<PerturbationConfig> perturbation;
  OutputConfig outputs;
  std::vector<std::string> defaults_applied;  // dotted paths filled from defaults

  link::LinkBudgetParams link_params() const;
};

/// Every accepted key with type, unit, default and description.
json schema();
/// Defaults of every section; required keys appear as null.
json defaults();

ScenarioConfig parse_config(const json& doc);
ScenarioConfig parse_config_file(const std::filesystem::path& path);
/// Fully resolved configuration; parse_config(serialize(c)) reproduces c.
json serialize(const ScenarioConfig& config);

/// Levenshtein edit distance, used for unknown-key suggestions.
std::size_t edit_distance(const std::string& a, const std::string& b);

struct Artifact {
  std::string name;
  std::string content;
};

struct RunOptions {
  unsigned threads = 1;
};

// Individual bundle pieces; each is a pure function of the config.
Artifact geometry_artifact(const ScenarioConfig& c);
std::vector<Artifact> pattern_artifacts(const ScenarioConfig& c, const RunOptions& opt);
std::vector<Artifact> metrics_artifacts(const ScenarioConfig& c, const RunOptions& opt);
Artifact link_artifact(const ScenarioConfig& c);
std::vector<Artifact> perturbation_artifacts(const ScenarioConfig& c, const RunOptions& opt);

/// geometry CSV, pattern CSV + sidecar per beam, metrics JSON, link JSON, and the perturbation
/// stats when configured.
std::vector<Artifact> build_bundle(const ScenarioConfig& c, const RunOptions& opt);

std::string sha256_hex(const std::string& data);

/// Writes each artifact atomically (temp file + rename) and then manifest.json with digests.
/// The manifest is the only file carrying a timestamp.
void write_bundle(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts, const std::string& command,
                  const std::optional<ScenarioConfig>& config);

/// Long-form rows `param,value,metric,result,error`; failed points keep an error and the sweep goes on.
std::string sweep(const ScenarioConfig& base, const std::string& param_path, const std::vector<double>& values,
                  const RunOptions& opt);

struct DesignRow {
  std::string design;
  std::string kind;
  std::size_t n_elements = 0;
  std::optional<double> d_ave_m;
  double aperture_diameter_m = 0.0;
  double hpbw_rad = 0.0;
  double r_b_m = 0.0;
  std::optional<double> psll_db;
  std::optional<double> asll_db;
  std::size_t gl_count = 0;
  double p_rx_dbm = 0.0;
  double margin_db = 0.0;
};

DesignRow evaluate_design(const std::string& name, const ScenarioConfig& c, const RunOptions& opt);

struct Comparison {
  std::vector<DesignRow> rows;
  std::string csv() const;
  std::string json_text() const;
};

/// Throws ComparabilityError unless every design shares frequency and altitude.
Comparison compare_designs(const std::vector<std::pair<std::string, ScenarioConfig>>& designs, const RunOptions& opt);

}  // namespace swarm::scenario
