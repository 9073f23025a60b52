#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swarm/analysis.hpp"

namespace swarm::perturb {

/// Independent zero-mean Gaussian position/phase errors plus Bernoulli element failures.
struct PerturbationSpec {
  double sigma_pos_m = 0.0;      // per axis, in-plane and out-of-plane
  double sigma_phase_rad = 0.0;  // per element
  double failure_prob = 0.0;     // per element
  int trials = 100;
  std::uint64_t master_seed = 1;

  void validate() const;
  bool is_zero() const { return sigma_pos_m == 0.0 && sigma_phase_rad == 0.0 && failure_prob == 0.0; }
};

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
};

/// Linear-interpolated percentiles over the sample.
Summary summarize(std::vector<double> values);

struct TrialRecord {
  int trial = 0;
  double peak_loss_db = 0.0;
  double hpbw_rel = 0.0;
  std::optional<double> psll_delta_db;
};

struct DegradationStats {
  Summary peak_loss_db;
  Summary hpbw_rel;
  std::optional<Summary> psll_delta_db;
  int trials = 0;
  std::vector<TrialRecord> records;  // filled when requested
};

std::pair<geometry::ArrayGeometry, beam::WeightVector> perturb_trial(const geometry::ArrayGeometry& geom,
                                                                     const beam::WeightVector& weights,
                                                                     const PerturbationSpec& spec,
                                                                     std::uint64_t trial_index);

struct MonteCarloOptions {
  beam::ElementModel element;
  analysis::MetricOptions metrics;
  unsigned threads = 1;
  bool keep_records = false;
};

DegradationStats monte_carlo_degradation(std::shared_ptr<const geometry::ArrayGeometry> geom,
                                         const beam::WeightVector& weights, const beam::AngularGrid& grid,
                                         const PerturbationSpec& spec, const MonteCarloOptions& opt = {});

struct FailurePoint {
  double fraction = 0.0;
  int failed = 0;
  double mean_directivity_dbi = 0.0;
  double mean_peak_loss_db = 0.0;
};

/// round(p N) elements silenced uniformly at random in each trial.
std::vector<FailurePoint> failure_sweep(std::shared_ptr<const geometry::ArrayGeometry> geom,
                                        const beam::WeightVector& weights, const beam::AngularGrid& grid,
                                        const std::vector<double>& fractions, int trials, std::uint64_t seed,
                                        const MonteCarloOptions& opt = {});

std::string stats_json(const PerturbationSpec& spec, const DegradationStats& stats);
std::string trials_csv(const DegradationStats& stats);
std::string failure_sweep_csv(const std::vector<FailurePoint>& points);

}  // namespace swarm::perturb
