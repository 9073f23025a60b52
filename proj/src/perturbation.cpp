#include "swarm/perturbation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "swarm/rng.hpp"

namespace swarm::perturb {

namespace {

enum Slot : std::uint32_t { kSlotX = 0, kSlotY = 1, kSlotZ = 2, kSlotPhase = 3, kSlotFailure = 4, kSlotSelect = 5 };

double mean_hpbw(const analysis::MainLobe& m) { return 0.5 * (m.hpbw_u + m.hpbw_v); }

}  // namespace

void PerturbationSpec::validate() const {
  if (!(sigma_pos_m >= 0)) throw ConfigError("perturbation.sigma_pos_m must be >= 0 [m]");
  if (!(sigma_phase_rad >= 0)) throw ConfigError("perturbation.sigma_phase_rad must be >= 0 [rad]");
  if (!(failure_prob >= 0 && failure_prob <= 1)) throw ConfigError("perturbation.failure_prob must be in [0, 1]");
  if (trials < 1) throw ConfigError("perturbation.trials must be >= 1");
}

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto pct = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return values[lo] + t * (values[hi] - values[lo]);
  };
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.median = pct(0.5);
  s.p5 = pct(0.05);
  s.p95 = pct(0.95);
  return s;
}

std::pair<geometry::ArrayGeometry, beam::WeightVector> perturb_trial(const geometry::ArrayGeometry& geom,
                                                                     const beam::WeightVector& weights,
                                                                     const PerturbationSpec& spec,
                                                                     std::uint64_t trial_index) {
  spec.validate();
  if (weights.size() != geom.size()) throw DomainError("weight vector length does not match the geometry");
  auto g = geom;
  auto w = weights;
  const rng::Stream stream(spec.master_seed, trial_index);
  const double k = kTwoPi / geom.wavelength;
  const double cos_steer =
      std::sqrt(std::max(0.0, 1.0 - weights.steer.u * weights.steer.u - weights.steer.v * weights.steer.v));
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto e = static_cast<std::uint32_t>(n);
    if (spec.sigma_pos_m > 0.0) {
      g.positions[n].x += spec.sigma_pos_m * stream.normal(e, kSlotX);
      g.positions[n].y += spec.sigma_pos_m * stream.normal(e, kSlotY);
      const double dz = spec.sigma_pos_m * stream.normal(e, kSlotZ);
      w.phase[n] += k * dz * cos_steer;
    }
    if (spec.sigma_phase_rad > 0.0) w.phase[n] += spec.sigma_phase_rad * stream.normal(e, kSlotPhase);
    if (spec.failure_prob > 0.0 && stream.uniform(e, kSlotFailure) < spec.failure_prob) w.amplitude[n] = 0.0;
  }
  return {std::move(g), std::move(w)};
}

DegradationStats monte_carlo_degradation(std::shared_ptr<const geometry::ArrayGeometry> geom,
                                         const beam::WeightVector& weights, const beam::AngularGrid& grid,
                                         const PerturbationSpec& spec, const MonteCarloOptions& opt) {
  spec.validate();
  const auto base = beam::evaluate_pattern(geom, weights, grid, opt.element, opt.threads);
  const auto base_lobe = analysis::measure_main_lobe(base, opt.metrics);
  const auto base_sl = analysis::sidelobe_metrics(base, base_lobe, opt.metrics);

  std::vector<TrialRecord> records(static_cast<std::size_t>(spec.trials));
  parallel_for(records.size(), opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) {
      auto [g, w] = perturb_trial(*geom, weights, spec, t);
      auto gp = std::make_shared<const geometry::ArrayGeometry>(std::move(g));
      const auto pat = beam::evaluate_pattern(gp, w, grid, opt.element, 1);
      const auto lobe = analysis::measure_main_lobe(pat, opt.metrics);
      const auto sl = analysis::sidelobe_metrics(pat, lobe, opt.metrics);
      TrialRecord r;
      r.trial = static_cast<int>(t);
      r.peak_loss_db = db20(lobe.peak_magnitude / base_lobe.peak_magnitude);
      r.hpbw_rel = mean_hpbw(lobe) / mean_hpbw(base_lobe) - 1.0;
      if (sl.psll_db && base_sl.psll_db) r.psll_delta_db = *sl.psll_db - *base_sl.psll_db;
      records[t] = r;
    }
  });

  DegradationStats s;
  s.trials = spec.trials;
  std::vector<double> loss, rel, psll;
  for (const auto& r : records) {
    loss.push_back(r.peak_loss_db);
    rel.push_back(r.hpbw_rel);
    if (r.psll_delta_db) psll.push_back(*r.psll_delta_db);
  }
  s.peak_loss_db = summarize(loss);
  s.hpbw_rel = summarize(rel);
  if (!psll.empty()) s.psll_delta_db = summarize(psll);
  if (opt.keep_records) s.records = std::move(records);
  return s;
}

namespace {

// Radiated power over the hemisphere for isotropic elements: 2 pi sum_mn a_m a_n C_mn with
// C_mn = cos(phi_m - phi_n) sinc(k r_mn). Cached when it fits in memory.
class IsotropicPower {
 public:
  IsotropicPower(const geometry::ArrayGeometry& g, const beam::WeightVector& w) : geom_(g), phase_(w.phase) {
    const std::size_t n = g.size();
    if (n <= kMaxCached) {
      coupling_.resize(n * n);
      for (std::size_t m = 0; m < n; ++m)
        for (std::size_t q = 0; q < n; ++q) coupling_[m * n + q] = term(m, q);
    }
  }

  double operator()(const std::vector<double>& amp) const {
    const std::size_t n = geom_.size();
    double total = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (amp[m] == 0.0) continue;
      double row = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        if (amp[q] == 0.0) continue;
        row += amp[q] * (coupling_.empty() ? term(m, q) : coupling_[m * n + q]);
      }
      total += amp[m] * row;
    }
    return kTwoPi * total;
  }

 private:
  static constexpr std::size_t kMaxCached = 4096;
  double term(std::size_t m, std::size_t q) const {
    if (m == q) return 1.0;
    const double x = kTwoPi / geom_.wavelength * distance(geom_.positions[m], geom_.positions[q]);
    return std::cos(phase_[m] - phase_[q]) * std::sin(x) / x;
  }
  const geometry::ArrayGeometry& geom_;
  std::vector<double> phase_;
  std::vector<double> coupling_;
};

}  // namespace

std::vector<FailurePoint> failure_sweep(std::shared_ptr<const geometry::ArrayGeometry> geom,
                                        const beam::WeightVector& weights, const beam::AngularGrid& grid,
                                        const std::vector<double>& fractions, int trials, std::uint64_t seed,
                                        const MonteCarloOptions& opt) {
  if (trials < 1) throw ConfigError("failure_sweep needs trials >= 1");
  const std::size_t n = geom->size();
  for (double f : fractions) {
    if (!(f >= 0.0 && f < 1.0)) throw DomainError("failure fractions must lie in [0, 1)");
    if (static_cast<std::size_t>(std::lround(f * static_cast<double>(n))) >= n)
      throw DomainError("failure fraction silences every element");
  }
  const auto base = beam::evaluate_pattern(geom, weights, grid, opt.element, opt.threads);
  const auto base_lobe = analysis::measure_main_lobe(base, opt.metrics);
  const Direction peak_dir = base_lobe.refined_direction;
  const double base_peak = std::abs(beam::array_factor(*geom, weights, peak_dir, opt.element));

  std::optional<IsotropicPower> power;
  if (opt.element.isotropic()) power.emplace(*geom, weights);

  std::vector<FailurePoint> out;
  for (const double frac : fractions) {
    const int failed = static_cast<int>(std::lround(frac * static_cast<double>(n)));
    std::vector<double> loss(static_cast<std::size_t>(trials)), dir(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), opt.threads, [&](std::size_t b, std::size_t e) {
      std::vector<std::size_t> order(n);
      std::vector<double> keys(n);
      for (std::size_t t = b; t < e; ++t) {
        // Same keys for every fraction, so failed sets are nested as the fraction grows.
        const rng::Stream stream(seed, t);
        auto w = weights;
        for (std::size_t k = 0; k < n; ++k) keys[k] = stream.uniform(static_cast<std::uint32_t>(k), kSlotSelect);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::partial_sort(order.begin(), order.begin() + failed, order.end(), [&](std::size_t a, std::size_t c) {
          return keys[a] < keys[c] || (keys[a] == keys[c] && a < c);
        });
        for (int k = 0; k < failed; ++k) w.amplitude[order[k]] = 0.0;
        const double peak = std::abs(beam::array_factor(*geom, w, peak_dir, opt.element));
        loss[t] = db20(peak / base_peak);
        if (power) {
          dir[t] = db10(4.0 * kPi * peak * peak / (*power)(w.amplitude));
        } else {
          const auto pat = beam::evaluate_pattern(geom, w, grid, opt.element, 1);
          dir[t] = analysis::directivity(pat, analysis::measure_main_lobe(pat, opt.metrics));
        }
      }
    });
    FailurePoint pt;
    pt.fraction = frac;
    pt.failed = failed;
    pt.mean_peak_loss_db = std::accumulate(loss.begin(), loss.end(), 0.0) / trials;
    pt.mean_directivity_dbi = std::accumulate(dir.begin(), dir.end(), 0.0) / trials;
    out.push_back(pt);
  }
  return out;
}

namespace {
nlohmann::ordered_json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"p5", s.p5}, {"p95", s.p95}};
}
}  // namespace

std::string stats_json(const PerturbationSpec& spec, const DegradationStats& stats) {
  nlohmann::ordered_json j;
  j["spec"] = {{"sigma_pos_m", spec.sigma_pos_m},   {"sigma_phase_rad", spec.sigma_phase_rad},
               {"failure_prob", spec.failure_prob}, {"trials", spec.trials},
               {"master_seed", spec.master_seed}};
  j["peak_loss_db"] = summary_json(stats.peak_loss_db);
  j["hpbw_rel"] = summary_json(stats.hpbw_rel);
  j["psll_delta_db"] = stats.psll_delta_db ? summary_json(*stats.psll_delta_db) : nlohmann::ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string trials_csv(const DegradationStats& stats) {
  std::string out = "trial,peak_loss_db,hpbw_rel,psll_delta_db\n";
  char buf[160];
  for (const auto& r : stats.records) {
    if (r.psll_delta_db)
      std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", r.trial, r.peak_loss_db, r.hpbw_rel, *r.psll_delta_db);
    else
      std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,\n", r.trial, r.peak_loss_db, r.hpbw_rel);
    out += buf;
  }
  return out;
}

std::string failure_sweep_csv(const std::vector<FailurePoint>& points) {
  std::string out = "fraction,failed,mean_directivity_dbi,mean_peak_loss_db\n";
  char buf[160];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.9g,%d,%.9g,%.9g\n", p.fraction, p.failed, p.mean_directivity_dbi,
                  p.mean_peak_loss_db);
    out += buf;
  }
  return out;
}

}  // namespace swarm::perturb
