// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "swarm/analysis.hpp"
#include "swarm/linkbudget.hpp"
#include "swarm/perturbation.hpp"
#include "swarm/scenario.hpp"

using namespace swarm;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kGlLevelTolDb = 0.1;
constexpr int kMinGratingLobes = 4;
constexpr double kC1BudgetS = 30.0;
constexpr double kPsllLimitDb = -10.0;
constexpr double kC2BudgetS = 60.0;
constexpr double kAsllTolDb = 3.0;
constexpr double kFootprintLimitM = 5000.0;
constexpr std::size_t kClassicalMinElements = 5000;
constexpr double kReductionFactor = 10.0;
constexpr double kC4BudgetS = 300.0;
constexpr double kFsplRefDb = 152.44;
constexpr double kFsplTolDb = 0.01;
constexpr double kIdentityTolDb = 1e-12;
constexpr int kLinkDraws = 100;
constexpr double kDirectivityTolDb = 1.0;
constexpr double kConvergenceTolDb = 0.2;
constexpr double kCoherenceTolDb = 0.2;
constexpr double kFailureTolDb = 0.3;
constexpr int kMcTrials = 1000;
constexpr double kTaperGainDb = 10.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

beam::Pattern broadside(std::shared_ptr<const geometry::ArrayGeometry> g, const beam::AngularGrid& grid,
                        const beam::TaperSpec& taper = {}, unsigned threads = 1) {
  auto w = beam::steering_weights(*g, {0, 0});
  if (taper.kind != beam::TaperKind::Uniform) w = beam::apply_taper(w, taper, *g);
  return beam::evaluate_pattern(g, w, grid, {}, threads);
}

beam::AngularGrid zoom_grid(std::shared_ptr<const geometry::ArrayGeometry> g, const beam::WeightVector& w) {
  const auto wide = beam::evaluate_pattern(g, w, beam::AngularGrid::around(w.steer, 0.05, 201));
  const auto lobe = analysis::measure_main_lobe(wide);
  return beam::AngularGrid::around(w.steer, 4.0 * std::max(lobe.width_u, lobe.width_v), 65);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome grating_lobes() {
  const auto t0 = Clock::now();
  const auto g = oracle::make(oracle::lattice(16, 10.0));
  const auto m = analysis::compute_metrics(broadside(g, beam::AngularGrid::full(1024)));
  const double elapsed = seconds_since(t0);
  const double step = 0.1;  // lambda / d
  const double cell = 2.0 / 1023.0;
  int on_lattice = 0;
  int near_peak = 0;
  double worst = 0.0;
  for (const auto& gl : m.sidelobes.grating_lobes) {
    const double mu = std::round(gl.direction.u / step) * step;
    const double mv = std::round(gl.direction.v / step) * step;
    if (std::abs(gl.direction.u - mu) > cell || std::abs(gl.direction.v - mv) > cell) continue;
    ++on_lattice;
    if (std::abs(gl.level_db) <= kGlLevelTolDb) ++near_peak;
    worst = std::max(worst, std::abs(gl.level_db));
  }
  const bool main_at_broadside =
      std::abs(m.main_lobe.refined_direction.u) < cell && std::abs(m.main_lobe.refined_direction.v) < cell;
  return {near_peak >= kMinGratingLobes && on_lattice == static_cast<int>(m.sidelobes.grating_lobes.size()) &&
              main_at_broadside && elapsed < kC1BudgetS,
          fmt("%zu grating lobes, %d on the lambda/d lattice, %d within %.1f dB (worst %.3f dB), %.1f s",
              m.sidelobes.grating_lobes.size(), on_lattice, near_peak, kGlLevelTolDb, worst, elapsed)};
}

Outcome elsa_mitigation() {
  const auto t0 = Clock::now();
  const auto g = oracle::make(oracle::elsa(500));
  const auto m = analysis::compute_metrics(broadside(g, beam::AngularGrid::full(1024)));
  const double elapsed = seconds_since(t0);
  const double d_ave = oracle::mean_nearest_neighbor(g->positions) / g->wavelength;
  const double psll = m.sidelobes.psll_db.value_or(0.0);
  return {m.sidelobes.grating_lobes.empty() && psll <= kPsllLimitDb && elapsed < kC2BudgetS,
          fmt("d_ave %.2f lambda, %zu grating lobes, PSLL %.2f dB, %.1f s", d_ave, m.sidelobes.grating_lobes.size(),
              psll, elapsed)};
}

Outcome sidelobe_floor() {
  bool pass = true;
  std::string detail;
  for (int n : {100, 300, 1000}) {
    const auto g = oracle::make(oracle::elsa(n));
    const auto m = analysis::compute_metrics(broadside(g, beam::AngularGrid::full(1024), {}, workers()));
    const double asll = m.sidelobes.asll_db.value_or(0.0);
    const double expected = 10.0 * std::log10(1.0 / n);
    pass = pass && m.sidelobes.asll_db && std::abs(asll - expected) <= kAsllTolDb;
    if (n == 100) pass = pass && std::abs(asll + 20.0) <= kAsllTolDb;
    detail += fmt("N=%d ASLL %.2f dB (1/N %.2f); ", n, asll, expected);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Outcome element_reduction() {
  const auto t0 = Clock::now();
  scenario::RunOptions opt{1};
  const auto classical = scenario::parse_config_file(fs::path(CONFIG_DIR) / "classical.json");
  const auto elsa = scenario::parse_config_file(fs::path(CONFIG_DIR) / "elsa.json");
  const auto cmp = scenario::compare_designs({{"classical", classical}, {"elsa", elsa}}, opt);
  const auto& c = cmp.rows[0];
  const auto& e = cmp.rows[1];

  // The next smaller square lattice misses the footprint, so the classical count is tight.
  auto smaller = classical;
  smaller.geometry.n_platforms = 88 * 88;
  const auto s = scenario::evaluate_design("classical-88", smaller, opt);
  const double elapsed = seconds_since(t0);

  const bool pass = c.n_elements >= kClassicalMinElements && c.r_b_m <= kFootprintLimitM &&
                    s.r_b_m > kFootprintLimitM && e.r_b_m <= kFootprintLimitM &&
                    e.psll_db.value_or(0.0) <= kPsllLimitDb &&
                    static_cast<double>(e.n_elements) * kReductionFactor <= static_cast<double>(c.n_elements) &&
                    elapsed < kC4BudgetS;
  return {pass, fmt("classical N=%zu r_B %.0f m (88x88: %.0f m); elsa N=%zu r_B %.0f m PSLL %.2f dB; ratio %.1f; "
                    "%.1f s",
                    c.n_elements, c.r_b_m, s.r_b_m, e.n_elements, e.r_b_m, e.psll_db.value_or(0.0),
                    static_cast<double>(c.n_elements) / static_cast<double>(e.n_elements), elapsed)};
}

Outcome link_oracle() {
  const double fspl = link::fspl(500e3, 2e9);
  bool pass = std::abs(fspl - kFsplRefDb) <= kFsplTolDb;
  double worst_identity = 0.0;
  int bracket_fail = 0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < kLinkDraws; ++k) {
    link::LinkBudgetParams p;
    p.frequency_hz = 5e8 + u(rng) * 2e10;
    p.distance_m = 2e5 + u(rng) * 2e6;
    p.element_power_w = 0.1 + u(rng) * 10.0;
    p.element_gain_dbi = u(rng) * 10.0;
    p.ue_gain_dbi = -3.0 + u(rng) * 6.0;
    p.misc_losses_db = u(rng) * 6.0;
    p.n_elements = 1 + static_cast<long>(u(rng) * 5000);
    const auto r = link::received_power(p);
    const double direct = 10.0 * std::log10(p.element_power_w * 1e3) + p.element_gain_dbi +
                          20.0 * std::log10(static_cast<double>(p.n_elements)) -
                          20.0 * std::log10(4.0 * oracle::kPi * p.distance_m * p.frequency_hz / oracle::kC) -
                          p.misc_losses_db + p.ue_gain_dbi;
    worst_identity = std::max({worst_identity, std::abs(r.p_rx_dbm - (r.eirp_dbm - r.fspl_db - p.misc_losses_db +
                                                                       p.ue_gain_dbi)),
                               std::abs(r.margin_db - (r.p_rx_dbm - p.ue_sensitivity_dbm))});
    if (std::abs(r.p_rx_dbm - direct) > 1e-9) ++bracket_fail;

    const double target = -110.0 + u(rng) * 60.0;
    const long n = link::min_elements_for_power(p, target);
    auto q = p;
    q.n_elements = n;
    bool ok = link::received_power(q).p_rx_dbm >= target;
    if (n > 1) {
      q.n_elements = n - 1;
      ok = ok && link::received_power(q).p_rx_dbm < target;
    }
    if (!ok) ++bracket_fail;
  }
  pass = pass && worst_identity <= kIdentityTolDb && bracket_fail == 0;
  return {pass, fmt("FSPL %.4f dB, worst identity residual %.2e dB, %d/%d draws failed the direct formula or bracketing", fspl,
                    worst_identity, bracket_fail, kLinkDraws)};
}

Outcome directivity_oracle() {
  const auto g = oracle::make(oracle::lattice(10, 0.5));
  const double lam = g->wavelength;
  const double estimate = 10.0 * std::log10(4.0 * oracle::kPi * std::pow(10 * lam / 2, 2) / (lam * lam));
  std::vector<double> d;
  for (int n : {256, 512, 1024}) d.push_back(analysis::directivity(broadside(g, beam::AngularGrid::full(n))));
  const double drift = std::max(std::abs(d[1] - d[0]), std::abs(d[2] - d[1]));
  return {std::abs(d[0] - estimate) <= kDirectivityTolDb && std::abs(d[2] - estimate) <= kDirectivityTolDb &&
              drift < kConvergenceTolDb,
          fmt("D %.3f / %.3f / %.3f dBi on 256/512/1024 grids, 4piA/lambda^2 %.3f dBi, max refinement change %.4f dB",
              d[0], d[1], d[2], estimate, drift)};
}

Outcome coherence_law() {
  const auto g = oracle::make(oracle::elsa(500));
  const auto w = beam::steering_weights(*g, {0, 0});
  const auto grid = zoom_grid(g, w);
  perturb::MonteCarloOptions opt;
  opt.threads = workers();
  bool pass = true;
  std::string detail;
  for (double sigma : {0.1, 0.3, 0.5}) {
    perturb::PerturbationSpec s;
    s.sigma_phase_rad = sigma;
    s.trials = kMcTrials;
    s.master_seed = 7;
    const auto st = perturb::monte_carlo_degradation(g, w, grid, s, opt);
    const double law = 10.0 * std::log10(std::exp(-sigma * sigma));
    pass = pass && std::abs(st.peak_loss_db.mean - law) <= kCoherenceTolDb;
    detail += fmt("sigma %.1f: %.3f dB vs %.3f dB; ", sigma, st.peak_loss_db.mean, law);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Outcome graceful_degradation() {
  const auto g = oracle::make(oracle::elsa(500));
  const auto w = beam::steering_weights(*g, {0, 0});
  const auto grid = zoom_grid(g, w);
  perturb::MonteCarloOptions opt;
  opt.threads = workers();
  perturb::PerturbationSpec s;
  s.failure_prob = 0.1;
  s.trials = kMcTrials;
  s.master_seed = 11;
  const auto st = perturb::monte_carlo_degradation(g, w, grid, s, opt);
  const double law = 20.0 * std::log10(0.9);

  const auto curve = perturb::failure_sweep(g, w, grid, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}, kMcTrials, 13, opt);
  bool monotone = true;
  std::string points;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (k > 0)
      monotone = monotone && curve[k].mean_peak_loss_db <= curve[k - 1].mean_peak_loss_db &&
                 curve[k].mean_directivity_dbi <= curve[k - 1].mean_directivity_dbi;
    points += fmt(" %.2f", curve[k].mean_directivity_dbi);
  }
  return {std::abs(st.peak_loss_db.mean - law) <= kFailureTolDb && monotone,
          fmt("mean loss %.3f dB vs %.3f dB; sweep D(p=0..0.5) dBi:%s; %s", st.peak_loss_db.mean, law,
              points.c_str(), monotone ? "non-increasing" : "NOT monotone")};
}

Outcome taper_contrast() {
  beam::TaperSpec hamming;
  hamming.kind = beam::TaperKind::RadialHamming;
  const auto grid = beam::AngularGrid::full(1024);
  auto delta = [&](std::shared_ptr<const geometry::ArrayGeometry> g, double& uni, double& ham) {
    uni = analysis::compute_metrics(broadside(g, grid, {}, workers())).sidelobes.psll_db.value_or(0.0);
    ham = analysis::compute_metrics(broadside(g, grid, hamming, workers())).sidelobes.psll_db.value_or(0.0);
    return uni - ham;
  };
  double lu, lh, eu, eh;
  const double lattice = delta(oracle::make(oracle::lattice(32, 0.5)), lu, lh);
  const double elsa = delta(oracle::make(oracle::elsa(500)), eu, eh);
  return {lattice >= kTaperGainDb && elsa < lattice,
          fmt("lattice PSLL %.2f -> %.2f dB (improvement %.2f dB); elsa %.2f -> %.2f dB (improvement %.2f dB)", lu, lh,
              lattice, eu, eh, elsa)};
}

Outcome determinism() {
  bool pass = true;
  std::string detail;
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(CONFIG_DIR))
    if (entry.path().extension() == ".json") configs.push_back(entry.path());
  std::sort(configs.begin(), configs.end());
  for (const auto& path : configs) {
    const auto c = scenario::parse_config_file(path);
    const auto ref = scenario::build_bundle(c, {1});
    bool same = true;
    for (unsigned t : {1u, 2u, 8u}) {
      const auto other = scenario::build_bundle(c, {t});
      same = same && other.size() == ref.size();
      for (std::size_t k = 0; same && k < ref.size(); ++k)
        same = other[k].name == ref[k].name && other[k].content == ref[k].content;
    }
    pass = pass && same;
    detail += fmt("%s %zu artifacts %s; ", path.stem().c_str(), ref.size(), same ? "identical" : "DIFFER");
  }
  if (configs.empty()) pass = false;
  if (!detail.empty()) detail.resize(detail.size() - 2);
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"grating lobes of a 16x16 square at 10 lambda", grating_lobes},
      {"ELSA N=500 mitigates grating lobes", elsa_mitigation},
      {"average sidelobe floor tracks 1/N", sidelobe_floor},
      {"order-of-magnitude element reduction", element_reduction},
      {"link budget oracle", link_oracle},
      {"directivity oracle", directivity_oracle},
      {"phase-error coherence law", coherence_law},
      {"graceful degradation under failures", graceful_degradation},
      {"tapering contrast", taper_contrast},
      {"thread-count determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu %s: %s | %s [%.1f s]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
