#include "swarm/analysis.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "json.hpp"

namespace swarm::analysis {

using beam::AngularGrid;
using beam::Pattern;

bool MainLobeMask::contains(double u, double v) const {
  if (semi_u <= 0.0 || semi_v <= 0.0) return false;
  const double a = (u - center.u) / semi_u;
  const double b = (v - center.v) / semi_v;
  return a * a + b * b <= 1.0;
}

namespace {

// Relative |AF| tolerance under which the steered lobe counts as tied with the global maximum.
constexpr double kSteeredTieTolerance = 1e-4;

double magnitude(const Pattern& p, double u, double v) { return std::abs(p.evaluate({u, v})); }

// Local maximum of |AF| within one grid cell of (i, j), by shrinking parabolic steps.
std::pair<Direction, double> refine_local_max(const Pattern& p, int i, int j) {
  const AngularGrid& g = p.grid;
  const double u0 = g.u(i), v0 = g.v(j);
  double hu = g.du(), hv = g.dv();
  Direction best{u0, v0};
  double best_mag = std::abs(p.at(i, j));
  auto in_box = [&](double u, double v) {
    return std::abs(u - u0) <= g.du() + 1e-15 && std::abs(v - v0) <= g.dv() + 1e-15 && u * u + v * v <= 1.0;
  };
  Direction cur = best;
  for (int it = 0; it < 40 && (hu > 0 || hv > 0); ++it) {
    auto axis_step = [&](double h, bool along_u) -> double {
      if (h <= 0.0) return 0.0;
      auto f = [&](double off) {
        const double u = along_u ? cur.u + off : cur.u;
        const double v = along_u ? cur.v : cur.v + off;
        if (!in_box(u, v)) return -std::numeric_limits<double>::infinity();
        return std::log(std::max(magnitude(p, u, v), 1e-300));
      };
      const double fm = f(-h), f0 = f(0.0), fp = f(h);
      if (!std::isfinite(fm) || !std::isfinite(fp)) return fp > fm ? h * 0.5 : (fm > fp ? -h * 0.5 : 0.0);
      const double curv = fm - 2.0 * f0 + fp;
      if (curv >= 0.0) return fp > fm ? h : (fm > fp ? -h : 0.0);
      return std::clamp(0.5 * h * (fm - fp) / curv, -h, h);
    };
    const double su = axis_step(hu, true);
    Direction cand{cur.u + su, cur.v};
    if (in_box(cand.u, cand.v)) cur = cand;
    const double sv = axis_step(hv, false);
    cand = {cur.u, cur.v + sv};
    if (in_box(cand.u, cand.v)) cur = cand;
    const double m = magnitude(p, cur.u, cur.v);
    if (m > best_mag) {
      best_mag = m;
      best = cur;
    } else {
      cur = best;
    }
    hu *= 0.5;
    hv *= 0.5;
    if (hu < 1e-12 && hv < 1e-12) break;
  }
  return {best, best_mag};
}

double angle_between(double u1, double v1, double u2, double v2) {
  const double w1 = std::sqrt(std::max(0.0, 1.0 - u1 * u1 - v1 * v1));
  const double w2 = std::sqrt(std::max(0.0, 1.0 - u2 * u2 - v2 * v2));
  const double cx = v1 * w2 - w1 * v2;
  const double cy = w1 * u2 - u1 * w2;
  const double cz = u1 * v2 - v1 * u2;
  const double dot = u1 * u2 + v1 * v2 + w1 * w2;
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

// Walks from the peak along one axis until |AF| drops below the half-power level and returns
// the linearly interpolated crossing offset (in direction cosine). A crossing inside the first
// step restarts the walk with a finer step.
double half_power_offset(const Pattern& p, Direction peak, double peak_mag, bool along_u, double sign) {
  const AngularGrid& g = p.grid;
  double step = 0.25 * (along_u ? g.du() : g.dv());
  if (step <= 0.0) throw BeamTooWideError("grid has a single sample along a principal cut; cannot bracket -3 dB");
  const double lo = along_u ? g.u_min : g.v_min;
  const double hi = along_u ? g.u_max : g.v_max;
  const double start = along_u ? peak.u : peak.v;
  const double target_db = -kHalfPowerDb;
  double prev_off = 0.0, prev_db = 0.0;
  for (long k = 1;; ++k) {
    const double off = sign * step * static_cast<double>(k);
    const double x = start + off;
    const double u = along_u ? x : peak.u;
    const double v = along_u ? peak.v : x;
    if (x < lo - 1e-12 || x > hi + 1e-12 || u * u + v * v > 1.0)
      throw BeamTooWideError("-3 dB contour not bracketed inside the grid; use a larger grid");
    const double m = magnitude(p, u, v);
    const double db = m > 0 ? db20(m / peak_mag) : -400.0;
    if (db <= target_db) {
      if (k == 1 && step > 1e-9) {
        step /= 8.0;
        k = 0;
        prev_off = prev_db = 0.0;
        continue;
      }
      const double t = (prev_db - target_db) / (prev_db - db);
      return prev_off + t * (off - prev_off);
    }
    prev_off = off;
    prev_db = db;
  }
}

}  // namespace

MainLobe measure_main_lobe(const Pattern& p, const MetricOptions& opt) {
  const AngularGrid& g = p.grid;
  if (!p.geometry) throw DomainError("pattern carries no geometry");
  MainLobe lobe;
  double best = -1.0;
  // i-major scan with a strict comparison: lowest u index wins ties, then lowest v.
  for (int i = 0; i < g.n_u; ++i) {
    for (int j = 0; j < g.n_v; ++j) {
      if (!g.visible(i, j)) continue;
      const double m = std::abs(p.at(i, j));
      if (m > best) {
        best = m;
        lobe.peak_i = i;
        lobe.peak_j = j;
      }
    }
  }
  if (best < 0.0) throw DomainError("grid has no visible points");
  auto [dir, mag] = refine_local_max(p, lobe.peak_i, lobe.peak_j);

  // Periodic layouts have grating lobes as strong as the steered lobe, and grid sampling decides
  // which of them wins the argmax. A tie goes to the lobe the weights were steered into.
  const Direction s = p.weights.steer;
  if (s.u >= g.u_min && s.u <= g.u_max && s.v >= g.v_min && s.v <= g.v_max) {
    auto [si, sj] = g.nearest(s);
    if (g.visible(si, sj)) {
      for (bool moved = true; moved;) {
        moved = false;
        int bi = si, bj = sj;
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            const int ni = si + di, nj = sj + dj;
            if (ni < 0 || nj < 0 || ni >= g.n_u || nj >= g.n_v || !g.visible(ni, nj)) continue;
            if (std::abs(p.at(ni, nj)) > std::abs(p.at(bi, bj))) bi = ni, bj = nj;
          }
        if (bi != si || bj != sj) si = bi, sj = bj, moved = true;
      }
      const auto [sdir, smag] = refine_local_max(p, si, sj);
      if (smag >= mag * (1.0 - kSteeredTieTolerance)) {
        lobe.peak_i = si;
        lobe.peak_j = sj;
        dir = sdir;
        mag = smag;
      }
    }
  }
  lobe.peak_direction = {g.u(lobe.peak_i), g.v(lobe.peak_j)};
  lobe.refined_direction = dir;
  lobe.peak_magnitude = mag;
  if (!(mag > 0.0)) throw DomainError("pattern peak is zero");

  const double u_lo = half_power_offset(p, dir, mag, true, -1.0);
  const double u_hi = half_power_offset(p, dir, mag, true, +1.0);
  const double v_lo = half_power_offset(p, dir, mag, false, -1.0);
  const double v_hi = half_power_offset(p, dir, mag, false, +1.0);
  lobe.width_u = u_hi - u_lo;
  lobe.width_v = v_hi - v_lo;
  lobe.hpbw_u = angle_between(dir.u + u_lo, dir.v, dir.u + u_hi, dir.v);
  lobe.hpbw_v = angle_between(dir.u, dir.v + v_lo, dir.u, dir.v + v_hi);
  lobe.mask = {dir, opt.mask_factor * lobe.width_u, opt.mask_factor * lobe.width_v};
  if ((g.n_u > 1 && lobe.width_u < 2.0 * g.du()) || (g.n_v > 1 && lobe.width_v < 2.0 * g.dv()))
    warn("main lobe spans fewer than two grid cells; peak and sidelobe metrics are under-resolved, refine the grid");
  return lobe;
}

SidelobeMetrics sidelobe_metrics(const Pattern& p, const MainLobe& lobe, const MetricOptions& opt) {
  const AngularGrid& g = p.grid;
  SidelobeMetrics out;
  const double peak2 = lobe.peak_magnitude * lobe.peak_magnitude;
  auto exterior = [&](int i, int j) { return g.visible(i, j) && !lobe.mask.contains(g.u(i), g.v(j)); };

  double sum = 0.0, max_mag = 0.0;
  std::size_t count = 0;
  struct Candidate {
    int i, j;
    double mag;
  };
  std::vector<Candidate> maxima;
  for (int j = 0; j < g.n_v; ++j) {
    for (int i = 0; i < g.n_u; ++i) {
      if (!exterior(i, j)) continue;
      const double m = std::abs(p.at(i, j));
      sum += m * m;
      max_mag = std::max(max_mag, m);
      ++count;
      bool is_max = true;
      for (int dj = -1; dj <= 1 && is_max; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ni = i + di, nj = j + dj;
          if (ni < 0 || nj < 0 || ni >= g.n_u || nj >= g.n_v || !g.visible(ni, nj)) continue;
          if (std::abs(p.at(ni, nj)) >= m) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) maxima.push_back({i, j, m});
    }
  }
  if (count == 0) return out;  // mask covers the whole visible region

  std::sort(maxima.begin(), maxima.end(), [](const Candidate& a, const Candidate& b) {
    return a.mag > b.mag || (a.mag == b.mag && (a.i < b.i || (a.i == b.i && a.j < b.j)));
  });
  // Sampling loss near a lobe top stays well below this margin at >= 2 samples per beamwidth.
  constexpr double kRefineMarginDb = 6.0;
  constexpr std::size_t kAlwaysRefine = 8;
  const double gl_floor = lobe.peak_magnitude * std::pow(10.0, (opt.gl_threshold_db - kRefineMarginDb) / 20.0);
  double psll_mag = max_mag;
  for (std::size_t k = 0; k < maxima.size(); ++k) {
    const auto& c = maxima[k];
    if (k >= kAlwaysRefine && c.mag < gl_floor) break;
    auto [dir, mag] = refine_local_max(p, c.i, c.j);
    if (lobe.mask.contains(dir.u, dir.v)) {
      dir = {g.u(c.i), g.v(c.j)};
      mag = c.mag;
    }
    psll_mag = std::max(psll_mag, mag);
    const double level = db20(mag / lobe.peak_magnitude);
    if (level >= opt.gl_threshold_db) out.grating_lobes.push_back({dir, level});
  }
  out.psll_db = psll_mag > 0 ? db20(psll_mag / lobe.peak_magnitude) : -400.0;
  const double mean = sum / static_cast<double>(count) / peak2;
  out.asll_db = mean > 0 ? db10(mean) : -400.0;
  return out;
}

namespace {

// integral over u in [u0,u1] of (asin(v1/c) - asin(v0/c)), c = sqrt(1-u^2), clipped to the disk.
double strip(double u, double v0, double v1) {
  const double c2 = 1.0 - u * u;
  if (c2 <= 0.0) return 0.0;
  const double c = std::sqrt(c2);
  return std::asin(std::clamp(v1 / c, -1.0, 1.0)) - std::asin(std::clamp(v0 / c, -1.0, 1.0));
}

double simpson(double a, double b, double fa, double fm, double fb) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

double adaptive(double v0, double v1, double a, double b, double fa, double fm, double fb, double whole, double tol,
                int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = strip(lm, v0, v1), frm = strip(rm, v0, v1);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return adaptive(v0, v1, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(v0, v1, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Solid angle of the direction-cosine cell [u0,u1]x[v0,v1] intersected with the unit disk.
double cell_solid_angle(double u0, double u1, double v0, double v1) {
  if (u1 <= u0 || v1 <= v0) return 0.0;
  auto r2 = [](double a, double b) { return a * a + b * b; };
  const double far = std::max({r2(u0, v0), r2(u0, v1), r2(u1, v0), r2(u1, v1)});
  const double nu = std::min(std::abs(u0), std::abs(u1)) * ((u0 < 0 && u1 > 0) ? 0.0 : 1.0);
  const double nv = std::min(std::abs(v0), std::abs(v1)) * ((v0 < 0 && v1 > 0) ? 0.0 : 1.0);
  if (r2(nu, nv) >= 1.0) return 0.0;
  if (far < 0.98) {
    // Smooth integrand: 8-point Gauss-Legendre.
    static constexpr std::array<double, 4> x{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                             0.9602898564975363};
    static constexpr std::array<double, 4> w{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                             0.1012285362903763};
    const double mid = 0.5 * (u0 + u1), half = 0.5 * (u1 - u0);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += w[k] * (strip(mid - half * x[k], v0, v1) + strip(mid + half * x[k], v0, v1));
    return s * half;
  }
  const double fa = strip(u0, v0, v1), fb = strip(u1, v0, v1), fm = strip(0.5 * (u0 + u1), v0, v1);
  return adaptive(v0, v1, u0, u1, fa, fm, fb, simpson(u0, u1, fa, fm, fb), 1e-14, 40);
}

}  // namespace

namespace {

// Integral of |AF|^2 over the visible hemisphere, each cell weighted by its exact solid angle.
double radiated_power(const Pattern& p) {
  const AngularGrid& g = p.grid;
  if (!g.covers_visible_region())
    throw ResolutionError("directivity needs a grid covering the whole visible region u, v in [-1, 1]");
  std::vector<double> uw0(g.n_u), uw1(g.n_u), vw0(g.n_v), vw1(g.n_v);
  for (int i = 0; i < g.n_u; ++i) {
    uw0[i] = std::max(-1.0, g.u(i) - 0.5 * g.du());
    uw1[i] = std::min(1.0, g.u(i) + 0.5 * g.du());
  }
  for (int j = 0; j < g.n_v; ++j) {
    vw0[j] = std::max(-1.0, g.v(j) - 0.5 * g.dv());
    vw1[j] = std::min(1.0, g.v(j) + 0.5 * g.dv());
  }
  double integral = 0.0;
  for (int j = 0; j < g.n_v; ++j) {
    double row = 0.0;
    for (int i = 0; i < g.n_u; ++i) {
      const double w = cell_solid_angle(uw0[i], uw1[i], vw0[j], vw1[j]);
      if (w == 0.0) continue;
      row += w * std::norm(p.at(i, j));
    }
    integral += row;
  }
  if (!(integral > 0.0)) throw DomainError("radiated power integral is zero");
  return integral;
}

}  // namespace

double directivity(const Pattern& p, const MainLobe& lobe) {
  const AngularGrid& g = p.grid;
  constexpr double kMinSamples = 4.0;
  if (lobe.width_u < kMinSamples * g.du() || lobe.width_v < kMinSamples * g.dv())
    throw ResolutionError("main lobe under-resolved: fewer than 4 samples across the HPBW; refine the grid");
  return db10(4.0 * kPi * lobe.peak_magnitude * lobe.peak_magnitude / radiated_power(p));
}

double directivity(const Pattern& p) {
  try {
    return directivity(p, measure_main_lobe(p));
  } catch (const BeamTooWideError&) {
    // No -3 dB contour inside the visible region: the beam is trivially resolved, use the grid peak.
    double peak = 0.0;
    for (int j = 0; j < p.grid.n_v; ++j)
      for (int i = 0; i < p.grid.n_u; ++i)
        if (p.grid.visible(i, j)) peak = std::max(peak, std::abs(p.at(i, j)));
    return db10(4.0 * kPi * peak * peak / radiated_power(p));
  }
}

double directivity_isotropic_exact(const geometry::ArrayGeometry& geom, const beam::WeightVector& w, Direction d) {
  const double k = kTwoPi / geom.wavelength;
  const std::size_t n = geom.size();
  double total = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    if (w.amplitude[m] == 0.0) continue;
    total += w.amplitude[m] * w.amplitude[m];
    for (std::size_t q = m + 1; q < n; ++q) {
      if (w.amplitude[q] == 0.0) continue;
      const double x = k * distance(geom.positions[m], geom.positions[q]);
      const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
      total += 2.0 * w.amplitude[m] * w.amplitude[q] * std::cos(w.phase[m] - w.phase[q]) * sinc;
    }
  }
  const double peak = std::norm(beam::array_factor(geom, w, d));
  return db10(4.0 * kPi * peak / (kTwoPi * total));
}

double footprint_radius(double hpbw_rad, double altitude_m) {
  if (!(hpbw_rad > 0.0 && hpbw_rad < kPi / 2)) throw DomainError("footprint_radius needs 0 < hpbw < pi/2");
  if (!(altitude_m > 0.0)) throw DomainError("footprint_radius needs altitude > 0");
  return altitude_m * std::tan(0.5 * hpbw_rad);
}

double hpbw_for_footprint(double footprint_m, double altitude_m) {
  if (!(footprint_m > 0.0) || !(altitude_m > 0.0)) throw DomainError("footprint and altitude must be > 0");
  return 2.0 * std::atan(footprint_m / altitude_m);
}

double required_aperture_for_footprint(double footprint_m, double altitude_m, double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw DomainError("wavelength must be > 0");
  return 1.02 * wavelength_m / hpbw_for_footprint(footprint_m, altitude_m);
}

CochannelResult cochannel_ci(const std::vector<Pattern>& patterns, const std::vector<Direction>& centers) {
  if (patterns.size() != centers.size()) throw DomainError("one beam center per pattern is required");
  CochannelResult out;
  const std::size_t n = patterns.size();
  out.ci_db.resize(n);
  out.coupling_db.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = patterns[i].grid;
    if (centers[i].u * centers[i].u + centers[i].v * centers[i].v > 1.0)
      throw DomainError("beam center outside the visible region");
    const auto [ci, cj] = g.nearest(centers[i]);
    const double c = std::norm(patterns[i].at(ci, cj));
    double interference = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double pj = std::norm(patterns[j].at(ci, cj));
      out.coupling_db[i][j] = db10(pj / c);
      if (j != i) interference += pj;
    }
    if (n > 1) out.ci_db[i] = db10(c / interference);
  }
  return out;
}

PatternMetrics compute_metrics(const Pattern& p, const MetricOptions& opt) {
  PatternMetrics m;
  m.main_lobe = measure_main_lobe(p, opt);
  m.sidelobes = sidelobe_metrics(p, m.main_lobe, opt);
  try {
    m.directivity_dbi = directivity(p, m.main_lobe);
  } catch (const ResolutionError& e) {
    m.directivity_error = e.what();
  }
  m.footprint_radius_m = footprint_radius(std::max(m.main_lobe.hpbw_u, m.main_lobe.hpbw_v), opt.altitude_m);
  return m;
}

std::string metrics_json(const PatternMetrics& m) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& x) { return x ? ordered_json(*x) : ordered_json(nullptr); };
  ordered_json j;
  j["peak_u"] = m.main_lobe.peak_direction.u;
  j["peak_v"] = m.main_lobe.peak_direction.v;
  j["hpbw_u_rad"] = m.main_lobe.hpbw_u;
  j["hpbw_v_rad"] = m.main_lobe.hpbw_v;
  j["directivity_dbi"] = opt(m.directivity_dbi);
  j["psll_db"] = opt(m.sidelobes.psll_db);
  j["asll_db"] = opt(m.sidelobes.asll_db);
  ordered_json gl = ordered_json::array();
  for (const auto& g : m.sidelobes.grating_lobes) gl.push_back({{"u", g.direction.u}, {"v", g.direction.v}, {"level_db", g.level_db}});
  j["grating_lobes"] = gl;
  j["r_b_m"] = m.footprint_radius_m;
  if (m.directivity_error) j["directivity_error"] = *m.directivity_error;
  return j.dump(2) + "\n";
}

}  // namespace swarm::analysis
