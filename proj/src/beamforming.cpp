#include "swarm/beamforming.hpp"

#include <algorithm>
#include <cstdio>

#include "json.hpp"

namespace swarm::beam {

double WeightVector::amplitude_sum() const {
  double s = 0.0;
  for (double a : amplitude) s += std::abs(a);
  return s;
}

std::string_view to_string(TaperKind kind) {
  switch (kind) {
    case TaperKind::Uniform: return "uniform";
    case TaperKind::RadialHann: return "radial-hann";
    case TaperKind::RadialHamming: return "radial-hamming";
    case TaperKind::RadialTaylorApprox: return "radial-taylor-approx";
  }
  return "unknown";
}

TaperKind taper_from_string(std::string_view name) {
  for (auto k : {TaperKind::Uniform, TaperKind::RadialHann, TaperKind::RadialHamming, TaperKind::RadialTaylorApprox})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown taper kind '" + std::string(name) +
                    "' (expected uniform, radial-hann, radial-hamming or radial-taylor-approx)");
}

namespace {

// Linear Taylor n-bar distribution g(x) = 1 + 2 sum F_m cos(pi m x), normalized to g(0) = 1.
double taylor_window(double x, double sll_db, int nbar) {
  const double r = std::pow(10.0, -sll_db / 20.0);
  const double a = std::acosh(r) / kPi;
  const double a2 = a * a;
  const double sigma2 = static_cast<double>(nbar * nbar) / (a2 + (nbar - 0.5) * (nbar - 0.5));
  auto coeff = [&](int m) {
    double num = 1.0, den = 1.0;
    for (int n = 1; n < nbar; ++n) {
      num *= 1.0 - (m * m) / (sigma2 * (a2 + (n - 0.5) * (n - 0.5)));
      if (n != m) den *= 1.0 - static_cast<double>(m * m) / (n * n);
    }
    const double sign = (m % 2 == 0) ? -1.0 : 1.0;  // (-1)^(m+1)
    return sign * num / (2.0 * den);
  };
  double g = 1.0, g0 = 1.0;
  for (int m = 1; m < nbar; ++m) {
    const double f = coeff(m);
    g += 2.0 * f * std::cos(kPi * m * x);
    g0 += 2.0 * f;
  }
  return g / g0;
}

}  // namespace

double TaperSpec::window(double x) const {
  switch (kind) {
    case TaperKind::Uniform: return 1.0;
    case TaperKind::RadialHann: {
      const double c = std::cos(0.5 * kPi * x);
      return pedestal + (1.0 - pedestal) * c * c;
    }
    case TaperKind::RadialHamming: return 0.54 + 0.46 * std::cos(kPi * x);
    case TaperKind::RadialTaylorApprox: return taylor_window(x, sll_db, nbar);
  }
  return 1.0;
}

void AngularGrid::validate() const {
  if (n_u < 1 || n_v < 1) throw DomainError("grid needs at least one sample per axis");
  if (u_min > u_max || v_min > v_max) throw DomainError("grid ranges must be ordered (min <= max)");
  if ((n_u == 1 && u_min != u_max) || (n_v == 1 && v_min != v_max))
    throw DomainError("a single-sample axis must have min == max");
  if (u_min < -1.0 || u_max > 1.0 || v_min < -1.0 || v_max > 1.0)
    throw DomainError("grid ranges must lie within [-1, 1]");
}

std::pair<int, int> AngularGrid::nearest(Direction d) const {
  auto pick = [](double x, double lo, double step, int n) {
    if (n == 1) return 0;
    const long i = std::lround((x - lo) / step);
    return static_cast<int>(std::clamp<long>(i, 0, n - 1));
  };
  return {pick(d.u, u_min, du(), n_u), pick(d.v, v_min, dv(), n_v)};
}

double ElementModel::gain(double u, double v) const {
  if (kind == Kind::Isotropic) return 1.0;
  const double c2 = 1.0 - u * u - v * v;
  if (c2 <= 0.0) return 0.0;
  return std::pow(std::sqrt(c2), q);
}

WeightVector steering_weights(const geometry::ArrayGeometry& geom, Direction direction) {
  if (direction.u * direction.u + direction.v * direction.v > 1.0)
    throw DomainError("steering direction lies outside the unit disk");
  const double k = kTwoPi / geom.wavelength;
  WeightVector w;
  w.steer = direction;
  w.amplitude.assign(geom.size(), 1.0);
  w.phase.resize(geom.size());
  for (std::size_t n = 0; n < geom.size(); ++n) {
    const auto& p = geom.positions[n];
    w.phase[n] = -k * (p.x * direction.u + p.y * direction.v);
  }
  return w;
}

WeightVector apply_taper(const WeightVector& weights, const TaperSpec& taper, const geometry::ArrayGeometry& geom) {
  if (weights.size() != geom.size()) throw DomainError("weight vector length does not match the geometry");
  if (taper.kind == TaperKind::Uniform) return weights;

  double cx = 0.0, cy = 0.0;
  for (const auto& p : geom.positions) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(geom.size());
  cy /= static_cast<double>(geom.size());
  std::vector<double> rho(geom.size());
  double rho_max = 0.0;
  for (std::size_t n = 0; n < geom.size(); ++n) {
    rho[n] = std::hypot(geom.positions[n].x - cx, geom.positions[n].y - cy);
    rho_max = std::max(rho_max, rho[n]);
  }
  if (rho_max == 0.0) {
    warn("taper on a zero-extent geometry is the identity");
    return weights;
  }
  WeightVector out = weights;
  for (std::size_t n = 0; n < geom.size(); ++n) {
    const double f = taper.window(rho[n] / rho_max);
    if (!(f > 0.0 && f <= 1.0 + 1e-12))
      throw DomainError("taper window value " + std::to_string(f) + " outside (0, 1]; check taper parameters");
    out.amplitude[n] *= f;
  }
  return out;
}

cplx array_factor(const geometry::ArrayGeometry& geom, const WeightVector& weights, Direction d,
                  const ElementModel& element) {
  const double k = kTwoPi / geom.wavelength;
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < geom.size(); ++n) {
    const auto& p = geom.positions[n];
    const double ph = weights.phase[n] + k * (p.x * d.u + p.y * d.v);
    re += weights.amplitude[n] * std::cos(ph);
    im += weights.amplitude[n] * std::sin(ph);
  }
  const double g = element.gain(d.u, d.v);
  return {g * re, g * im};
}

cplx Pattern::evaluate(Direction d) const { return array_factor(*geometry, weights, d, element); }

namespace {

// Kernel tiling: a block of kBlockU columns shares one precomputed column table, and
// kRowTile rows are accumulated together per pass over the elements.
constexpr int kBlockU = 128;
constexpr int kRowTile = 8;
// Upper bound for caching the full row table (n_v x N complex values).
constexpr std::size_t kRowTableBytes = std::size_t{512} << 20;

}  // namespace

Pattern evaluate_pattern(std::shared_ptr<const geometry::ArrayGeometry> geom, const WeightVector& weights,
                         const AngularGrid& grid, const ElementModel& element, unsigned threads) {
  if (!geom) throw DomainError("evaluate_pattern needs a geometry");
  if (weights.size() != geom->size()) throw DomainError("weight vector length does not match the geometry");
  grid.validate();

  const std::size_t n_el = geom->size();
  const int n_u = grid.n_u, n_v = grid.n_v;
  const double k = kTwoPi / geom->wavelength;

  Pattern p;
  p.grid = grid;
  p.normalization = weights.amplitude_sum();
  p.wavelength = geom->wavelength;
  p.weights = weights;
  p.element = element;
  p.samples.assign(grid.size(), cplx{});

  std::vector<double> kx(n_el), ky(n_el), w_re(n_el), w_im(n_el);
  for (std::size_t n = 0; n < n_el; ++n) {
    kx[n] = k * geom->positions[n].x;
    ky[n] = k * geom->positions[n].y;
    const cplx w = weights.at(n);
    w_re[n] = w.real();
    w_im[n] = w.imag();
  }

  // Row factor b_n(v) = w_n exp(j ky_n v), either cached for all rows or rebuilt per tile.
  const bool cache_rows = static_cast<std::size_t>(n_v) * n_el * 2 * sizeof(double) <= kRowTableBytes;
  std::vector<double> row_re, row_im;
  auto fill_row = [&](int j, double* re, double* im) {
    const double v = grid.v(j);
    for (std::size_t n = 0; n < n_el; ++n) {
      const double ph = ky[n] * v;
      const double c = std::cos(ph), s = std::sin(ph);
      re[n] = w_re[n] * c - w_im[n] * s;
      im[n] = w_re[n] * s + w_im[n] * c;
    }
  };
  if (cache_rows) {
    row_re.resize(static_cast<std::size_t>(n_v) * n_el);
    row_im.resize(row_re.size());
    parallel_for(n_v, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) fill_row(static_cast<int>(j), &row_re[j * n_el], &row_im[j * n_el]);
    });
  }

  std::vector<double> col_re(n_el * kBlockU), col_im(n_el * kBlockU);
  const int n_tiles = (n_v + kRowTile - 1) / kRowTile;

  for (int i0 = 0; i0 < n_u; i0 += kBlockU) {
    const int bu = std::min(kBlockU, n_u - i0);
    // Column table a_n(u) = exp(j kx_n u), element-major.
    parallel_for(n_el, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t n = b; n < e; ++n) {
        for (int c = 0; c < bu; ++c) {
          const double ph = kx[n] * grid.u(i0 + c);
          col_re[n * kBlockU + c] = std::cos(ph);
          col_im[n * kBlockU + c] = std::sin(ph);
        }
      }
    });

    parallel_for(n_tiles, threads, [&](std::size_t tb, std::size_t te) {
      std::vector<double> local_re, local_im;
      if (!cache_rows) {
        local_re.resize(kRowTile * n_el);
        local_im.resize(kRowTile * n_el);
      }
      alignas(64) double acc_re[kRowTile][kBlockU];
      alignas(64) double acc_im[kRowTile][kBlockU];
      for (std::size_t t = tb; t < te; ++t) {
        const int j0 = static_cast<int>(t) * kRowTile;
        const int rows = std::min(kRowTile, n_v - j0);
        const double* rre[kRowTile];
        const double* rim[kRowTile];
        for (int r = 0; r < rows; ++r) {
          if (cache_rows) {
            rre[r] = &row_re[static_cast<std::size_t>(j0 + r) * n_el];
            rim[r] = &row_im[static_cast<std::size_t>(j0 + r) * n_el];
          } else {
            fill_row(j0 + r, &local_re[r * n_el], &local_im[r * n_el]);
            rre[r] = &local_re[r * n_el];
            rim[r] = &local_im[r * n_el];
          }
          std::fill_n(acc_re[r], kBlockU, 0.0);
          std::fill_n(acc_im[r], kBlockU, 0.0);
        }
        for (std::size_t n = 0; n < n_el; ++n) {
          const double* __restrict ar = &col_re[n * kBlockU];
          const double* __restrict ai = &col_im[n * kBlockU];
          for (int r = 0; r < rows; ++r) {
            const double br = rre[r][n], bi = rim[r][n];
            double* __restrict cr = acc_re[r];
            double* __restrict ci = acc_im[r];
            for (int c = 0; c < kBlockU; ++c) {
              cr[c] += br * ar[c] - bi * ai[c];
              ci[c] += br * ai[c] + bi * ar[c];
            }
          }
        }
        for (int r = 0; r < rows; ++r) {
          const int j = j0 + r;
          for (int c = 0; c < bu; ++c) {
            const int i = i0 + c;
            const double g = element.gain(grid.u(i), grid.v(j));
            p.samples[grid.index(i, j)] = {g * acc_re[r][c], g * acc_im[r][c]};
          }
        }
      }
    });
  }
  p.geometry = std::move(geom);
  return p;
}

std::vector<Pattern> evaluate_multibeam(std::shared_ptr<const geometry::ArrayGeometry> geom,
                                        const std::vector<Beam>& beams, const AngularGrid& grid,
                                        const ElementModel& element, unsigned threads) {
  if (beams.empty()) throw DomainError("evaluate_multibeam needs at least one beam");
  std::vector<Pattern> out;
  out.reserve(beams.size());
  for (const auto& b : beams) {
    auto w = apply_taper(steering_weights(*geom, b.direction), b.taper, *geom);
    auto p = evaluate_pattern(geom, w, grid, element, threads);
    p.taper = b.taper;
    out.push_back(std::move(p));
  }
  return out;
}

std::string pattern_csv(const Pattern& p) {
  std::string out = "u,v,af_db\n";
  out.reserve(static_cast<std::size_t>(p.grid.size()) * 36);
  const double norm = p.normalization > 0 ? p.normalization : 1.0;
  char buf[96];
  for (int j = 0; j < p.grid.n_v; ++j) {
    for (int i = 0; i < p.grid.n_u; ++i) {
      if (!p.grid.visible(i, j)) continue;
      const double mag = std::abs(p.at(i, j)) / norm;
      const double db = mag > 0 ? std::max(-200.0, db20(mag)) : -200.0;
      const int len = std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.6f\n", p.grid.u(i), p.grid.v(j), db);
      out.append(buf, static_cast<std::size_t>(len));
    }
  }
  return out;
}

std::string pattern_sidecar_json(const Pattern& p) {
  nlohmann::ordered_json j;
  j["grid"] = {{"u_min", p.grid.u_min}, {"u_max", p.grid.u_max}, {"v_min", p.grid.v_min},
               {"v_max", p.grid.v_max}, {"n_u", p.grid.n_u},     {"n_v", p.grid.n_v}};
  j["wavelength_m"] = p.wavelength;
  j["steer_u"] = p.weights.steer.u;
  j["steer_v"] = p.weights.steer.v;
  j["taper"] = std::string(to_string(p.taper.kind));
  j["element_model"] = p.element.isotropic() ? "isotropic" : "cosine-q";
  if (!p.element.isotropic()) j["element_q"] = p.element.q;
  j["normalization"] = p.normalization;
  j["n_elements"] = p.weights.size();
  j["af_db_convention"] = "20log10(|AF|/sum|w|), clipped at -200 dB, visible region only";
  return j.dump(2) + "\n";
}

}  // namespace swarm::beam
