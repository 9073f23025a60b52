#include "swarm/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

namespace swarm::geometry {

namespace {

// Relative slack when comparing realized distances against d_min.
constexpr double kSpacingSlack = 1e-9;

// Returns where the old origin ended up.
Vec2 recenter(std::vector<Vec2>& pts) {
  if (pts.empty()) return {};
  double sx = 0.0, sy = 0.0;
  for (const auto& p : pts) {
    sx += p.x;
    sy += p.y;
  }
  sx /= static_cast<double>(pts.size());
  sy /= static_cast<double>(pts.size());
  for (auto& p : pts) {
    p.x -= sx;
    p.y -= sy;
  }
  return {-sx, -sy};
}

// Offsets of a lambda/2-pitch square subarray holding n elements, centered on its own centroid.
std::vector<Vec2> subarray_offsets(int n, double wavelength) {
  const double pitch = 0.5 * wavelength;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  std::vector<Vec2> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back({(i % cols) * pitch, (i / cols) * pitch});
  recenter(out);
  return out;
}

// Extent of the subarray footprint along x and y.
Vec2 subarray_extent(int n, double wavelength) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = (n + cols - 1) / cols;
  return {(cols - 1) * 0.5 * wavelength, (rows - 1) * 0.5 * wavelength};
}

ArrayGeometry expand_platforms(const GeometrySpec& spec, std::vector<Vec2> platforms,
                               std::vector<int> arms) {
  ArrayGeometry g;
  g.spec = spec;
  g.wavelength = spec.wavelength();
  g.origin = recenter(platforms);
  const int nr = spec.radiators_per_platform;
  const auto offsets = subarray_offsets(nr, g.wavelength);
  g.positions.reserve(platforms.size() * nr);
  for (std::size_t p = 0; p < platforms.size(); ++p) {
    for (const auto& o : offsets) {
      g.positions.push_back({platforms[p].x + o.x, platforms[p].y + o.y});
      g.platform.push_back(static_cast<int>(p));
      g.arm.push_back(arms.empty() ? -1 : arms[p]);
    }
  }
  const Vec2 fix = recenter(g.positions);
  g.origin.x += fix.x;
  g.origin.y += fix.y;
  return g;
}

void check_min_spacing(const ArrayGeometry& g) {
  const double limit = g.spec.min_spacing_m * (1.0 - kSpacingSlack);
  const auto& pts = g.positions;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = distance(pts[i], pts[j]);
      if (d < limit) {
        std::ostringstream os;
        os.precision(9);
        os << "elements " << i << " and " << j << " are " << d << " m apart, below min_spacing "
           << g.spec.min_spacing_m << " m";
        throw SpacingError(os.str());
      }
    }
  }
}

}  // namespace

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::RectangularLattice: return "rectangular-lattice";
    case Kind::SparseSquare: return "sparse-square";
    case Kind::Sunflower: return "sunflower";
    case Kind::Elsa: return "elsa";
  }
  return "unknown";
}

Kind kind_from_string(std::string_view name) {
  for (Kind k : {Kind::RectangularLattice, Kind::SparseSquare, Kind::Sunflower, Kind::Elsa})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown geometry kind '" + std::string(name) +
                    "' (expected rectangular-lattice, sparse-square, sunflower or elsa)");
}

void GeometrySpec::validate() const {
  if (n_platforms < 1) throw ConfigError("geometry.n_platforms must be >= 1");
  if (radiators_per_platform < 1) throw ConfigError("geometry.radiators_per_platform must be >= 1");
  if (!(spacing_m > 0)) throw ConfigError("geometry.spacing_m must be > 0 [m]");
  if (!(radial_scale_m > 0)) throw ConfigError("geometry.radial_scale_m must be > 0 [m]");
  if (!(min_spacing_m > 0)) throw ConfigError("geometry.min_spacing_m must be > 0 [m]");
  if (!(growth_rate > 0)) throw ConfigError("geometry.growth_rate must be > 0 [1/rad]");
  if (n_arms < 1) throw ConfigError("geometry.n_arms must be >= 1");
  if (!(frequency_hz > 0)) throw ConfigError("geometry.frequency_hz must be > 0 [Hz]");
  if (nx < 0 || ny < 0) throw ConfigError("geometry.nx/ny must be >= 0");
}

ArrayGeometry generate_rectangular(const GeometrySpec& spec) {
  spec.validate();
  if (spec.kind != Kind::RectangularLattice && spec.kind != Kind::SparseSquare)
    throw ConfigError("generate_rectangular needs a lattice kind");
  int nx = spec.nx, ny = spec.ny;
  if (nx == 0 && ny == 0) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(spec.n_platforms))));
    if (side * side != spec.n_platforms)
      throw ConfigError("n_platforms = " + std::to_string(spec.n_platforms) +
                        " is not a perfect square; set geometry.nx and geometry.ny");
    nx = ny = side;
  } else if (static_cast<long>(nx) * ny != spec.n_platforms) {
    throw ConfigError("geometry.nx * geometry.ny must equal n_platforms");
  }

  const double lambda = spec.wavelength();
  if (spec.radiators_per_platform > 1) {
    const Vec2 ext = subarray_extent(spec.radiators_per_platform, lambda);
    const double gap_x = spec.spacing_m - ext.x;
    const double gap_y = spec.spacing_m - ext.y;
    const double need = 0.5 * lambda * (1.0 - kSpacingSlack);
    if ((nx > 1 && gap_x < need) || (ny > 1 && gap_y < need))
      throw SpacingError("subarray of " + std::to_string(spec.radiators_per_platform) +
                         " elements at lambda/2 overlaps adjacent platforms at spacing " +
                         std::to_string(spec.spacing_m) + " m");
  }

  std::vector<Vec2> platforms;
  platforms.reserve(spec.n_platforms);
  const double cx = 0.5 * (nx - 1), cy = 0.5 * (ny - 1);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) platforms.push_back({(ix - cx) * spec.spacing_m, (iy - cy) * spec.spacing_m});

  auto g = expand_platforms(spec, std::move(platforms), {});
  check_min_spacing(g);
  return g;
}

ArrayGeometry generate_sunflower(const GeometrySpec& spec) {
  spec.validate();
  std::vector<Vec2> platforms;
  platforms.reserve(spec.n_platforms);
  for (int n = 1; n <= spec.n_platforms; ++n) {
    const double r = spec.radial_scale_m * std::sqrt(static_cast<double>(n));
    const double phi = n * kGoldenAngle;
    platforms.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  auto g = expand_platforms(spec, std::move(platforms), {});
  check_min_spacing(g);
  return g;
}

namespace {

struct LogSpiral {
  double a;
  double b;
  Vec2 at(double theta) const {
    const double r = a * std::exp(b * theta);
    return {r * std::cos(theta), r * std::sin(theta)};
  }
  // d(arc length)/d(theta)
  double speed(double theta) const { return a * std::exp(b * theta) * std::sqrt(1.0 + b * b); }
};

// Angles along arm 0. Radii follow the area-uniform law a*sqrt(m+1); an element is pushed
// further along the arm until its chord to the previous one reaches d_min.
std::vector<double> arm_angles(const LogSpiral& s, int count, double d_min) {
  std::vector<double> theta;
  theta.reserve(count);
  if (count == 0) return theta;
  theta.push_back(0.0);
  long steps = 0;
  for (int m = 1; m < count; ++m) {
    const double prev = theta.back();
    const Vec2 p0 = s.at(prev);
    const double target = std::log(static_cast<double>(m + 1)) / (2.0 * s.b);
    double t = std::max(target, prev);
    if (distance(s.at(t), p0) >= d_min) {
      theta.push_back(t);
      continue;
    }
    double lo = t;
    double hi = t;
    while (distance(s.at(hi), p0) < d_min) {
      if (++steps > kMaxSpiralSteps)
        throw SynthesisError("no d_min-feasible spiral placement within " + std::to_string(kMaxSpiralSteps) +
                             " candidate steps (element " + std::to_string(m) + " of arm 0)");
      lo = hi;
      hi += (d_min / 64.0) / s.speed(hi);
    }
    for (int it = 0; it < 64; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (distance(s.at(mid), p0) < d_min)
        lo = mid;
      else
        hi = mid;
    }
    theta.push_back(hi);
  }
  return theta;
}

}  // namespace

ArrayGeometry generate_elsa(const GeometrySpec& spec) {
  spec.validate();
  const int arms = spec.n_arms;
  std::vector<int> per_arm(arms, spec.n_platforms / arms);
  for (int k = 0; k < spec.n_platforms % arms; ++k) ++per_arm[k];

  const LogSpiral spiral{spec.radial_scale_m, spec.growth_rate};
  const auto theta = arm_angles(spiral, per_arm.front(), spec.min_spacing_m);

  std::vector<Vec2> platforms;
  std::vector<int> arm_of;
  platforms.reserve(spec.n_platforms);
  for (int k = 0; k < arms; ++k) {
    const double rot = kTwoPi * k / arms;
    const double c = std::cos(rot), s = std::sin(rot);
    for (int m = 0; m < per_arm[k]; ++m) {
      const Vec2 p = spiral.at(theta[m]);
      platforms.push_back({c * p.x - s * p.y, s * p.x + c * p.y});
      arm_of.push_back(k);
    }
  }
  auto g = expand_platforms(spec, std::move(platforms), std::move(arm_of));
  check_min_spacing(g);
  return g;
}

ArrayGeometry generate(const GeometrySpec& spec) {
  switch (spec.kind) {
    case Kind::RectangularLattice:
    case Kind::SparseSquare: return generate_rectangular(spec);
    case Kind::Sunflower: return generate_sunflower(spec);
    case Kind::Elsa: return generate_elsa(spec);
  }
  throw ConfigError("unhandled geometry kind");
}

double convex_hull_area(std::vector<Vec2> pts) {
  if (pts.size() < 3) return 0.0;
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  double area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::abs(area);
}

GeometryStats compute_stats(const ArrayGeometry& geom) {
  if (geom.positions.empty()) throw DomainError("compute_stats on an empty geometry");
  GeometryStats st;
  st.n_elements = geom.size();
  const auto& pts = geom.positions;
  const std::size_t n = pts.size();
  if (n > 1) {
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    double widest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = distance(pts[i], pts[j]);
        nearest[i] = std::min(nearest[i], d);
        nearest[j] = std::min(nearest[j], d);
        widest = std::max(widest, d);
      }
    }
    double sum = 0.0;
    for (double d : nearest) sum += d;
    st.d_ave = sum / static_cast<double>(n);
    st.aperture_diameter = widest;
  }
  st.virtual_aperture = convex_hull_area(pts);
  return st;
}

ArrayGeometry from_positions(std::vector<Vec2> positions, double wavelength) {
  ArrayGeometry g;
  g.origin = recenter(positions);
  g.positions = std::move(positions);
  g.wavelength = wavelength;
  g.spec.frequency_hz = kSpeedOfLight / wavelength;
  g.spec.n_platforms = static_cast<int>(g.positions.size());
  g.spec.kind = Kind::Sunflower;
  for (std::size_t i = 0; i < g.positions.size(); ++i) {
    g.platform.push_back(static_cast<int>(i));
    g.arm.push_back(-1);
  }
  return g;
}

std::string to_csv(const ArrayGeometry& geom) {
  std::string out = "index,platform,arm,x_m,y_m\n";
  char buf[128];
  for (std::size_t i = 0; i < geom.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.9g,%.9g\n", i, geom.platform[i], geom.arm[i],
                  geom.positions[i].x, geom.positions[i].y);
    out += buf;
  }
  return out;
}

}  // namespace swarm::geometry
