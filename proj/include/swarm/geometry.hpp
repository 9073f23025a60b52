#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarm/common.hpp"

namespace swarm::geometry {

enum class Kind { RectangularLattice, SparseSquare, Sunflower, Elsa };

std::string_view to_string(Kind kind);
Kind kind_from_string(std::string_view name);

// Golden-angle increment 2*pi*(1 - 1/phi) of the sunflower layout.
inline constexpr double kGoldenAngle = kTwoPi * (1.0 - 1.0 / std::numbers::phi);

// Max candidate arc-length steps the spiral synthesizer may take before giving up.
inline constexpr long kMaxSpiralSteps = 1'000'000;

/// Parametric description of a (possibly distributed) planar array.
/// Total element count is n_platforms * radiators_per_platform.
struct GeometrySpec {
  Kind kind = Kind::Elsa;
  int n_platforms = 1;
  int radiators_per_platform = 1;
  double spacing_m = 0.0749481145;  // lattice pitch d, lambda/2 at 2 GHz
  double radial_scale_m = 1.0;    // spiral kinds
  int n_arms = 1;                 // elsa only
  double growth_rate = 0.2;       // elsa only, per radian
  double min_spacing_m = 0.0749481145;  // d_min
  double frequency_hz = 2.0e9;
  // Explicit platform grid for lattice kinds; 0 means "derive from a square n_platforms".
  int nx = 0;
  int ny = 0;

  double wavelength() const { return wavelength_of(frequency_hz); }
  int total_elements() const { return n_platforms * radiators_per_platform; }
  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

struct ArrayGeometry {
  std::vector<Vec2> positions;  // meters, z = 0, recentered on the origin
  std::vector<int> platform;    // platform index per element
  std::vector<int> arm;         // spiral arm per element, -1 for non-spiral kinds
  double wavelength = 0.0;
  Vec2 origin;  // generator origin (spiral pole, lattice center) after recentering
  GeometrySpec spec;

  std::size_t size() const { return positions.size(); }
};

struct GeometryStats {
  std::optional<double> d_ave;  // mean nearest-neighbor distance; absent for one element
  double aperture_diameter = 0.0;
  double virtual_aperture = 0.0;  // convex hull area
  std::size_t n_elements = 0;
};

ArrayGeometry generate_rectangular(const GeometrySpec& spec);
ArrayGeometry generate_sunflower(const GeometrySpec& spec);
ArrayGeometry generate_elsa(const GeometrySpec& spec);
/// Dispatches on spec.kind.
ArrayGeometry generate(const GeometrySpec& spec);

GeometryStats compute_stats(const ArrayGeometry& geom);

/// Area of the convex hull (0 for fewer than three non-collinear points).
double convex_hull_area(std::vector<Vec2> points);

/// Builds a geometry from explicit positions (recentered), e.g. for tests and perturbed copies.
ArrayGeometry from_positions(std::vector<Vec2> positions, double wavelength);

/// CSV with header `index,platform,arm,x_m,y_m`, 9 significant digits.
std::string to_csv(const ArrayGeometry& geom);

}  // namespace swarm::geometry
