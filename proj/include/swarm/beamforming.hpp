#pragma once

#include <complex>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm::beam {

using cplx = std::complex<double>;

/// Per-element excitation kept in polar form so amplitude edits never touch phases.
struct WeightVector {
  std::vector<double> amplitude;
  std::vector<double> phase;  // radians
  Direction steer;

  std::size_t size() const { return amplitude.size(); }
  cplx at(std::size_t n) const { return {amplitude[n] * std::cos(phase[n]), amplitude[n] * std::sin(phase[n])}; }
  double amplitude_sum() const;
};

enum class TaperKind { Uniform, RadialHann, RadialHamming, RadialTaylorApprox };

std::string_view to_string(TaperKind kind);
TaperKind taper_from_string(std::string_view name);

struct TaperSpec {
  TaperKind kind = TaperKind::Uniform;
  double pedestal = 0.01;   // radial-hann edge amplitude
  double sll_db = -30.0;    // radial-taylor-approx design sidelobe level
  int nbar = 5;             // radial-taylor-approx

  /// Window value at normalized radius x = rho / rho_max in [0, 1].
  double window(double x) const;
};

/// Uniformly spaced direction-cosine samples, boundary points included.
struct AngularGrid {
  double u_min = -1.0, u_max = 1.0;
  double v_min = -1.0, v_max = 1.0;
  int n_u = 1024, n_v = 1024;

  void validate() const;
  double du() const { return n_u > 1 ? (u_max - u_min) / (n_u - 1) : 0.0; }
  double dv() const { return n_v > 1 ? (v_max - v_min) / (n_v - 1) : 0.0; }
  double u(int i) const { return n_u > 1 ? u_min + i * du() : u_min; }
  double v(int j) const { return n_v > 1 ? v_min + j * dv() : v_min; }
  bool visible(int i, int j) const { return u(i) * u(i) + v(j) * v(j) <= 1.0; }
  std::size_t size() const { return static_cast<std::size_t>(n_u) * n_v; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_u + i; }
  /// Nearest grid indices to a direction (clamped to the grid).
  std::pair<int, int> nearest(Direction d) const;
  bool covers_visible_region() const { return u_min <= -1.0 && u_max >= 1.0 && v_min <= -1.0 && v_max >= 1.0; }

  static AngularGrid full(int n) { return {-1.0, 1.0, -1.0, 1.0, n, n}; }
  static AngularGrid around(Direction c, double half_width, int n) {
    return {c.u - half_width, c.u + half_width, c.v - half_width, c.v + half_width, n, n};
  }
};

struct ElementModel {
  enum class Kind { Isotropic, CosineQ } kind = Kind::Isotropic;
  double q = 1.0;

  /// Scalar element field at (u, v); zero outside the visible region for cosine^q.
  double gain(double u, double v) const;
  bool isotropic() const { return kind == Kind::Isotropic; }
};

/// Sampled complex array factor, stored unnormalized (row-major in v).
struct Pattern {
  AngularGrid grid;
  std::vector<cplx> samples;
  double normalization = 0.0;  // sum of |w_n|
  double wavelength = 0.0;
  std::shared_ptr<const geometry::ArrayGeometry> geometry;
  WeightVector weights;
  ElementModel element;
  TaperSpec taper;

  const cplx& at(int i, int j) const { return samples[grid.index(i, j)]; }
  /// Direct evaluation at an arbitrary direction (same formula as the grid samples).
  cplx evaluate(Direction d) const;
};

struct Beam {
  Direction direction;
  TaperSpec taper;
};

WeightVector steering_weights(const geometry::ArrayGeometry& geom, Direction direction);

/// Multiplies each amplitude by window(rho_n / rho_max); phases are untouched.
WeightVector apply_taper(const WeightVector& weights, const TaperSpec& taper,
                         const geometry::ArrayGeometry& geom);

/// AF(u,v) = e(u,v) * sum_n w_n exp(j 2pi/lambda (x_n u + y_n v)), summed in element order.
/// Output is bit-identical for any thread count.
Pattern evaluate_pattern(std::shared_ptr<const geometry::ArrayGeometry> geom, const WeightVector& weights,
                         const AngularGrid& grid, const ElementModel& element = {}, unsigned threads = 1);

/// Single-point direct sum, used for refinement and as a reference path.
cplx array_factor(const geometry::ArrayGeometry& geom, const WeightVector& weights, Direction d,
                  const ElementModel& element = {});

std::vector<Pattern> evaluate_multibeam(std::shared_ptr<const geometry::ArrayGeometry> geom,
                                        const std::vector<Beam>& beams, const AngularGrid& grid,
                                        const ElementModel& element = {}, unsigned threads = 1);

/// CSV `u,v,af_db` over visible points, af_db = 20log10(|AF|/sum|w|) clipped at -200 dB.
std::string pattern_csv(const Pattern& p);
/// JSON sidecar with grid metadata, wavelength, steering direction and taper kind.
std::string pattern_sidecar_json(const Pattern& p);

}  // namespace swarm::beam
