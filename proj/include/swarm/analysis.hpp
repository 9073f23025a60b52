#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swarm/beamforming.hpp"

namespace swarm::analysis {

// Field quantities use 20log10, power quantities 10log10.
inline constexpr double kHalfPowerDb = 3.0103;

struct MetricOptions {
  double mask_factor = 1.5;        // main-lobe mask semi-axis, in multiples of the full HPBW
  double gl_threshold_db = -10.0;  // grating-lobe detection threshold relative to peak
  double altitude_m = 500e3;       // for the footprint radius
};

/// Elliptical exclusion region around the main lobe, in direction cosines.
struct MainLobeMask {
  Direction center;
  double semi_u = 0.0;
  double semi_v = 0.0;
  bool contains(double u, double v) const;
};

struct MainLobe {
  Direction peak_direction;  // grid argmax
  int peak_i = 0, peak_j = 0;
  Direction refined_direction;  // local maximum of the direct array factor
  double peak_magnitude = 0.0;  // |AF| at refined_direction
  double hpbw_u = 0.0;          // radians
  double hpbw_v = 0.0;          // radians
  double width_u = 0.0;         // half-power width in u (direction cosine)
  double width_v = 0.0;
  MainLobeMask mask;
};

struct GratingLobe {
  Direction direction;
  double level_db = 0.0;  // relative to the main-lobe peak
};

struct SidelobeMetrics {
  std::optional<double> psll_db;
  std::optional<double> asll_db;
  std::vector<GratingLobe> grating_lobes;
};

struct PatternMetrics {
  MainLobe main_lobe;
  SidelobeMetrics sidelobes;
  std::optional<double> directivity_dbi;
  std::optional<std::string> directivity_error;
  double footprint_radius_m = 0.0;
};

MainLobe measure_main_lobe(const beam::Pattern& p, const MetricOptions& opt = {});

SidelobeMetrics sidelobe_metrics(const beam::Pattern& p, const MainLobe& lobe, const MetricOptions& opt = {});

/// Grid quadrature of 4 pi |AF_peak|^2 / integral |AF|^2 dOmega over the visible hemisphere.
double directivity(const beam::Pattern& p, const MainLobe& lobe);
double directivity(const beam::Pattern& p);

/// Closed-form directivity for isotropic elements:
/// 4 pi |AF(d)|^2 / (2 pi sum_mn w_m w_n* sinc(k r_mn)), sinc(x) = sin(x)/x.
double directivity_isotropic_exact(const geometry::ArrayGeometry& geom, const beam::WeightVector& w, Direction d);

double footprint_radius(double hpbw_rad, double altitude_m);
double required_aperture_for_footprint(double footprint_m, double altitude_m, double wavelength_m);
/// Inverse of footprint_radius.
double hpbw_for_footprint(double footprint_m, double altitude_m);

struct CochannelResult {
  std::vector<std::optional<double>> ci_db;     // per beam; absent without interferers
  std::vector<std::vector<double>> coupling_db;  // [i][j] = |AF_j(c_i)|^2 / |AF_i(c_i)|^2 in dB
};

CochannelResult cochannel_ci(const std::vector<beam::Pattern>& patterns, const std::vector<Direction>& centers);

PatternMetrics compute_metrics(const beam::Pattern& p, const MetricOptions& opt = {});

/// JSON object with keys peak_u, peak_v, hpbw_u_rad, hpbw_v_rad, directivity_dbi, psll_db, asll_db,
/// grating_lobes[], r_b_m (absent values are null).
std::string metrics_json(const PatternMetrics& m);

}  // namespace swarm::analysis
