#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace swarm {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Direction cosines of a far-field direction projected on the array plane.
struct Direction {
  double u = 0.0;
  double v = 0.0;
};

inline double wavelength_of(double frequency_hz) { return kSpeedOfLight / frequency_hz; }

// Error hierarchy. The CLI maps IoError to exit code 1 and everything else to 2.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SWARM_DEFINE_ERROR(Name, tag) \
  class Name : public Error {         \
   public:                            \
    explicit Name(const std::string& what) : Error(tag, what) {} \
  };

SWARM_DEFINE_ERROR(ConfigError, "config")
SWARM_DEFINE_ERROR(DomainError, "domain")
SWARM_DEFINE_ERROR(SpacingError, "spacing")
SWARM_DEFINE_ERROR(SynthesisError, "synthesis")
SWARM_DEFINE_ERROR(BeamTooWideError, "beam-too-wide")
SWARM_DEFINE_ERROR(ResolutionError, "resolution")
SWARM_DEFINE_ERROR(InfeasibleError, "infeasible")
SWARM_DEFINE_ERROR(ComparabilityError, "comparability")
SWARM_DEFINE_ERROR(IoError, "io")

#undef SWARM_DEFINE_ERROR

// Warnings go through a replaceable sink so tests and the CLI can capture them.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

/// Runs fn(begin, end) over [0, count) split into contiguous chunks, one per worker.
/// Callers must make per-index work independent of the chunking.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

inline double db10(double power_ratio) { return 10.0 * std::log10(power_ratio); }
inline double db20(double field_ratio) { return 20.0 * std::log10(field_ratio); }

}  // namespace swarm
