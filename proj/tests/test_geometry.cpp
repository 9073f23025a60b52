#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "swarm/geometry.hpp"

using namespace swarm;
using geometry::GeometrySpec;
using geometry::Kind;

namespace {

GeometrySpec at_lambda_015(GeometrySpec s) {
  s.frequency_hz = oracle::kC / 0.15;
  return s;
}

Vec2 centroid(const geometry::ArrayGeometry& g) {
  Vec2 c;
  for (const auto& p : g.positions) c.x += p.x, c.y += p.y;
  c.x /= static_cast<double>(g.size());
  c.y /= static_cast<double>(g.size());
  return c;
}

}  // namespace

TEST_CASE("single-element lattice sits at the origin") {
  GeometrySpec s;
  s.kind = Kind::RectangularLattice;
  s.n_platforms = 1;
  const auto g = geometry::generate(s);
  REQUIRE(g.size() == 1);
  CHECK(g.positions[0].x == 0.0);
  CHECK(g.positions[0].y == 0.0);
  CHECK_FALSE(geometry::compute_stats(g).d_ave.has_value());
}

TEST_CASE("2x2 lattice is symmetric about its centroid") {
  auto s = at_lambda_015(oracle::lattice(2, 0.5));
  s.spacing_m = 0.075;
  s.min_spacing_m = 0.075;
  const auto g = geometry::generate(s);
  REQUIRE(g.size() == 4);
  for (const auto& p : g.positions) {
    CHECK(std::abs(p.x) == doctest::Approx(0.0375).epsilon(1e-12));
    CHECK(std::abs(p.y) == doctest::Approx(0.0375).epsilon(1e-12));
  }
}

TEST_CASE("32x32 half-wavelength lattice statistics") {
  auto s = at_lambda_015(oracle::lattice(32, 0.5));
  s.spacing_m = 0.075;
  s.min_spacing_m = 0.075;
  const auto g = geometry::generate(s);
  const auto st = geometry::compute_stats(g);
  CHECK(*st.d_ave == doctest::Approx(oracle::mean_nearest_neighbor(g.positions)).epsilon(1e-12));
  CHECK(*st.d_ave == doctest::Approx(0.075).epsilon(1e-12));
  CHECK(st.aperture_diameter == doctest::Approx(31 * 0.075 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(st.aperture_diameter == doctest::Approx(3.288).epsilon(1e-3));
  CHECK(st.virtual_aperture == doctest::Approx(std::pow(31 * 0.075, 2)).epsilon(1e-12));
}

TEST_CASE("non-square platform count needs an explicit grid") {
  auto s = oracle::lattice(4, 0.5);
  s.n_platforms = 12;
  CHECK_THROWS_AS(geometry::generate(s), ConfigError);
  s.nx = 4;
  s.ny = 3;
  const auto g = geometry::generate(s);
  CHECK(g.size() == 12);
  s.ny = 5;
  CHECK_THROWS_AS(geometry::generate(s), ConfigError);
}

TEST_CASE("subarrays: decomposition identity and overlap rejection") {
  auto s = oracle::lattice(3, 2.0);
  s.radiators_per_platform = 4;
  const auto g = geometry::generate(s);
  CHECK(g.size() == 36);
  CHECK(static_cast<int>(g.size()) == s.total_elements());
  CHECK(oracle::min_pair_distance(g.positions) >= 0.5 * g.wavelength * (1 - 1e-9));
  for (int p = 0; p < 9; ++p) CHECK(std::count(g.platform.begin(), g.platform.end(), p) == 4);

  s.spacing_m = 0.75 * g.wavelength;  // 2x2 subarray spans lambda/2; gap is only lambda/4
  CHECK_THROWS_AS(geometry::generate(s), SpacingError);
}

TEST_CASE("sunflower: single element and golden-angle increments") {
  GeometrySpec s;
  s.kind = Kind::Sunflower;
  s.n_platforms = 1;
  s.radial_scale_m = 2.0;
  auto g = geometry::generate(s);
  REQUIRE(g.size() == 1);
  CHECK(std::hypot(g.positions[0].x, g.positions[0].y) < 1e-12);

  s.n_platforms = 50;
  s.min_spacing_m = 0.1;
  g = geometry::generate(s);
  const Vec2 c = g.origin;
  const double gamma = 2.0 * oracle::kPi * (1.0 - 2.0 / (1.0 + std::sqrt(5.0)));
  CHECK(gamma == doctest::Approx(2.399963).epsilon(1e-6));
  // Azimuths about the pattern's own origin.
  for (std::size_t n = 1; n < g.size(); ++n) {
    const double a0 = std::atan2(g.positions[n - 1].y - c.y, g.positions[n - 1].x - c.x);
    const double a1 = std::atan2(g.positions[n].y - c.y, g.positions[n].x - c.x);
    const double d = std::remainder(a1 - a0 - gamma, 2.0 * oracle::kPi);
    CHECK(std::abs(d) < 1e-6);
  }
}

TEST_CASE("sunflower with d_ave calibrated to ten wavelengths") {
  GeometrySpec s;
  s.kind = Kind::Sunflower;
  s.n_platforms = 200;
  const double lam = s.wavelength();
  s.min_spacing_m = lam / 2;
  // d_ave is linear in the radial scale, so one pilot layout fixes the calibration.
  s.radial_scale_m = 1.0;
  s.radial_scale_m = 10.0 * lam / *geometry::compute_stats(geometry::generate(s)).d_ave;
  const auto g = geometry::generate(s);
  const double dave = oracle::mean_nearest_neighbor(g.positions);
  CHECK(dave == doctest::Approx(10.0 * lam).epsilon(0.05));
  CHECK(*geometry::compute_stats(g).d_ave == doctest::Approx(dave).epsilon(1e-12));
}

TEST_CASE("elsa single arm has strictly increasing radii") {
  GeometrySpec s;
  s.kind = Kind::Elsa;
  s.n_platforms = 60;
  s.n_arms = 1;
  s.growth_rate = 0.2;
  s.radial_scale_m = 1.0;
  s.min_spacing_m = 0.075;
  const auto g = geometry::generate(s);
  double prev = -1.0;
  for (const auto& p : g.positions) {
    const double r = std::hypot(p.x - g.origin.x, p.y - g.origin.y);
    CHECK(r > prev);
    prev = r;
  }
  for (int a : g.arm) CHECK(a == 0);
}

TEST_CASE("elsa five-arm rotation symmetry and minimum spacing") {
  GeometrySpec s;
  s.kind = Kind::Elsa;
  s.n_platforms = 500;
  s.n_arms = 5;
  s.growth_rate = 0.2;
  const double lam = s.wavelength();
  s.radial_scale_m = 11.4 * lam;
  s.min_spacing_m = 5.0 * lam;
  const auto g = geometry::generate(s);
  REQUIRE(g.size() == 500);

  CHECK(oracle::min_pair_distance(g.positions) >= 5.0 * lam * (1 - 1e-9));

  const double a = 2.0 * oracle::kPi / 5.0;
  for (const auto& p : g.positions) {
    const Vec2 q{p.x * std::cos(a) - p.y * std::sin(a), p.x * std::sin(a) + p.y * std::cos(a)};
    double best = 1e300;
    for (const auto& o : g.positions) best = std::min(best, std::hypot(o.x - q.x, o.y - q.y));
    CHECK(best < 1e-9);
  }
}

TEST_CASE("elsa remainder elements go to the first arms") {
  GeometrySpec s;
  s.kind = Kind::Elsa;
  s.n_platforms = 23;
  s.n_arms = 5;
  s.radial_scale_m = 1.0;
  const auto g = geometry::generate(s);
  std::vector<int> per_arm(5, 0);
  for (int a : g.arm) ++per_arm[a];
  CHECK(per_arm == std::vector<int>{5, 5, 5, 4, 4});
}

TEST_CASE("elsa rejects an infeasible minimum spacing") {
  GeometrySpec s;
  s.kind = Kind::Elsa;
  s.n_platforms = 200;
  s.n_arms = 40;
  s.growth_rate = 0.05;
  s.radial_scale_m = 0.2;
  s.min_spacing_m = 3.0;
  CHECK_THROWS_AS(geometry::generate(s), Error);
}

TEST_CASE("compute_stats on two points and a unit square") {
  auto two = geometry::from_positions({{0, 0}, {1, 0}}, 0.15);
  auto st = geometry::compute_stats(two);
  CHECK(*st.d_ave == doctest::Approx(1.0));
  CHECK(st.aperture_diameter == doctest::Approx(1.0));
  CHECK(st.virtual_aperture == 0.0);

  auto sq = geometry::from_positions({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 0.15);
  st = geometry::compute_stats(sq);
  CHECK(*st.d_ave == doctest::Approx(1.0));
  CHECK(st.aperture_diameter == doctest::Approx(std::sqrt(2.0)));
  CHECK(st.virtual_aperture == doctest::Approx(1.0));
}

TEST_CASE("invariants over every generator") {
  std::vector<GeometrySpec> specs = {oracle::lattice(8, 0.5), oracle::lattice(6, 10.0), oracle::elsa(200)};
  GeometrySpec sf;
  sf.kind = Kind::Sunflower;
  sf.n_platforms = 150;
  sf.radial_scale_m = 0.5;
  specs.push_back(sf);
  for (const auto& s : specs) {
    const auto g = geometry::generate(s);
    const Vec2 c = centroid(g);
    CHECK(std::abs(c.x) < 1e-9);
    CHECK(std::abs(c.y) < 1e-9);
    CHECK(oracle::min_pair_distance(g.positions) >= s.min_spacing_m * (1 - 1e-9));
    CHECK(static_cast<int>(g.size()) == s.total_elements());
    const auto st = geometry::compute_stats(g);
    CHECK(*st.d_ave <= st.aperture_diameter);
    CHECK(st.aperture_diameter == doctest::Approx(oracle::max_pair_distance(g.positions)).epsilon(1e-12));
    CHECK(st.virtual_aperture <= oracle::kPi * std::pow(st.aperture_diameter / 2, 2));
    // Determinism: bitwise identical on regeneration.
    const auto again = geometry::generate(s);
    for (std::size_t n = 0; n < g.size(); ++n) {
      CHECK(g.positions[n].x == again.positions[n].x);
      CHECK(g.positions[n].y == again.positions[n].y);
    }
  }
}

TEST_CASE("scale equivariance of the statistics") {
  auto check = [](GeometrySpec s, double GeometrySpec::*field) {
    const auto a = geometry::compute_stats(geometry::generate(s));
    s.*field *= 3.0;
    s.min_spacing_m *= 3.0;
    const auto b = geometry::compute_stats(geometry::generate(s));
    CHECK(*b.d_ave == doctest::Approx(3.0 * *a.d_ave).epsilon(1e-12));
    CHECK(b.aperture_diameter == doctest::Approx(3.0 * a.aperture_diameter).epsilon(1e-12));
    CHECK(b.virtual_aperture == doctest::Approx(9.0 * a.virtual_aperture).epsilon(1e-12));
  };
  check(oracle::lattice(7, 0.5), &GeometrySpec::spacing_m);
  GeometrySpec sf;
  sf.kind = Kind::Sunflower;
  sf.n_platforms = 120;
  sf.radial_scale_m = 0.4;
  check(sf, &GeometrySpec::radial_scale_m);
}

TEST_CASE("parameter validation") {
  GeometrySpec s;
  s.n_platforms = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.growth_rate = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.n_arms = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(geometry::kind_from_string("hexagonal"), ConfigError);
  CHECK(geometry::kind_from_string("sparse-square") == Kind::SparseSquare);
}

TEST_CASE("geometry CSV layout") {
  const auto g = geometry::generate(oracle::lattice(2, 0.5));
  const auto csv = geometry::to_csv(g);
  CHECK(csv.rfind("index,platform,arm,x_m,y_m\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
