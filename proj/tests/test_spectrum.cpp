#include <doctest.h>

#include "necklace/error.hpp"
#include "necklace/spectrum.hpp"
#include "support.hpp"

using namespace testing;

namespace {

NecklaceParams sample_cell() {
  Eigen::Matrix3d a;
  a << 1, 0.5, 1, 0.5, 2, 2, 1, 2, 0.3;
  return {1.2, 1.0, 0.5, VertexCondition::from_matrix(a)};
}

double n_at(const NecklaceParams& p, double s) {
  const auto h = loop_homogeneous(p, s);
  return h.w() / (2 * h.y());
}

}  // namespace

TEST_CASE("equal-arm family is one band with no poles") {
  const auto p = equal_arm(0.8, 0.45, 1.1);
  const auto bs = scan_bands(p, {0.1, 10.0}, 2000);
  CHECK(bs.bands.size() == 1);
  CHECK(bs.gaps.empty());
  CHECK(bs.poles.empty());
  CHECK(locate_poles(p, {0.1, 10.0}).empty());
}

TEST_CASE("decoupled loop is all pole") {
  const NecklaceParams p{1.2, 0.9, 0.5, VertexCondition::from_blocks(Eigen::Matrix2d::Identity(), {0, 0}, 1.0)};
  const auto bs = scan_bands(p, {0.5, 6.0}, 200);
  CHECK(bs.degenerate_loop);
  CHECK(bs.bands.empty());
}

TEST_CASE("single coupled arch: n reduces to 1 / sin(sigma l1)") {
  const NecklaceParams p{1.3, pi, 0.4, VertexCondition::from_blocks(Eigen::Matrix2d::Zero(), {1, 0}, 0)};
  for (double s = 0.11; s < 8; s += 0.0371) {
    if (std::abs(std::sin(s * p.l1)) < 1e-3 || std::abs(std::sin(s * p.l2)) < 1e-3) continue;
    CHECK(n_at(p, s) == doctest::Approx(1.0 / std::sin(s * p.l1)).epsilon(1e-10));
  }
  // 1 / sin has no zeros; the removable zeros of the homogeneous form are not poles
  CHECK(locate_poles(p, {0.1, 8.0}).empty());
}

TEST_CASE("refined edges and poles") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = trial == 0 ? sample_cell() : random_params(rng);
    const auto bs = scan_bands(p, {0.2, 8.0}, 3000);
    for (const auto& b : bs.bands) {
      for (double e : {b.lo, b.hi}) {
        if (e == bs.window.lo || e == bs.window.hi) continue;
        const auto f = hill_discriminant(p, e);
        REQUIRE(f.has_value());
        CHECK(std::abs(std::abs(*f) - 2.0) < 1e-8);
      }
    }
    for (const auto& pole : locate_poles(p, {0.2, 8.0})) {
      CHECK(std::abs(pole.n_value) < 1e-10);
      CHECK(pole.quartic_residual < 1e-8);
      for (double h : {-1e-6, 1e-6}) {
        const auto f = hill_discriminant(p, pole.sigma + h);
        if (f) CHECK(std::abs(*f) > 1e2);
      }
    }
  }
}

TEST_CASE("scan agrees with a ten times finer rescan") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = trial == 0 ? sample_cell() : random_params(rng);
    const auto coarse = scan_bands(p, {0.2, 8.0}, 2000);
    const auto fine = scan_bands(p, {0.2, 8.0}, 20000);
    REQUIRE(coarse.advisories.empty());
    REQUIRE(coarse.bands.size() == fine.bands.size());
    for (std::size_t i = 0; i < coarse.bands.size(); ++i) {
      CHECK(std::abs(coarse.bands[i].lo - fine.bands[i].lo) < 1e-9);
      CHECK(std::abs(coarse.bands[i].hi - fine.bands[i].hi) < 1e-9);
    }
    CHECK(coarse.poles.size() == fine.poles.size());
  }
}

TEST_CASE("hidden sign changes trigger subdivision") {
  const auto p = sample_cell();
  const auto bs = scan_bands(p, {0.2, 8.0}, 12);
  CHECK_FALSE(bs.advisories.empty());
  const auto ref = scan_bands(p, {0.2, 8.0}, 4000);
  CHECK(ref.advisories.empty());
  REQUIRE_FALSE(bs.poles.empty());
  for (double pole : bs.poles) {
    const bool known = std::any_of(ref.poles.begin(), ref.poles.end(), [&](double q) { return std::abs(q - pole) < 1e-9; });
    CHECK(known);
  }
}

TEST_CASE("dispersion relation on the equal-arm family") {
  const double l = 0.8, l3 = 0.45;
  const auto p = equal_arm(l, l3, 0.2);
  const Interval band{0.1, 10.0};
  const auto pts = dispersion_k(p, band, 2000, l + l3);
  int with_vg = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto f = hill_discriminant(p, pts[i].sigma);
    REQUIRE(f.has_value());
    CHECK(std::abs(std::cos(pts[i].k) - *f / 2) < 1e-10);
    if (i > 0) CHECK(std::abs((pts[i].k - pts[i - 1].k) / (pts[i].sigma - pts[i - 1].sigma)) ==
                     doctest::Approx(l + l3).epsilon(1e-6));
    if (pts[i].vg) {
      ++with_vg;
      CHECK(std::abs(std::abs(*pts[i].vg) - 1.0) < 1e-6);
    }
  }
  CHECK(with_vg > 1900);
  CHECK(std::abs(pts.front().k - pi + band.lo * (l + l3)) < 1e-10);
}

TEST_CASE("k is monotone and consistent in every band") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = trial == 0 ? sample_cell() : random_params(rng);
    const auto bs = scan_bands(p, {0.2, 8.0}, 2000);
    for (const auto& b : bs.bands) {
      const auto pts = dispersion_k(p, b, 200);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto f = hill_discriminant(p, pts[i].sigma);
        REQUIRE(f.has_value());
        CHECK(std::abs(std::cos(pts[i].k) - *f / 2) < 1e-10);
        if (i > 0) {
          CHECK(pts[i].k != pts[i - 1].k);
          if (i > 1) CHECK((pts[i].k > pts[i - 1].k) == (pts[i - 1].k > pts[i - 2].k));
          CHECK(std::abs(pts[i].k - pts[i - 1].k) < pi / 2);
        }
      }
      // arccos turns the edge residual of F into a square-root offset of k
      const double k0 = pts.front().k;
      const double slack = 2.0 * std::sqrt(std::abs(1.0 - std::abs(*hill_discriminant(p, b.lo)) / 2)) + 1e-12;
      CHECK((std::abs(k0) <= slack || std::abs(k0 - pi) <= slack || b.lo == bs.window.lo));
    }
  }
}

TEST_CASE("zero of F gives quarter-period quasimomentum") {
  const auto p = sample_cell();
  const auto bs = scan_bands(p, {0.2, 8.0}, 2000);
  const auto& b = bs.bands.at(1);
  auto f = [&](double s) { return *hill_discriminant(p, s); };
  const double s0 = bisect_root(f, b.lo + 1e-9, b.hi - 1e-9);
  const auto pts = dispersion_k(p, {b.lo, s0}, 50);
  CHECK(std::abs(std::fmod(pts.back().k, pi) - pi / 2) < 1e-7);
}

TEST_CASE("Richardson error estimate bounds the step-halving change") {
  const auto p = sample_cell();
  const auto bs = scan_bands(p, {0.2, 8.0}, 2000);
  for (const auto& b : bs.bands) {
    const double s = b.lo + 0.37 * b.width();
    const auto g1 = group_velocity(p, s, 1.5, b);
    const auto g2 = group_velocity(p, s, 1.5, b, g1.step / 2);
    CHECK(std::abs(g1.vg - g2.vg) <= 2.0 * g1.error + 1e-9 * std::abs(g1.vg));
  }
  CHECK_THROWS_AS(group_velocity(p, bs.bands[0].hi - 1e-9, 1.5, bs.bands[0]), Error);
}

TEST_CASE("enclosing band matches the scan") {
  const auto p = sample_cell();
  const auto bs = scan_bands(p, {0.2, 8.0}, 2000);
  for (const auto& b : bs.bands) {
    if (b.lo == bs.window.lo || b.hi == bs.window.hi) continue;
    const auto e = enclosing_band(p, b.mid(), b.width() / 100);
    CHECK(std::abs(e.lo - b.lo) < 1e-9);
    CHECK(std::abs(e.hi - b.hi) < 1e-9);
  }
  CHECK_THROWS_AS(enclosing_band(p, bs.gaps.at(1).mid(), 1e-3), Error);
}

TEST_CASE("tabulated vertex condition feeds the scan") {
  const auto base = sample_cell();
  const WaveContext wave{0.1, 1.0, 400.0};
  const double e_lo = wave.epsilon * omega_from_sigma(0.1, wave);
  const double e_hi = wave.epsilon * omega_from_sigma(9.0, wave);
  const VertexConditionTable flat({{e_lo, base.vc}, {e_hi, base.vc}});
  const auto tab = scan_bands(tabulated_cell(base.l1, base.l2, base.l3, flat, wave), {0.2, 8.0}, 2000);
  const auto ref = scan_bands(base, {0.2, 8.0}, 2000);
  REQUIRE(tab.bands.size() == ref.bands.size());
  for (std::size_t i = 0; i < ref.bands.size(); ++i) CHECK(std::abs(tab.bands[i].lo - ref.bands[i].lo) < 1e-12);
}
