#pragma once

// Band-gap structure of the periodic necklace on the sigma axis, the poles
// of the Hill discriminant, the Bloch phase k(sigma) and the group velocity.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "necklace/graph_model.hpp"
#include "necklace/monodromy.hpp"

namespace necklace {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double s) const { return s >= lo && s <= hi; }
};

// Cell parameters as a function of sigma. Constant for the usual case; the
// tabulated frequency-dependent vertex condition plugs in here.
using CellModel = std::function<NecklaceParams(double sigma)>;

CellModel constant_cell(const NecklaceParams& params);
CellModel tabulated_cell(double l1, double l2, double l3, VertexConditionTable table, WaveContext wave);

struct BandStructure {
  Interval window;
  std::vector<Interval> bands;
  std::vector<Interval> gaps;
  std::vector<double> poles;
  // Set when n vanishes identically (delta = 0): every sigma is a pole.
  bool degenerate_loop = false;
  // GridTooCoarse notices: cells where a hidden pair of sign changes was
  // found by midpoint probing and the cell had to be subdivided.
  std::vector<std::string> advisories;

  // Index into bands of the band containing sigma, if any.
  std::optional<std::size_t> band_index(double sigma) const;
};

struct ScanOptions {
  int max_subdivision = 16;
  // Extra samples between consecutive poles (pole-zero-pole search).
  int samples_between_poles = 16;
  // Gaps narrower than this with no pole inside are tangential touches.
  double touch_merge_width = 1e-9;
};

BandStructure scan_bands(const NecklaceParams& params, Interval window, int grid,
                         const ScanOptions& opts = {});
BandStructure scan_bands(const CellModel& cell, Interval window, int grid, const ScanOptions& opts = {});

struct Pole {
  double sigma = 0.0;
  double n_value = 0.0;           // n at the refined root
  double quartic_residual = 0.0;  // |2n| evaluated in the (x, y) tangent form
};

std::vector<Pole> locate_poles(const NecklaceParams& params, Interval window, int grid = 4096);

// 2n written through x = tan(sigma l1 / 2), y = tan(sigma l2 / 2).
double pole_quartic(const VertexCondition& vc, double x, double y);

struct DispersionPoint {
  double sigma = 0.0;
  double k = 0.0;
  std::optional<double> vg;  // absent within the differentiation margin of an edge
};

// Default period length for V_g: segment plus the shorter arch.
double default_period_length(const NecklaceParams& params);

// k = arccos(F/2), continued through interior touch points into a monotone
// branch; anchored in [0, pi] at the band's left end. Throws OutsideBand if
// |F| >= 2 at an interior sample.
std::vector<DispersionPoint> dispersion_k(const NecklaceParams& params, Interval band, int grid,
                                          std::optional<double> period_length = std::nullopt);

struct GroupVelocity {
  double vg = 0.0;
  double error = 0.0;   // |Richardson - finer central difference| propagated to vg
  double k_prime = 0.0;
  double step = 0.0;
};

// vg = L / k'(sigma) with k' = -F' / (2 sin k), F' by Richardson-extrapolated
// central differences. Throws BandEdge when the stencil leaves the band or
// sin k vanishes at sigma.
GroupVelocity group_velocity(const NecklaceParams& params, double sigma, double period_length,
                             Interval band, std::optional<double> step = std::nullopt);

// Band containing sigma, found by marching outward with the given step and
// bisecting on the edge functions. Throws OutsideBand if sigma is in a gap.
Interval enclosing_band(const NecklaceParams& params, double sigma, double step,
                        std::optional<Interval> limit = std::nullopt);

// Bisect a sign change of f on [a, b] down to adjacent doubles.
double bisect_root(const std::function<double(double)>& f, double a, double b);

}  // namespace necklace
