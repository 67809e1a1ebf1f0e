#pragma once

// Choice of edge lengths that puts a narrow band at a target wavenumber
// sigma0 with F(sigma0) = 0, an orthogonal monodromy at sigma0 (zero
// reflection of every truncation) and a pole of F within O(eps^2).

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "necklace/graph_model.hpp"
#include "necklace/spectrum.hpp"

namespace necklace {

struct DesignRequest {
  VertexCondition vc;
  double sigma0 = 1.0;
  double eps = 0.05;
  // Arctangent branches (m1, m2) for l1, l2; default: smallest positive lengths.
  std::optional<std::array<int, 2>> branch_offsets;
  int n_cells = 10;  // truncation used for the oracle reflection diagnostic
  std::optional<double> period_length;
};

// Transparency condition m^2 - n^2 + 1 = 0 written in x = tan(sigma l1/2),
// y = tan(sigma l2/2): rational form and the cleared-denominator polynomial.
double transparency_rational(const VertexCondition& vc, double x, double y);
double transparency_polynomial(const VertexCondition& vc, double x, double y);

struct XYSolution {
  double x = 0.0;
  double y = 0.0;
  double y0 = 0.0;      // a22 - a12 d2/d1
  double seed = 0.0;    // y0 - (d2/d1)^2 eps
  double gamma = 0.0;   // Richardson estimate of the eps^2 coefficient
  double gamma_raw = 0.0;  // (y - seed) / eps^2 at this eps
  double residual = 0.0;   // |transparency_rational(x, y)|
};

XYSolution design_xy(const DesignRequest& req);

struct ArchLengths {
  double l1 = 0.0;
  double l2 = 0.0;
  int m1 = 0;
  int m2 = 0;
  bool swapped = false;  // true when the x arch became arch 2 to keep l2 <= l1
};

// l = (2/sigma0)(atan(t) + pi m); without a branch, the smallest positive l.
double arch_length(double tan_half, double sigma0, std::optional<int> branch = std::nullopt,
                   int* used_branch = nullptr);
ArchLengths lengths_from_xy(double x, double y, double sigma0,
                            std::optional<std::array<int, 2>> branch_offsets = std::nullopt);

struct SegmentChoice {
  double l3 = 0.0;
  bool indeterminate = false;  // T traceless with t12 = t21: every l3 works
};

// Smallest positive l3 with tr(R(sigma0 l3) T) = 0.
SegmentChoice choose_l3(const Eigen::Matrix2d& t, double sigma0);
// Same from the loop of params at sigma0 (params.l3 ignored); post-checks F.
SegmentChoice choose_l3(const NecklaceParams& params, double sigma0);

struct DesignDiagnostics {
  double f_sigma0 = 0.0;
  double hs_excess = 0.0;              // ||M||^2 - 2 at sigma0
  double transparency_residual = 0.0;  // m^2 - n^2 + 1 at sigma0
  double n_sigma0 = 0.0;
  double pole_sigma = 0.0;
  double pole_distance = 0.0;
  int pole_side = 0;  // +1 right of sigma0, -1 left
  Interval band;      // band containing sigma0
  Interval slow;      // between sigma0 and |F| = 1 towards the pole
  double min_vg = 0.0;
  double oracle_r = 0.0;
  double oracle_t = 0.0;
  int n_cells = 0;
};

struct DesignResult {
  DesignRequest request;
  XYSolution xy;
  ArchLengths arches;
  NecklaceParams params;  // vc relabeled when arches.swapped
  bool segment_indeterminate = false;
  DesignDiagnostics diagnostics;
};

DesignDiagnostics compute_diagnostics(const NecklaceParams& params, double sigma0, int n_cells,
                                      std::optional<double> period_length);

DesignResult design(const DesignRequest& req);

struct VerificationRow {
  std::string name;
  double stored = 0.0;
  double recomputed = 0.0;
  bool compared = true;
};

// Recomputes the diagnostics of a design and throws VerificationMismatch when
// any compared value moved by more than 1e-8 or the transparency/trace
// conditions no longer hold. The oracle reflection is compared only when
// n_cells matches the design's.
std::vector<VerificationRow> verify_design(const DesignResult& result, int n_cells);

struct ScalingStudy {
  std::vector<double> eps;
  std::vector<DesignResult> designs;
  double slope_pole_distance = 0.0;
  double slope_min_vg = 0.0;
  double slope_oracle_r = 0.0;
};

// Least-squares slope of log(values) against log(abscissa).
double loglog_slope(const std::vector<double>& abscissa, const std::vector<double>& values);

ScalingStudy scaling_study(const DesignRequest& base, const std::vector<double>& eps_values, int jobs = 1);

}  // namespace necklace
