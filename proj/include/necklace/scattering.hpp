#pragma once

// Reflection by the N-cell truncated necklace: the closed-form monodromy
// expression and a direct solve of the graph scattering problem.
//
// Truncation: N loops joined by N-1 segments; the two leads are attached as
// the straight-edge component of the first and last degree-3 vertex, so
// every vertex carries the same 3x3 condition A.

#include <Eigen/Dense>

#include <complex>
#include <optional>

#include "necklace/graph_model.hpp"

namespace necklace {

struct TruncatedNecklace {
  NecklaceParams params;
  int n_cells = 1;
};

struct ReflectionFormula {
  double r = 0.0;                       // |sin Nk / sin k| (||M||^2 - 2)^(1/2)
  std::optional<double> midband_bound;  // (2/sqrt 3)(||M||^2 - 2)^(1/2), when |F| < 1
  double k = 0.0;
  double hs_excess = 0.0;  // ||M||^2 - 2
};

// Throws OutsideBand when |F| >= 2, BandEdge when |sin k| is negligible,
// TransferPole at a pole.
ReflectionFormula reflection_formula(const TruncatedNecklace& tn, double sigma);

enum class Incidence { Left, Right };

struct ScatterResult {
  std::complex<double> r;
  std::complex<double> t;
  double unitarity_defect = 0.0;  // | |r|^2 + |t|^2 - 1 |
};

// Dense 6N x 6N complex solve. Throws SingularSystem when the edge/lead
// system is numerically singular (bound states embedded in the continuum).
ScatterResult solve_scattering_oracle(const TruncatedNecklace& tn, double sigma,
                                      Incidence incidence = Incidence::Left);

struct TransferPower {
  Eigen::Matrix2d by_squaring;
  Eigen::Matrix2d by_chebyshev;
  double discrepancy = 0.0;  // ||difference|| / max(1, ||by_squaring||)
};

// M^N by binary exponentiation and by U_{N-1}(F/2) M - U_{N-2}(F/2) I.
TransferPower transfer_power(const NecklaceParams& params, double sigma, int n_cells);

}  // namespace necklace
