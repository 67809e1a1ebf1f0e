#pragma once

// Transfer of Cauchy data (psi, psi'/sigma) across one loop and one period
// of the necklace, and the Hill discriminant F = tr M.

#include <Eigen/Dense>

#include <optional>

#include "necklace/graph_model.hpp"

namespace necklace {

// |n| < kPoleTol * max(1, |m|) marks a pole of the loop transfer.
inline constexpr double kPoleTol = 1e-9;
// |det(I - P^2)| below this fraction of ||I - P^2||^2 is treated as singular.
inline constexpr double kLoopSingularTol = 1e-13;

struct TrigMatrices {
  Eigen::Matrix2d s;  // diag(sin sigma l1, sin sigma l2)
  Eigen::Matrix2d c;  // diag(cos sigma l1, cos sigma l2)
  Eigen::Matrix2d p;  // C + S B
};

TrigMatrices trig_matrices(const NecklaceParams& params, double sigma);

struct LoopScalars {
  double m = 0.0;
  double n = 0.0;
};

// m = c + <delta, (I-P^2)^-1 P S delta>, n = <delta, (I-P^2)^-1 S delta>,
// with the 2x2 inverse written out. Throws LoopSingular when I - P^2 is
// numerically singular.
LoopScalars loop_scalars(const NecklaceParams& params, double sigma);

// Same scalars through (I-P^2)^-1 = [(I-P)^-1 + (I+P)^-1]/2, i.e. from
// m + n = c + <delta, (I-P)^-1 S delta> and m - n = c - <delta, (I+P)^-1 S delta>.
// Throws LoopSingular when I - P or I + P is singular.
LoopScalars loop_scalars_factored(const NecklaceParams& params, double sigma);

// Cleared-denominator form of the loop.  With d_minus = det(I-P),
// d_plus = det(I+P), p = m+n = p_num/d_minus and q = m-n = q_num/d_plus:
//
//   T = -(1/w) [[x, 2y], [2z, x]],   w = p_num d_plus - q_num d_minus,
//   x = p_num d_plus + q_num d_minus, y = d_minus d_plus, z = p_num q_num.
//
// Every entry is a trigonometric polynomial in sigma, so T has poles only
// where w = 2 n d_minus d_plus vanishes, i.e. at zeros of n. Points where
// I -/+ P are singular (poles of m and n) are regular here.
struct LoopHomogeneous {
  double p_num = 0.0;
  double q_num = 0.0;
  double d_minus = 0.0;
  double d_plus = 0.0;

  double w() const { return p_num * d_plus - q_num * d_minus; }
  double x() const { return p_num * d_plus + q_num * d_minus; }
  double y() const { return d_minus * d_plus; }
  double z() const { return p_num * q_num; }

  bool is_pole() const;
  Eigen::Matrix2d transfer() const;  // undefined at a pole
  // ||T||^2 - 2 = 4 (y + z)^2 / w^2, free of the cancellation in the direct form
  double hs_excess() const;
};

LoopHomogeneous loop_homogeneous(const NecklaceParams& params, double sigma);

struct LoopTransfer {
  double m = 0.0;  // may be infinite where I -/+ P is singular
  double n = 0.0;
  Eigen::Matrix2d t_mat;
};

// Throws TransferPole when |n| < kPoleTol * max(1, |m|).
LoopTransfer loop_transfer(const NecklaceParams& params, double sigma);

// Transfer along a free segment of length l in (psi, psi'/sigma) coordinates.
Eigen::Matrix2d segment_rotation(double sigma, double length);

struct Monodromy {
  Eigen::Matrix2d m_mat;
  double f = 0.0;
  double sigma = 0.0;
};

// M = R(sigma l3) T_sigma. Propagates TransferPole.
Monodromy monodromy(const NecklaceParams& params, double sigma);

// Hill discriminant as numerator/denominator of entire functions:
// F = numerator / denominator, denominator = w of the loop.
struct HillParts {
  double numerator = 0.0;
  double denominator = 0.0;
  double pole_scale = 0.0;  // scale against which |denominator| is judged

  bool is_pole() const;
  double value() const { return numerator / denominator; }
  // Entire functions whose zeros are the band edges F = +2 and F = -2.
  double upper_edge() const { return numerator - 2.0 * denominator; }
  double lower_edge() const { return numerator + 2.0 * denominator; }
  bool in_band() const;
};

HillParts hill_parts(const NecklaceParams& params, double sigma);

// F(sigma); std::nullopt marks a pole (F is meromorphic, poles are values).
std::optional<double> hill_discriminant(const NecklaceParams& params, double sigma);

// Chebyshev polynomial of the second kind U_k(x), k >= -1 (U_{-1} = 0).
double chebyshev_u(int k, double x);

double hs_norm2(const Eigen::Matrix2d& m);

}  // namespace necklace
