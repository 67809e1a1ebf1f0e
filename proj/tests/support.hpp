#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "necklace/graph_model.hpp"
#include "necklace/monodromy.hpp"

namespace testing {

using namespace necklace;
using std::numbers::pi;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::Matrix3d random_symmetric(std::mt19937_64& rng, double scale = 2.0) {
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) a(i, j) = a(j, i) = uniform(rng, -scale, scale);
  return a;
}

inline NecklaceParams random_params(std::mt19937_64& rng) {
  NecklaceParams p;
  p.l1 = uniform(rng, 0.3, 2.0);
  p.l2 = uniform(rng, 0.2, p.l1);
  p.l3 = uniform(rng, 0.1, 2.0);
  p.vc = VertexCondition::from_matrix(random_symmetric(rng));
  return p;
}

// l1 = l2 = l, B = 0, c = 0, |delta| = 1.
inline NecklaceParams equal_arm(double l, double l3, double theta) {
  return {l, l, l3, VertexCondition::from_blocks(Eigen::Matrix2d::Zero(), {std::cos(theta), std::sin(theta)}, 0.0)};
}

// Haar unitary via QR of a complex Gaussian matrix with the phase fix.
inline Eigen::Matrix3cd haar_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Matrix3cd z;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) z(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<Eigen::Matrix3cd> qr(z);
  Eigen::Matrix3cd q = qr.householderQ();
  Eigen::Matrix3cd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < 3; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

// Power of the monodromy by repeated multiplication.
inline Eigen::Matrix2d naive_power(const Eigen::Matrix2d& m, int n) {
  Eigen::Matrix2d out = Eigen::Matrix2d::Identity();
  for (int i = 0; i < n; ++i) out = out * m;
  return out;
}

// A real unimodular transfer matrix W of the whole chain gives
// |t|^2 = 4 / (||W||^2 + 2), rotations at the ends leaving it unchanged.
inline double reflection_from_transfer(const Eigen::Matrix2d& w) {
  const double hs = w.squaredNorm();
  return std::sqrt(std::max(0.0, (hs - 2.0) / (hs + 2.0)));
}

inline bool in_band(const NecklaceParams& p, double s, double margin = 0.0) {
  const auto f = hill_discriminant(p, s);
  return f && std::abs(*f) < 2.0 - margin;
}

}  // namespace testing
