#include "necklace/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "necklace/error.hpp"

namespace necklace {

namespace {

Eigen::Matrix2d adjugate(const Eigen::Matrix2d& a) {
  Eigen::Matrix2d adj;
  adj << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return adj;
}

[[noreturn]] void throw_loop_singular(double sigma, const char* which, double det) {
  std::ostringstream os;
  os << which << " is singular at sigma = " << sigma << " (det = " << det << ")";
  throw Error(ErrorCode::LoopSingular, os.str());
}

bool det_negligible(const Eigen::Matrix2d& a, double det) {
  const double scale = std::max(1.0, a.squaredNorm());
  return std::abs(det) < kLoopSingularTol * scale;
}

}  // namespace

TrigMatrices trig_matrices(const NecklaceParams& params, double sigma) {
  const double s1 = std::sin(sigma * params.l1), s2 = std::sin(sigma * params.l2);
  const double c1 = std::cos(sigma * params.l1), c2 = std::cos(sigma * params.l2);
  TrigMatrices tm;
  tm.s << s1, 0.0, 0.0, s2;
  tm.c << c1, 0.0, 0.0, c2;
  tm.p = tm.c + tm.s * params.vc.b();
  return tm;
}

LoopScalars loop_scalars(const NecklaceParams& params, double sigma) {
  const auto tm = trig_matrices(params, sigma);
  const Eigen::Matrix2d k = Eigen::Matrix2d::Identity() - tm.p * tm.p;
  const double det = k(0, 0) * k(1, 1) - k(0, 1) * k(1, 0);
  if (det_negligible(k, det)) throw_loop_singular(sigma, "I - P^2", det);
  const Eigen::Matrix2d k_inv = adjugate(k) / det;
  const Eigen::Vector2d delta = params.vc.delta();
  const Eigen::Vector2d s_delta = tm.s * delta;
  LoopScalars out;
  out.n = delta.dot(k_inv * s_delta);
  out.m = params.vc.c() + delta.dot(k_inv * (tm.p * s_delta));
  return out;
}

LoopHomogeneous loop_homogeneous(const NecklaceParams& params, double sigma) {
  const auto tm = trig_matrices(params, sigma);
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d minus = id - tm.p;
  const Eigen::Matrix2d plus = id + tm.p;
  const Eigen::Vector2d delta = params.vc.delta();
  const Eigen::Vector2d s_delta = tm.s * delta;
  const double c = params.vc.c();

  LoopHomogeneous h;
  h.d_minus = minus.determinant();
  h.d_plus = plus.determinant();
  h.p_num = c * h.d_minus + delta.dot(adjugate(minus) * s_delta);
  h.q_num = c * h.d_plus - delta.dot(adjugate(plus) * s_delta);
  return h;
}

LoopScalars loop_scalars_factored(const NecklaceParams& params, double sigma) {
  const auto h = loop_homogeneous(params, sigma);
  const auto tm = trig_matrices(params, sigma);
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  if (det_negligible(id - tm.p, h.d_minus)) throw_loop_singular(sigma, "I - P", h.d_minus);
  if (det_negligible(id + tm.p, h.d_plus)) throw_loop_singular(sigma, "I + P", h.d_plus);
  const double p = h.p_num / h.d_minus;
  const double q = h.q_num / h.d_plus;
  return {0.5 * (p + q), 0.5 * (p - q)};
}

bool LoopHomogeneous::is_pole() const {
  // |n| < tol max(1, |m|) with n = w / 2y and m = x / 2y.
  const double scale = std::max(std::abs(2.0 * y()), std::abs(x()));
  return std::abs(w()) <= kPoleTol * scale;
}

double LoopHomogeneous::hs_excess() const {
  const double r = 2.0 * (y() + z()) / w();
  return r * r;
}

Eigen::Matrix2d LoopHomogeneous::transfer() const {
  const double inv = -1.0 / w();
  Eigen::Matrix2d t;
  t << inv * x(), inv * 2.0 * y(), inv * 2.0 * z(), inv * x();
  return t;
}

LoopTransfer loop_transfer(const NecklaceParams& params, double sigma) {
  const auto h = loop_homogeneous(params, sigma);
  if (h.is_pole()) {
    std::ostringstream os;
    os << "loop transfer has a pole (n = 0) at sigma = " << sigma;
    throw Error(ErrorCode::TransferPole, os.str());
  }
  LoopTransfer out;
  out.m = h.x() / (2.0 * h.y());
  out.n = h.w() / (2.0 * h.y());
  out.t_mat = h.transfer();
  return out;
}

Eigen::Matrix2d segment_rotation(double sigma, double length) {
  const double c = std::cos(sigma * length), s = std::sin(sigma * length);
  Eigen::Matrix2d r;
  r << c, s, -s, c;
  return r;
}

Monodromy monodromy(const NecklaceParams& params, double sigma) {
  const auto lt = loop_transfer(params, sigma);
  Monodromy out;
  out.sigma = sigma;
  out.m_mat = segment_rotation(sigma, params.l3) * lt.t_mat;
  out.f = out.m_mat.trace();
  return out;
}

bool HillParts::is_pole() const { return std::abs(denominator) <= kPoleTol * pole_scale; }

bool HillParts::in_band() const {
  return !is_pole() && std::abs(numerator) < 2.0 * std::abs(denominator);
}

HillParts hill_parts(const NecklaceParams& params, double sigma) {
  const auto h = loop_homogeneous(params, sigma);
  const double c3 = std::cos(sigma * params.l3), s3 = std::sin(sigma * params.l3);
  HillParts out;
  // tr(R T) = -(2/w) [x cos + (z - y) sin]
  out.numerator = -2.0 * (h.x() * c3 + (h.z() - h.y()) * s3);
  out.denominator = h.w();
  out.pole_scale = std::max(std::abs(2.0 * h.y()), std::abs(h.x()));
  return out;
}

std::optional<double> hill_discriminant(const NecklaceParams& params, double sigma) {
  const auto hp = hill_parts(params, sigma);
  if (hp.is_pole()) return std::nullopt;
  return hp.value();
}

double chebyshev_u(int k, double x) {
  if (k < -1) throw Error(ErrorCode::InvalidInput, "chebyshev_u needs k >= -1");
  if (k == -1) return 0.0;
  double prev = 0.0, cur = 1.0;
  for (int i = 0; i < k; ++i) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double hs_norm2(const Eigen::Matrix2d& m) { return m.squaredNorm(); }

}  // namespace necklace
