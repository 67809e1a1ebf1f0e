#include "necklace/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "necklace/error.hpp"

namespace necklace {

SymmetryReport validate_vertex_condition(const Eigen::Matrix3d& a, double tol) {
  SymmetryReport rep;
  int row = 0, col = 1;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double d = std::abs(a(i, j) - a(j, i));
      if (d > rep.max_asymmetry) {
        rep.max_asymmetry = d;
        row = i;
        col = j;
      }
    }
  }
  const bool finite = a.allFinite();
  rep.accepted = finite && rep.max_asymmetry <= tol;
  if (!rep.accepted) {
    rep.row = row;
    rep.col = col;
  }
  return rep;
}

VertexCondition VertexCondition::from_matrix(const Eigen::Matrix3d& a, double tol) {
  const auto rep = validate_vertex_condition(a, tol);
  if (!rep.accepted) {
    std::ostringstream os;
    if (!a.allFinite()) {
      os << "vertex condition has non-finite entries";
    } else {
      os << "vertex condition is not symmetric at (" << rep.row + 1 << "," << rep.col + 1
         << "): |a_ij - a_ji| = " << rep.max_asymmetry;
    }
    throw Error(ErrorCode::AsymmetricCondition, os.str());
  }
  return VertexCondition(a);
}

VertexCondition VertexCondition::from_blocks(const Eigen::Matrix2d& b, const Eigen::Vector2d& delta,
                                             double c) {
  Eigen::Matrix3d a;
  a.topLeftCorner<2, 2>() = b;
  a.topRightCorner<2, 1>() = delta;
  a.bottomLeftCorner<1, 2>() = delta.transpose();
  a(2, 2) = c;
  return from_matrix(a);
}

VertexCondition VertexCondition::relabeled_arches() const {
  Eigen::PermutationMatrix<3> p;
  p.indices() << 1, 0, 2;
  return VertexCondition(p * a_ * p.transpose());
}

double ScatteringMatrixJ::unitarity_defect() const {
  return (t * t.adjoint() - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff();
}

double ScatteringMatrixJ::asymmetry() const { return (t - t.transpose()).cwiseAbs().maxCoeff(); }

ConversionResult vertex_condition_from_scattering(const ScatteringMatrixJ& t) {
  if (!t.t.allFinite() || t.unitarity_defect() > kUnitarityTol || t.asymmetry() > kUnitarityTol) {
    std::ostringstream os;
    os << "scattering matrix fails unitary/symmetric check (unitarity defect "
       << t.unitarity_defect() << ", asymmetry " << t.asymmetry() << ")";
    throw Error(ErrorCode::NonUnitaryInput, os.str());
  }
  const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
  const Eigen::Matrix3cd plus = id + t.t;
  const double det = std::abs(plus.determinant());
  if (det < kSingularConversionTol) {
    std::ostringstream os;
    os << "|det(I + T)| = " << det << " below " << kSingularConversionTol;
    throw Error(ErrorCode::SingularConversion, os.str());
  }
  const std::complex<double> minus_i(0.0, -1.0);
  const Eigen::Matrix3cd a = minus_i * plus.partialPivLu().solve(id - t.t);

  ConversionResult out;
  out.imag_residue = a.imag().cwiseAbs().maxCoeff();
  out.det_i_plus_t = det;
  const Eigen::Matrix3d re = a.real();
  out.vc = VertexCondition::from_matrix(0.5 * (re + re.transpose()), kComputedSymmetryTol);
  return out;
}

ScatteringMatrixJ scattering_from_vertex_condition(const VertexCondition& vc) {
  const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
  const std::complex<double> i(0.0, 1.0);
  const Eigen::Matrix3cd ia = i * vc.matrix().cast<std::complex<double>>();
  // (I - iA) and (I + iA)^-1 commute, so the order of the product is free.
  ScatteringMatrixJ out;
  out.t = (id + ia).partialPivLu().solve(id - ia);
  return out;
}

void WaveContext::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::InvalidInput, "wave.epsilon must be positive");
  if (!(lambda0 > 0.0) || !(lambda1 > lambda0) || !std::isfinite(lambda1))
    throw Error(ErrorCode::InvalidInput, "wave requires 0 < lambda0 < lambda1");
}

double sigma_from_omega(double omega, const WaveContext& ctx) {
  ctx.validate();
  const double e2 = ctx.epsilon * omega * ctx.epsilon * omega;
  if (e2 <= ctx.lambda0) {
    std::ostringstream os;
    os << "(epsilon*omega)^2 = " << e2 << " <= lambda0 = " << ctx.lambda0;
    throw Error(ErrorCode::BelowThreshold, os.str());
  }
  if (e2 >= ctx.lambda1) {
    std::ostringstream os;
    os << "(epsilon*omega)^2 = " << e2 << " >= lambda1 = " << ctx.lambda1;
    throw Error(ErrorCode::MultiMode, os.str());
  }
  const double threshold = ctx.lambda0 / (ctx.epsilon * ctx.epsilon);
  return std::sqrt(omega * omega - threshold);
}

double omega_from_sigma(double sigma, const WaveContext& ctx) {
  ctx.validate();
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidInput, "sigma must be positive");
  const double threshold = ctx.lambda0 / (ctx.epsilon * ctx.epsilon);
  const double omega = std::sqrt(sigma * sigma + threshold);
  const double e2 = ctx.epsilon * omega * ctx.epsilon * omega;
  if (e2 >= ctx.lambda1) {
    std::ostringstream os;
    os << "sigma = " << sigma << " maps to (epsilon*omega)^2 = " << e2 << " >= lambda1";
    throw Error(ErrorCode::MultiMode, os.str());
  }
  return omega;
}

void NecklaceParams::validate() const {
  if (!(std::isfinite(l1) && std::isfinite(l2) && std::isfinite(l3)))
    throw Error(ErrorCode::InvalidInput, "edge lengths must be finite");
  if (!(l2 > 0.0)) throw Error(ErrorCode::InvalidInput, "l2 must be positive");
  if (!(l1 >= l2)) throw Error(ErrorCode::InvalidInput, "arch lengths must satisfy l1 >= l2");
  if (!(l3 > 0.0)) throw Error(ErrorCode::InvalidInput, "l3 must be positive");
}

VertexConditionTable::VertexConditionTable(std::vector<std::pair<double, VertexCondition>> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) throw Error(ErrorCode::InvalidInput, "vertex condition table is empty");
  std::sort(samples_.begin(), samples_.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].first > samples_[i - 1].first))
      throw Error(ErrorCode::InvalidInput, "vertex condition table has duplicate abscissae");
  }
}

VertexCondition VertexConditionTable::at(double eps_omega) const {
  if (samples_.empty()) throw Error(ErrorCode::InvalidInput, "vertex condition table is empty");
  if (eps_omega < min_abscissa() || eps_omega > max_abscissa()) {
    std::ostringstream os;
    os << "epsilon*omega = " << eps_omega << " outside table range [" << min_abscissa() << ", "
       << max_abscissa() << "]";
    throw Error(ErrorCode::InvalidInput, os.str());
  }
  if (samples_.size() == 1) return samples_.front().second;
  auto hi = std::upper_bound(samples_.begin(), samples_.end(), eps_omega,
                             [](double v, const auto& s) { return v < s.first; });
  if (hi == samples_.end()) return samples_.back().second;
  auto lo = hi - 1;
  const double w = (eps_omega - lo->first) / (hi->first - lo->first);
  const Eigen::Matrix3d a = (1.0 - w) * lo->second.matrix() + w * hi->second.matrix();
  return VertexCondition::from_matrix(0.5 * (a + a.transpose()));
}

}  // namespace necklace
