#pragma once

// Vertex gluing data for the degree-3 junctions of a necklace graph and the
// mapping between the waveguide frequency and the 1D wavenumber.
//
// Component ordering at every vertex is fixed: components 0 and 1 are the
// two arches of the loop (lengths l1, l2), component 2 is the straight edge.

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace necklace {

inline constexpr double kInputSymmetryTol = 1e-12;
inline constexpr double kComputedSymmetryTol = 1e-10;
inline constexpr double kSingularConversionTol = 1e-8;
inline constexpr double kUnitarityTol = 1e-10;

struct SymmetryReport {
  bool accepted = false;
  double max_asymmetry = 0.0;
  // Offending pair (row < col), only meaningful when !accepted.
  int row = -1;
  int col = -1;
};

SymmetryReport validate_vertex_condition(const Eigen::Matrix3d& a, double tol = kInputSymmetryTol);

// Real symmetric 3x3 matrix A in the condition  d psi/dz = sigma * A * psi.
class VertexCondition {
 public:
  VertexCondition() : a_(Eigen::Matrix3d::Zero()) {}

  // Throws Error(AsymmetricCondition) naming the offending index pair.
  static VertexCondition from_matrix(const Eigen::Matrix3d& a, double tol = kInputSymmetryTol);
  static VertexCondition from_blocks(const Eigen::Matrix2d& b, const Eigen::Vector2d& delta, double c);

  const Eigen::Matrix3d& matrix() const { return a_; }
  double operator()(int i, int j) const { return a_(i, j); }

  Eigen::Matrix2d b() const { return a_.topLeftCorner<2, 2>(); }
  Eigen::Vector2d delta() const { return a_.topRightCorner<2, 1>(); }
  double c() const { return a_(2, 2); }

  // Swap the roles of the two arches (indices 0 and 1).
  VertexCondition relabeled_arches() const;

 private:
  explicit VertexCondition(const Eigen::Matrix3d& a) : a_(a) {}
  Eigen::Matrix3d a_;
};

struct ScatteringMatrixJ {
  Eigen::Matrix3cd t = Eigen::Matrix3cd::Identity();

  double unitarity_defect() const;  // max |t t* - I|
  double asymmetry() const;         // max |t_pj - t_jp|
};

struct ConversionResult {
  VertexCondition vc;
  double imag_residue = 0.0;  // max |Im A| before the real part was taken
  double det_i_plus_t = 0.0;  // |det(I + t)|
};

// A = -i (I + t)^-1 (I - t). Throws NonUnitaryInput when t is not unitary and
// symmetric to kUnitarityTol, SingularConversion when |det(I + t)| < 1e-8.
ConversionResult vertex_condition_from_scattering(const ScatteringMatrixJ& t);

// Inverse map t = (I - iA)(I + iA)^-1.
ScatteringMatrixJ scattering_from_vertex_condition(const VertexCondition& vc);

struct WaveContext {
  double epsilon = 1.0;
  double lambda0 = 0.0;
  double lambda1 = 1.0;

  // Throws InvalidInput unless epsilon > 0 and 0 < lambda0 < lambda1.
  void validate() const;
};

// sigma = sqrt(omega^2 - lambda0 / epsilon^2), only inside the single-mode
// window lambda0 < (epsilon omega)^2 < lambda1.
double sigma_from_omega(double omega, const WaveContext& ctx);
double omega_from_sigma(double sigma, const WaveContext& ctx);

struct NecklaceParams {
  double l1 = 1.0;
  double l2 = 1.0;
  double l3 = 1.0;
  VertexCondition vc;

  // Throws InvalidInput unless l1 >= l2 > 0 and l3 > 0. The numerical
  // kernels accept any lengths; this is applied to loaded and designed cells.
  void validate() const;

  NecklaceParams relabeled_arches() const { return {l2, l1, l3, vc.relabeled_arches()}; }
};

// Frequency-dependent gluing data: (epsilon * omega, A) samples with
// piecewise-linear interpolation. Used by the band scan only.
class VertexConditionTable {
 public:
  VertexConditionTable() = default;
  // Samples are sorted by abscissa; duplicate abscissae are rejected.
  explicit VertexConditionTable(std::vector<std::pair<double, VertexCondition>> samples);

  // Throws InvalidInput outside the tabulated range.
  VertexCondition at(double eps_omega) const;

  std::size_t size() const { return samples_.size(); }
  double min_abscissa() const { return samples_.front().first; }
  double max_abscissa() const { return samples_.back().first; }

 private:
  std::vector<std::pair<double, VertexCondition>> samples_;
};

}  // namespace necklace
