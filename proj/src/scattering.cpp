#include "necklace/scattering.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "necklace/error.hpp"
#include "necklace/monodromy.hpp"

namespace necklace {

namespace {

using cd = std::complex<double>;

// Rows with reciprocal condition estimate below this are rejected.
constexpr double kSingularRcond = 1e-13;

// Linear form over the unknown vector plus a constant (the incident wave).
struct Trace {
  std::array<int, 2> idx{-1, -1};
  std::array<cd, 2> coef{0.0, 0.0};
  cd constant = 0.0;
};

// Value and outgoing derivative / sigma of one edge end at a vertex.
struct EdgeEnd {
  Trace value;
  Trace deriv;
};

}  // namespace

ReflectionFormula reflection_formula(const TruncatedNecklace& tn, double sigma) {
  if (tn.n_cells < 1) throw Error(ErrorCode::InvalidInput, "n_cells must be >= 1");
  const auto mono = monodromy(tn.params, sigma);
  if (!(std::abs(mono.f) < 2.0)) {
    std::ostringstream os;
    os << "|F| = " << std::abs(mono.f) << " >= 2 at sigma = " << sigma;
    throw Error(ErrorCode::OutsideBand, os.str());
  }
  ReflectionFormula out;
  out.k = std::acos(mono.f / 2.0);
  const double sk = std::sin(out.k);
  if (sk < 1e-9) {
    std::ostringstream os;
    os << "sin k = " << sk << " at sigma = " << sigma;
    throw Error(ErrorCode::BandEdge, os.str());
  }
  const auto h = loop_homogeneous(tn.params, sigma);
  out.hs_excess = h.hs_excess();
  const double root = 2.0 * std::abs(h.y() + h.z()) / std::abs(h.w());
  out.r = std::abs(std::sin(tn.n_cells * out.k) / sk) * root;
  if (std::abs(mono.f) < 1.0) out.midband_bound = 2.0 / std::sqrt(3.0) * root;
  return out;
}

ScatterResult solve_scattering_oracle(const TruncatedNecklace& tn, double sigma, Incidence incidence) {
  const int n = tn.n_cells;
  if (n < 1) throw Error(ErrorCode::InvalidInput, "n_cells must be >= 1");
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidInput, "sigma must be positive");
  const auto& p = tn.params;

  // Finite edges: per cell two arches (vertex 2j -> 2j+1), then a segment
  // (2j+1 -> 2j+2) for all but the last cell.
  struct Edge {
    int from, to, component;
    double length;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(3 * n - 1));
  for (int j = 0; j < n; ++j) {
    edges.push_back({2 * j, 2 * j + 1, 0, p.l1});
    edges.push_back({2 * j, 2 * j + 1, 1, p.l2});
    if (j + 1 < n) edges.push_back({2 * j + 1, 2 * j + 2, 2, p.l3});
  }
  const int n_vertices = 2 * n;
  const int n_edge_unknowns = 2 * static_cast<int>(edges.size());
  const int ir = n_edge_unknowns, it = n_edge_unknowns + 1;
  const int dim = n_edge_unknowns + 2;
  if (dim != 3 * n_vertices) throw std::logic_error("oracle system is not square");

  std::vector<std::array<EdgeEnd, 3>> ends(static_cast<std::size_t>(n_vertices));
  std::vector<std::array<bool, 3>> filled(static_cast<std::size_t>(n_vertices), {false, false, false});
  auto place = [&](int v, int comp, const EdgeEnd& e) {
    if (filled[v][comp]) throw std::logic_error("vertex component assigned twice");
    ends[v][comp] = e;
    filled[v][comp] = true;
  };

  // psi(s) = a cos(sigma s) + b sin(sigma s), s from the left vertex.
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int ia = 2 * static_cast<int>(e), ib = ia + 1;
    const double c = std::cos(sigma * edges[e].length), s = std::sin(sigma * edges[e].length);
    EdgeEnd left, right;
    left.value = {{ia, -1}, {1.0, 0.0}, 0.0};
    left.deriv = {{ib, -1}, {1.0, 0.0}, 0.0};
    right.value = {{ia, ib}, {c, s}, 0.0};
    right.deriv = {{ia, ib}, {s, -c}, 0.0};  // z = l - s
    place(edges[e].from, edges[e].component, left);
    place(edges[e].to, edges[e].component, right);
  }

  // Incoming lead: e^{-i sigma z} + r e^{i sigma z}; outgoing lead: t e^{i sigma z}.
  const cd I(0.0, 1.0);
  EdgeEnd incoming, outgoing;
  incoming.value = {{ir, -1}, {1.0, 0.0}, 1.0};
  incoming.deriv = {{ir, -1}, {I, 0.0}, -I};
  outgoing.value = {{it, -1}, {1.0, 0.0}, 0.0};
  outgoing.deriv = {{it, -1}, {I, 0.0}, 0.0};
  const int first = 0, last = n_vertices - 1;
  place(incidence == Incidence::Left ? first : last, 2, incoming);
  place(incidence == Incidence::Left ? last : first, 2, outgoing);

  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
  const Eigen::Matrix3d& a = p.vc.matrix();
  auto add = [&](int row, const Trace& tr, cd scale) {
    for (int q = 0; q < 2; ++q)
      if (tr.idx[q] >= 0) k(row, tr.idx[q]) += scale * tr.coef[q];
    rhs(row) -= scale * tr.constant;
  };
  // (1/sigma) d psi_i/dz - sum_j A_ij psi_j = 0 at every vertex.
  for (int v = 0; v < n_vertices; ++v) {
    for (int i = 0; i < 3; ++i) {
      const int row = 3 * v + i;
      add(row, ends[v][i].deriv, 1.0);
      for (int j = 0; j < 3; ++j)
        if (a(i, j) != 0.0) add(row, ends[v][j].value, -a(i, j));
    }
  }

  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(k);
  const double rcond = lu.rcond();
  if (!(rcond > kSingularRcond)) {
    std::ostringstream os;
    os << "scattering system singular at sigma = " << sigma << " (rcond " << rcond << ")";
    throw Error(ErrorCode::SingularSystem, os.str());
  }
  const Eigen::VectorXcd x = lu.solve(rhs);
  ScatterResult out;
  out.r = x(ir);
  out.t = x(it);
  out.unitarity_defect = std::abs(std::norm(out.r) + std::norm(out.t) - 1.0);
  return out;
}

TransferPower transfer_power(const NecklaceParams& params, double sigma, int n_cells) {
  if (n_cells < 1) throw Error(ErrorCode::InvalidInput, "n_cells must be >= 1");
  const auto mono = monodromy(params, sigma);
  TransferPower out;

  Eigen::Matrix2d result = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d base = mono.m_mat;
  for (int e = n_cells; e > 0; e >>= 1) {
    if (e & 1) result = result * base;
    base = base * base;
  }
  out.by_squaring = result;

  const double x = mono.f / 2.0;
  out.by_chebyshev = chebyshev_u(n_cells - 1, x) * mono.m_mat -
                     chebyshev_u(n_cells - 2, x) * Eigen::Matrix2d::Identity();
  out.discrepancy = (out.by_squaring - out.by_chebyshev).norm() / std::max(1.0, out.by_squaring.norm());
  return out;
}

}  // namespace necklace
