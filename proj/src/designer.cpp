#include "necklace/designer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "necklace/error.hpp"
#include "necklace/monodromy.hpp"
#include "necklace/parallel.hpp"
#include "necklace/scattering.hpp"

namespace necklace {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRationalResidualTol = 1e-10;
constexpr double kTransparencyTol = 1e-8;
constexpr double kTangencyTol = 1e-6;
constexpr double kVerifyTol = 1e-8;

struct Blocks {
  double a11, a12, a22, d1, d2, c;
};

Blocks blocks_of(const VertexCondition& vc) {
  return {vc(0, 0), vc(0, 1), vc(1, 1), vc(0, 2), vc(1, 2), vc.c()};
}

// Root of the transparency polynomial in y closest to the seed, inside
// [seed - half_width, seed + half_width].
std::optional<double> solve_y(const VertexCondition& vc, double x, double seed, double half_width) {
  constexpr int kCells = 512;
  auto q = [&](double y) { return transparency_polynomial(vc, x, y); };
  const double lo = seed - half_width, step = 2.0 * half_width / kCells;
  std::optional<double> best;
  double prev_y = lo, prev_q = q(lo);
  for (int i = 1; i <= kCells; ++i) {
    const double y = (i == kCells) ? seed + half_width : lo + step * i;
    const double qy = q(y);
    if ((prev_q < 0.0) != (qy < 0.0)) {
      const double root = bisect_root(q, prev_y, y);
      const double res = std::abs(transparency_rational(vc, x, root));
      if (res < kRationalResidualTol && (!best || std::abs(root - seed) < std::abs(*best - seed))) best = root;
    }
    prev_y = y;
    prev_q = qy;
  }
  return best;
}

double y_for_eps(const VertexCondition& vc, double eps, double* seed_out = nullptr, double* x_out = nullptr) {
  const auto b = blocks_of(vc);
  const double ratio = b.d2 / b.d1;
  const double x = b.a11 - b.a12 * b.d1 / b.d2 + eps;
  const double y0 = b.a22 - b.a12 * ratio;
  const double seed = y0 - ratio * ratio * eps;
  if (seed_out) *seed_out = seed;
  if (x_out) *x_out = x;
  double half_width = std::max(10.0 * ratio * ratio * eps, 1e-3);
  for (int attempt = 0; attempt < 2; ++attempt, half_width *= 10.0) {
    if (auto y = solve_y(vc, x, seed, half_width)) return *y;
  }
  std::ostringstream os;
  os << "transparency equation has no real root in y near " << seed << " (x = " << x << ")";
  throw Error(ErrorCode::NoRoot, os.str());
}

double hs_excess_of(const Eigen::Matrix2d& m) { return hs_norm2(m) - 2.0; }

// Bisect the transition of a boolean predicate, a satisfies it, b does not.
double bisect_predicate(const std::function<bool(double)>& pred, double a, double b) {
  for (int it = 0; it < 200; ++it) {
    const double m = a + 0.5 * (b - a);
    if (m == a || m == b) break;
    (pred(m) ? a : b) = m;
  }
  return a;
}

}  // namespace

double transparency_rational(const VertexCondition& vc, double x, double y) {
  const auto b = blocks_of(vc);
  const double first = ((y - b.a22) * b.d1 * b.d1 + (x - b.a11) * b.d2 * b.d2 + 2.0 * b.a12 * b.d1 * b.d2) /
                       ((x - b.a11) * (y - b.a22) - b.a12 * b.a12);
  const double xi = 1.0 / x, yi = 1.0 / y;
  const double second = ((yi + b.a22) * b.d1 * b.d1 + (xi + b.a11) * b.d2 * b.d2 - 2.0 * b.a12 * b.d1 * b.d2) /
                        ((xi + b.a11) * (yi + b.a22) - b.a12 * b.a12);
  return (b.c + first) * (b.c - second) + 1.0;
}

double transparency_polynomial(const VertexCondition& vc, double x, double y) {
  const auto b = blocks_of(vc);
  const double d1 = (x - b.a11) * (y - b.a22) - b.a12 * b.a12;
  const double n1 = (y - b.a22) * b.d1 * b.d1 + (x - b.a11) * b.d2 * b.d2 + 2.0 * b.a12 * b.d1 * b.d2;
  const double xy = x * y;
  const double d2 = (1.0 + b.a11 * x) * (1.0 + b.a22 * y) - b.a12 * b.a12 * xy;
  const double n2 = (x + b.a22 * xy) * b.d1 * b.d1 + (y + b.a11 * xy) * b.d2 * b.d2 - 2.0 * b.a12 * b.d1 * b.d2 * xy;
  return (b.c * d1 + n1) * (b.c * d2 - n2) + d1 * d2;
}

XYSolution design_xy(const DesignRequest& req) {
  const auto b = blocks_of(req.vc);
  if (b.d1 == 0.0 || b.d2 == 0.0) {
    std::ostringstream os;
    os << "both arches must couple to the straight edge (delta = (" << b.d1 << ", " << b.d2 << "))";
    throw Error(ErrorCode::Degenerate, os.str());
  }
  if (!(req.eps > 0.0)) throw Error(ErrorCode::InvalidInput, "eps must be positive");

  XYSolution out;
  const double ratio = b.d2 / b.d1;
  out.y0 = b.a22 - b.a12 * ratio;
  out.y = y_for_eps(req.vc, req.eps, &out.seed, &out.x);
  out.residual = std::abs(transparency_rational(req.vc, out.x, out.y));
  out.gamma_raw = (out.y - out.seed) / (req.eps * req.eps);

  const double half = 0.5 * req.eps;
  double seed_half = 0.0;
  const double y_half = y_for_eps(req.vc, half, &seed_half);
  const double g_half = (y_half - seed_half) / (half * half);
  out.gamma = 2.0 * g_half - out.gamma_raw;
  return out;
}

double arch_length(double tan_half, double sigma0, std::optional<int> branch, int* used_branch) {
  if (!(sigma0 > 0.0)) throw Error(ErrorCode::InvalidInput, "sigma0 must be positive");
  const double base = std::atan(tan_half);
  const int m = branch.value_or(base > 0.0 ? 0 : 1);
  const double l = 2.0 / sigma0 * (base + kPi * m);
  if (!(l > 0.0)) {
    std::ostringstream os;
    os << "branch " << m << " gives a non-positive length for tan = " << tan_half;
    throw Error(ErrorCode::InvalidInput, os.str());
  }
  if (used_branch) *used_branch = m;
  return l;
}

ArchLengths lengths_from_xy(double x, double y, double sigma0, std::optional<std::array<int, 2>> branch_offsets) {
  ArchLengths out;
  std::optional<int> b1, b2;
  if (branch_offsets) {
    b1 = (*branch_offsets)[0];
    b2 = (*branch_offsets)[1];
  }
  out.l1 = arch_length(x, sigma0, b1, &out.m1);
  out.l2 = arch_length(y, sigma0, b2, &out.m2);
  if (out.l2 > out.l1) {
    std::swap(out.l1, out.l2);
    out.swapped = true;
  }
  return out;
}

SegmentChoice choose_l3(const Eigen::Matrix2d& t, double sigma0) {
  if (!(sigma0 > 0.0)) throw Error(ErrorCode::InvalidInput, "sigma0 must be positive");
  // tr(R(phi) T) = cos(phi)(t11 + t22) + sin(phi)(t21 - t12)
  const double trace = t(0, 0) + t(1, 1);
  const double skew = t(1, 0) - t(0, 1);
  const double scale = std::max(1.0, t.norm());
  SegmentChoice out;
  double phi;
  if (std::abs(trace) <= 1e-14 * scale && std::abs(skew) <= 1e-14 * scale) {
    out.indeterminate = true;
    phi = kPi;
  } else if (skew == 0.0) {
    phi = 0.5 * kPi;
  } else {
    phi = std::atan(-trace / skew);
    if (phi <= 0.0) phi += kPi;
  }
  out.l3 = phi / sigma0;
  return out;
}

SegmentChoice choose_l3(const NecklaceParams& params, double sigma0) {
  const auto lt = loop_transfer(params, sigma0);
  const auto out = choose_l3(lt.t_mat, sigma0);
  const double f = (segment_rotation(sigma0, out.l3) * lt.t_mat).trace();
  if (!(std::abs(f) < 1e-10 * std::max(1.0, lt.t_mat.norm()))) {
    std::ostringstream os;
    os << "segment choice l3 = " << out.l3 << " leaves F(sigma0) = " << f;
    throw Error(ErrorCode::VerificationMismatch, os.str());
  }
  return out;
}

DesignDiagnostics compute_diagnostics(const NecklaceParams& params, double sigma0, int n_cells,
                                      std::optional<double> period_length) {
  DesignDiagnostics d;
  d.n_cells = n_cells;
  const auto lt = loop_transfer(params, sigma0);
  const auto mono = monodromy(params, sigma0);
  d.f_sigma0 = mono.f;
  d.hs_excess = hs_excess_of(mono.m_mat);
  d.n_sigma0 = lt.n;
  {
    const auto h = loop_homogeneous(params, sigma0);
    const double p = h.p_num / h.d_minus, q = h.q_num / h.d_plus;
    d.transparency_residual = p * q + 1.0;
  }

  const double half_width = std::min(0.5 * sigma0, 0.5);
  const auto poles = locate_poles(params, {sigma0 - half_width, sigma0 + half_width}, 8192);
  if (poles.empty()) {
    std::ostringstream os;
    os << "no pole of the Hill discriminant within " << half_width << " of sigma0 = " << sigma0;
    throw Error(ErrorCode::NoRoot, os.str());
  }
  const auto nearest = std::min_element(poles.begin(), poles.end(), [&](const Pole& a, const Pole& b) {
    return std::abs(a.sigma - sigma0) < std::abs(b.sigma - sigma0);
  });
  d.pole_sigma = nearest->sigma;
  d.pole_distance = std::abs(d.pole_sigma - sigma0);
  d.pole_side = d.pole_sigma > sigma0 ? 1 : -1;

  const double step = d.pole_distance / 256.0;
  d.band = enclosing_band(params, sigma0, step);

  // |F| < 1 from sigma0 towards the pole, up to sigma' with |F(sigma')| = 1.
  auto inner = [&](double s) {
    const auto hp = hill_parts(params, s);
    return !hp.is_pole() && std::abs(hp.numerator) < std::abs(hp.denominator);
  };
  double inside = sigma0;
  double sigma_prime = d.pole_sigma;
  for (int i = 1; i <= 256; ++i) {
    const double next = sigma0 + d.pole_side * step * i;
    if (!inner(next)) {
      sigma_prime = bisect_predicate(inner, inside, next);
      break;
    }
    inside = next;
  }
  d.slow = {std::min(sigma0, sigma_prime), std::max(sigma0, sigma_prime)};

  const double length = period_length.value_or(default_period_length(params));
  constexpr int kVgSamples = 64;
  double min_vg = std::numeric_limits<double>::infinity();
  for (int j = 0; j < kVgSamples; ++j) {
    const double s = d.slow.lo + d.slow.width() * (j + 0.5) / kVgSamples;
    try {
      min_vg = std::min(min_vg, std::abs(group_velocity(params, s, length, d.band).vg));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BandEdge) throw;
    }
  }
  d.min_vg = min_vg;

  const auto sc = solve_scattering_oracle({params, n_cells}, sigma0);
  d.oracle_r = std::abs(sc.r);
  d.oracle_t = std::abs(sc.t);
  return d;
}

DesignResult design(const DesignRequest& req) {
  if (!(req.sigma0 > 0.0)) throw Error(ErrorCode::InvalidInput, "sigma0 must be positive");
  if (req.n_cells < 1) throw Error(ErrorCode::InvalidInput, "n_cells must be >= 1");
  DesignResult out;
  out.request = req;
  out.xy = design_xy(req);
  const double x = out.xy.x, y = out.xy.y;

  // Branch search order: requested/default, then m1 + 1, m2 + 1, both.
  const auto first = lengths_from_xy(x, y, req.sigma0, req.branch_offsets);
  const std::array<int, 2> base{first.m1, first.m2};
  const std::array<std::array<int, 2>, 4> attempts{{{base[0], base[1]},
                                                    {base[0] + 1, base[1]},
                                                    {base[0], base[1] + 1},
                                                    {base[0] + 1, base[1] + 1}}};
  std::optional<ArchLengths> chosen;
  for (const auto& offs : attempts) {
    const auto arches = lengths_from_xy(x, y, req.sigma0, offs);
    const double lx = arches.swapped ? arches.l2 : arches.l1;
    const double ly = arches.swapped ? arches.l1 : arches.l2;
    // (x, y) moves along (lx (1 + x^2), ly (1 + y^2)) / 2 as sigma varies;
    // that direction must cross the transparency curve, not run along it.
    const double hx = 1e-6 * std::max(1.0, std::abs(x)), hy = 1e-6 * std::max(1.0, std::abs(y));
    const double gx = (transparency_polynomial(req.vc, x + hx, y) - transparency_polynomial(req.vc, x - hx, y)) / (2 * hx);
    const double gy = (transparency_polynomial(req.vc, x, y + hy) - transparency_polynomial(req.vc, x, y - hy)) / (2 * hy);
    const double vx = 0.5 * lx * (1.0 + x * x), vy = 0.5 * ly * (1.0 + y * y);
    const double cosang = std::abs(gx * vx + gy * vy) / (std::hypot(gx, gy) * std::hypot(vx, vy));
    if (cosang > kTangencyTol) {
      chosen = arches;
      break;
    }
  }
  if (!chosen) throw Error(ErrorCode::TangentDirection, "direction (l1, l2) is tangent to the transparency curve for every branch tried");
  out.arches = *chosen;

  out.params = NecklaceParams{out.arches.l1, out.arches.l2, 0.0,
                              out.arches.swapped ? req.vc.relabeled_arches() : req.vc};
  {
    const auto h = loop_homogeneous(out.params, req.sigma0);
    if (h.is_pole()) throw Error(ErrorCode::TransferPole, "designed loop has n = 0 at sigma0");
    const double residual = (h.p_num / h.d_minus) * (h.q_num / h.d_plus) + 1.0;
    if (!(std::abs(residual) < kTransparencyTol)) {
      std::ostringstream os;
      os << "transparency m^2 - n^2 + 1 = " << residual << " at sigma0";
      throw Error(ErrorCode::VerificationMismatch, os.str());
    }
  }
  const auto seg = choose_l3(out.params, req.sigma0);
  out.params.l3 = seg.l3;
  out.segment_indeterminate = seg.indeterminate;
  out.params.validate();

  out.diagnostics = compute_diagnostics(out.params, req.sigma0, req.n_cells, req.period_length);
  return out;
}

std::vector<VerificationRow> verify_design(const DesignResult& result, int n_cells) {
  const auto& s = result.diagnostics;
  DesignDiagnostics r;
  try {
    r = compute_diagnostics(result.params, result.request.sigma0, n_cells, result.request.period_length);
  } catch (const Error& e) {
    throw Error(ErrorCode::VerificationMismatch, std::string("design does not verify: ") + e.what());
  }
  const bool same_n = n_cells == s.n_cells;
  std::vector<VerificationRow> rows{
      {"f_sigma0", s.f_sigma0, r.f_sigma0},
      {"hs_excess", s.hs_excess, r.hs_excess},
      {"transparency_residual", s.transparency_residual, r.transparency_residual},
      {"n_sigma0", s.n_sigma0, r.n_sigma0},
      {"pole_sigma", s.pole_sigma, r.pole_sigma},
      {"pole_distance", s.pole_distance, r.pole_distance},
      {"band_lo", s.band.lo, r.band.lo},
      {"band_hi", s.band.hi, r.band.hi},
      {"slow_lo", s.slow.lo, r.slow.lo},
      {"slow_hi", s.slow.hi, r.slow.hi},
      {"min_vg", s.min_vg, r.min_vg},
      {"oracle_r", s.oracle_r, r.oracle_r, same_n},
      {"oracle_t", s.oracle_t, r.oracle_t, same_n},
  };
  std::ostringstream bad;
  for (const auto& row : rows) {
    if (row.compared && !(std::abs(row.stored - row.recomputed) <= kVerifyTol))
      bad << " " << row.name << " (" << row.stored << " vs " << row.recomputed << ")";
  }
  if (!(std::abs(r.f_sigma0) < kTransparencyTol)) bad << " F(sigma0) = " << r.f_sigma0;
  if (!(std::abs(r.hs_excess) < kTransparencyTol)) bad << " ||M||^2 - 2 = " << r.hs_excess;
  if (!bad.str().empty()) throw Error(ErrorCode::VerificationMismatch, "design does not verify:" + bad.str());
  return rows;
}

double loglog_slope(const std::vector<double>& abscissa, const std::vector<double>& values) {
  if (abscissa.size() != values.size() || abscissa.size() < 2)
    throw Error(ErrorCode::InvalidInput, "slope fit needs at least two paired points");
  const double n = static_cast<double>(abscissa.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    const double lx = std::log(abscissa[i]), ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalingStudy scaling_study(const DesignRequest& base, const std::vector<double>& eps_values, int jobs) {
  ScalingStudy out;
  out.eps = eps_values;
  out.designs = parallel_map(eps_values.size(), jobs, [&](std::size_t i) {
    DesignRequest req = base;
    req.eps = eps_values[i];
    return design(req);
  });
  std::vector<double> dist, vg, refl;
  for (const auto& d : out.designs) {
    dist.push_back(d.diagnostics.pole_distance);
    vg.push_back(d.diagnostics.min_vg);
    refl.push_back(d.diagnostics.oracle_r);
  }
  out.slope_pole_distance = loglog_slope(eps_values, dist);
  out.slope_min_vg = loglog_slope(eps_values, vg);
  out.slope_oracle_r = loglog_slope(eps_values, refl);
  return out;
}

}  // namespace necklace
