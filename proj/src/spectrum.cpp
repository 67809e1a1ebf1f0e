#include "necklace/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "necklace/error.hpp"

namespace necklace {

namespace {

bool negative(double v) { return v < 0.0; }

struct Sample {
  double s = 0.0;
  HillParts hp;
};

Sample evaluate(const CellModel& cell, double s) { return {s, hill_parts(cell(s), s)}; }

bool hidden_pair(double a, double m, double b) {
  return negative(a) == negative(b) && negative(m) != negative(a);
}

// Samples on a uniform grid, with cells subdivided wherever the midpoint
// reveals a pair of sign changes invisible at the cell ends.
std::vector<Sample> collect_samples(const CellModel& cell, Interval window, int grid, int max_depth,
                                    std::vector<std::string>* advisories) {
  std::vector<Sample> coarse;
  coarse.reserve(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    const double s = (i == grid - 1) ? window.hi : window.lo + window.width() * i / (grid - 1);
    coarse.push_back(evaluate(cell, s));
  }

  std::vector<Sample> out;
  out.reserve(coarse.size());
  std::function<bool(const Sample&, const Sample&, int)> refine = [&](const Sample& a, const Sample& b,
                                                                       int depth) -> bool {
    if (depth >= max_depth) return false;
    const Sample m = evaluate(cell, 0.5 * (a.s + b.s));
    const bool hidden = hidden_pair(a.hp.denominator, m.hp.denominator, b.hp.denominator) ||
                        hidden_pair(a.hp.upper_edge(), m.hp.upper_edge(), b.hp.upper_edge()) ||
                        hidden_pair(a.hp.lower_edge(), m.hp.lower_edge(), b.hp.lower_edge());
    if (!hidden) return false;
    refine(a, m, depth + 1);
    out.push_back(m);
    refine(m, b, depth + 1);
    return true;
  };

  for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
    out.push_back(coarse[i]);
    if (refine(coarse[i], coarse[i + 1], 0) && advisories) {
      std::ostringstream os;
      os << "GridTooCoarse: cell [" << coarse[i].s << ", " << coarse[i + 1].s
         << "] straddles more than one sign change; subdivided";
      advisories->push_back(os.str());
    }
  }
  out.push_back(coarse.back());
  std::sort(out.begin(), out.end(), [](const Sample& x, const Sample& y) { return x.s < y.s; });
  return out;
}

std::vector<double> bracket_roots(const CellModel& cell, const std::vector<Sample>& samples,
                                  double (*fn)(const HillParts&)) {
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double fa = fn(samples[i].hp), fb = fn(samples[i + 1].hp);
    if (negative(fa) == negative(fb)) continue;
    roots.push_back(bisect_root([&](double s) { return fn(hill_parts(cell(s), s)); }, samples[i].s,
                                samples[i + 1].s));
  }
  return roots;
}

double denom_of(const HillParts& hp) { return hp.denominator; }

// w, x, y, z share a factor sin(sigma l1) sin(sigma l2), so w also vanishes
// where F is regular, and n = w / 2y changes sign through infinity where the
// arches resonate. Only roots with n small on both sides are poles.
bool small_n(const CellModel& cell, double s) {
  const auto h = loop_homogeneous(cell(s), s);
  const double scale = std::max(std::abs(2.0 * h.y()), std::abs(h.x()));
  return scale > 0.0 && std::abs(h.w()) <= 1e-4 * scale;
}

std::vector<double> bracket_poles(const CellModel& cell, const std::vector<Sample>& samples) {
  std::vector<double> poles;
  for (double r : bracket_roots(cell, samples, denom_of)) {
    const double h = 1e-9 * std::max(1.0, r);
    if (small_n(cell, r - h) && small_n(cell, r + h)) poles.push_back(r);
  }
  return poles;
}


double f_of(const CellModel& cell, double s) {
  const auto hp = hill_parts(cell(s), s);
  return hp.is_pole() ? std::numeric_limits<double>::quiet_NaN() : hp.value();
}

bool pole_between(const std::vector<double>& poles, double a, double b) {
  const auto it = std::lower_bound(poles.begin(), poles.end(), a);
  return it != poles.end() && *it <= b;
}

// Second pass once the poles are known: F -/+ 2 may hide a pair of edges in
// a cell where the edge function G -/+ 2w showed a net sign change because
// of the common factor.
void refine_edges(const CellModel& cell, std::vector<Sample>& samples, const std::vector<double>& poles,
                  int max_depth, std::vector<std::string>* advisories) {
  std::vector<Sample> extra;
  std::function<bool(double, double, double, double, int)> refine = [&](double a, double fa, double b, double fb,
                                                                         int depth) -> bool {
    if (depth >= max_depth) return false;
    auto hides = [&](double fx) {
      return hidden_pair(fa - 2.0, fx - 2.0, fb - 2.0) || hidden_pair(fa + 2.0, fx + 2.0, fb + 2.0);
    };
    auto split = [&](double x, double fx) {
      extra.push_back(evaluate(cell, x));
      refine(a, fa, x, fx, depth + 1);
      refine(x, fx, b, fb, depth + 1);
      return true;
    };
    const double m = 0.5 * (a + b);
    const double fm = f_of(cell, m);
    if (!std::isfinite(fm)) return false;
    if (hides(fm)) return split(m, fm);
    // A narrow excursion past +/-2 away from the midpoint: probe the vertex
    // of the parabola through the three samples.
    const double curv = fa - 2.0 * fm + fb;
    if (curv == 0.0) return false;
    const double t = 0.5 * (fa - fb) / curv;
    if (!(std::abs(t) < 1.0)) return false;
    const double predicted = fm - 0.25 * (fa - fb) * t;
    if (std::abs(predicted) < 2.0 - std::abs(curv)) return false;
    const double v = m + t * 0.5 * (b - a);
    if (!(v > a && v < b)) return false;
    const double fv = f_of(cell, v);
    if (!std::isfinite(fv)) return false;
    if (hides(fv)) return split(v, fv);
    return false;
  };
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double a = samples[i].s, b = samples[i + 1].s;
    if (pole_between(poles, a, b) || samples[i].hp.is_pole() || samples[i + 1].hp.is_pole()) continue;
    if (refine(a, samples[i].hp.value(), b, samples[i + 1].hp.value(), 0) && advisories) {
      std::ostringstream os;
      os << "GridTooCoarse: cell [" << a << ", " << b << "] hides a pair of band edges; subdivided";
      advisories->push_back(os.str());
    }
  }
  if (extra.empty()) return;
  samples.insert(samples.end(), extra.begin(), extra.end());
  std::sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) { return x.s < y.s; });
}

// Roots of F -/+ 2 between consecutive samples; cells holding a pole are
// split at the pole, where F changes sign through infinity.
std::vector<double> band_edges(const CellModel& cell, const std::vector<Sample>& samples,
                               const std::vector<double>& poles) {
  std::vector<double> edges;
  auto scan_piece = [&](double a, double b) {
    const double fa = f_of(cell, a), fb = f_of(cell, b);
    if (!std::isfinite(fa) || !std::isfinite(fb)) return;
    for (double level : {2.0, -2.0}) {
      if (negative(fa - level) == negative(fb - level)) continue;
      edges.push_back(bisect_root([&](double s) { return f_of(cell, s) - level; }, a, b));
    }
  };
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    double a = samples[i].s;
    const double b = samples[i + 1].s;
    auto it = std::upper_bound(poles.begin(), poles.end(), a);
    for (; it != poles.end() && *it < b; ++it) {
      const double gap = 1e-9 * std::max(1.0, *it);
      if (*it - gap > a) scan_piece(a, *it - gap);
      a = *it + gap;
    }
    if (a < b) scan_piece(a, b);
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

void validate_window(Interval window, int grid) {
  if (!(window.lo > 0.0) || !(window.hi > window.lo) || !std::isfinite(window.hi))
    throw Error(ErrorCode::InvalidInput, "scan window must satisfy 0 < sigma_min < sigma_max");
  if (grid < 2) throw Error(ErrorCode::InvalidInput, "scan grid must have at least 2 points");
}

}  // namespace

double bisect_root(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  for (int it = 0; it < 200; ++it) {
    const double m = a + 0.5 * (b - a);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if (negative(fm) == negative(fa)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return std::abs(fa) <= std::abs(fb) ? a : b;
}

CellModel constant_cell(const NecklaceParams& params) {
  return [params](double) { return params; };
}

CellModel tabulated_cell(double l1, double l2, double l3, VertexConditionTable table, WaveContext wave) {
  wave.validate();
  return [=](double sigma) {
    const double omega = omega_from_sigma(sigma, wave);
    return NecklaceParams{l1, l2, l3, table.at(wave.epsilon * omega)};
  };
}

std::optional<std::size_t> BandStructure::band_index(double sigma) const {
  for (std::size_t i = 0; i < bands.size(); ++i)
    if (bands[i].contains(sigma)) return i;
  return std::nullopt;
}

BandStructure scan_bands(const NecklaceParams& params, Interval window, int grid, const ScanOptions& opts) {
  return scan_bands(constant_cell(params), window, grid, opts);
}

BandStructure scan_bands(const CellModel& cell, Interval window, int grid, const ScanOptions& opts) {
  validate_window(window, grid);
  BandStructure bs;
  bs.window = window;

  auto samples = collect_samples(cell, window, grid, opts.max_subdivision, &bs.advisories);
  if (std::all_of(samples.begin(), samples.end(), [](const Sample& x) { return x.hp.is_pole(); })) {
    bs.degenerate_loop = true;
    bs.gaps.push_back(window);
    return bs;
  }

  // Consecutive poles with almost no samples between them hide a narrow
  // band around the zero of F they enclose.
  auto poles = bracket_poles(cell, samples);
  std::vector<Sample> extra;
  for (std::size_t i = 0; i + 1 < poles.size(); ++i) {
    const double a = poles[i], b = poles[i + 1];
    const auto inside = std::count_if(samples.begin(), samples.end(),
                                      [&](const Sample& x) { return x.s > a && x.s < b; });
    if (inside >= 3) continue;
    const int k = opts.samples_between_poles;
    for (int j = 1; j <= k; ++j) extra.push_back(evaluate(cell, a + (b - a) * j / (k + 1)));
  }
  if (!extra.empty()) {
    samples.insert(samples.end(), extra.begin(), extra.end());
    std::sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) { return x.s < y.s; });
    poles = bracket_poles(cell, samples);
  }
  bs.poles = poles;

  refine_edges(cell, samples, poles, opts.max_subdivision, &bs.advisories);
  const std::vector<double> edges = band_edges(cell, samples, poles);

  std::vector<double> cuts;
  cuts.push_back(window.lo);
  for (double e : edges)
    if (e > window.lo && e < window.hi) cuts.push_back(e);
  cuts.push_back(window.hi);

  struct Piece {
    Interval iv;
    bool band;
  };
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Interval iv{cuts[i], cuts[i + 1]};
    if (!(iv.width() > 0.0)) continue;
    const double m = iv.mid();
    const bool band = hill_parts(cell(m), m).in_band();
    if (!pieces.empty() && pieces.back().band == band) {
      pieces.back().iv.hi = iv.hi;
    } else {
      pieces.push_back({iv, band});
    }
  }

  // Tangential touches |F| = 2 inside a band show up as hairline gaps.
  auto has_pole = [&](Interval iv) {
    return std::any_of(bs.poles.begin(), bs.poles.end(), [&](double p) { return p >= iv.lo && p <= iv.hi; });
  };
  std::vector<Piece> merged;
  for (const auto& p : pieces) {
    Piece cur = p;
    if (!cur.band && cur.iv.width() < opts.touch_merge_width && !has_pole(cur.iv) && cur.iv.lo > window.lo &&
        cur.iv.hi < window.hi) {
      cur.band = true;
    }
    if (!merged.empty() && merged.back().band == cur.band) {
      merged.back().iv.hi = cur.iv.hi;
    } else {
      merged.push_back(cur);
    }
  }
  for (const auto& p : merged) (p.band ? bs.bands : bs.gaps).push_back(p.iv);
  return bs;
}

double pole_quartic(const VertexCondition& vc, double x, double y) {
  const double a11 = vc(0, 0), a12 = vc(0, 1), a22 = vc(1, 1);
  const double d1 = vc(0, 2), d2 = vc(1, 2);
  const double first = ((y - a22) * d1 * d1 + (x - a11) * d2 * d2 + 2.0 * a12 * d1 * d2) /
                       ((x - a11) * (y - a22) - a12 * a12);
  const double xi = 1.0 / x, yi = 1.0 / y;
  const double second = ((yi + a22) * d1 * d1 + (xi + a11) * d2 * d2 - 2.0 * a12 * d1 * d2) /
                        ((xi + a11) * (yi + a22) - a12 * a12);
  return first + second;
}

std::vector<Pole> locate_poles(const NecklaceParams& params, Interval window, int grid) {
  validate_window(window, grid);
  const CellModel cell = constant_cell(params);
  const auto samples = collect_samples(cell, window, grid, 16, nullptr);
  std::vector<Pole> out;
  for (double s : bracket_poles(cell, samples)) {
    const auto h = loop_homogeneous(params, s);
    Pole p;
    p.sigma = s;
    p.n_value = h.w() / (2.0 * h.y());
    const double x = std::tan(0.5 * s * params.l1), y = std::tan(0.5 * s * params.l2);
    p.quartic_residual = std::abs(pole_quartic(params.vc, x, y));
    out.push_back(p);
  }
  return out;
}

double default_period_length(const NecklaceParams& params) { return params.l3 + params.l2; }

namespace {

double band_f(const NecklaceParams& params, double s) {
  const auto hp = hill_parts(params, s);
  if (!hp.in_band()) {
    std::ostringstream os;
    os << "sigma = " << s << " is outside the band";
    throw Error(ErrorCode::BandEdge, os.str());
  }
  return hp.value();
}

}  // namespace

GroupVelocity group_velocity(const NecklaceParams& params, double sigma, double period_length, Interval band,
                             std::optional<double> step) {
  const double h = step.value_or(std::max(1e-6, 1e-3 * band.width()));
  if (sigma - h < band.lo || sigma + h > band.hi) {
    std::ostringstream os;
    os << "differentiation stencil at sigma = " << sigma << " (h = " << h << ") leaves the band [" << band.lo
       << ", " << band.hi << "]";
    throw Error(ErrorCode::BandEdge, os.str());
  }
  const double offsets[5] = {-h, -0.5 * h, 0.0, 0.5 * h, h};
  double f[5];
  for (int i = 0; i < 5; ++i) f[i] = band_f(params, sigma + offsets[i]);
  // k = arccos(F/2) on the principal branch, k' = -F' / (2 sin k)
  const double sin_k = std::sqrt(std::max(0.0, 1.0 - 0.25 * f[2] * f[2]));
  if (sin_k < 1e-12) {
    std::ostringstream os;
    os << "sin k vanishes at sigma = " << sigma;
    throw Error(ErrorCode::BandEdge, os.str());
  }
  const double coarse = (f[4] - f[0]) / (2.0 * h);
  const double fine = (f[3] - f[1]) / h;
  const double rich = (4.0 * fine - coarse) / 3.0;
  GroupVelocity out;
  out.k_prime = -rich / (2.0 * sin_k);
  out.vg = period_length / out.k_prime;
  const double k_err = std::abs(rich - fine) / (2.0 * sin_k);
  out.error = std::abs(period_length) * k_err / (out.k_prime * out.k_prime);
  out.step = h;
  return out;
}

std::vector<DispersionPoint> dispersion_k(const NecklaceParams& params, Interval band, int grid,
                                          std::optional<double> period_length) {
  if (grid < 2) throw Error(ErrorCode::InvalidInput, "dispersion grid must have at least 2 points");
  if (!(band.hi > band.lo)) throw Error(ErrorCode::InvalidInput, "empty band interval");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double length = period_length.value_or(default_period_length(params));

  std::vector<DispersionPoint> out;
  out.reserve(static_cast<std::size_t>(grid));
  for (int j = 0; j < grid; ++j) {
    const double s = (j == grid - 1) ? band.hi : band.lo + band.width() * j / (grid - 1);
    const auto hp = hill_parts(params, s);
    const bool end = (j == 0 || j == grid - 1);
    double half = hp.is_pole() ? std::numeric_limits<double>::infinity() : hp.value() / 2.0;
    if (!(std::abs(half) < 1.0)) {
      if (end && std::abs(half) < 1.0 + 1e-6) {
        half = std::clamp(half, -1.0, 1.0);
      } else {
        std::ostringstream os;
        os << "|F| >= 2 at sigma = " << s;
        throw Error(ErrorCode::OutsideBand, os.str());
      }
    }
    const double base = std::acos(half);
    double k = base;
    int sgn = 1;
    if (j >= 2) {
      const double pred = 2.0 * out[j - 1].k - out[j - 2].k;
      double best = std::numeric_limits<double>::infinity();
      const double m0 = std::floor(pred / two_pi);
      for (double m = m0 - 1.0; m <= m0 + 1.0; m += 1.0) {
        for (int sg : {1, -1}) {
          const double cand = two_pi * m + sg * base;
          if (std::abs(cand - pred) < best) {
            best = std::abs(cand - pred);
            k = cand;
            sgn = sg;
          }
        }
      }
    }
    DispersionPoint pt;
    pt.sigma = s;
    pt.k = k;
    try {
      pt.vg = sgn * group_velocity(params, s, length, band).vg;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BandEdge) throw;
    }
    out.push_back(pt);
  }
  return out;
}

Interval enclosing_band(const NecklaceParams& params, double sigma, double step, std::optional<Interval> limit) {
  auto in_band = [&](double s) { return hill_parts(params, s).in_band(); };
  if (!in_band(sigma)) {
    std::ostringstream os;
    os << "sigma = " << sigma << " is not inside a band";
    throw Error(ErrorCode::OutsideBand, os.str());
  }
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidInput, "enclosing_band needs a positive step");
  const Interval lim = limit.value_or(Interval{std::numeric_limits<double>::min(), 1e300});

  auto edge = [&](double dir) {
    double inside = sigma;
    constexpr int kMaxSteps = 1 << 20;
    for (int i = 0; i < kMaxSteps; ++i) {
      double next = inside + dir * step;
      if (next <= lim.lo || next >= lim.hi) {
        const double bound = dir > 0 ? lim.hi : lim.lo;
        if (in_band(bound)) return bound;
        next = bound;
      }
      if (!in_band(next)) {
        double a = inside, b = next;  // a in band, b not
        for (int it = 0; it < 200; ++it) {
          const double m = a + 0.5 * (b - a);
          if (m == a || m == b) break;
          (in_band(m) ? a : b) = m;
        }
        return a;
      }
      inside = next;
    }
    return inside;
  };
  return {edge(-1.0), edge(1.0)};
}

}  // namespace necklace
