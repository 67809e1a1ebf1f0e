#include "necklace/commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "necklace/designer.hpp"
#include "necklace/error.hpp"
#include "necklace/parallel.hpp"
#include "necklace/scattering.hpp"
#include "necklace/spectrum.hpp"

namespace necklace {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

OutputFormat format_or(const RunConfig& cfg, OutputFormat fallback) { return cfg.output.format.value_or(fallback); }

Interval window_of(const RunConfig& cfg) { return {cfg.scan->sigma_min, cfg.scan->sigma_max}; }

json interval_json(Interval iv) { return json::array({iv.lo, iv.hi}); }

std::string optional_number(std::optional<double> v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

void check_command_config(const std::string& command, const RunConfig& cfg) {
  const bool scan_cmd = command == "bands" || command == "dispersion" || command == "reflect";
  if (scan_cmd) {
    if (!cfg.scan) config_fail("command '" + command + "' needs a 'scan' block");
    const auto& s = *cfg.scan;
    if (!(s.sigma_min > 0.0) || !(s.sigma_max > s.sigma_min))
      config_fail("field 'scan': need 0 < sigma_min < sigma_max");
    if (s.grid < 2) config_fail("field 'scan.grid': must be at least 2");
    if (!cfg.l1) config_fail("command '" + command + "' needs necklace lengths l1, l2, l3");
    if (command != "bands" && !cfg.vc)
      config_fail("command '" + command + "' needs a constant vertex condition 'necklace.A'");
    if (cfg.a_table && !cfg.wave) config_fail("field 'necklace.A_table': requires 'necklace.wave'");
  }
  if (command == "reflect") {
    if (!cfg.n_cells) config_fail("command 'reflect' needs 'truncation.n_cells'");
    if (*cfg.n_cells < 1) config_fail("field 'truncation.n_cells': must be >= 1");
  }
  if (command == "design") {
    if (!cfg.vc) config_fail("command 'design' needs 'necklace.A'");
    if (!cfg.design.sigma0) config_fail("command 'design' needs 'design.sigma0'");
    if (!(*cfg.design.sigma0 > 0.0)) config_fail("field 'design.sigma0': must be positive");
    if (cfg.design.eps_sweep.empty() && !cfg.design.eps) config_fail("command 'design' needs 'design.eps'");
    if (cfg.design.eps && !(*cfg.design.eps > 0.0)) config_fail("field 'design.eps': must be positive");
    for (double e : cfg.design.eps_sweep)
      if (!(e > 0.0)) config_fail("field 'design.eps_sweep': values must be positive");
    if (cfg.n_cells && *cfg.n_cells < 1) config_fail("field 'truncation.n_cells': must be >= 1");
  }
  if (cfg.jobs < 1) config_fail("field 'jobs': must be >= 1");
}

std::string cmd_bands(const RunConfig& cfg) {
  check_command_config("bands", cfg);
  const CellModel cell = cfg.a_table ? tabulated_cell(*cfg.l1, *cfg.l2, *cfg.l3, *cfg.a_table, *cfg.wave)
                                     : constant_cell(cfg.necklace());
  const Interval window = window_of(cfg);
  const int grid = cfg.scan->grid;
  const auto bs = scan_bands(cell, window, grid);

  if (format_or(cfg, OutputFormat::Csv) == OutputFormat::Json) {
    json j;
    j["config"] = cfg.source;
    j["window"] = interval_json(bs.window);
    j["bands"] = json::array();
    for (auto b : bs.bands) j["bands"].push_back(interval_json(b));
    j["gaps"] = json::array();
    for (auto g : bs.gaps) j["gaps"].push_back(interval_json(g));
    j["poles"] = bs.poles;
    j["degenerate_loop"] = bs.degenerate_loop;
    j["advisories"] = bs.advisories;
    return j.dump(2) + "\n";
  }

  struct Row {
    double sigma;
    bool pole_root;
  };
  std::vector<Row> rows;
  rows.reserve(static_cast<std::size_t>(grid) + bs.poles.size());
  for (int i = 0; i < grid; ++i)
    rows.push_back({(i == grid - 1) ? window.hi : window.lo + window.width() * i / (grid - 1), false});
  for (double p : bs.poles) rows.push_back({p, true});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.sigma < b.sigma; });

  std::string out = "sigma,F,is_pole,band_id\n";
  for (const auto& row : rows) {
    const auto hp = hill_parts(cell(row.sigma), row.sigma);
    if (row.pole_root || bs.degenerate_loop || hp.is_pole()) {
      out += format_number(row.sigma) + ",,1,-1\n";
      continue;
    }
    const auto idx = bs.band_index(row.sigma);
    out += format_number(row.sigma) + "," + format_number(hp.value()) + ",0," +
           (idx ? std::to_string(*idx) : std::string("-1")) + "\n";
  }
  return out;
}

std::string cmd_dispersion(const RunConfig& cfg) {
  check_command_config("dispersion", cfg);
  const auto params = cfg.necklace();
  const int grid = cfg.scan->grid;
  const auto bs = scan_bands(params, window_of(cfg), grid);
  const double length = cfg.period_length.value_or(default_period_length(params));

  const auto per_band = parallel_map(bs.bands.size(), cfg.jobs, [&](std::size_t b) {
    return dispersion_k(params, bs.bands[b], std::max(grid, 32), length);
  });

  if (format_or(cfg, OutputFormat::Csv) == OutputFormat::Json) {
    json j;
    j["config"] = cfg.source;
    j["period_length"] = length;
    j["bands"] = json::array();
    for (std::size_t b = 0; b < per_band.size(); ++b) {
      json pts = json::array();
      for (const auto& p : per_band[b])
        if (p.vg) pts.push_back({{"sigma", p.sigma}, {"k", p.k}, {"vg", *p.vg}});
      j["bands"].push_back({{"interval", interval_json(bs.bands[b])}, {"points", pts}});
    }
    return j.dump(2) + "\n";
  }
  std::string out = "sigma,k,vg,band_id\n";
  for (std::size_t b = 0; b < per_band.size(); ++b) {
    for (const auto& p : per_band[b]) {
      if (!p.vg) continue;
      out += format_number(p.sigma) + "," + format_number(p.k) + "," + format_number(*p.vg) + "," +
             std::to_string(b) + "\n";
    }
  }
  return out;
}

std::string cmd_reflect(const RunConfig& cfg) {
  check_command_config("reflect", cfg);
  const TruncatedNecklace tn{cfg.necklace(), *cfg.n_cells};
  const Interval window = window_of(cfg);
  const int grid = cfg.scan->grid;

  struct Row {
    double sigma = 0.0;
    std::optional<double> formula, r, t, defect;
    std::string flag;
  };
  const auto rows = parallel_map(static_cast<std::size_t>(grid), cfg.jobs, [&](std::size_t i) {
    Row row;
    row.sigma = (static_cast<int>(i) == grid - 1) ? window.hi : window.lo + window.width() * i / (grid - 1);
    try {
      row.formula = reflection_formula(tn, row.sigma).r;
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::OutsideBand: row.flag = "gap"; break;
        case ErrorCode::BandEdge: row.flag = "edge"; break;
        case ErrorCode::TransferPole: row.flag = "pole"; break;
        default: throw;
      }
    }
    try {
      const auto sc = solve_scattering_oracle(tn, row.sigma);
      row.r = std::abs(sc.r);
      row.t = std::abs(sc.t);
      row.defect = sc.unitarity_defect;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularSystem) throw;
      row.flag += row.flag.empty() ? "singular" : "+singular";
    }
    return row;
  });

  if (format_or(cfg, OutputFormat::Csv) == OutputFormat::Json) {
    json j;
    j["config"] = cfg.source;
    j["rows"] = json::array();
    for (const auto& row : rows) {
      j["rows"].push_back({{"sigma", row.sigma},
                           {"formula_r", row.formula ? json(*row.formula) : json()},
                           {"oracle_r", row.r ? json(*row.r) : json()},
                           {"oracle_t", row.t ? json(*row.t) : json()},
                           {"unitarity_defect", row.defect ? json(*row.defect) : json()},
                           {"flag", row.flag}});
    }
    return j.dump(2) + "\n";
  }
  std::string out = "sigma,formula_r,oracle_r,oracle_t,unitarity_defect,flag\n";
  for (const auto& row : rows) {
    out += format_number(row.sigma) + "," + optional_number(row.formula) + "," + optional_number(row.r) + "," +
           optional_number(row.t) + "," + optional_number(row.defect) + "," + row.flag + "\n";
  }
  return out;
}

namespace {

json design_json(const DesignResult& d) {
  const auto& g = d.diagnostics;
  json j;
  j["request"] = {{"sigma0", d.request.sigma0},
                  {"eps", d.request.eps},
                  {"n_cells", d.request.n_cells},
                  {"branch_offsets", d.request.branch_offsets ? json(*d.request.branch_offsets) : json()}};
  j["result"] = {{"x", d.xy.x},
                 {"y", d.xy.y},
                 {"y0", d.xy.y0},
                 {"gamma", d.xy.gamma},
                 {"gamma_raw", d.xy.gamma_raw},
                 {"transparency_rational_residual", d.xy.residual},
                 {"branch", {d.arches.m1, d.arches.m2}},
                 {"arches_swapped", d.arches.swapped},
                 {"segment_indeterminate", d.segment_indeterminate},
                 {"necklace", necklace_to_json(d.params)}};
  j["diagnostics"] = {{"F_sigma0", g.f_sigma0},
                      {"hs_norm2_minus_2", g.hs_excess},
                      {"transparency_residual", g.transparency_residual},
                      {"n_sigma0", g.n_sigma0},
                      {"pole_sigma", g.pole_sigma},
                      {"pole_distance", g.pole_distance},
                      {"pole_side", g.pole_side > 0 ? "right" : "left"},
                      {"band", interval_json(g.band)},
                      {"slow_interval", interval_json(g.slow)},
                      {"min_abs_vg", g.min_vg},
                      {"oracle_r", g.oracle_r},
                      {"oracle_t", g.oracle_t},
                      {"n_cells", g.n_cells}};
  return j;
}

}  // namespace

DesignOutput cmd_design(const RunConfig& cfg) {
  check_command_config("design", cfg);
  DesignRequest req;
  req.vc = *cfg.vc;
  req.sigma0 = *cfg.design.sigma0;
  req.eps = cfg.design.eps.value_or(0.0);
  req.branch_offsets = cfg.design.branch_offsets;
  req.n_cells = cfg.n_cells.value_or(10);
  req.period_length = cfg.period_length;

  DesignOutput out;
  if (!cfg.design.eps_sweep.empty()) {
    const auto study = scaling_study(req, cfg.design.eps_sweep, cfg.jobs);
    if (format_or(cfg, OutputFormat::Json) == OutputFormat::Json) {
      json j;
      j["config"] = cfg.source;
      j["designs"] = json::array();
      for (const auto& d : study.designs) j["designs"].push_back(design_json(d));
      j["slopes"] = {{"pole_distance", study.slope_pole_distance},
                     {"min_abs_vg", study.slope_min_vg},
                     {"oracle_r", study.slope_oracle_r}};
      out.report = j.dump(2) + "\n";
    } else {
      std::string csv = "row,eps,l1,l2,l3,pole_distance,min_vg,oracle_r\n";
      for (const auto& d : study.designs) {
        csv += "design," + format_number(d.request.eps) + "," + format_number(d.params.l1) + "," +
               format_number(d.params.l2) + "," + format_number(d.params.l3) + "," +
               format_number(d.diagnostics.pole_distance) + "," + format_number(d.diagnostics.min_vg) + "," +
               format_number(d.diagnostics.oracle_r) + "\n";
      }
      csv += "slope,,,,," + format_number(study.slope_pole_distance) + "," + format_number(study.slope_min_vg) +
             "," + format_number(study.slope_oracle_r) + "\n";
      out.report = csv;
    }
    return out;
  }

  const auto result = design(req);
  const auto rows = verify_design(result, req.n_cells);
  std::string csv = "name,stored,recomputed,abs_diff,compared\n";
  json ver = json::array();
  for (const auto& r : rows) {
    csv += r.name + "," + format_number(r.stored) + "," + format_number(r.recomputed) + "," +
           format_number(std::abs(r.stored - r.recomputed)) + "," + (r.compared ? "1" : "0") + "\n";
    ver.push_back({{"name", r.name}, {"stored", r.stored}, {"recomputed", r.recomputed}, {"compared", r.compared}});
  }
  out.verification = csv;
  if (format_or(cfg, OutputFormat::Json) == OutputFormat::Csv) {
    out.report = csv;
  } else {
    json j = design_json(result);
    j["config"] = cfg.source;
    j["verification"] = ver;
    out.report = j.dump(2) + "\n";
  }
  return out;
}

}  // namespace necklace
