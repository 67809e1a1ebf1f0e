#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "necklace/commands.hpp"
#include "necklace/config.hpp"
#include "necklace/error.hpp"

using namespace necklace;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<double> sigma_min, sigma_max, eps, sigma0;
  std::optional<int> grid, cells, jobs;
  std::optional<std::string> output, format, verify_csv;
};

void apply(const Overrides& o, RunConfig& cfg) {
  if (o.sigma_min || o.sigma_max || o.grid) {
    if (!cfg.scan) cfg.scan = ScanConfig{};
    if (o.sigma_min) cfg.scan->sigma_min = *o.sigma_min;
    if (o.sigma_max) cfg.scan->sigma_max = *o.sigma_max;
    if (o.grid) cfg.scan->grid = *o.grid;
  }
  if (o.cells) cfg.n_cells = *o.cells;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.eps) {
    cfg.design.eps = *o.eps;
    cfg.design.eps_sweep.clear();
  }
  if (o.sigma0) cfg.design.sigma0 = *o.sigma0;
  if (o.output) cfg.output.path = *o.output;
  if (o.format) cfg.output.format = (*o.format == "json") ? OutputFormat::Json : OutputFormat::Csv;
}

void write_to(const std::optional<std::string>& path, const std::string& text) {
  if (!path || *path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(*path);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot open output file '" + *path + "'");
  f << text;
}

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config_path, "JSON run configuration")->required();
  sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("-o,--output", o.output, "output file (default stdout)");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_scan(CLI::App* sub, Overrides& o) {
  sub->add_option("--sigma-min", o.sigma_min, "scan window start");
  sub->add_option("--sigma-max", o.sigma_max, "scan window end");
  sub->add_option("--grid", o.grid, "number of grid points");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Band structure, dispersion, reflection and slow-light design for periodic necklace graphs"};
  app.require_subcommand(1);
  Overrides o;

  auto* bands = app.add_subcommand("bands", "bands, gaps and poles of the Hill discriminant");
  add_common(bands, o);
  add_scan(bands, o);

  auto* disp = app.add_subcommand("dispersion", "quasimomentum and group velocity in every band");
  add_common(disp, o);
  add_scan(disp, o);

  auto* refl = app.add_subcommand("reflect", "reflection of a truncated necklace");
  add_common(refl, o);
  add_scan(refl, o);
  refl->add_option("--cells", o.cells, "number of cells N")->check(CLI::PositiveNumber);

  auto* des = app.add_subcommand("design", "lengths for a slow-light band at sigma0");
  add_common(des, o);
  des->add_option("--sigma0", o.sigma0, "target wavenumber");
  des->add_option("--eps", o.eps, "detuning parameter (overrides eps_sweep)");
  des->add_option("--cells", o.cells, "cells for the oracle reflection check");
  des->add_option("--verify-csv", o.verify_csv, "write the verification table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load_config(o.config_path);
    apply(o, cfg);
    if (bands->parsed()) {
      write_to(cfg.output.path, cmd_bands(cfg));
    } else if (disp->parsed()) {
      write_to(cfg.output.path, cmd_dispersion(cfg));
    } else if (refl->parsed()) {
      write_to(cfg.output.path, cmd_reflect(cfg));
    } else if (des->parsed()) {
      const auto out = cmd_design(cfg);
      write_to(cfg.output.path, out.report);
      if (o.verify_csv && !out.verification.empty()) write_to(o.verify_csv, out.verification);
    }
  } catch (const Error& e) {
    std::cerr << "necklace: " << to_string(e.code()) << ": " << e.what() << "\n";
    return is_input_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "necklace: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
