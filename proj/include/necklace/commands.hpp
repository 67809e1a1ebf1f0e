#pragma once

// Subcommand bodies of the CLI. Each returns the data stream as a string so
// the front end only decides where it goes.
//
// CSV columns:
//   bands       sigma,F,is_pole,band_id
//   dispersion  sigma,k,vg,band_id
//   reflect     sigma,formula_r,oracle_r,oracle_t,unitarity_defect,flag
//   design      name,stored,recomputed,abs_diff,compared   (verification)
//   design with eps_sweep: row,eps,l1,l2,l3,pole_distance,min_vg,oracle_r

#include <string>

#include "necklace/config.hpp"

namespace necklace {

// Every value goes through this: 17 significant digits, "%.17g".
std::string format_number(double v);

// Throws ConfigError when the subcommand's required blocks are missing.
void check_command_config(const std::string& command, const RunConfig& cfg);

std::string cmd_bands(const RunConfig& cfg);
std::string cmd_dispersion(const RunConfig& cfg);
std::string cmd_reflect(const RunConfig& cfg);

struct DesignOutput {
  std::string report;        // JSON report (or the CSV asked for by output.format)
  std::string verification;  // verification CSV; empty in sweep mode
};
DesignOutput cmd_design(const RunConfig& cfg);

}  // namespace necklace
