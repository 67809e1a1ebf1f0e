#pragma once

// Run configuration for the command-line front end.
//
//   {
//     "necklace": { "l1": 1.2, "l2": 1.0, "l3": 0.5,
//                   "A": [[a11, a12, a13], [a21, a22, a23], [a31, a32, a33]],
//                   "wave": { "epsilon": 0.1, "lambda0": 1.0, "lambda1": 3.0 } },
//     "scan":       { "sigma_min": 0.1, "sigma_max": 10.0, "grid": 2000 },
//     "truncation": { "n_cells": 10 },
//     "design":     { "sigma0": 5.0, "eps": 0.05, "branch_offsets": [0, 0],
//                     "eps_sweep": [0.1, 0.05, 0.025] },
//     "period_length": 1.5,
//     "output":     { "format": "csv", "path": "bands.csv" },
//     "jobs": 4
//   }
//
// "A" may also be a flat row-major list of 9 numbers. The design command
// needs only "A"; the lengths are then optional. Instead of "A" the
// necklace may carry "A_table": [{"eps_omega": x, "A": [...]}, ...] (band
// scans only, requires "wave").

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "necklace/graph_model.hpp"

namespace necklace {

struct ScanConfig {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  int grid = 0;
};

struct DesignConfig {
  std::optional<double> sigma0;
  std::optional<double> eps;
  std::optional<std::array<int, 2>> branch_offsets;
  std::vector<double> eps_sweep;
};

enum class OutputFormat { Csv, Json };

struct OutputConfig {
  std::optional<OutputFormat> format;
  std::optional<std::string> path;
};

struct RunConfig {
  nlohmann::json source;  // echoed into JSON reports
  std::optional<double> l1, l2, l3;
  std::optional<VertexCondition> vc;
  std::optional<VertexConditionTable> a_table;
  std::optional<WaveContext> wave;
  std::optional<ScanConfig> scan;
  std::optional<int> n_cells;
  DesignConfig design;
  std::optional<double> period_length;
  OutputConfig output;
  int jobs = 1;

  // Full cell; throws ConfigError when lengths or A are missing.
  NecklaceParams necklace() const;
};

// Parses a JSON document. Syntax errors report line and column; schema
// errors name the offending field. Throws Error(ConfigError) or
// Error(AsymmetricCondition).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// The NecklaceParams schema alone: {"l1", "l2", "l3", "A"}.
NecklaceParams parse_necklace(const nlohmann::json& j);
nlohmann::json necklace_to_json(const NecklaceParams& params);

}  // namespace necklace
