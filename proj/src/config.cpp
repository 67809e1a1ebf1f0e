#include "necklace/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "necklace/error.hpp"

namespace necklace {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, "field '" + field + "': " + msg);
}

double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& prefix) {
  if (!obj.contains(key)) return std::nullopt;
  return number_at(obj.at(key), prefix + key);
}

int integer_at(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<int>();
}

void require_object(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected an object");
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& prefix) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(prefix + key, "unknown field");
  }
}

VertexCondition parse_matrix(const json& j, const std::string& field) {
  Eigen::Matrix3d a;
  if (j.is_array() && j.size() == 9) {
    for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = number_at(j[i], field + "[" + std::to_string(i) + "]");
  } else if (j.is_array() && j.size() == 3) {
    for (int r = 0; r < 3; ++r) {
      const std::string row = field + "[" + std::to_string(r) + "]";
      if (!j[r].is_array() || j[r].size() != 3) fail(row, "expected a row of 3 numbers");
      for (int c = 0; c < 3; ++c) a(r, c) = number_at(j[r][c], row + "[" + std::to_string(c) + "]");
    }
  } else {
    fail(field, "expected 3x3 nested rows or 9 row-major numbers");
  }
  try {
    return VertexCondition::from_matrix(a);
  } catch (const Error& e) {
    throw Error(ErrorCode::AsymmetricCondition, "field '" + field + "': " + e.what());
  }
}

WaveContext parse_wave(const json& j, const std::string& prefix) {
  require_object(j, prefix);
  reject_unknown(j, {"epsilon", "lambda0", "lambda1"}, prefix + ".");
  WaveContext w;
  for (const char* k : {"epsilon", "lambda0", "lambda1"})
    if (!j.contains(k)) fail(prefix + "." + k, "missing");
  w.epsilon = number_at(j.at("epsilon"), prefix + ".epsilon");
  w.lambda0 = number_at(j.at("lambda0"), prefix + ".lambda0");
  w.lambda1 = number_at(j.at("lambda1"), prefix + ".lambda1");
  try {
    w.validate();
  } catch (const Error& e) {
    fail(prefix, e.what());
  }
  return w;
}

void parse_necklace_block(const json& j, RunConfig& cfg) {
  const std::string p = "necklace";
  require_object(j, p);
  reject_unknown(j, {"l1", "l2", "l3", "A", "A_table", "wave"}, p + ".");
  cfg.l1 = optional_number(j, "l1", p + ".");
  cfg.l2 = optional_number(j, "l2", p + ".");
  cfg.l3 = optional_number(j, "l3", p + ".");
  const int given = cfg.l1.has_value() + cfg.l2.has_value() + cfg.l3.has_value();
  if (given != 0 && given != 3) fail(p, "give all of l1, l2, l3 or none");
  if (given == 3) {
    NecklaceParams probe{*cfg.l1, *cfg.l2, *cfg.l3, {}};
    try {
      probe.validate();
    } catch (const Error& e) {
      fail(p, e.what());
    }
  }
  if (j.contains("wave")) cfg.wave = parse_wave(j.at("wave"), p + ".wave");
  if (j.contains("A") && j.contains("A_table")) fail(p, "give either A or A_table, not both");
  if (j.contains("A")) cfg.vc = parse_matrix(j.at("A"), p + ".A");
  if (j.contains("A_table")) {
    const auto& t = j.at("A_table");
    if (!t.is_array() || t.empty()) fail(p + ".A_table", "expected a non-empty array");
    std::vector<std::pair<double, VertexCondition>> samples;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string f = p + ".A_table[" + std::to_string(i) + "]";
      require_object(t[i], f);
      if (!t[i].contains("eps_omega") || !t[i].contains("A")) fail(f, "needs eps_omega and A");
      samples.emplace_back(number_at(t[i].at("eps_omega"), f + ".eps_omega"), parse_matrix(t[i].at("A"), f + ".A"));
    }
    try {
      cfg.a_table = VertexConditionTable(std::move(samples));
    } catch (const Error& e) {
      fail(p + ".A_table", e.what());
    }
  }
  if (!cfg.vc && !cfg.a_table) fail(p + ".A", "missing");
}

}  // namespace

NecklaceParams RunConfig::necklace() const {
  if (!l1 || !l2 || !l3) fail("necklace", "lengths l1, l2, l3 are required for this command");
  if (!vc) fail("necklace.A", "a constant vertex condition is required for this command");
  return {*l1, *l2, *l3, *vc};
}

NecklaceParams parse_necklace(const json& j) {
  RunConfig cfg;
  parse_necklace_block(j, cfg);
  return cfg.necklace();
}

json necklace_to_json(const NecklaceParams& params) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) a.push_back({params.vc(r, 0), params.vc(r, 1), params.vc(r, 2)});
  return {{"l1", params.l1}, {"l2", params.l2}, {"l3", params.l3}, {"A", a}};
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line/column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << "JSON syntax error at line " << line << ", column " << col << ": " << e.what();
    throw Error(ErrorCode::ConfigError, os.str());
  }
  require_object(doc, "<root>");
  reject_unknown(doc, {"necklace", "scan", "truncation", "design", "period_length", "output", "jobs"}, "");

  RunConfig cfg;
  cfg.source = doc;
  if (doc.contains("necklace")) parse_necklace_block(doc.at("necklace"), cfg);

  if (doc.contains("scan")) {
    const auto& s = doc.at("scan");
    require_object(s, "scan");
    reject_unknown(s, {"sigma_min", "sigma_max", "grid"}, "scan.");
    ScanConfig sc;
    for (const char* k : {"sigma_min", "sigma_max", "grid"})
      if (!s.contains(k)) fail(std::string("scan.") + k, "missing");
    sc.sigma_min = number_at(s.at("sigma_min"), "scan.sigma_min");
    sc.sigma_max = number_at(s.at("sigma_max"), "scan.sigma_max");
    sc.grid = integer_at(s.at("grid"), "scan.grid");
    cfg.scan = sc;
  }
  if (doc.contains("truncation")) {
    const auto& t = doc.at("truncation");
    require_object(t, "truncation");
    reject_unknown(t, {"n_cells"}, "truncation.");
    if (!t.contains("n_cells")) fail("truncation.n_cells", "missing");
    cfg.n_cells = integer_at(t.at("n_cells"), "truncation.n_cells");
  }
  if (doc.contains("design")) {
    const auto& d = doc.at("design");
    require_object(d, "design");
    reject_unknown(d, {"sigma0", "eps", "branch_offsets", "eps_sweep"}, "design.");
    cfg.design.sigma0 = optional_number(d, "sigma0", "design.");
    cfg.design.eps = optional_number(d, "eps", "design.");
    if (d.contains("branch_offsets")) {
      const auto& b = d.at("branch_offsets");
      if (!b.is_array() || b.size() != 2) fail("design.branch_offsets", "expected [m1, m2]");
      cfg.design.branch_offsets = std::array<int, 2>{integer_at(b[0], "design.branch_offsets[0]"),
                                                     integer_at(b[1], "design.branch_offsets[1]")};
    }
    if (d.contains("eps_sweep")) {
      const auto& e = d.at("eps_sweep");
      if (!e.is_array()) fail("design.eps_sweep", "expected an array of numbers");
      for (std::size_t i = 0; i < e.size(); ++i)
        cfg.design.eps_sweep.push_back(number_at(e[i], "design.eps_sweep[" + std::to_string(i) + "]"));
    }
  }
  cfg.period_length = optional_number(doc, "period_length", "");
  if (cfg.period_length && !(*cfg.period_length > 0.0)) fail("period_length", "must be positive");
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    require_object(o, "output");
    reject_unknown(o, {"format", "path"}, "output.");
    if (o.contains("format")) {
      const auto& f = o.at("format");
      if (f == "csv") {
        cfg.output.format = OutputFormat::Csv;
      } else if (f == "json") {
        cfg.output.format = OutputFormat::Json;
      } else {
        fail("output.format", "expected \"csv\" or \"json\"");
      }
    }
    if (o.contains("path")) {
      if (!o.at("path").is_string()) fail("output.path", "expected a string");
      cfg.output.path = o.at("path").get<std::string>();
    }
  }
  if (doc.contains("jobs")) cfg.jobs = integer_at(doc.at("jobs"), "jobs");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace necklace
