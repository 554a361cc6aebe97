#pragma once
//
// Experiment reports: per-case records and named assertions, written as one
// JSON document plus a CSV table.
//

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "plap/lab/config.hpp"

namespace plap::lab {

using Json = nlohmann::ordered_json;

/// measured `relation` tolerance, e.g. growth <= 2.
struct Assertion {
  std::string name;
  double measured = 0.0;
  std::string relation = "<=";
  double tolerance = 0.0;
  bool pass = false;
};

inline Assertion check(std::string name, double measured, const std::string& relation, double tolerance) {
  bool ok = false;
  if (relation == "<=") ok = measured <= tolerance;
  else if (relation == "<") ok = measured < tolerance;
  else if (relation == ">=") ok = measured >= tolerance;
  else if (relation == ">") ok = measured > tolerance;
  else if (relation == "==") ok = measured == tolerance;
  else throw std::invalid_argument("check: unknown relation " + relation);
  return {std::move(name), measured, relation, tolerance, ok};
}

struct CaseRecord {
  CaseRecord(std::string id_, double p_, int M_, std::uint64_t seed_) : id(std::move(id_)), p(p_), M(M_), seed(seed_) {}

  std::string id;
  double p = 0.0;
  int M = 0;
  std::uint64_t seed = 0;
  double fitted = std::numeric_limits<double>::quiet_NaN();
  double stability = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  std::map<std::string, double> values;
  std::string note;
};

/// max(a/b, b/a) for positive finite a, b; 1 when both vanish.
inline double stability_factor(double a, double b) {
  if (a == 0.0 && b == 0.0) return 1.0;
  if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
  return std::max(a / b, b / a);
}

inline Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline Json config_json(const ExperimentConfig& c) {
  Json j;
  j["p"] = c.p;
  j["M"] = c.M;
  j["seed"] = c.seed;
  j["seeds"] = c.seeds;
  j["N"] = c.components;
  j["r_min"] = c.r_min;
  j["r_max"] = c.r_max;
  j["theta"] = c.theta;
  j["R"] = c.R;
  j["modulus"] = c.modulus;
  j["young"] = c.young;
  j["q"] = c.q;
  j["lorentz_r"] = c.lorentz_r;
  j["delta"] = c.delta;
  j["points"] = c.points;
  j["stability"] = c.stability;
  return j;
}

struct Report {
  explicit Report(std::string name) : experiment(std::move(name)) {}

  std::string experiment;
  Json config = Json::object();
  std::vector<CaseRecord> cases;
  std::vector<Assertion> assertions;
  std::optional<double> runtime;

  bool pass() const {
    for (const auto& c : cases)
      if (!c.pass) return false;
    for (const auto& a : assertions)
      if (!a.pass) return false;
    return true;
  }

  Json to_json() const {
    Json j;
    j["experiment"] = experiment;
    j["config"] = config;
    Json cs = Json::array();
    for (const auto& c : cases) {
      Json r;
      r["case_id"] = c.id;
      r["p"] = c.p;
      r["M"] = c.M;
      r["seed"] = c.seed;
      r["fitted_constant"] = number(c.fitted);
      r["stability_factor"] = number(c.stability);
      r["pass"] = c.pass;
      Json v = Json::object();
      for (const auto& [k, x] : c.values) v[k] = number(x);
      r["values"] = v;
      if (!c.note.empty()) r["note"] = c.note;
      cs.push_back(r);
    }
    j["cases"] = cs;
    Json as = Json::array();
    for (const auto& a : assertions)
      as.push_back({{"name", a.name}, {"measured", number(a.measured)}, {"relation", a.relation},
                    {"tolerance", number(a.tolerance)}, {"pass", a.pass}});
    j["assertions"] = as;
    j["pass"] = pass();
    if (runtime) j["runtime_s"] = *runtime;
    return j;
  }

  void write_csv(std::ostream& os) const {
    os << "case_id,p,M,seed,fitted_constant,stability_factor,pass\n";
    for (const auto& c : cases)
      os << c.id << ',' << plap::detail::format_real(c.p) << ',' << c.M << ',' << c.seed << ','
         << plap::detail::format_real(c.fitted) << ',' << plap::detail::format_real(c.stability) << ','
         << (c.pass ? "true" : "false") << '\n';
  }

  /// <dir>/<experiment>.json and <dir>/<experiment>.csv
  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream js(dir / (experiment + ".json"));
    js << to_json().dump(2) << '\n';
    std::ofstream csv(dir / (experiment + ".csv"));
    write_csv(csv);
    if (!js || !csv) throw std::runtime_error("report: cannot write to " + dir.string());
  }
};

}  // namespace plap::lab
