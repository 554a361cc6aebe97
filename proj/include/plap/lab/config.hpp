#pragma once
//
// Experiment configuration: a flat key = value text file. Lines starting
// with '#' are comments; list values are comma separated.
//

#include <cstdint>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/mesh.hpp"
#include "plap/oscillation.hpp"
#include "plap/rearrange.hpp"

namespace plap::lab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line)
      : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + msg : "config: " + msg),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct ExperimentConfig {
  std::vector<double> p{1.5, 2.0, 3.0};
  std::vector<int> M{32, 64};
  std::uint64_t seed = 1;
  int seeds = 5;
  int components = 1;
  double r_min = 0.0625;
  double r_max = 0.25;
  double theta = 0.5;
  double R = 0.2;
  std::string modulus = "power:0.3";
  std::string young = "power:4";
  double q = 4.0;
  double lorentz_r = 2.0;
  double delta = 0.5;
  int points = 5;
  double stability = 2.0;
  bool assert_mode = false;

  void validate() const {
    if (p.empty()) throw ConfigError("at least one p is required", 0);
    if (M.empty()) throw ConfigError("at least one M is required", 0);
    for (double v : p)
      if (!(v > 1.0)) throw ConfigError("p must exceed 1", 0);
    for (int m : M)
      if (m < 4) throw ConfigError("M must be at least 4", 0);
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0,1)", 0);
    if (!(r_min > 0.0 && r_min <= r_max)) throw ConfigError("need 0 < r_min <= r_max", 0);
    if (!(R > 0.0)) throw ConfigError("R must be positive", 0);
    if (!(stability > 1.0)) throw ConfigError("stability factor must exceed 1", 0);
    if (seeds < 1 || components < 1 || points < 1) throw ConfigError("seeds, N and points must be positive", 0);
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)", 0);
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(plap::detail::trim(cur));
  return out;
}

inline double to_real(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + s + "'", line);
  }
}

inline long to_int(const std::string& s, int line) {
  const double v = to_real(s, line);
  if (v != static_cast<double>(static_cast<long>(v))) throw ConfigError("expected an integer, got '" + s + "'", line);
  return static_cast<long>(v);
}

inline bool to_bool(const std::string& s, int line) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected a boolean, got '" + s + "'", line);
}

}  // namespace detail

/// power:beta | log:sigma:scale | const | dini_log:scale
inline Modulus parse_modulus(const std::string& spec) {
  const auto f = detail::split(spec, ':');
  auto num = [&](std::size_t i) {
    if (i >= f.size()) throw ConfigError("modulus '" + spec + "': missing parameter", 0);
    return detail::to_real(f[i], 0);
  };
  if (f.empty()) throw ConfigError("empty modulus spec", 0);
  if (f[0] == "power") return Modulus::power(num(1));
  if (f[0] == "log") return Modulus::log_inverse(num(1), num(2));
  if (f[0] == "const") return Modulus::constant();
  if (f[0] == "dini_log") return Modulus::dini_log(num(1));
  throw ConfigError("unknown modulus family '" + f[0] + "'", 0);
}

/// power:q[:scale] | exp:gamma:q | cap:q
inline YoungFunction parse_young(const std::string& spec) {
  const auto f = detail::split(spec, ':');
  auto num = [&](std::size_t i) {
    if (i >= f.size()) throw ConfigError("Young function '" + spec + "': missing parameter", 0);
    return detail::to_real(f[i], 0);
  };
  if (f.empty()) throw ConfigError("empty Young function spec", 0);
  if (f[0] == "power") return YoungFunction::power(num(1), f.size() > 2 ? num(2) : 1.0);
  if (f[0] == "exp") return YoungFunction::exp_type(num(1), num(2));
  if (f[0] == "cap") return YoungFunction::linf_cap(num(1));
  throw ConfigError("unknown Young function family '" + f[0] + "'", 0);
}

inline ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string raw;
  int ln = 0;
  while (std::getline(is, raw)) {
    ++ln;
    const std::string line = plap::detail::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", ln);
    const std::string key = plap::detail::trim(line.substr(0, eq));
    const std::string val = plap::detail::trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError("empty value for '" + key + "'", ln);
    if (key == "p") {
      cfg.p.clear();
      for (const auto& s : detail::split(val, ',')) cfg.p.push_back(detail::to_real(s, ln));
    } else if (key == "M") {
      cfg.M.clear();
      for (const auto& s : detail::split(val, ',')) cfg.M.push_back(static_cast<int>(detail::to_int(s, ln)));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::to_int(val, ln));
    } else if (key == "seeds") {
      cfg.seeds = static_cast<int>(detail::to_int(val, ln));
    } else if (key == "N") {
      cfg.components = static_cast<int>(detail::to_int(val, ln));
    } else if (key == "r_min") {
      cfg.r_min = detail::to_real(val, ln);
    } else if (key == "r_max") {
      cfg.r_max = detail::to_real(val, ln);
    } else if (key == "theta") {
      cfg.theta = detail::to_real(val, ln);
    } else if (key == "R") {
      cfg.R = detail::to_real(val, ln);
    } else if (key == "modulus") {
      try {
        parse_modulus(val);
      } catch (const std::exception& e) {
        throw ConfigError(e.what(), ln);
      }
      cfg.modulus = val;
    } else if (key == "young") {
      try {
        parse_young(val);
      } catch (const std::exception& e) {
        throw ConfigError(e.what(), ln);
      }
      cfg.young = val;
    } else if (key == "q") {
      cfg.q = detail::to_real(val, ln);
    } else if (key == "lorentz_r") {
      cfg.lorentz_r = detail::to_real(val, ln);
    } else if (key == "delta") {
      cfg.delta = detail::to_real(val, ln);
    } else if (key == "points") {
      cfg.points = static_cast<int>(detail::to_int(val, ln));
    } else if (key == "stability") {
      cfg.stability = detail::to_real(val, ln);
    } else if (key == "assert") {
      cfg.assert_mode = detail::to_bool(val, ln);
    } else {
      throw ConfigError("unknown key '" + key + "'", ln);
    }
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

}  // namespace plap::lab
