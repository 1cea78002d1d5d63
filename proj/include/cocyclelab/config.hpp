// Lab configuration: a flat TOML subset (sections, key = value, # comments)
// that round-trips exactly through serialize/parse.
#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cocyclelab/torus.hpp"

namespace cocyclelab {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LabConfig {
  // base automorphism and cover
  IMat2 F{5, 2, 2, 1};
  int q1 = 1, q2 = 1;

  // numerics
  int grid = 128;
  int iterations = 2000;
  double tol_eig = 1e-9;
  double tol_disc = 1e-9;  // relative discriminant threshold
  double tol_nil = 1e-6;
  double obstruction_tol = 1e-8;

  // search budgets
  int period_cap = 6;
  int ball_cap = 8;

  // artifacts
  std::string output_dir = ".";
  int workers = 1;

  bool operator==(const LabConfig& o) const {
    return F.a == o.F.a && F.b == o.F.b && F.c == o.F.c && F.d == o.F.d && q1 == o.q1 && q2 == o.q2 &&
           grid == o.grid && iterations == o.iterations && tol_eig == o.tol_eig && tol_disc == o.tol_disc &&
           tol_nil == o.tol_nil && obstruction_tol == o.obstruction_tol && period_cap == o.period_cap &&
           ball_cap == o.ball_cap && output_dir == o.output_dir && workers == o.workers;
  }

  void validate() const {
    LatticeAutomorphism probe(F, q1, q2);  // throws if not hyperbolic / cover invalid
    (void)probe;
    if (grid < 8) throw config_error("grid must be at least 8");
    if (iterations < 1) throw config_error("iterations must be positive");
    if (!(tol_eig > 0 && tol_disc > 0 && tol_nil > 0 && obstruction_tol > 0))
      throw config_error("tolerances must be positive");
    if (period_cap < 1 || ball_cap < 1) throw config_error("period caps must be positive");
    if (workers < 1) throw config_error("workers must be positive");
    if (output_dir.empty()) throw config_error("output_dir must not be empty");
  }
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_num(const std::string& v, const std::string& key) {
  std::size_t used = 0;
  double out;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw config_error("bad numeric value for " + key + ": '" + v + "'");
  }
  if (used != v.size()) throw config_error("trailing junk in value for " + key + ": '" + v + "'");
  return out;
}

inline int parse_int(const std::string& v, const std::string& key) {
  double d = parse_num(v, key);
  int i = int(d);
  if (double(i) != d) throw config_error(key + " must be an integer");
  return i;
}

inline std::string parse_str(const std::string& v, const std::string& key) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"')
    throw config_error(key + " must be a double-quoted string");
  return v.substr(1, v.size() - 2);
}

}  // namespace detail

inline std::string serialize_config(const LabConfig& c) {
  using detail::fmt17;
  std::ostringstream o;
  o << "[automorphism]\n"
    << "a = " << (long long)c.F.a << "\nb = " << (long long)c.F.b << "\nc = " << (long long)c.F.c << "\nd = "
    << (long long)c.F.d << "\n"
    << "q1 = " << c.q1 << "\nq2 = " << c.q2 << "\n\n"
    << "[numerics]\n"
    << "grid = " << c.grid << "\niterations = " << c.iterations << "\n"
    << "tol_eig = " << fmt17(c.tol_eig) << "\ntol_disc = " << fmt17(c.tol_disc) << "\n"
    << "tol_nil = " << fmt17(c.tol_nil) << "\nobstruction_tol = " << fmt17(c.obstruction_tol) << "\n\n"
    << "[search]\n"
    << "period_cap = " << c.period_cap << "\nball_cap = " << c.ball_cap << "\n\n"
    << "[output]\n"
    << "dir = \"" << c.output_dir << "\"\nworkers = " << c.workers << "\n";
  return o.str();
}

inline LabConfig parse_config(const std::string& text) {
  LabConfig c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw config_error("unterminated section header at line " + std::to_string(lineno));
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw config_error("expected key = value at line " + std::to_string(lineno));
    std::string key = section + "." + detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));

    if (key == "automorphism.a") c.F.a = detail::parse_int(val, key);
    else if (key == "automorphism.b") c.F.b = detail::parse_int(val, key);
    else if (key == "automorphism.c") c.F.c = detail::parse_int(val, key);
    else if (key == "automorphism.d") c.F.d = detail::parse_int(val, key);
    else if (key == "automorphism.q1") c.q1 = detail::parse_int(val, key);
    else if (key == "automorphism.q2") c.q2 = detail::parse_int(val, key);
    else if (key == "numerics.grid") c.grid = detail::parse_int(val, key);
    else if (key == "numerics.iterations") c.iterations = detail::parse_int(val, key);
    else if (key == "numerics.tol_eig") c.tol_eig = detail::parse_num(val, key);
    else if (key == "numerics.tol_disc") c.tol_disc = detail::parse_num(val, key);
    else if (key == "numerics.tol_nil") c.tol_nil = detail::parse_num(val, key);
    else if (key == "numerics.obstruction_tol") c.obstruction_tol = detail::parse_num(val, key);
    else if (key == "search.period_cap") c.period_cap = detail::parse_int(val, key);
    else if (key == "search.ball_cap") c.ball_cap = detail::parse_int(val, key);
    else if (key == "output.dir") c.output_dir = detail::parse_str(val, key);
    else if (key == "output.workers") c.workers = detail::parse_int(val, key);
    else throw config_error("unknown config key '" + key + "' at line " + std::to_string(lineno));
  }
  c.validate();
  return c;
}

inline LabConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace cocyclelab
