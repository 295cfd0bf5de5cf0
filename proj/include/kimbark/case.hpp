#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kimbark/errors.hpp"

namespace kimbark {

enum class BusType { Pq, Pv, Slack };

struct Bus {
  int id = 0;
  BusType type = BusType::Pq;
  double vm = 1.0;      // voltage magnitude, p.u.
  double va = 0.0;      // voltage angle, rad
  double load_p = 0.0;  // load at the solved point, p.u. on system base
  double load_q = 0.0;
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b = 0.0;    // total charging susceptance, split half per end
  double tap = 1.0;  // off-nominal turns ratio on the from side
};

struct Generator {
  int bus = 0;
  double m = 0.0;     // inertia coefficient M = 2H / omega_s
  double xd_t = 0.0;  // transient reactance
  double pm = 0.0;    // mechanical input, p.u.
  double p = 0.0;     // electrical output at the operating point, p.u.
  double q = 0.0;
};

struct PowerSystemCase {
  double base_mva = 100.0;
  double frequency_hz = 60.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;

  [[nodiscard]] double omega_s() const { return 2.0 * std::numbers::pi * frequency_hz; }

  [[nodiscard]] double total_inertia() const {
    double mt = 0.0;
    for (const auto& g : generators) mt += g.m;
    return mt;
  }

  [[nodiscard]] int bus_index(int id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
      if (buses[i].id == id) return static_cast<int>(i);
    return -1;
  }

  [[nodiscard]] const Bus* find_bus(int id) const {
    const int i = bus_index(id);
    return i < 0 ? nullptr : &buses[static_cast<std::size_t>(i)];
  }

  [[nodiscard]] int generator_index(int bus_id) const {
    for (std::size_t i = 0; i < generators.size(); ++i)
      if (generators[i].bus == bus_id) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                           const std::string& path) {
  if (!obj.is_object() || !obj.contains(key))
    throw CaseError(path + ": missing required field \"" + key + "\"");
  return obj.at(key);
}

inline double require_number(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_number()) throw CaseError(path + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw CaseError(path + "." + key + ": must be finite");
  return d;
}

inline double optional_number(const nlohmann::json& obj, const char* key, const std::string& path,
                              double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return require_number(obj, key, path);
}

inline int require_int(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_number_integer()) throw CaseError(path + "." + key + ": expected an integer");
  return v.get<int>();
}

inline BusType parse_bus_type(const nlohmann::json& obj, const std::string& path) {
  const auto& v = require_field(obj, "type", path);
  if (!v.is_string()) throw CaseError(path + ".type: expected a string");
  const std::string s = v.get<std::string>();
  if (s == "pq") return BusType::Pq;
  if (s == "pv") return BusType::Pv;
  if (s == "slack") return BusType::Slack;
  throw CaseError(path + ".type: unknown bus type \"" + s + "\" (expected pq, pv, or slack)");
}

}  // namespace detail

// Parses and validates a case document. Every violation is reported with the
// path of the offending field so bad data can be located without a debugger.
inline PowerSystemCase load_case(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw CaseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw CaseError("top level: expected an object");

  PowerSystemCase sys;
  const auto& system = detail::require_field(doc, "system", "top level");
  sys.base_mva = detail::require_number(system, "base_mva", "system");
  sys.frequency_hz = detail::require_number(system, "frequency_hz", "system");
  if (sys.base_mva <= 0.0) throw CaseError("system.base_mva: must be positive");
  if (sys.frequency_hz <= 0.0) throw CaseError("system.frequency_hz: must be positive");

  const auto& buses = detail::require_field(doc, "buses", "top level");
  if (!buses.is_array() || buses.empty()) throw CaseError("buses: expected a non-empty array");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string path = "buses[" + std::to_string(i) + "]";
    const auto& jb = buses[i];
    Bus bus;
    bus.id = detail::require_int(jb, "id", path);
    bus.type = detail::parse_bus_type(jb, path);
    bus.vm = detail::require_number(jb, "vm", path);
    bus.va = detail::require_number(jb, "va", path);
    bus.load_p = detail::optional_number(jb, "load_p", path, 0.0);
    bus.load_q = detail::optional_number(jb, "load_q", path, 0.0);
    if (bus.vm <= 0.0) throw CaseError(path + ".vm: must be positive");
    if (sys.bus_index(bus.id) >= 0)
      throw CaseError(path + ".id: duplicate bus id " + std::to_string(bus.id));
    sys.buses.push_back(bus);
  }

  const auto& branches = detail::require_field(doc, "branches", "top level");
  if (!branches.is_array()) throw CaseError("branches: expected an array");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const std::string path = "branches[" + std::to_string(i) + "]";
    const auto& jb = branches[i];
    Branch br;
    br.from = detail::require_int(jb, "from", path);
    br.to = detail::require_int(jb, "to", path);
    br.r = detail::require_number(jb, "r", path);
    br.x = detail::require_number(jb, "x", path);
    br.b = detail::optional_number(jb, "b", path, 0.0);
    br.tap = detail::optional_number(jb, "tap", path, 1.0);
    if (sys.bus_index(br.from) < 0)
      throw CaseError(path + ".from: unknown bus " + std::to_string(br.from));
    if (sys.bus_index(br.to) < 0)
      throw CaseError(path + ".to: unknown bus " + std::to_string(br.to));
    if (br.from == br.to) throw CaseError(path + ": from and to reference the same bus");
    if (br.r < 0.0) throw CaseError(path + ".r: must be non-negative");
    if (br.x <= 0.0) throw CaseError(path + ".x: must be positive");
    if (br.tap <= 0.0) throw CaseError(path + ".tap: must be positive");
    sys.branches.push_back(br);
  }

  const auto& gens = detail::require_field(doc, "generators", "top level");
  if (!gens.is_array() || gens.empty()) throw CaseError("generators: expected a non-empty array");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string path = "generators[" + std::to_string(i) + "]";
    const auto& jg = gens[i];
    Generator g;
    g.bus = detail::require_int(jg, "bus", path);
    if (sys.bus_index(g.bus) < 0)
      throw CaseError(path + ".bus: unknown bus " + std::to_string(g.bus));
    if (sys.generator_index(g.bus) >= 0)
      throw CaseError(path + ".bus: second generator on bus " + std::to_string(g.bus));
    // Inertia is given either directly as M or as an H constant in seconds.
    const bool has_m = jg.is_object() && jg.contains("m");
    const bool has_h = jg.is_object() && jg.contains("h");
    if (has_m == has_h)
      throw CaseError(path + ": exactly one of \"m\" or \"h\" is required");
    if (has_m) {
      g.m = detail::require_number(jg, "m", path);
      if (g.m <= 0.0) throw CaseError(path + ".m: must be positive");
    } else {
      const double h = detail::require_number(jg, "h", path);
      if (h <= 0.0) throw CaseError(path + ".h: must be positive");
      g.m = 2.0 * h / sys.omega_s();
    }
    g.xd_t = detail::require_number(jg, "xd_t", path);
    if (g.xd_t <= 0.0) throw CaseError(path + ".xd_t: must be positive");
    g.pm = detail::require_number(jg, "pm", path);
    g.p = detail::require_number(jg, "p", path);
    g.q = detail::require_number(jg, "q", path);
    sys.generators.push_back(g);
  }

  return sys;
}

inline PowerSystemCase load_case_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaseError("cannot open case file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_case(buf.str());
}

}  // namespace kimbark
