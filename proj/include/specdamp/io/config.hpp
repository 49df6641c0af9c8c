#pragma once

// Run configuration: strict JSON schema, unknown keys rejected.
//
//   {"model": {"type": "beam", "E": 1.0, "N": 16,
//              "patches": [{"a": 2.0, "from": 0.0, "to": 1.0}]},
//    "analyses": ["spectrum", "krein", "conditions"],
//    "tolerances": {"cluster_tol": 1e-7},
//    "seed": 0}
//
// Generic models give "K" and "C" as arrays of rows; perturbed models give
// "K", "alpha" and "B". Optional blocks "simulate", "accumulation", "scan"
// and "conditions" configure the individual commands.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specdamp/errors.hpp"
#include "specdamp/model.hpp"
#include "specdamp/tolerance.hpp"

namespace specdamp::io {

using nlohmann::json;

// Malformed or unreadable configuration. Exit code 2, like InvalidModel.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

enum class Analysis { spectrum, krein, conditions, semigroup, accumulation };

inline const char* to_string(Analysis a) noexcept {
  switch (a) {
    case Analysis::spectrum: return "spectrum";
    case Analysis::krein: return "krein";
    case Analysis::conditions: return "conditions";
    case Analysis::semigroup: return "semigroup";
    case Analysis::accumulation: return "accumulation";
  }
  return "?";
}

// Initial state for `simulate`: exactly one of the three forms.
struct InitialState {
  std::optional<std::size_t> eigenvector;  // index into the sorted spectrum, real part taken
  std::optional<std::vector<double>> modal_weights;  // on the eigenvectors of K, zero velocity
  std::optional<RealPhaseVector> vector;
};

struct SimulateOptions {
  InitialState x0;
  double t_max = 1.0;
  std::size_t samples = 101;
};

struct AccumulationOptions {
  std::vector<std::size_t> orders{8, 16, 32};
  double radius = 0.01;
};

struct ScanOptions {
  double re_offset = 1.0;
  double im_min = 1.0;
  double im_max = 1e4;
  std::size_t points = 41;
};

struct RunConfig {
  SystemModel model;
  std::set<Analysis> analyses;
  ToleranceProfile tolerances;
  std::uint64_t seed = 0;
  std::optional<SimulateOptions> simulate;
  AccumulationOptions accumulation;
  ScanOptions scan;
  std::optional<std::set<std::string>> conditions;  // subset of {"i", "ii", "iii"}

  bool wants(Analysis a) const { return analyses.count(a) > 0; }
};

namespace detail {

inline void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

inline const json& field(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

inline std::size_t count(const json& j, const std::string& what) {
  // nonnegative integer literals parse as unsigned
  if (!j.is_number_unsigned()) throw ConfigError(what + " must be a nonnegative integer");
  return j.get<std::size_t>();
}

inline std::vector<double> numbers(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> v;
  for (const auto& e : j) v.push_back(number(e, what));
  return v;
}

inline DenseMatrix matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a nonempty array of rows");
  const std::size_t rows = j.size();
  DenseMatrix m;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = numbers(j[i], what);
    if (i == 0) m = DenseMatrix(rows, row.size());
    if (row.size() != m.cols() || row.empty()) throw ConfigError(what + " has ragged rows");
    for (std::size_t k = 0; k < row.size(); ++k) m(i, k) = row[k];
  }
  if (m.rows() != m.cols()) throw ConfigError(what + " must be square");
  return m;
}

inline SystemModel parse_model(const json& j) {
  const std::string where = "model";
  if (!j.is_object()) throw ConfigError("model must be an object");
  const auto& type = field(j, where, "type");
  if (!type.is_string()) throw ConfigError("model.type must be a string");
  const auto t = type.get<std::string>();

  SystemModel m;
  if (t == "generic") {
    require_keys(j, where, {"type", "K", "C", "essential_spectrum_proxy"});
    m = generic_model(matrix(field(j, where, "K"), "model.K"), matrix(field(j, where, "C"), "model.C"));
  } else if (t == "beam") {
    require_keys(j, where, {"type", "E", "N", "patches", "essential_spectrum_proxy"});
    BeamSpec spec;
    spec.E = number(field(j, where, "E"), "model.E");
    spec.N = count(field(j, where, "N"), "model.N");
    const auto& ps = field(j, where, "patches");
    if (!ps.is_array()) throw ConfigError("model.patches must be an array");
    for (const auto& p : ps) {
      require_keys(p, "model.patches[]", {"a", "from", "to"});
      spec.patches.push_back({number(field(p, "patch", "a"), "patch.a"), number(field(p, "patch", "from"), "patch.from"),
                              number(field(p, "patch", "to"), "patch.to")});
    }
    m = beam_assemble(spec);
  } else if (t == "perturbed") {
    require_keys(j, where, {"type", "K", "alpha", "B", "essential_spectrum_proxy"});
    m = perturbed_kelvin_voigt(matrix(field(j, where, "K"), "model.K"), number(field(j, where, "alpha"), "model.alpha"),
                               matrix(field(j, where, "B"), "model.B"));
  } else {
    throw ConfigError("model.type must be one of generic, beam, perturbed (got '" + t + "')");
  }
  if (j.contains("essential_spectrum_proxy")) {
    auto proxy = numbers(j.at("essential_spectrum_proxy"), "model.essential_spectrum_proxy");
    for (double v : proxy)
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("essential_spectrum_proxy values must be positive");
    if (proxy.empty()) throw ConfigError("essential_spectrum_proxy must not be empty");
    m.essential_spectrum_proxy = std::move(proxy);
  }
  return m;
}

inline ToleranceProfile parse_tolerances(const json& j) {
  require_keys(j, "tolerances",
               {"residual_tol", "snap_real_tol", "cluster_tol", "neutral_tol", "orth_tol", "rank_tol"});
  ToleranceProfile t;
  auto set = [&](const char* key, double& v) {
    if (j.contains(key)) v = number(j.at(key), std::string("tolerances.") + key);
  };
  set("residual_tol", t.residual_tol);
  set("snap_real_tol", t.snap_real_tol);
  set("cluster_tol", t.cluster_tol);
  set("neutral_tol", t.neutral_tol);
  set("orth_tol", t.orth_tol);
  set("rank_tol", t.rank_tol);
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return t;
}

inline SimulateOptions parse_simulate(const json& j) {
  require_keys(j, "simulate", {"x0", "t_max", "samples"});
  SimulateOptions s;
  const auto& x0 = field(j, "simulate", "x0");
  require_keys(x0, "simulate.x0", {"eigenvector", "modal_weights", "position", "velocity"});
  const bool has_vec = x0.contains("position") || x0.contains("velocity");
  const int forms = int(x0.contains("eigenvector")) + int(x0.contains("modal_weights")) + int(has_vec);
  if (forms != 1) throw ConfigError("simulate.x0 needs exactly one of eigenvector, modal_weights, position/velocity");
  if (x0.contains("eigenvector")) s.x0.eigenvector = count(x0.at("eigenvector"), "simulate.x0.eigenvector");
  if (x0.contains("modal_weights")) s.x0.modal_weights = numbers(x0.at("modal_weights"), "simulate.x0.modal_weights");
  if (has_vec)
    s.x0.vector = RealPhaseVector{numbers(field(x0, "simulate.x0", "position"), "simulate.x0.position"),
                                  numbers(field(x0, "simulate.x0", "velocity"), "simulate.x0.velocity")};
  if (j.contains("t_max")) s.t_max = number(j.at("t_max"), "simulate.t_max");
  if (j.contains("samples")) s.samples = count(j.at("samples"), "simulate.samples");
  if (!(s.t_max > 0.0) || !std::isfinite(s.t_max)) throw ConfigError("simulate.t_max must be positive");
  if (s.samples < 2) throw ConfigError("simulate.samples must be at least 2");
  return s;
}

}  // namespace detail

/// Parses and validates a configuration document. Model assumption
/// violations surface as InvalidModel, schema problems as ConfigError.
inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("top level must be an object");
  detail::require_keys(j, "config",
                       {"model", "analyses", "tolerances", "seed", "simulate", "accumulation", "scan", "conditions"});
  RunConfig c;
  c.model = detail::parse_model(detail::field(j, "config", "model"));

  const auto& an = detail::field(j, "config", "analyses");
  if (!an.is_array() || an.empty()) throw ConfigError("analyses must be a nonempty array");
  for (const auto& a : an) {
    if (!a.is_string()) throw ConfigError("analyses entries must be strings");
    const auto s = a.get<std::string>();
    bool found = false;
    for (auto candidate : {Analysis::spectrum, Analysis::krein, Analysis::conditions, Analysis::semigroup,
                           Analysis::accumulation})
      if (s == to_string(candidate)) c.analyses.insert(candidate), found = true;
    if (!found) throw ConfigError("unknown analysis '" + s + "'");
  }
  if (c.wants(Analysis::accumulation) && !beam_spec(c.model))
    throw ConfigError("the accumulation analysis needs a beam model");

  if (j.contains("tolerances")) c.tolerances = detail::parse_tolerances(j.at("tolerances"));
  if (j.contains("seed")) c.seed = detail::count(j.at("seed"), "seed");
  if (j.contains("simulate")) c.simulate = detail::parse_simulate(j.at("simulate"));
  if (j.contains("accumulation")) {
    const auto& a = j.at("accumulation");
    detail::require_keys(a, "accumulation", {"orders", "radius"});
    if (a.contains("orders")) {
      c.accumulation.orders.clear();
      if (!a.at("orders").is_array()) throw ConfigError("accumulation.orders must be an array");
      for (const auto& o : a.at("orders")) c.accumulation.orders.push_back(detail::count(o, "accumulation.orders"));
    }
    if (a.contains("radius")) c.accumulation.radius = detail::number(a.at("radius"), "accumulation.radius");
    if (!(c.accumulation.radius > 0.0)) throw ConfigError("accumulation.radius must be positive");
  }
  if (j.contains("scan")) {
    const auto& s = j.at("scan");
    detail::require_keys(s, "scan", {"re_offset", "im_min", "im_max", "points"});
    if (s.contains("re_offset")) c.scan.re_offset = detail::number(s.at("re_offset"), "scan.re_offset");
    if (s.contains("im_min")) c.scan.im_min = detail::number(s.at("im_min"), "scan.im_min");
    if (s.contains("im_max")) c.scan.im_max = detail::number(s.at("im_max"), "scan.im_max");
    if (s.contains("points")) c.scan.points = detail::count(s.at("points"), "scan.points");
    if (!(c.scan.im_min > 0.0) || !(c.scan.im_max >= c.scan.im_min) || c.scan.points == 0)
      throw ConfigError("scan needs 0 < im_min <= im_max and points > 0");
  }
  if (j.contains("conditions")) {
    const auto& s = j.at("conditions");
    if (!s.is_array() || s.empty()) throw ConfigError("conditions must be a nonempty array");
    std::set<std::string> names;
    for (const auto& e : s) {
      if (!e.is_string() || (e != "i" && e != "ii" && e != "iii"))
        throw ConfigError("conditions entries must be \"i\", \"ii\" or \"iii\"");
      names.insert(e.get<std::string>());
    }
    c.conditions = std::move(names);
  }
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace specdamp::io
