#pragma once

// Batch scenario: a JSON document describing a model, sample geodesics, parameter
// values and the checks to run. Unknown keys are rejected.

#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "adpol/adapted.hpp"
#include "adpol/error.hpp"
#include "adpol/models.hpp"
#include "adpol/semigroup.hpp"
#include "adpol/verify.hpp"

namespace adpol {

/// Names of the checks understood by `verify`, with their default tolerances.
inline const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"pullbacks", 1e-8},        {"kahler", 1e-4},       {"equivariance", 1e-7},
      {"canonical_metric", 1e-6}, {"monge_ampere", 1e-3}, {"fibration", 1e-4},
      {"real_polarization", 1e-8},
  };
  return t;
}

/// Rectangle Re s in [re_min, re_max], Im s in [im_min, im_max] sampled with re_count x im_count
/// points (row-major in Im s, then Re s).
struct SGrid {
  double re_min = 0, re_max = 0;
  int re_count = 1;
  double im_min = 0, im_max = 0;
  int im_count = 1;

  std::vector<cplx> points() const {
    std::vector<cplx> out;
    auto at = [](double lo, double hi, int n, int k) { return n == 1 ? lo : lo + (hi - lo) * k / (n - 1); };
    for (int i = 0; i < im_count; ++i)
      for (int r = 0; r < re_count; ++r)
        out.emplace_back(at(re_min, re_max, re_count, r), at(im_min, im_max, im_count, i));
    return out;
  }
};

struct RandomPoints {
  int count = 0;
  SampleOptions options;
};

struct Scenario {
  ModelMetric model = ModelMetric::euclidean(1);
  std::vector<GeodesicPoint> points;
  std::optional<RandomPoints> random_points;
  std::vector<cplx> s_values;
  std::optional<SGrid> s_grid;
  std::vector<double> real_s;
  std::vector<GroupElement> group_elements;
  std::vector<std::string> checks;
  std::map<std::string, double> tolerances = default_tolerances();
  double step = 1e-3;
  AdaptedConfig adapted;
  std::uint64_t seed = 0;
  std::string output;
  /// FNV-1a hash of the scenario text.
  std::uint64_t hash = 0;

  /// Explicit points followed by the random ones drawn from `seed`.
  std::vector<GeodesicPoint> all_points() const {
    std::vector<GeodesicPoint> out = points;
    if (random_points) {
      std::mt19937_64 rng(seed);
      for (int k = 0; k < random_points->count; ++k) out.push_back(sample_point(model, rng, random_points->options));
    }
    return out;
  }

  /// s_values followed by the grid points.
  std::vector<cplx> all_s() const {
    std::vector<cplx> out = s_values;
    if (s_grid) {
      const auto g = s_grid->points();
      out.insert(out.end(), g.begin(), g.end());
    }
    return out;
  }
};

inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

using nlohmann::json;

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

inline Vec vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], where);
  return v;
}

inline cplx complex(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], where), number(j[1], where)};
  throw ConfigError(where + ": expected a number or [re, im]");
}

inline Profile parse_profile(const json& j) {
  only_keys(j, "model.profile", {"kind", "rho", "R", "radius", "neck"});
  const std::string kind = j.value("kind", "");
  auto get = [&](const char* key, double def) { return j.contains(key) ? number(j[key], key) : def; };
  try {
    if (kind == "cylinder") return Profile::cylinder(get("radius", 1.0));
    if (kind == "sphere") return Profile::sphere(get("rho", 1.0));
    if (kind == "hyperbolic") return Profile::hyperbolic(get("rho", 1.0));
    if (kind == "torus") return Profile::torus(get("R", 2.0), get("rho", 1.0));
    if (kind == "catenoid") return Profile::catenoid(get("neck", 1.0));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("model.profile: ") + e.what());
  }
  throw ConfigError("model.profile: unknown kind '" + kind + "'");
}

inline ModelMetric parse_model(const json& j) {
  only_keys(j, "model", {"kind", "dim", "curvature", "profile"});
  const std::string kind = j.value("kind", "");
  try {
    if (kind == "euclidean") return ModelMetric::euclidean(j.value("dim", 2));
    if (kind == "constant_curvature" || kind == "sphere" || kind == "hyperbolic") {
      const double def = kind == "hyperbolic" ? -1.0 : 1.0;
      return ModelMetric::constant_curvature(j.value("dim", 2), j.contains("curvature") ? number(j["curvature"], "model.curvature") : def);
    }
    if (kind == "revolution") {
      if (!j.contains("profile")) throw ConfigError("model: revolution needs a profile");
      return ModelMetric::revolution(parse_profile(j["profile"]));
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  throw ConfigError("model: unknown kind '" + kind + "'");
}

inline GeodesicPoint parse_point(const json& j, const ModelMetric& model, std::size_t index) {
  const std::string where = "points[" + std::to_string(index) + "]";
  only_keys(j, where, {"q", "p", "direction", "speed_sq"});
  if (!j.contains("q")) throw ConfigError(where + ": missing q");
  const Vec q = vector(j["q"], where + ".q");
  if (q.size() != model.dim()) throw ConfigError(where + ": q has the wrong dimension");
  if (!model.in_chart(q)) throw ConfigError(where + ": q lies outside the coordinate patch");
  Vec p;
  if (j.contains("p")) {
    if (j.contains("direction") || j.contains("speed_sq"))
      throw ConfigError(where + ": give either p or direction/speed_sq");
    p = vector(j["p"], where + ".p");
  } else {
    if (!j.contains("direction") || !j.contains("speed_sq"))
      throw ConfigError(where + ": missing p (or direction and speed_sq)");
    Vec dir = vector(j["direction"], where + ".direction");
    const double v = number(j["speed_sq"], where + ".speed_sq");
    if (dir.size() != model.dim() || dir.norm() == 0.0 || v < 0.0)
      throw ConfigError(where + ": bad direction or speed_sq");
    // direction is taken in the orthonormal frame, so v(x) = speed_sq exactly
    p = model.frame(q) * (std::sqrt(v) * dir.normalized());
  }
  if (p.size() != model.dim()) throw ConfigError(where + ": p has the wrong dimension");
  return {q, p};
}

inline void parse_integrator(const json& j, IntegratorConfig& cfg) {
  only_keys(j, "integrator", {"abs_tol", "rel_tol", "initial_step", "min_step", "max_steps"});
  if (j.contains("abs_tol")) cfg.abs_tol = number(j["abs_tol"], "integrator.abs_tol");
  if (j.contains("rel_tol")) cfg.rel_tol = number(j["rel_tol"], "integrator.rel_tol");
  if (j.contains("initial_step")) cfg.initial_step = number(j["initial_step"], "integrator.initial_step");
  if (j.contains("min_step")) cfg.min_step = number(j["min_step"], "integrator.min_step");
  if (j.contains("max_steps")) cfg.max_steps = j["max_steps"].get<int>();
  if (!(cfg.abs_tol > 0) || !(cfg.rel_tol > 0) || !(cfg.initial_step > 0) || !(cfg.min_step > 0) || cfg.max_steps < 1)
    throw ConfigError("integrator: tolerances and steps must be positive");
}

}  // namespace detail

/// Parses scenario text; throws ConfigError on malformed input or unknown keys.
inline Scenario parse_scenario(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  detail::only_keys(j, "scenario",
                    {"model", "points", "random_points", "s_values", "s_grid", "real_s", "group_elements", "checks",
                     "tolerances", "step", "integrator", "pole_policy", "detour_radius", "seed", "output"});
  Scenario sc;
  sc.hash = fnv1a(text);
  try {
    if (!j.contains("model")) throw ConfigError("scenario: missing model");
    sc.model = detail::parse_model(j["model"]);
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
      sc.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("points")) {
      if (!j["points"].is_array()) throw ConfigError("points: expected an array");
      for (std::size_t i = 0; i < j["points"].size(); ++i)
        sc.points.push_back(detail::parse_point(j["points"][i], sc.model, i));
    }
    if (j.contains("random_points")) {
      const auto& r = j["random_points"];
      detail::only_keys(r, "random_points", {"count", "speed_sq", "base_radius"});
      RandomPoints rp;
      rp.count = r.value("count", 0);
      if (rp.count < 0) throw ConfigError("random_points.count: must be >= 0");
      if (r.contains("speed_sq")) {
        const Vec range = detail::vector(r["speed_sq"], "random_points.speed_sq");
        if (range.size() != 2 || range(0) < 0 || range(1) < range(0))
          throw ConfigError("random_points.speed_sq: expected [min, max]");
        rp.options.speed_sq_min = range(0);
        rp.options.speed_sq_max = range(1);
      }
      if (r.contains("base_radius")) rp.options.base_radius = detail::number(r["base_radius"], "random_points.base_radius");
      sc.random_points = rp;
    }
    if (j.contains("s_values")) {
      if (!j["s_values"].is_array()) throw ConfigError("s_values: expected an array");
      for (const auto& s : j["s_values"]) sc.s_values.push_back(detail::complex(s, "s_values"));
    }
    if (j.contains("s_grid")) {
      const auto& g = j["s_grid"];
      detail::only_keys(g, "s_grid", {"re", "im"});
      SGrid grid;
      auto axis = [&](const char* key, double& lo, double& hi, int& n) {
        if (!g.contains(key)) throw ConfigError(std::string("s_grid: missing ") + key);
        const Vec a = detail::vector(g[key], std::string("s_grid.") + key);
        if (a.size() != 3 || a(2) < 1 || a(2) != std::floor(a(2)) || a(1) < a(0))
          throw ConfigError(std::string("s_grid.") + key + ": expected [min, max, count]");
        lo = a(0);
        hi = a(1);
        n = static_cast<int>(a(2));
      };
      axis("re", grid.re_min, grid.re_max, grid.re_count);
      axis("im", grid.im_min, grid.im_max, grid.im_count);
      sc.s_grid = grid;
    }
    if (j.contains("real_s")) {
      if (!j["real_s"].is_array()) throw ConfigError("real_s: expected an array");
      for (const auto& s : j["real_s"]) sc.real_s.push_back(detail::number(s, "real_s"));
    }
    if (j.contains("group_elements")) {
      if (!j["group_elements"].is_array()) throw ConfigError("group_elements: expected an array");
      for (const auto& g : j["group_elements"]) {
        const Vec ab = detail::vector(g, "group_elements");
        if (ab.size() != 2) throw ConfigError("group_elements: expected [a, b] pairs");
        sc.group_elements.push_back({ab(0), ab(1)});
      }
    }
    if (j.contains("checks")) {
      if (!j["checks"].is_array()) throw ConfigError("checks: expected an array of names");
      for (const auto& c : j["checks"]) {
        if (!c.is_string()) throw ConfigError("checks: expected an array of names");
        const std::string name = c.get<std::string>();
        if (name == "all") {
          for (const auto& [n, _] : default_tolerances()) sc.checks.push_back(n);
          continue;
        }
        if (!default_tolerances().count(name)) throw ConfigError("checks: unknown check '" + name + "'");
        sc.checks.push_back(name);
      }
    }
    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      if (!t.is_object()) throw ConfigError("tolerances: expected an object");
      for (const auto& [name, value] : t.items()) {
        if (!default_tolerances().count(name)) throw ConfigError("tolerances: unknown check '" + name + "'");
        sc.tolerances[name] = detail::number(value, "tolerances." + name);
      }
    }
    if (j.contains("step")) {
      sc.step = detail::number(j["step"], "step");
      if (!(sc.step > 0)) throw ConfigError("step: must be positive");
    }
    if (j.contains("integrator")) detail::parse_integrator(j["integrator"], sc.adapted.jacobi.integrator);
    if (j.contains("pole_policy")) {
      const std::string p = j["pole_policy"].is_string() ? j["pole_policy"].get<std::string>() : "";
      if (p == "fail") sc.adapted.pole_policy = PolePolicy::fail;
      else if (p == "detour") sc.adapted.pole_policy = PolePolicy::detour;
      else throw ConfigError("pole_policy: expected \"fail\" or \"detour\"");
    }
    if (j.contains("detour_radius")) {
      sc.adapted.detour_radius = detail::number(j["detour_radius"], "detour_radius");
      if (!(sc.adapted.detour_radius > 0)) throw ConfigError("detour_radius: must be positive");
    }
    if (j.contains("output")) {
      if (!j["output"].is_string()) throw ConfigError("output: expected a path");
      sc.output = j["output"].get<std::string>();
    }
  } catch (const detail::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace adpol
