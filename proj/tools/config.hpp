#pragma once

// YAML scenario files. Every key is optional except where a law needs it; a
// `preset` key selects the starting values. Errors name the file and line.

#include <yaml-cpp/yaml.h>

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "photodur/scenario.hpp"

namespace photodur::config {

class ConfigError : public Error {
 public:
  using Error::Error;
};

class Loader {
 public:
  explicit Loader(std::string path) : path_(std::move(path)) {}

  Scenario load() {
    YAML::Node root;
    try {
      root = YAML::LoadFile(path_);
    } catch (const YAML::BadFile&) {
      throw ConfigError(path_ + ": cannot read config file");
    } catch (const YAML::ParserException& e) {
      throw ConfigError(where(e.mark) + e.msg);
    }
    if (!root || root.IsNull()) throw ConfigError(path_ + ":1: empty config");
    if (!root.IsMap()) fail(root, "top level must be a mapping");
    keys(root, {"preset", "law", "mode", "velocity", "gap", "core_radius", "fiber", "constants", "source", "polarization",
                "regularization", "grids", "tolerances", "sampling", "flux"});

    Scenario s;
    if (auto p = root["preset"]) {
      try {
        s = preset(scalar<std::string>(p));
      } catch (const InvariantError& e) {
        fail(p, e.what());
      }
    }
    if (auto n = root["law"]) {
      const auto law = scalar<std::string>(n);
      if (law == "fiber") s.law = DispersionKind::fiber;
      else if (law == "dispersionless") s.law = DispersionKind::dispersionless;
      else if (law == "massive") s.law = DispersionKind::massive;
      else fail(n, "law must be one of fiber, dispersionless, massive");
      if (!root["preset"]) s.name = law;
    }
    if (auto n = root["mode"]) {
      const int m = scalar<int>(n);
      if (m < 1) fail(n, "mode order m must be >= 1");
      s.mode = FunctionOrder(m);
    }
    read(root, "velocity", s.velocity, positive("velocity v must be > 0"));
    read(root, "gap", s.gap, non_negative("gap Omega must be >= 0"));
    read(root, "core_radius", s.core_radius, positive("core radius a must be > 0"));

    if (auto c = section(root, "constants", {"c0", "mu0", "eps0", "hbar"})) {
      read(c, "c0", s.constants.c0, positive("c0 must be > 0"));
      read(c, "mu0", s.constants.mu0, positive("mu0 must be > 0"));
      read(c, "eps0", s.constants.eps0, positive("eps0 must be > 0"));
      read(c, "hbar", s.constants.hbar, positive("hbar must be > 0"));
    }

    if (auto f = section(root, "fiber", {"core_radius", "mu1", "eps1", "mu2", "eps2"})) {
      double a = s.fiber ? s.fiber->a() : 0.0, mu1 = s.fiber ? s.fiber->mu1() : 1.0, eps1 = s.fiber ? s.fiber->eps1() : 0.0;
      double mu2 = s.fiber ? s.fiber->mu2() : 1.0, eps2 = s.fiber ? s.fiber->eps2() : 0.0;
      if (!f["core_radius"] && !s.fiber) fail(f, "fiber.core_radius is required");
      read(f, "core_radius", a, positive("core radius a must be > 0"));
      read(f, "mu1", mu1, positive("fiber.mu1 must be > 0"));
      read(f, "eps1", eps1, positive("fiber.eps1 must be > 0"));
      read(f, "mu2", mu2, positive("fiber.mu2 must be > 0"));
      read(f, "eps2", eps2, positive("fiber.eps2 must be > 0"));
      guard(f, [&] { s.fiber = FiberParameters(a, mu1, eps1, mu2, eps2, s.constants); });
    } else if (s.fiber && root["constants"]) {
      const auto& f0 = *s.fiber;
      guard(root["constants"], [&] { s.fiber = FiberParameters(f0.a(), f0.mu1(), f0.eps1(), f0.mu2(), f0.eps2(), s.constants); });
    }
    if (s.law == DispersionKind::fiber && !s.fiber) fail(root["law"] ? root["law"] : root, "law fiber needs a fiber section");

    if (auto n = section(root, "source", {"k_center", "k_width_fraction", "power", "k_reference", "span", "nodes"})) {
      read(n, "k_center", s.source.k_center, positive("source.k_center must be > 0"));
      read(n, "k_width_fraction", s.source.k_width_fraction, positive("source.k_width_fraction must be > 0"));
      if (auto p = n["power"]) {
        s.source.power = scalar<int>(p);
        if (s.source.power < 1) fail(p, "source.power must be >= 1");
      }
      read(n, "k_reference", s.source.k_reference, non_negative("source.k_reference must be >= 0"));
      read(n, "span", s.source.span, positive("source.span must be > 0"));
      read_count(n, "nodes", s.source.nodes, 8, "source.nodes must be >= 8");
    }

    if (auto n = section(root, "polarization", {"nu_rho", "nu_phi", "p_nu"})) {
      read(n, "nu_rho", s.polarization.nu_rho, finite("polarization.nu_rho must be finite"));
      read(n, "nu_phi", s.polarization.nu_phi, finite("polarization.nu_phi must be finite"));
      read(n, "p_nu", s.polarization.p_nu, [](double v) { return v > 0.0 && v <= 1.0; }, "polarization.p_nu must lie in (0, 1]");
      guard(n, [&] { (void)s.polarization_vector(); });
    }

    if (auto n = section(root, "regularization", {"eps"})) {
      read(n, "eps", s.regularization, non_negative("regularization.eps must be >= 0"));
    }

    if (auto g = section(root, "grids", {"z", "support", "radial_nodes", "samples_per_period", "margin", "min_k_nodes",
                                         "max_k_nodes", "max_refinement", "taper_fraction", "time_points", "n_sigma",
                                         "dispersion"})) {
      if (auto z = g["z"]) {
        if (!z.IsSequence() || z.size() == 0) fail(z, "grids.z must be a non-empty list of distances");
        s.z.clear();
        for (const auto& e : z) {
          const double v = scalar<double>(e);
          if (!(v > 0.0)) fail(e, "grids.z distances must be > 0");
          if (!s.z.empty() && !(v > s.z.back())) fail(e, "grids.z must increase strictly");
          s.z.push_back(v);
        }
      }
      auto& p = s.propagation;
      if (auto n = g["support"]) {
        const auto v = scalar<std::string>(n);
        if (v == "forward") p.support = Support::forward;
        else if (v == "two_sided") p.support = Support::two_sided;
        else fail(n, "grids.support must be forward or two_sided");
      }
      read_count(g, "radial_nodes", p.radial_nodes, 0, "grids.radial_nodes must be >= 0");
      read(g, "samples_per_period", p.samples_per_period, [](double v) { return v >= 2.0; }, "grids.samples_per_period must be >= 2");
      read(g, "margin", p.margin, [](double v) { return v >= 1.0; }, "grids.margin must be >= 1");
      read_count(g, "min_k_nodes", p.min_k_nodes, 16, "grids.min_k_nodes must be >= 16");
      read_count(g, "max_k_nodes", p.max_k_nodes, 16, "grids.max_k_nodes must be >= 16");
      read_count(g, "max_refinement", p.max_refinement, 1, "grids.max_refinement must be >= 1");
      read(g, "taper_fraction", p.taper_fraction, [](double v) { return v >= 0.0 && v < 0.5; }, "grids.taper_fraction must lie in [0, 0.5)");
      read_count(g, "time_points", p.time_points, 16, "grids.time_points must be >= 16");
      read(g, "n_sigma", p.n_sigma, positive("grids.n_sigma must be > 0"));
      if (auto d = section(g, "dispersion", {"k_min", "k_max", "points"})) {
        read(d, "k_min", s.dispersion.k_min, positive("grids.dispersion.k_min must be > 0"));
        read(d, "k_max", s.dispersion.k_max, positive("grids.dispersion.k_max must be > 0"));
        read_count(d, "points", s.dispersion.points, 2, "grids.dispersion.points must be >= 2");
        if (s.dispersion.k_min > 0.0 && s.dispersion.k_max > 0.0 && !(s.dispersion.k_max > s.dispersion.k_min)) {
          fail(d, "grids.dispersion.k_max must exceed k_min");
        }
      }
    }

    if (auto n = section(root, "tolerances", {"tail_bound"})) {
      read(n, "tail_bound", s.propagation.tail_bound, [](double v) { return v > 0.0 && v < 1.0; }, "tolerances.tail_bound must lie in (0, 1)");
    }
    if (auto n = section(root, "sampling", {"n", "seed"})) {
      read_count(n, "n", s.samples, 2, "sampling.n must be >= 2");
      if (auto e = n["seed"]) s.seed = scalar<std::uint64_t>(e);
    }
    if (auto n = section(root, "flux", {"safety_factor", "z", "B"})) {
      read(n, "safety_factor", s.flux.safety_factor, [](double v) { return v >= 1.0; }, "flux.safety_factor must be >= 1");
      read(n, "z", s.flux.z, positive("flux.z must be > 0"));
      read(n, "B", s.flux.B, positive("flux.B must be > 0"));
    }

    // Whole-scenario invariants, attributed to the section that sets them.
    const YAML::Node law_node = s.law == DispersionKind::fiber ? first(root, {"fiber", "law", "preset"})
                                                               : first(root, {"velocity", "gap", "core_radius", "law", "preset"});
    guard(law_node, [&] { (void)s.model(); });
    guard(first(root, {"source", "preset"}), [&] { (void)s.amplitude(); });
    guard(first(root, {"grids", "preset"}), [&] { s.validate(); });
    return s;
  }

 private:
  std::string path_;

  std::string where(const YAML::Mark& m) const {
    return path_ + ":" + std::to_string(m.is_null() ? 1 : m.line + 1) + ": ";
  }

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const { throw ConfigError(where(n.Mark()) + msg); }

  YAML::Node first(const YAML::Node& root, std::initializer_list<const char*> names) const {
    for (const char* k : names) {
      if (auto n = root[k]) return n;
    }
    return root;
  }

  void guard(const YAML::Node& n, const std::function<void()>& f) const {
    try {
      f();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(n, e.what());
    }
  }

  void keys(const YAML::Node& map, const std::set<std::string>& allowed) const {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "'");
    }
  }

  YAML::Node section(const YAML::Node& parent, const char* name, const std::set<std::string>& allowed) const {
    auto n = parent[name];
    if (!n) return n;
    if (!n.IsMap()) fail(n, std::string(name) + " must be a mapping");
    keys(n, allowed);
    return n;
  }

  template <class T>
  T scalar(const YAML::Node& n) const {
    if (!n.IsScalar()) fail(n, "expected a scalar value");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "cannot parse '" + n.Scalar() + "' as a " + (std::is_same_v<T, std::string> ? "string" : "number"));
    }
  }

  template <class Pred>
  void read(const YAML::Node& parent, const char* key, double& out, Pred ok, const std::string& msg) const {
    if (auto n = parent[key]) {
      const double v = scalar<double>(n);
      if (!std::isfinite(v) || !ok(v)) fail(n, msg);
      out = v;
    }
  }

  void read(const YAML::Node& parent, const char* key, double& out, std::pair<std::function<bool(double)>, std::string> rule) const {
    read(parent, key, out, rule.first, rule.second);
  }

  void read_count(const YAML::Node& parent, const char* key, std::size_t& out, long long min, const std::string& msg) const {
    if (auto n = parent[key]) {
      const long long v = scalar<long long>(n);
      if (v < min) fail(n, msg);
      out = static_cast<std::size_t>(v);
    }
  }

  static std::pair<std::function<bool(double)>, std::string> positive(std::string msg) {
    return {[](double v) { return v > 0.0; }, std::move(msg)};
  }
  static std::pair<std::function<bool(double)>, std::string> non_negative(std::string msg) {
    return {[](double v) { return v >= 0.0; }, std::move(msg)};
  }
  static std::pair<std::function<bool(double)>, std::string> finite(std::string msg) {
    return {[](double) { return true; }, std::move(msg)};
  }
};

inline Scenario load(const std::string& path) { return Loader(path).load(); }

}  // namespace photodur::config
