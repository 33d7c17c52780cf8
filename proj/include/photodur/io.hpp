#pragma once

// CSV and JSON artifacts. Every file carries the tool version and a hash of
// the canonical scenario so that it can be reproduced; numbers are printed
// with 17 significant digits, which makes the bytes depend only on the values.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "photodur/arrival_stats.hpp"
#include "photodur/asymptotics.hpp"
#include "photodur/report.hpp"
#include "photodur/scenario.hpp"

#ifndef PHOTODUR_VERSION
#define PHOTODUR_VERSION "0.0.0"
#endif

namespace photodur::io {

using nlohmann::json;

inline constexpr const char* version = PHOTODUR_VERSION;

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline const char* law_name(DispersionKind k) {
  switch (k) {
    case DispersionKind::fiber: return "fiber";
    case DispersionKind::dispersionless: return "dispersionless";
    case DispersionKind::massive: return "massive";
  }
  return "unknown";
}

/// Everything that determines the numbers; worker count and output paths are
/// excluded because they do not change any result.
inline json to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["law"] = law_name(s.law);
  if (s.fiber) {
    const auto& f = *s.fiber;
    j["fiber"] = {{"core_radius", f.a()}, {"mu1", f.mu1()}, {"eps1", f.eps1()}, {"mu2", f.mu2()}, {"eps2", f.eps2()}};
  }
  j["mode"] = s.mode.value();
  j["velocity"] = s.velocity;
  j["gap"] = s.gap;
  j["core_radius"] = s.core_radius;
  j["constants"] = {{"c0", s.constants.c0}, {"mu0", s.constants.mu0}, {"eps0", s.constants.eps0}, {"hbar", s.constants.hbar}};
  j["source"] = {{"k_center", s.source.k_center}, {"k_width_fraction", s.source.k_width_fraction},
                 {"power", s.source.power},       {"k_reference", s.source.k_reference},
                 {"span", s.source.span},         {"nodes", s.source.nodes}};
  j["polarization"] = {{"nu_rho", s.polarization.nu_rho}, {"nu_phi", s.polarization.nu_phi}, {"p_nu", s.polarization.p_nu}};
  j["regularization"] = s.regularization;
  const auto& p = s.propagation;
  j["grids"] = {{"z", s.z},
                {"support", p.support == Support::forward ? "forward" : "two_sided"},
                {"radial_nodes", p.radial_nodes},
                {"samples_per_period", p.samples_per_period},
                {"margin", p.margin},
                {"min_k_nodes", p.min_k_nodes},
                {"max_k_nodes", p.max_k_nodes},
                {"max_refinement", p.max_refinement},
                {"taper_fraction", p.taper_fraction},
                {"time_points", p.time_points},
                {"n_sigma", p.n_sigma},
                {"dispersion", {{"k_min", s.dispersion.k_min}, {"k_max", s.dispersion.k_max}, {"points", s.dispersion.points}}}};
  j["tolerances"] = {{"tail_bound", p.tail_bound}};
  j["sampling"] = {{"n", s.samples}, {"seed", s.seed}};
  j["flux"] = {{"safety_factor", s.flux.safety_factor}, {"z", s.flux.z}, {"B", s.flux.B}};
  return j;
}

inline std::string config_hash(const Scenario& s) { return hex64(fnv1a64(to_json(s).dump())); }

struct Meta {
  std::string version = io::version;
  std::string config_hash;
  std::string command;
};

inline Meta meta_for(const Scenario& s, std::string command) { return {io::version, config_hash(s), std::move(command)}; }

inline json to_json(const Meta& m) {
  return {{"tool", "photodur"}, {"version", m.version}, {"config_hash", m.config_hash}, {"command", m.command}};
}

inline std::string csv_preamble(const Meta& m) {
  return "# photodur " + m.version + " config_hash=" + m.config_hash + " command=" + m.command + "\n";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string dispersion_csv(const DispersionTable& t, const Meta& m) {
  std::string s = csv_preamble(m) + "k,omega,omega_prime,omega_double_prime\n";
  for (std::size_t i = 0; i < t.k.size(); ++i) {
    s += number(t.k[i]) + "," + number(t.omega[i]) + "," + number(t.omega_prime[i]) + "," +
         number(t.omega_double_prime[i]) + "\n";
  }
  return s;
}

inline std::string weight_csv(const SpectralWeight& w, const Meta& m) {
  std::string s = csv_preamble(m) + "# regularization_eps=" + number(w.reg.eps) + "\nk,weight\n";
  for (std::size_t i = 0; i < w.k.size(); ++i) s += number(w.k[i]) + "," + number(w.weight[i]) + "\n";
  return s;
}

/// Reads a weight CSV written by weight_csv (or any "k,weight" table).
inline SpectralWeight read_weight_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open weight file '" + path.string() + "'");
  SpectralWeight w;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  const std::string eps_key = "# regularization_eps=";
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind(eps_key, 0) == 0) {
      w.reg = RegularizationParameter(std::strtod(line.c_str() + eps_key.size(), nullptr));
      continue;
    }
    if (line[0] == '#') continue;
    if (!header) {
      if (line != "k,weight") throw Error(path.string() + ":" + std::to_string(lineno) + ": expected header 'k,weight'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    char* end = nullptr;
    const double k = std::strtod(line.c_str(), &end);
    const bool ok_k = comma != std::string::npos && end == line.c_str() + comma;
    const double v = ok_k ? std::strtod(line.c_str() + comma + 1, &end) : 0.0;
    if (!ok_k || *end != '\0') throw Error(path.string() + ":" + std::to_string(lineno) + ": malformed row '" + line + "'");
    w.k.push_back(k);
    w.weight.push_back(v);
  }
  if (!header) throw Error(path.string() + ": missing header 'k,weight'");
  return w;
}

inline std::string distribution_csv(const ArrivalDistribution& d, const Meta& m) {
  std::string s = csv_preamble(m) + "# z=" + number(d.z) + "\nt,P\n";
  for (std::size_t i = 0; i < d.t.size(); ++i) s += number(d.t[i]) + "," + number(d.P[i]) + "\n";
  return s;
}

inline json distribution_sidecar(const ArrivalDistribution& d, const Meta& m) {
  return {{"meta", to_json(m)},
          {"z", d.z},
          {"P_nu", d.p_nu},
          {"tail_mass_estimate", d.tail_mass_estimate},
          {"tail_bound", d.tail_bound},
          {"grid",
           {{"t_begin", d.t.empty() ? 0.0 : d.t.front()},
            {"t_end", d.t.empty() ? 0.0 : d.t.back()},
            {"time_points", d.t.size()},
            {"k_nodes", d.k_nodes},
            {"radial_nodes", d.radial_nodes}}}};
}

inline json to_json(const MomentSet& ms, const ArrivalStatistics& st) {
  return {{"z", st.z},
          {"t_mean", st.t_mean},
          {"sigma", st.sigma},
          {"tau0", ms.tau0()},
          {"tau1", ms.tau1()},
          {"tau2", ms.tau2()},
          {"P_nu", st.p_nu},
          {"errors", {{"tau0", ms.error[0]}, {"tau1", ms.error[1]}, {"tau2", ms.error[2]}}}};
}

inline json to_json(const AsymptoticConstants& c) {
  const auto& r = c.tau1_routes;
  return {{"tau0_t", c.tau0_t},
          {"tau1_t", c.tau1_t},
          {"tau2_t", c.tau2_t},
          {"A", c.A},
          {"B", c.B},
          {"P_nu", c.p_nu},
          {"diagnostics",
           {{"quadrature_error", {{"tau0_t", c.error[0]}, {"tau1_t", c.error[1]}, {"tau2_t", c.error[2]}}},
            {"tau1_direct", r.direct},
            {"tau1_by_parts", r.by_parts},
            {"tau1_route_relative_difference", r.relative_difference()},
            {"pv_delta", r.pv_delta},
            {"pv_change", r.pv_change},
            {"gap_correction", r.gap_correction},
            {"slope_radicand", c.radicand}}}};
}

inline json to_json(const FluxPlan& f) {
  return {{"z", f.z}, {"B", f.B}, {"safety_factor", f.safety_factor}, {"max_flux", f.max_flux}};
}

inline json to_json(const DurationGrowthReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"z", row.z}, {"t_mean", row.t_mean}, {"sigma", row.sigma}, {"sigma_over_z", row.sigma_over_z}});
  }
  return {{"rows", rows},
          {"slope", r.slope},
          {"standard_error", r.standard_error},
          {"band", {r.band_low, r.band_high}},
          {"affine", {{"slope", r.affine_slope}, {"intercept", r.affine_intercept}, {"standard_error", r.affine_standard_error}}}};
}

inline std::string duration_csv(const DurationGrowthReport& r, const Meta& m) {
  std::string s = csv_preamble(m) + "z,t_mean,sigma,sigma_over_z\n";
  for (const auto& row : r.rows) {
    s += number(row.z) + "," + number(row.t_mean) + "," + number(row.sigma) + "," + number(row.sigma_over_z) + "\n";
  }
  return s;
}

inline std::string samples_csv(const SampleSet& ss, const Meta& m) {
  std::string s = csv_preamble(m) + "# z=" + number(ss.z) + " seed=" + std::to_string(ss.seed) + "\nt\n";
  s.reserve(s.size() + ss.t.size() * 24);
  for (double t : ss.t) s += number(t) + "\n";
  return s;
}

}  // namespace photodur::io
