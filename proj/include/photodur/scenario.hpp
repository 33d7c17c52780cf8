#pragma once

// One scenario drives every pipeline: the dispersion law, the source, the
// polarisation, grids and tolerances. Presets cover the analytic oracle laws,
// the reference step-index fiber and a telecom-like narrowband packet.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "photodur/arrival_stats.hpp"
#include "photodur/asymptotics.hpp"
#include "photodur/dispersion.hpp"
#include "photodur/errors.hpp"
#include "photodur/mode_fields.hpp"
#include "photodur/propagation.hpp"

namespace photodur {

struct SourceConfig {
  double k_center = 5.8616e6;     ///< rad/m
  double k_width_fraction = 0.02; ///< Gaussian width / k_center
  int power = 2;                  ///< g ~ k^power as k -> 0
  double k_reference = 0.0;       ///< 0 selects k_center
  double span = 8.0;              ///< support in widths
  std::size_t nodes = 1024;       ///< weight nodes per half line
};

struct PolarizationConfig {
  double nu_rho = 1.0;
  double nu_phi = 0.0;
  double p_nu = 1.0;
};

struct DispersionGrid {
  double k_min = 0.0;  ///< 0 selects a law-dependent default
  double k_max = 0.0;
  std::size_t points = 64;
};

struct FluxConfig {
  double safety_factor = 100.0;
  double z = 0.0;  ///< 0 selects the largest ladder distance
  double B = 0.0;  ///< 0 uses the asymptotic B of the scenario
};

struct Scenario {
  std::string name;
  DispersionKind law = DispersionKind::massive;
  std::optional<FiberParameters> fiber;
  FunctionOrder mode{1};
  double velocity = 2e8;     ///< m/s, analytic laws
  double gap = 0.0;          ///< Omega in rad/s, massive law
  double core_radius = 1.0;  ///< m, analytic laws
  PhysicalConstants constants{};
  SourceConfig source;
  PolarizationConfig polarization;
  double regularization = 0.0;  ///< eps in rad/m
  std::vector<double> z;        ///< distance ladder, m
  PropagationOptions propagation;
  DispersionGrid dispersion;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  FluxConfig flux;

  DispersionModel model() const {
    switch (law) {
      case DispersionKind::fiber:
        if (!fiber) throw InvariantError("scenario: fiber law needs fiber parameters");
        return DispersionModel(FiberLaw(*fiber, mode));
      case DispersionKind::dispersionless:
        return DispersionModel(DispersionlessLaw(velocity, core_radius, constants));
      case DispersionKind::massive:
        return DispersionModel(MassiveLaw(velocity, gap, core_radius, constants));
    }
    throw InvariantError("scenario: unknown law");
  }

  SpectralAmplitude amplitude() const {
    return SpectralAmplitude::gaussian(source.k_center, source.k_width_fraction * source.k_center, source.power, 1.0,
                                       source.k_reference);
  }

  PolarizationVector polarization_vector() const {
    return PolarizationVector(polarization.nu_rho, polarization.nu_phi, polarization.p_nu);
  }

  PropagationOptions propagation_options() const {
    PropagationOptions o = propagation;
    o.span = source.span;
    o.reg = RegularizationParameter(regularization);
    return o;
  }

  /// Builds every derived object once so that invalid input fails early.
  void validate() const {
    if (!(source.k_center > 0.0)) throw InvariantError("source.k_center must be > 0");
    if (!(source.k_width_fraction > 0.0)) throw InvariantError("source.k_width_fraction must be > 0");
    if (!(source.span > 0.0)) throw InvariantError("source.span must be > 0");
    if (source.nodes < 8) throw InvariantError("source.nodes must be >= 8");
    if (z.empty()) throw InvariantError("grids.z must list at least one distance");
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!(z[i] > 0.0)) throw InvariantError("grids.z distances must be > 0");
      if (i > 0 && !(z[i] > z[i - 1])) throw InvariantError("grids.z must increase strictly");
    }
    if (samples < 2) throw InvariantError("sampling.n must be >= 2");
    if (!(flux.safety_factor >= 1.0)) throw InvariantError("flux.safety_factor must be >= 1");
    (void)model();
    (void)amplitude();
    (void)polarization_vector();
    (void)RegularizationParameter(regularization);
    (void)Propagator(model(), amplitude(), polarization_vector(), propagation_options());
  }
};

inline std::vector<std::string> preset_names() { return {"dispersionless", "massive", "he11-fiber", "telecom"}; }

inline constexpr double reference_k0 = 5.8616e6;  // rad/m, about 1.55 um in the fiber core

inline Scenario preset(std::string_view name) {
  Scenario s;
  s.name = std::string(name);
  if (name == "dispersionless") {
    s.law = DispersionKind::dispersionless;
    s.velocity = 2e8;
    s.source.k_center = reference_k0;
    s.source.k_width_fraction = 0.02;
    s.z = {0.01, 0.02, 0.04, 0.08, 0.16};
  } else if (name == "massive") {
    s.law = DispersionKind::massive;
    s.velocity = 2e8;
    s.gap = 2e8 * reference_k0;
    s.source.k_center = reference_k0;
    s.source.k_width_fraction = 0.02;
    s.z = {0.02, 0.04, 0.08, 0.16};
  } else if (name == "he11-fiber") {
    s.law = DispersionKind::fiber;
    s.fiber = FiberParameters(4e-6, 1.0, 2.1025, 1.0, 2.085);
    s.mode = FunctionOrder(1);
    s.source.k_center = reference_k0;
    s.source.k_width_fraction = 0.05;
    s.z = {1.0, 2.0, 4.0, 8.0};
    s.dispersion = {2.5e3, 2e7, 64};
  } else if (name == "telecom") {
    // Massive law matched to v_g = 2.042e8 m/s and omega'' = 0.185 m^2/s at k0
    // (about 21 ps/(nm km) at 1550 nm); the source width gives sigma(0) = 4 ps.
    const double vg = 2.042e8, w2 = 0.185, k = reference_k0;
    const double v = vg / std::sqrt(1.0 - w2 * k / vg);
    const double omega = v * v * k / vg;
    s.law = DispersionKind::massive;
    s.velocity = v;
    s.gap = std::sqrt(omega * omega - v * v * k * k);
    s.source.k_center = k;
    s.source.k_width_fraction = 866.0 / k;
    s.z = {1.0, 1e5};
  } else {
    throw InvariantError("unknown preset '" + std::string(name) + "'");
  }
  return s;
}

inline std::vector<double> scenario_weight_grid(const Scenario& s) {
  return weight_grid(s.amplitude(), s.source.nodes, s.source.span);
}

inline SpectralWeight scenario_weight(const Scenario& s) {
  return spectral_weight(s.amplitude(), s.model(), s.polarization_vector(), RegularizationParameter(s.regularization),
                         scenario_weight_grid(s));
}

inline AsymptoticConstants asymptotic_constants(const Scenario& s, const SpectralWeight& w) {
  return slopes(AsymptoticIntegrand(w, s.model(), s.propagation.threads), s.polarization.p_nu);
}

inline AsymptoticConstants asymptotic_constants(const Scenario& s) { return asymptotic_constants(s, scenario_weight(s)); }

struct DirectRun {
  std::vector<ArrivalDistribution> distributions;
  std::vector<MomentSet> moments;
  std::vector<ArrivalStatistics> statistics;
};

/// Arrival densities on a shared k grid, their moments and (t_mean, sigma).
inline DirectRun direct_run(const Scenario& s, std::span<const double> zs) {
  const Propagator p(s.model(), s.amplitude(), s.polarization_vector(), s.propagation_options());
  DirectRun r;
  r.distributions = p.ladder(zs);
  for (const auto& d : r.distributions) {
    r.moments.push_back(moments(d));
    r.statistics.push_back(mean_and_sigma(r.moments.back(), d.p_nu));
  }
  return r;
}

inline DirectRun direct_run(const Scenario& s) { return direct_run(s, s.z); }

/// omega(k) table over the configured (or a law-dependent default) band.
inline DispersionTable dispersion_table(const Scenario& s) {
  double lo = s.dispersion.k_min, hi = s.dispersion.k_max;
  if (!(lo > 0.0)) lo = 0.5 * s.source.k_center;
  if (!(hi > 0.0)) hi = 1.5 * s.source.k_center;
  return tabulate(s.model(), lo, hi, s.dispersion.points);
}

}  // namespace photodur
