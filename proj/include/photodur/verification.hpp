#pragma once

// End-to-end consistency checks of one scenario: the direct pipeline
// (propagation, moments, sampling) against the asymptotic constants.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "photodur/arrival_stats.hpp"
#include "photodur/asymptotics.hpp"
#include "photodur/report.hpp"
#include "photodur/scenario.hpp"

namespace photodur {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerificationResult {
  std::vector<Check> checks;
  AsymptoticConstants constants;
  DirectRun run;
  std::optional<DurationGrowthReport> growth;

  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

inline constexpr double slope_agreement_tolerance = 0.05;
inline constexpr double moment_agreement_tolerance = 0.05;
inline constexpr double null_slope_factor = 1e-6;     // |B| < factor / v
inline constexpr double null_duration_change = 1e-3;  // relative sigma(z) drift

namespace detail {
inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}
}  // namespace detail

inline VerificationResult verify_scenario(const Scenario& s) {
  using detail::fmt;
  VerificationResult r;
  auto add = [&](std::string name, bool pass, std::string detail) { r.checks.push_back({std::move(name), pass, std::move(detail)}); };

  const auto weight = scenario_weight(s);
  const AsymptoticIntegrand in(weight, s.model(), s.propagation.threads);
  try {
    r.constants = slopes(in, s.polarization.p_nu);
    add("tau1 routes", true, fmt("direct and by-parts differ by %.3g (tolerance %.0e)",
                                 r.constants.tau1_routes.relative_difference(), tau1_route_tolerance));
  } catch (const CrossCheckMismatch& e) {
    add("tau1 routes", false, e.what());
    return r;
  }

  r.run = direct_run(s);
  add("tail bound", true, fmt("all %.0f distributions within the tail bound %.1e", double(r.run.distributions.size()),
                              s.propagation.tail_bound));

  const auto& c = r.constants;
  const double zmax = s.z.back();
  const auto& ms = r.run.moments.back();
  const std::array<double, 3> asym{c.tau0_t, c.tau1_t, c.tau2_t};
  for (int n = 0; n <= 2; ++n) {
    const double direct = ms.tau[n] / std::pow(zmax, n);
    const double rel = std::abs(direct / asym[n] - 1.0);
    add("tau" + std::to_string(n) + " scaling", rel < moment_agreement_tolerance,
        fmt("tau_n(z)/z^n = %.6g vs asymptotic %.6g (rel %.2g)", direct, asym[n], rel) + fmt(" at z = %g m", zmax));
  }

  const auto& st = r.run.statistics;
  if (s.model().kind() == DispersionKind::dispersionless) {
    const double v = group_velocity(s.model(), s.source.k_center);
    add("null slope", std::abs(c.B) < null_slope_factor / v, fmt("B = %.3g s/m, |B| v = %.3g (B ~ 0)", c.B, std::abs(c.B) * v));
    double lo = st.front().sigma, hi = lo;
    for (const auto& x : st) lo = std::min(lo, x.sigma), hi = std::max(hi, x.sigma);
    const double drift = (hi - lo) / lo;
    add("constant duration", drift < null_duration_change,
        fmt("sigma varies by %.3g over a %.3gx distance range", drift, zmax / s.z.front()));
    if (st.size() >= 3) r.growth = report_duration_growth(st);
  } else if (st.size() >= 3) {
    r.growth = report_duration_growth(st);
    const double rel = std::abs(r.growth->slope / c.B - 1.0);
    add("duration slope", rel < slope_agreement_tolerance,
        fmt("origin-constrained slope %.6g vs B %.6g s/m (rel %.2g)", r.growth->slope, c.B, rel));
  } else {
    const double rel = std::abs(st.back().sigma / (c.B * zmax) - 1.0);
    add("duration slope", rel < slope_agreement_tolerance,
        fmt("sigma(z)/z = %.6g vs B %.6g s/m (rel %.2g)", st.back().sigma / zmax, c.B, rel));
  }

  const auto samples = sample_arrival_times(r.run.distributions.back(), s.samples, s.seed, s.propagation.threads);
  const double est = estimate_sigma(samples);
  // The sampler draws from the unit-mass density P / tau_0.
  const double mean = ms.tau1() / ms.tau0();
  const double sigma = std::sqrt(std::max(0.0, ms.tau2() / ms.tau0() - mean * mean));
  const double bound = 4.0 * sigma / std::sqrt(2.0 * static_cast<double>(s.samples));
  add("sample estimator", std::abs(est - sigma) < bound,
      fmt("estimate %.6g vs sigma %.6g s (bound %.3g)", est, sigma, bound));
  return r;
}

}  // namespace photodur
