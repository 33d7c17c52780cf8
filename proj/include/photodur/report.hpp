#pragma once

// Duration-growth table with an origin-constrained slope, and the photon-flux
// limit implied by the duration at a given distance.

#include <cmath>
#include <cstddef>
#include <vector>

#include "photodur/arrival_stats.hpp"
#include "photodur/errors.hpp"
#include "photodur/numerics.hpp"

namespace photodur {

struct FluxPlan {
  double z = 0.0;              ///< m
  double B = 0.0;              ///< s/m
  double safety_factor = 1.0;  ///< mean emission interval / photon duration
  double max_flux = 0.0;       ///< photons/s
};

/// max_flux = 1 / (safety_factor B z): the mean emission interval must exceed
/// the photon duration B z by the safety factor.
inline FluxPlan flux_plan(double B, double z, double safety_factor) {
  if (!(safety_factor >= 1.0)) throw DomainError("fluxplan: safety_factor must be >= 1");
  if (!(B >= 0.0) || !(z >= 0.0)) throw DomainError("fluxplan: need B >= 0 and z >= 0");
  if (!(B * z > 0.0)) throw DomainError("fluxplan: B z must be > 0 (no duration, no flux limit)");
  return {z, B, safety_factor, 1.0 / (safety_factor * B * z)};
}

struct DurationRow {
  double z = 0.0;
  double t_mean = 0.0;
  double sigma = 0.0;
  double sigma_over_z = 0.0;
};

struct DurationGrowthReport {
  std::vector<DurationRow> rows;
  double slope = 0.0;           ///< s/m, least squares through the origin
  double standard_error = 0.0;  ///< of the slope
  double band_low = 0.0;        ///< slope - 2 SE
  double band_high = 0.0;       ///< slope + 2 SE
  // Affine fit sigma = sigma_0 + slope z: separates the initial duration from
  // growth, so a non-spreading packet gives a slope that is zero within noise.
  double affine_slope = 0.0;
  double affine_intercept = 0.0;
  double affine_standard_error = 0.0;
};

inline DurationGrowthReport report_duration_growth(const std::vector<ArrivalStatistics>& stats) {
  if (stats.size() < 3) throw DomainError("duration report: need at least 3 distances");
  DurationGrowthReport r;
  numerics::CompensatedSum zz, zs;
  for (const auto& s : stats) {
    if (!(s.z > 0.0)) throw DomainError("duration report: distances must be > 0");
    r.rows.push_back({s.z, s.t_mean, s.sigma, s.sigma / s.z});
    zz.add(s.z * s.z);
    zs.add(s.z * s.sigma);
  }
  r.slope = zs.value() / zz.value();
  numerics::CompensatedSum rss;
  for (const auto& s : stats) rss.add(std::pow(s.sigma - r.slope * s.z, 2));
  const double dof = static_cast<double>(stats.size() - 1);
  r.standard_error = std::sqrt(rss.value() / dof / zz.value());
  r.band_low = r.slope - 2.0 * r.standard_error;
  r.band_high = r.slope + 2.0 * r.standard_error;

  const double n = static_cast<double>(stats.size());
  numerics::CompensatedSum sz, ss;
  for (const auto& s : stats) {
    sz.add(s.z);
    ss.add(s.sigma);
  }
  const double zbar = sz.value() / n, sbar = ss.value() / n;
  numerics::CompensatedSum sxx, sxy;
  for (const auto& s : stats) {
    sxx.add((s.z - zbar) * (s.z - zbar));
    sxy.add((s.z - zbar) * (s.sigma - sbar));
  }
  r.affine_slope = sxy.value() / sxx.value();
  r.affine_intercept = sbar - r.affine_slope * zbar;
  numerics::CompensatedSum ares;
  for (const auto& s : stats) ares.add(std::pow(s.sigma - r.affine_intercept - r.affine_slope * s.z, 2));
  r.affine_standard_error = std::sqrt(ares.value() / (n - 2.0) / sxx.value());
  return r;
}

}  // namespace photodur
