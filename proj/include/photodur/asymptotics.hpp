#pragma once

// Large-z constants of the arrival moments, tau_n(z) ~ tau_n~ z^n:
//
//   tau0~ = (pi/2) int |f|^2 / (|k| F)        = pi int |f|^2 / |w'|
//   tau1~ = -(pi/4) int ln|2k| (|f|^2 / F^2)''
//   tau2~ = (pi/8) int |f|^2 / (|k|^3 F^3)    = pi int |f|^2 / |w'|^3
//
// with F = F(k, k) = w'(k) / (2k). The weight is even, so every integral is
// twice its k > 0 half. tau1~ is evaluated twice: directly, with h'' from a
// natural spline of h = |f|^2 / F^2, and after moving both derivatives onto
// ln|2k| (symmetric excision of (-delta, delta) plus boundary terms).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "photodur/constants.hpp"
#include "photodur/dispersion.hpp"
#include "photodur/errors.hpp"
#include "photodur/mode_fields.hpp"
#include "photodur/numerics.hpp"
#include "photodur/parallel.hpp"

namespace photodur {

/// The two tau1~ evaluations and their diagnostics.
struct Tau1Routes {
  double direct = 0.0;
  double by_parts = 0.0;
  double pv_delta = 0.0;        ///< innermost excision half-width
  double pv_change = 0.0;       ///< relative change of the by-parts value over the last halving of delta
  double gap_correction = 0.0;  ///< power-law contribution of (-k_1, k_1) to the by-parts route

  double relative_difference() const {
    const double scale = std::max(std::abs(direct), std::abs(by_parts));
    return scale == 0.0 ? 0.0 : std::abs(direct - by_parts) / scale;
  }
};

struct AsymptoticConstants {
  double tau0_t = 0.0;
  double tau1_t = 0.0;
  double tau2_t = 0.0;
  double A = 0.0;  ///< s/m
  double B = 0.0;  ///< s/m
  double p_nu = 1.0;
  std::array<double, 3> error{};  ///< quadrature error estimates of tau0~, tau1~, tau2~
  Tau1Routes tau1_routes;
  double radicand = 0.0;  ///< tau2~ / (P_nu tau0~) - A^2 before clamping
};

inline constexpr double tau1_route_tolerance = 1e-3;
inline constexpr double slope_radicand_tolerance = 1e-10;

namespace detail {

/// Power-law fit y ~ c k^s through the two innermost nodes.
struct InnerPowerLaw {
  double c = 0.0;
  double s = 0.0;
  bool valid = false;
};

inline InnerPowerLaw inner_power_law(double k0, double k1, double y0, double y1) {
  InnerPowerLaw p;
  if (!(y0 > 0.0) || !(y1 > 0.0)) return p;
  p.s = std::log(y1 / y0) / std::log(k1 / k0);
  p.c = y0 / std::pow(k0, p.s);
  p.valid = std::isfinite(p.s) && std::isfinite(p.c);
  return p;
}

}  // namespace detail

/// k > 0 samples of the weight and of |w'|, shared by all constants.
class AsymptoticIntegrand {
 public:
  AsymptoticIntegrand(const SpectralWeight& weight, const DispersionModel& model, unsigned threads = 1) {
    const auto& k = weight.k;
    const auto& w = weight.weight;
    const std::size_t n = k.size();
    if (w.size() != n) throw DomainError("asymptotics: weight and grid sizes differ");
    for (std::size_t i = 0; i < n; ++i) {
      if (k[i] != -k[n - 1 - i] || w[i] != w[n - 1 - i]) {
        throw DomainError("asymptotics: the weight must be sampled evenly on a symmetric grid");
      }
      if (!(w[i] >= 0.0) || !std::isfinite(w[i])) throw DomainError("asymptotics: weight must be finite and non-negative");
      if (i > 0 && !(k[i] > k[i - 1])) throw DomainError("asymptotics: k grid must increase strictly");
      if (k[i] == 0.0 && w[i] != 0.0) throw DomainError("asymptotics: weight must vanish at k = 0");
      if (k[i] > 0.0) {
        k_.push_back(k[i]);
        w_.push_back(w[i]);
      }
    }
    if (k_.size() < 4) throw DomainError("asymptotics: need at least 4 nodes with k > 0");
    zero_ = std::all_of(w_.begin(), w_.end(), [](double x) { return x == 0.0; });
    gv_.assign(k_.size(), 0.0);
    const auto reg = weight.reg;
    parallel_for(k_.size(), threads, [&](std::size_t i) {
      if (w_[i] == 0.0) return;  // never divided by
      const double ke = reg.effective_k(k_[i]);
      gv_[i] = std::abs(model.omega_prime(ke) * (k_[i] / ke));
      if (!(gv_[i] > 0.0)) throw DomainError("asymptotics: group velocity vanishes inside the weight support");
    });
    // Cell-centred grids reach toward k = 0; the interval (0, k_1) is then part of the domain.
    cell_centred_ = k_[0] < 1.5 * (k_[1] - k_[0]);
  }

  const std::vector<double>& k() const noexcept { return k_; }
  const std::vector<double>& weight() const noexcept { return w_; }
  const std::vector<double>& group_velocity() const noexcept { return gv_; }
  bool zero() const noexcept { return zero_; }
  bool cell_centred() const noexcept { return cell_centred_; }

  /// w / |w'|^p at the positive nodes (0 where the weight vanishes).
  std::vector<double> ratio(int p) const {
    std::vector<double> y(k_.size(), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (w_[i] != 0.0) y[i] = w_[i] / std::pow(gv_[i], p);
    }
    return y;
  }

  /// h = |f|^2 / F^2 = 4 k^2 w / w'^2.
  std::vector<double> h() const {
    auto y = ratio(2);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= 4.0 * k_[i] * k_[i];
    return y;
  }

  /// int_0^inf y dk: node trapezoid plus, on cell-centred grids, the power-law
  /// gap (0, k_1). Throws when y is visibly non-integrable at k -> 0.
  numerics::QuadratureValue half_line(const std::vector<double>& y, const std::string& what) const {
    auto q = numerics::trapezoid_with_error(k_, y);
    const auto fit = detail::inner_power_law(k_[0], k_[1], y[0], y[1]);
    const bool visible = y[0] * k_[0] > 1e-12 * std::abs(q.value);
    if (fit.valid && visible && fit.s <= -1.0) {
      throw IntegrabilityError(what + ": integrand grows like k^" + std::to_string(fit.s) + " toward k = 0");
    }
    if (cell_centred_ && fit.valid && fit.s > -1.0) q.value += inner_correction(y[0], fit.s);
    return q;
  }

  /// int_0^{k_1} c k^s dk plus the leading Euler-Maclaurin end correction of
  /// the trapezoid at k_1, (dk^2 / 12) y'(k_1), both from the power-law fit.
  double inner_correction(double y0, double s) const {
    const double d = k_[0], dk = k_[1] - k_[0];
    return y0 * d / (s + 1.0) + dk * dk / 12.0 * s * y0 / d;
  }

 private:
  std::vector<double> k_, w_, gv_;
  bool zero_ = false;
  bool cell_centred_ = false;
};

inline double tau0_tilde(const AsymptoticIntegrand& in) {
  if (in.zero()) return 0.0;
  return 2.0 * std::numbers::pi * in.half_line(in.ratio(1), "tau0~").value;
}

inline double tau2_tilde(const AsymptoticIntegrand& in) {
  if (in.zero()) return 0.0;
  return 2.0 * std::numbers::pi * in.half_line(in.ratio(3), "tau2~").value;
}

/// Both tau1~ evaluations, without judging their agreement.
inline Tau1Routes tau1_routes(const AsymptoticIntegrand& in) {
  Tau1Routes r;
  if (in.zero()) return r;
  const auto& k = in.k();
  const auto h = in.h();
  const std::size_t n = k.size();
  // h is even: on cell-centred grids the spline runs over both halves, so the
  // only natural end conditions sit at +-k_max where h has decayed.
  std::vector<double> sk, sh;
  if (in.cell_centred()) {
    for (std::size_t i = n; i-- > 0;) {
      sk.push_back(-k[i]);
      sh.push_back(h[i]);
    }
  }
  sk.insert(sk.end(), k.begin(), k.end());
  sh.insert(sh.end(), h.begin(), h.end());
  const numerics::CubicSpline spline(sk, sh);

  std::vector<double> y(n);  // h / k^2
  for (std::size_t i = 0; i < n; ++i) y[i] = h[i] / (k[i] * k[i]);

  // Contribution of (-k_1, k_1) from the power law h ~ c k^s:
  // 2 c s (s-1) d^(s-1) [ln(2d)/(s-1) - 1/(s-1)^2].
  double gap = 0.0;
  double inner_slope = spline.derivative(k[0]);
  if (in.cell_centred()) {
    const auto fit = detail::inner_power_law(k[0], k[1], h[0], h[1]);
    if (fit.valid) {
      // Near k = 0 a spline of spacing dk cannot resolve h' at k_1 < dk to
      // relative accuracy; the power law does, consistently with the gap.
      inner_slope = fit.s * h[0] / k[0];
      const double s = fit.s, d = k[0];
      const bool visible = y[0] * d > 1e-12 * std::abs(numerics::trapezoid(k, y));
      if (s <= 1.0 && visible) {
        throw IntegrabilityError("tau1~: |f|^2 / F^2 vanishes like k^" + std::to_string(s) + ", too slowly at k = 0");
      }
      if (s > 1.0) {
        gap = 2.0 * fit.c * s * (s - 1.0) * std::pow(d, s - 1.0) * (std::log(2.0 * d) / (s - 1.0) - 1.0 / ((s - 1.0) * (s - 1.0)));
      }
    }
  }

  // (i) int ln|2k| h''(k) dk with h'' piecewise linear: 8-point Gauss per
  // interval; the interval (-k_1, k_1) of a symmetric spline has constant
  // h'' = M and contributes 2 M k_1 (ln(2 k_1) - 1) exactly.
  {
    const auto ref = numerics::gauss_legendre(8, 0.0, 1.0);
    const auto& m = spline.moments();
    numerics::CompensatedSum sum;
    for (std::size_t i = 0; i + 1 < sk.size(); ++i) {
      const double dk = sk[i + 1] - sk[i];
      if (sk[i] < 0.0 && sk[i + 1] > 0.0) {
        const double d = sk[i + 1];
        sum.add(0.5 * (m[i] + m[i + 1]) * 2.0 * d * (std::log(2.0 * d) - 1.0));
        continue;
      }
      for (std::size_t q = 0; q < ref.nodes.size(); ++q) {
        const double b = ref.nodes[q];
        const double kk = std::abs(sk[i] + b * dk);
        sum.add(ref.weights[q] * dk * std::log(2.0 * kk) * ((1.0 - b) * m[i] + b * m[i + 1]));
      }
    }
    // A one-sided spline covers k > 0 only; the weight is even.
    const double full = in.cell_centred() ? sum.value() : 2.0 * sum.value();
    r.direct = -0.25 * std::numbers::pi * full;
  }

  // (ii) V(delta) = int_{|k| > delta} ln|2k| h'' dk
  //              = 2 [-ln(2 delta) h'(delta) + h(delta)/delta] - 2 int_delta^inf h / k^2,
  // with delta running over the nodes k_(2^i) down to the innermost one.
  {
    std::vector<double> tail(n, 0.0);  // trapezoid of y over [k_j, k_n]
    numerics::CompensatedSum acc;
    for (std::size_t j = n - 1; j-- > 0;) {
      acc.add(0.5 * (k[j + 1] - k[j]) * (y[j] + y[j + 1]));
      tail[j] = acc.value();
    }
    if (in.cell_centred()) {
      // Same end correction as the other half-line integrals.
      const auto fit = detail::inner_power_law(k[0], k[1], y[0], y[1]);
      if (fit.valid) tail[0] += (k[1] - k[0]) * (k[1] - k[0]) / 12.0 * fit.s * y[0] / k[0];
    }
    const auto V = [&](std::size_t j) {
      const double slope = j == 0 ? inner_slope : spline.derivative(k[j]);
      return 2.0 * (-std::log(2.0 * k[j]) * slope + h[j] / k[j]) - 2.0 * tail[j];
    };
    std::vector<std::size_t> seq;
    for (std::size_t j = 1; j - 1 < n / 4; j *= 2) seq.push_back(j - 1);
    double prev = V(seq.back());
    double value = prev;
    for (auto it = seq.rbegin() + 1; it != seq.rend(); ++it) {
      value = V(*it);
      r.pv_change = value == 0.0 ? 0.0 : std::abs(value - prev) / std::abs(value);
      prev = value;
    }
    r.pv_delta = k[0];
    r.by_parts = -0.25 * std::numbers::pi * (value + gap);
  }
  r.gap_correction = -0.25 * std::numbers::pi * gap;  // by-parts route only
  return r;
}

/// tau1~ from the by-parts route after both routes agree within `tolerance`.
inline double tau1_tilde(const AsymptoticIntegrand& in, double tolerance = tau1_route_tolerance) {
  const auto r = tau1_routes(in);
  if (r.relative_difference() > tolerance) {
    throw CrossCheckMismatch("tau1~: direct and by-parts evaluations differ by " + std::to_string(r.relative_difference()),
                             r.direct, r.by_parts);
  }
  return r.by_parts;
}

inline double tau0_tilde(const SpectralWeight& w, const DispersionModel& model) { return tau0_tilde(AsymptoticIntegrand(w, model)); }
inline double tau1_tilde(const SpectralWeight& w, const DispersionModel& model) { return tau1_tilde(AsymptoticIntegrand(w, model)); }
inline double tau2_tilde(const SpectralWeight& w, const DispersionModel& model) { return tau2_tilde(AsymptoticIntegrand(w, model)); }

/// A = tau1~ / (P_nu tau0~), B = sqrt(tau2~ / (P_nu tau0~) - A^2).
inline AsymptoticConstants slopes(double tau0_t, double tau1_t, double tau2_t, double p_nu = 1.0) {
  if (!(p_nu > 0.0 && p_nu <= 1.0)) throw DomainError("slopes: P_nu must lie in (0, 1]");
  if (!(tau0_t > 0.0)) throw DomainError("slopes: tau0~ must be positive (zero weight?)");
  AsymptoticConstants ac;
  ac.tau0_t = tau0_t;
  ac.tau1_t = tau1_t;
  ac.tau2_t = tau2_t;
  ac.p_nu = p_nu;
  ac.A = tau1_t / (p_nu * tau0_t);
  const double second = tau2_t / (p_nu * tau0_t);
  ac.radicand = second - ac.A * ac.A;
  if (ac.radicand < -slope_radicand_tolerance * std::abs(second)) {
    throw NegativeVarianceError("slopes: B^2 = " + std::to_string(ac.radicand) + " is negative", ac.radicand);
  }
  ac.B = std::sqrt(std::max(ac.radicand, 0.0));
  return ac;
}

inline AsymptoticConstants slopes(const AsymptoticIntegrand& in, double p_nu = 1.0) {
  const auto routes = tau1_routes(in);
  if (routes.relative_difference() > tau1_route_tolerance) {
    throw CrossCheckMismatch("tau1~: direct and by-parts evaluations differ by " + std::to_string(routes.relative_difference()),
                             routes.direct, routes.by_parts);
  }
  const auto q0 = in.zero() ? numerics::QuadratureValue{} : in.half_line(in.ratio(1), "tau0~");
  const auto q2 = in.zero() ? numerics::QuadratureValue{} : in.half_line(in.ratio(3), "tau2~");
  auto ac = slopes(2.0 * std::numbers::pi * q0.value, routes.by_parts, 2.0 * std::numbers::pi * q2.value, p_nu);
  ac.error = {2.0 * std::numbers::pi * q0.error, std::abs(routes.direct - routes.by_parts),
              2.0 * std::numbers::pi * q2.error};
  ac.tau1_routes = routes;
  return ac;
}

inline AsymptoticConstants slopes(const SpectralWeight& w, const DispersionModel& model, double p_nu = 1.0,
                                  unsigned threads = 1) {
  return slopes(AsymptoticIntegrand(w, model, threads), p_nu);
}

// ---------------------------------------------------------------------------
// Laplace transform of ln t

struct LaplaceLogCheck {
  double numeric = 0.0;
  double analytic = 0.0;
  double relative_error() const { return std::abs(numeric - analytic) / std::abs(analytic); }
};

/// int_0^inf ln t e^{-st} dt against -(gamma + ln s)/s. With t = e^x the
/// integrand x e^{x - s e^x} decays doubly exponentially to the right and
/// exponentially to the left, so a plain trapezoid converges geometrically.
inline LaplaceLogCheck laplace_log_selfcheck(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("laplace_log_selfcheck: need s > 0");
  const double lo = -50.0 - std::max(0.0, -std::log(s));
  const double hi = std::log(60.0 / s);
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / 0.01));
  const double dx = (hi - lo) / static_cast<double>(n);
  numerics::CompensatedSum sum;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    const double f = x * std::exp(x - s * std::exp(x));
    sum.add((i == 0 || i == n) ? 0.5 * f : f);
  }
  return {sum.value() * dx, -(euler_gamma + std::log(s)) / s};
}

// ---------------------------------------------------------------------------
// Extrapolation from a calibration distance

inline double extrapolate_sigma(double B, double z) {
  if (!(B >= 0.0) || !(z >= 0.0)) throw DomainError("extrapolate_sigma: need B >= 0 and z >= 0");
  return B * z;
}

struct DurationPoint {
  double z = 0.0;
  double sigma = 0.0;
};

inline constexpr double asymptotic_stability = 0.02;

/// Least-squares slope through the origin of (z_i, sigma_i). The last two
/// points must show sigma/z settled within 2%.
inline double calibrate_B(const std::vector<DurationPoint>& pts) {
  if (pts.size() < 2) throw DomainError("calibrate_B: need at least two calibration points");
  numerics::CompensatedSum zz, zs;
  for (const auto& p : pts) {
    if (!(p.z > 0.0) || !(p.sigma >= 0.0)) throw DomainError("calibrate_B: need z > 0 and sigma >= 0");
    zz.add(p.z * p.z);
    zs.add(p.z * p.sigma);
  }
  const double r1 = pts[pts.size() - 2].sigma / pts[pts.size() - 2].z;
  const double r2 = pts.back().sigma / pts.back().z;
  const double scale = std::max(r1, r2);
  if (scale > 0.0 && std::abs(r2 - r1) > asymptotic_stability * scale) {
    throw NotAsymptotic("calibrate_B: sigma/z changes by " + std::to_string(100.0 * std::abs(r2 - r1) / scale) +
                        "% over the last two points");
  }
  return zs.value() / zz.value();
}

}  // namespace photodur
