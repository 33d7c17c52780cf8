#pragma once

// Guided-mode dispersion of a step-index fiber and analytic stand-in laws.
//
// The fiber relation is solved in nondimensional form: axial wavenumber
// ka, frequency W = omega a / c0. The vacuum wavenumber is k0 = omega / c0
// (= omega sqrt(mu0 eps0)).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "photodur/constants.hpp"
#include "photodur/errors.hpp"
#include "photodur/kernels.hpp"
#include "photodur/numerics.hpp"

namespace photodur {

using kernels::FunctionOrder;

class FiberParameters {
 public:
  FiberParameters(double core_radius, double mu1, double eps1, double mu2, double eps2, PhysicalConstants constants = {})
      : a_(core_radius), mu1_(mu1), eps1_(eps1), mu2_(mu2), eps2_(eps2), constants_(constants) {
    if (!(core_radius > 0.0) || !std::isfinite(core_radius)) throw InvariantError("fiber: core radius a must be > 0");
    if (!(mu1 > 0.0) || !(eps1 > 0.0) || !(mu2 > 0.0) || !(eps2 > 0.0)) {
      throw InvariantError("fiber: mu1, eps1, mu2, eps2 must be positive");
    }
    if (!(mu1 * eps1 > mu2 * eps2)) throw InvariantError("fiber: guiding condition mu1*eps1 > mu2*eps2 violated");
    const auto& c = constants_;
    if (!(c.c0 > 0.0) || !(c.mu0 > 0.0) || !(c.eps0 > 0.0) || !(c.hbar > 0.0)) {
      throw InvariantError("fiber: physical constants must be positive");
    }
    if (std::abs(c.c0 * std::sqrt(c.mu0 * c.eps0) - 1.0) > 1e-8) {
      throw InvariantError("fiber: c0 must equal 1/sqrt(mu0*eps0)");
    }
  }

  double a() const noexcept { return a_; }
  double mu1() const noexcept { return mu1_; }
  double eps1() const noexcept { return eps1_; }
  double mu2() const noexcept { return mu2_; }
  double eps2() const noexcept { return eps2_; }
  double core_index() const noexcept { return std::sqrt(mu1_ * eps1_); }
  double cladding_index() const noexcept { return std::sqrt(mu2_ * eps2_); }
  const PhysicalConstants& constants() const noexcept { return constants_; }

 private:
  double a_, mu1_, eps1_, mu2_, eps2_;
  PhysicalConstants constants_;
};

/// The epsilon of the substitution k^2 -> k^2 + eps^2.
struct RegularizationParameter {
  double eps = 0.0;

  constexpr RegularizationParameter() = default;
  explicit RegularizationParameter(double e) : eps(e) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw InvariantError("regularization eps must be >= 0");
  }
  double effective_k(double k) const noexcept { return eps == 0.0 ? std::abs(k) : std::hypot(k, eps); }
};

struct TransverseWavenumbers {
  double kappa = 0.0;
  double q = 0.0;
  double k0 = 0.0;
};

/// kappa^2 = k0^2 mu1 eps1 - k^2, q^2 = k^2 - k0^2 mu2 eps2 with k0 = omega / c0.
inline TransverseWavenumbers transverse_wavenumbers(const FiberParameters& fp, double omega, double k) {
  const double k0 = omega / fp.constants().c0;
  const double kappa2 = k0 * k0 * fp.mu1() * fp.eps1() - k * k;
  const double q2 = k * k - k0 * k0 * fp.mu2() * fp.eps2();
  if (kappa2 < 0.0 || q2 < 0.0) throw DomainError("(omega, k) lies outside the guided band");
  return {std::sqrt(kappa2), std::sqrt(q2), k0};
}

enum class ResidualScaling {
  exact,        ///< G_m exactly as defined
  k_rescaled,   ///< G_m * exp(2 q a): same sign and zeros, no under/overflow in K_m
};

namespace detail {

// G_m in nondimensional variables: u = kappa a, w = q a, W = k0 a, b = k a.
// Written with J and K multiplied through so no division by J_m(u) occurs.
inline double residual_nd(const FiberParameters& fp, int m, double u, double w, double W, double b, bool scaled) {
  const FunctionOrder order(m);
  const auto j = kernels::bessel_j_with_derivative(order, u);
  auto kk = kernels::bessel_k_scaled_with_derivative(order, w);
  if (!scaled) {
    const double e = std::exp(-w);
    kk.value *= e;
    kk.derivative *= e;
  }
  const double J = j.value, Jp = j.derivative, K = kk.value, Kp = kk.derivative;
  const double inv = 1.0 / (w * w) + 1.0 / (u * u);
  const double t1 = -static_cast<double>(m * m) * b * b / (W * W) * inv * inv * J * J * K * K;
  const double t2 = (fp.mu1() * Jp * K / u + fp.mu2() * J * Kp / w) * (fp.eps1() * Jp * K / u + fp.eps2() * J * Kp / w);
  return u * u * w * w / (W * W * fp.mu1() * fp.mu2()) * (t1 + t2);
}

// Band parametrisation at fixed b = ka: s in (0, 1) with
// u^2 = b^2 s (n1^2/n2^2 - 1), w^2 = b^2 (1 - s)(1 - n2^2/n1^2).
struct BandPoint {
  double u, w, W;
};

inline BandPoint band_point(const FiberParameters& fp, double b, double s, double one_minus_s) {
  const double n1sq = fp.mu1() * fp.eps1();
  const double n2sq = fp.mu2() * fp.eps2();
  BandPoint p{};
  p.u = b * std::sqrt(s * (n1sq / n2sq - 1.0));
  p.w = b * std::sqrt(one_minus_s * (1.0 - n2sq / n1sq));
  p.W = b * std::sqrt(1.0 / n1sq + s * (1.0 / n2sq - 1.0 / n1sq));
  return p;
}

}  // namespace detail

/// G_m(omega, k) of the step-index fiber. Throws DomainError outside the guided band.
inline double dispersion_residual(const FiberParameters& fp, FunctionOrder m, double omega, double k,
                                  ResidualScaling scaling = ResidualScaling::exact) {
  const auto tw = transverse_wavenumbers(fp, omega, k);
  if (tw.kappa == 0.0 || tw.q == 0.0) throw DomainError("dispersion_residual: band edge (kappa or q is zero)");
  const double a = fp.a();
  return detail::residual_nd(fp, m.value(), tw.kappa * a, tw.q * a, tw.k0 * a, std::abs(k) * a,
                             scaling == ResidualScaling::k_rescaled);
}

struct OmegaRoot {
  double omega = 0.0;           ///< rad/s
  double residual = 0.0;        ///< rescaled G at the root
  double residual_scale = 0.0;  ///< largest |rescaled G| among the bracketing scan samples
  bool edge_limited = false;    ///< root closer to the cladding light line than double precision resolves
};

/// Lowest-frequency root of G_m(., k) inside the guided band.
///
/// The band is scanned with 64 uniform samples plus a geometric cluster
/// toward the cladding light line; the first sign change is refined with
/// TOMS 748. For m = 1 (HE11, no cutoff) a root that sits closer to the light
/// line than 1e-16 in the band parameter is returned at the band edge, which
/// is then exact to machine precision in omega.
inline OmegaRoot solve_omega_root(const FiberParameters& fp, FunctionOrder m, double k) {
  if (k == 0.0 || !std::isfinite(k)) throw DomainError("solve_omega: k must be finite and nonzero");
  const double b = std::abs(k) * fp.a();
  const int order = m.value();

  struct Sample {
    double s, oms, g;
  };
  std::vector<Sample> samples;
  const auto eval = [&](double s, double oms) {
    const auto p = detail::band_point(fp, b, s, oms);
    return detail::residual_nd(fp, order, p.u, p.w, p.W, b, true);
  };
  constexpr int uniform = 64;
  for (int i = 0; i < uniform; ++i) {
    const double s = (i + 0.5) / uniform;
    samples.push_back({s, 1.0 - s, 0.0});
  }
  for (int j = 5; j <= 32; ++j) {
    const double oms = std::pow(10.0, -0.5 * j);
    samples.push_back({1.0 - oms, oms, 0.0});
  }
  std::sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) { return x.s < y.s; });
  double scale = 0.0;
  for (auto& smp : samples) {
    smp.g = eval(smp.s, smp.oms);
    scale = std::max(scale, std::abs(smp.g));
  }

  const auto to_omega = [&](double s, double oms) {
    return detail::band_point(fp, b, s, oms).W * fp.constants().c0 / fp.a();
  };

  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const auto& lo = samples[i];
    const auto& hi = samples[i + 1];
    if (lo.g == 0.0) return {to_omega(lo.s, lo.oms), 0.0, scale, false};
    if ((lo.g < 0.0) == (hi.g < 0.0)) continue;
    // Parametrise the bracket by 1 - s when it hugs the light line, to keep
    // w accurate.
    const bool near_edge = hi.oms < 1e-3;
    double root_s = 0.0, root_oms = 0.0;
    std::uintmax_t iters = 200;
    boost::math::tools::eps_tolerance<double> tol(52);
    if (near_edge) {
      const auto f = [&](double oms) { return eval(1.0 - oms, oms); };
      auto r = boost::math::tools::toms748_solve(f, hi.oms, lo.oms, hi.g, lo.g, tol, iters);
      root_oms = 0.5 * (r.first + r.second);
      root_s = 1.0 - root_oms;
    } else {
      const auto f = [&](double s) { return eval(s, 1.0 - s); };
      auto r = boost::math::tools::toms748_solve(f, lo.s, hi.s, lo.g, hi.g, tol, iters);
      root_s = 0.5 * (r.first + r.second);
      root_oms = 1.0 - root_s;
    }
    return {to_omega(root_s, root_oms), eval(root_s, root_oms), scale, false};
  }
  if (order == 1) {
    const double oms = std::numeric_limits<double>::min();
    return {to_omega(1.0, oms), 0.0, scale, true};
  }
  throw NoGuidedMode("no guided mode of order " + std::to_string(order) + " at k = " + std::to_string(k) +
                     " rad/m (below cutoff)");
}

inline double solve_omega(const FiberParameters& fp, FunctionOrder m, double k) {
  return solve_omega_root(fp, m, k).omega;
}

// ---------------------------------------------------------------------------
// Dispersion laws

/// Anything that maps an axial wavenumber to an even, non-negative frequency.
template <class L>
concept DispersionLaw = requires(const L& law, double k) {
  { law.omega(k) } -> std::convertible_to<double>;
  { law.omega_prime(k) } -> std::convertible_to<double>;
  { law.omega_second(k) } -> std::convertible_to<double>;
  { law.omega_difference(k, k) } -> std::convertible_to<double>;
};

/// omega = v |k|.
struct DispersionlessLaw {
  double v = 0.0;
  double core_radius = 1.0;
  PhysicalConstants constants{};

  explicit DispersionlessLaw(double velocity, double radius = 1.0, PhysicalConstants pc = {})
      : v(velocity), core_radius(radius), constants(pc) {
    if (!(v > 0.0)) throw InvariantError("dispersionless law: v must be > 0");
    if (!(core_radius > 0.0)) throw InvariantError("dispersionless law: core radius must be > 0");
  }
  double omega(double k) const { return v * std::abs(k); }
  double omega_prime(double k) const {
    if (k == 0.0) throw DomainError("omega' undefined at k = 0 for |k| law");
    return k > 0.0 ? v : -v;
  }
  double omega_second(double k) const {
    if (k == 0.0) throw DomainError("omega'' undefined at k = 0 for |k| law");
    return 0.0;
  }
  double omega_difference(double k1, double k2) const { return v * (std::abs(k1) - std::abs(k2)); }
};

/// omega = sqrt(v^2 k^2 + Omega^2).
struct MassiveLaw {
  double v = 0.0;
  double Omega = 0.0;
  double core_radius = 1.0;
  PhysicalConstants constants{};

  MassiveLaw(double velocity, double gap, double radius = 1.0, PhysicalConstants pc = {})
      : v(velocity), Omega(gap), core_radius(radius), constants(pc) {
    if (!(v > 0.0)) throw InvariantError("massive law: v must be > 0");
    if (!(Omega >= 0.0)) throw InvariantError("massive law: Omega must be >= 0");
    if (!(core_radius > 0.0)) throw InvariantError("massive law: core radius must be > 0");
  }
  double omega(double k) const { return std::hypot(v * k, Omega); }
  double omega_prime(double k) const { return v * v * k / omega(k); }
  double omega_second(double k) const {
    const double w = omega(k);
    return v * v * Omega * Omega / (w * w * w);
  }
  // (k1 - k2)(k1 + k2) v^2 / (omega1 + omega2): no cancellation.
  double omega_difference(double k1, double k2) const {
    const double s = omega(k1) + omega(k2);
    if (s == 0.0) return 0.0;
    return (k1 - k2) * (k1 + k2) * v * v / s;
  }
};

/// Lowest guided branch of order m of a step-index fiber.
struct FiberLaw {
  FiberParameters fiber;
  FunctionOrder order{1};

  FiberLaw(FiberParameters fp, FunctionOrder m) : fiber(fp), order(m) {}

  double omega(double k) const { return solve_omega(fiber, order, k); }

  // Centred differences of direct solves, fourth order.
  double omega_prime(double k) const {
    if (k == 0.0) throw DomainError("omega' requires k != 0; use the regularised wavenumber");
    const double ka = std::abs(k);
    const double h = 1e-3 * ka;
    const double d = (8.0 * (omega(ka + h) - omega(ka - h)) - (omega(ka + 2 * h) - omega(ka - 2 * h))) / (12.0 * h);
    return k > 0.0 ? d : -d;
  }
  double omega_second(double k) const {
    if (k == 0.0) throw DomainError("omega'' requires k != 0");
    const double ka = std::abs(k);
    const double h = 5e-3 * ka;
    return (-omega(ka + 2 * h) + 16.0 * omega(ka + h) - 30.0 * omega(ka) + 16.0 * omega(ka - h) - omega(ka - 2 * h)) /
           (12.0 * h * h);
  }
  double omega_difference(double k1, double k2) const { return omega(k1) - omega(k2); }
};

static_assert(DispersionLaw<DispersionlessLaw>);
static_assert(DispersionLaw<MassiveLaw>);
static_assert(DispersionLaw<FiberLaw>);

enum class DispersionKind { fiber, dispersionless, massive };

/// Type-erased dispersion law; immutable after construction.
class DispersionModel {
 public:
  using Variant = std::variant<FiberLaw, DispersionlessLaw, MassiveLaw>;

  DispersionModel(FiberLaw law) : law_(std::move(law)) {}
  DispersionModel(DispersionlessLaw law) : law_(law) {}
  DispersionModel(MassiveLaw law) : law_(law) {}

  DispersionKind kind() const noexcept { return static_cast<DispersionKind>(law_.index()); }
  const Variant& law() const noexcept { return law_; }

  double omega(double k) const {
    return std::visit([k](const auto& l) { return l.omega(k); }, law_);
  }
  double omega_prime(double k) const {
    return std::visit([k](const auto& l) { return l.omega_prime(k); }, law_);
  }
  double omega_second(double k) const {
    return std::visit([k](const auto& l) { return l.omega_second(k); }, law_);
  }
  double omega_difference(double k1, double k2) const {
    return std::visit([=](const auto& l) { return l.omega_difference(k1, k2); }, law_);
  }

  double core_radius() const {
    return std::visit(
        [](const auto& l) {
          if constexpr (std::is_same_v<std::decay_t<decltype(l)>, FiberLaw>) {
            return l.fiber.a();
          } else {
            return l.core_radius;
          }
        },
        law_);
  }
  const PhysicalConstants& constants() const {
    return std::visit(
        [](const auto& l) -> const PhysicalConstants& {
          if constexpr (std::is_same_v<std::decay_t<decltype(l)>, FiberLaw>) {
            return l.fiber.constants();
          } else {
            return l.constants;
          }
        },
        law_);
  }
  const FiberLaw* fiber() const noexcept { return std::get_if<FiberLaw>(&law_); }

 private:
  Variant law_;
};

static_assert(DispersionLaw<DispersionModel>);

/// omega at the regularised wavenumber sqrt(k^2 + eps^2).
template <DispersionLaw Law>
double regularized_omega(const Law& law, double k, RegularizationParameter reg) {
  return law.omega(reg.effective_k(k));
}

/// d omega / dk.
template <DispersionLaw Law>
double group_velocity(const Law& law, double k) {
  if (k == 0.0) throw DomainError("group_velocity: k = 0 requires regularisation");
  return law.omega_prime(k);
}

/// F(k, k) = omega'(k) / (2k), the diagonal of the factor in
/// omega(k') - omega(k) = (k' - k)(k' + k) F(k', k).
template <DispersionLaw Law>
double f_diag(const Law& law, double k) {
  if (k == 0.0) throw DomainError("f_diag: k = 0 requires regularisation");
  return law.omega_prime(k) / (2.0 * k);
}

/// F(k', k) from the difference quotient; falls back to the diagonal at k' = +-k.
template <DispersionLaw Law>
double f_offdiag(const Law& law, double k1, double k2) {
  const double denom = (k1 - k2) * (k1 + k2);
  if (denom == 0.0) return f_diag(law, std::abs(k1));
  return law.omega_difference(k1, k2) / denom;
}

// ---------------------------------------------------------------------------
// Tabulation

/// omega(k) and derivatives sampled on a log-spaced |k| grid (SI units).
struct DispersionTable {
  std::vector<double> k;
  std::vector<double> omega;
  std::vector<double> omega_prime;
  std::vector<double> omega_double_prime;

  /// Cubic Hermite interpolation from (omega, omega').
  double interpolate_omega(double kq) const { return hermite(std::abs(kq), omega, omega_prime); }
  /// Cubic Hermite interpolation from (omega', omega''); odd in k.
  double interpolate_group_velocity(double kq) const {
    const double v = hermite(std::abs(kq), omega_prime, omega_double_prime);
    return kq >= 0.0 ? v : -v;
  }

 private:
  double hermite(double x, const std::vector<double>& f, const std::vector<double>& df) const {
    if (k.size() < 2) throw DomainError("dispersion table is empty");
    if (x < k.front() || x > k.back()) throw DomainError("dispersion table: k outside the tabulated band");
    auto it = std::upper_bound(k.begin(), k.end(), x);
    std::size_t i = it == k.end() ? k.size() - 2 : static_cast<std::size_t>(it - k.begin()) - 1;
    const double h = k[i + 1] - k[i];
    const double t = (x - k[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f[i] + (t3 - 2 * t2 + t) * h * df[i] + (-2 * t3 + 3 * t2) * f[i + 1] +
           (t3 - t2) * h * df[i + 1];
  }
};

template <DispersionLaw Law>
DispersionTable tabulate(const Law& law, double k_min, double k_max, std::size_t points) {
  if (!(k_min > 0.0) || !(k_max > k_min)) throw DomainError("tabulate: need 0 < k_min < k_max");
  if (points < 3) throw DomainError("tabulate: need at least 3 points");
  DispersionTable t;
  t.k = numerics::logspace(k_min, k_max, points);
  for (double k : t.k) {
    t.omega.push_back(law.omega(k));
    t.omega_prime.push_back(law.omega_prime(k));
    t.omega_double_prime.push_back(law.omega_second(k));
  }
  return t;
}

}  // namespace photodur
