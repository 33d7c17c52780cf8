#pragma once

// Source spectrum, guided-mode profiles and the radially integrated spectral
// weight |f(k)|^2 = |g(k)|^2 (hbar omega / 2 eps0) 2 pi int_0^a rho |nu.psi|^2 d rho.
//
// Fields follow exp(i(kz - omega t + m phi)). Inside the core (r = rho/a < 1)
//   E_rho = (i/u^2) [b u J'(ur) - mu1 eta m J(ur)/r]
//   E_phi = -(1/u^2) [b m J(ur)/r - mu1 eta u J'(ur)]
//   E_z   = J(ur)
// and outside, with C = J(u)/K(w),
//   E_rho = (-i C/w^2) [b w K'(wr) - mu2 eta m K(wr)/r]
//   E_phi = (C/w^2) [b m K(wr)/r - mu2 eta w K'(wr)]
//   E_z   = C K(wr)
// where eta = b m (1/u^2 + 1/w^2) / (mu1 J'/(u J) + mu2 K'/(w K)) is the
// scaled axial magnetic amplitude fixed by continuity of H_z and H_phi.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "photodur/dispersion.hpp"
#include "photodur/errors.hpp"
#include "photodur/kernels.hpp"
#include "photodur/numerics.hpp"

namespace photodur {

using complex = std::complex<double>;

/// Initial-state spectral amplitude g(k), conjugate-symmetric in k.
class SpectralAmplitude {
 public:
  enum class Kind { gaussian, tabulated };

  /// g = scale (k/k_ref)^p exp(-(k - k_center)^2 / (2 k_width^2)) for k > 0.
  static SpectralAmplitude gaussian(double k_center, double k_width, int zero_suppression_power = 2,
                                    complex scale = 1.0, double k_reference = 0.0) {
    if (!(k_center > 0.0)) throw InvariantError("spectral amplitude: k_center must be > 0");
    if (!(k_width > 0.0)) throw InvariantError("spectral amplitude: k_width must be > 0");
    if (zero_suppression_power < 1) throw InvariantError("spectral amplitude: zero_suppression_power must be >= 1");
    SpectralAmplitude g;
    g.kind_ = Kind::gaussian;
    g.k_center_ = k_center;
    g.k_width_ = k_width;
    g.power_ = zero_suppression_power;
    g.k_reference_ = k_reference > 0.0 ? k_reference : k_center;
    g.scale_ = scale;
    return g;
  }

  /// Values on a strictly increasing grid of positive k, linearly
  /// interpolated, zero outside; negative k is the complex conjugate.
  static SpectralAmplitude tabulated(std::vector<double> k, std::vector<complex> values, complex scale = 1.0) {
    if (k.size() < 2 || values.size() != k.size()) {
      throw InvariantError("spectral amplitude: tabulated grid needs >= 2 points with matching values");
    }
    if (!(k.front() > 0.0)) throw InvariantError("spectral amplitude: tabulated k must be positive (k < 0 is mirrored)");
    for (std::size_t i = 1; i < k.size(); ++i) {
      if (!(k[i] > k[i - 1])) throw InvariantError("spectral amplitude: tabulated k must increase strictly");
    }
    SpectralAmplitude g;
    g.kind_ = Kind::tabulated;
    g.table_k_ = std::move(k);
    g.table_v_ = std::move(values);
    g.scale_ = scale;
    return g;
  }

  Kind kind() const noexcept { return kind_; }
  double k_center() const noexcept { return k_center_; }
  double k_width() const noexcept { return k_width_; }
  int zero_suppression_power() const noexcept { return power_; }
  double k_reference() const noexcept { return k_reference_; }
  complex scale() const noexcept { return scale_; }
  const std::vector<double>& table_k() const noexcept { return table_k_; }

  SpectralAmplitude scaled(complex c) const {
    SpectralAmplitude g = *this;
    g.scale_ *= c;
    return g;
  }

  complex operator()(double k) const {
    if (k == 0.0) return 0.0;
    if (k < 0.0) return std::conj((*this)(-k));
    if (kind_ == Kind::gaussian) {
      const double d = (k - k_center_) / k_width_;
      return scale_ * (std::pow(k / k_reference_, power_) * std::exp(-0.5 * d * d));
    }
    if (k < table_k_.front() || k > table_k_.back()) return 0.0;
    const auto it = std::upper_bound(table_k_.begin(), table_k_.end(), k);
    const std::size_t i = it == table_k_.end() ? table_k_.size() - 2 : static_cast<std::size_t>(it - table_k_.begin()) - 1;
    const double s = (k - table_k_[i]) / (table_k_[i + 1] - table_k_[i]);
    return scale_ * ((1.0 - s) * table_v_[i] + s * table_v_[i + 1]);
  }

  /// Positive-k interval outside which |g| is negligible (span widths for a Gaussian).
  std::pair<double, double> support(double span = 8.0) const {
    if (kind_ == Kind::tabulated) return {table_k_.front(), table_k_.back()};
    return {std::max(0.0, k_center_ - span * k_width_), k_center_ + span * k_width_};
  }

 private:
  SpectralAmplitude() = default;

  Kind kind_ = Kind::gaussian;
  double k_center_ = 0.0, k_width_ = 0.0, k_reference_ = 0.0;
  int power_ = 2;
  std::vector<double> table_k_;
  std::vector<complex> table_v_;
  complex scale_ = 1.0;
};

/// Real unit vector in the local (rho-hat, phi-hat) frame plus the
/// polarization detection probability P_nu.
class PolarizationVector {
 public:
  PolarizationVector(double nu_rho = 1.0, double nu_phi = 0.0, double p_nu = 1.0)
      : nu_rho_(nu_rho), nu_phi_(nu_phi), p_nu_(p_nu) {
    if (std::abs(std::hypot(nu_rho, nu_phi) - 1.0) > 1e-12) throw InvariantError("polarization: |nu| must be 1");
    if (!(p_nu > 0.0 && p_nu <= 1.0)) throw InvariantError("polarization: P_nu must lie in (0, 1]");
  }
  double nu_rho() const noexcept { return nu_rho_; }
  double nu_phi() const noexcept { return nu_phi_; }
  double p_nu() const noexcept { return p_nu_; }

 private:
  double nu_rho_, nu_phi_, p_nu_;
};

struct ModeFieldComponents {
  complex e_rho, e_phi, e_z;
};

/// Normalised transverse-electric profile psi of one guided HE mode at k > 0.
///
/// Normalisation: 2 pi int_0^inf eps_r(rho) |psi|^2 rho d rho = 1 (psi in 1/m).
class StepIndexMode {
 public:
  StepIndexMode(const FiberParameters& fp, FunctionOrder m, double k) : fp_(fp), m_(m.value()) {
    if (m_ < 1) throw DomainError("step-index mode fields are implemented for hybrid modes m >= 1");
    if (!(k > 0.0)) throw DomainError("StepIndexMode: k must be > 0 (negative k is the conjugate mode)");
    const auto root = solve_omega_root(fp, m, k);
    if (root.edge_limited) {
      throw DomainError("mode at k = " + std::to_string(k) + " rad/m is too weakly guided to resolve its field");
    }
    omega_ = root.omega;
    const auto tw = transverse_wavenumbers(fp, omega_, k);
    u_ = tw.kappa * fp.a();
    w_ = tw.q * fp.a();
    b_ = k * fp.a();
    const FunctionOrder order(m_);
    const auto ju = kernels::bessel_j_with_derivative(order, u_);
    const auto kw = kernels::bessel_k_scaled_with_derivative(order, w_);
    ju_ = ju.value;
    kw_scaled_ = kw.value;
    const double denom = fp.mu1() * ju.derivative / (u_ * ju.value) + fp.mu2() * kw.derivative / (w_ * kw.value);
    eta_ = b_ * m_ * (1.0 / (u_ * u_) + 1.0 / (w_ * w_)) / denom;
    sign_ = 1.0;
    norm_ = 1.0;
    if (raw(0.5).e_rho.imag() < 0.0) sign_ = -1.0;
    norm_ = std::sqrt(power_integral());
  }

  double omega() const noexcept { return omega_; }
  double u() const noexcept { return u_; }
  double w() const noexcept { return w_; }

  /// psi(rho) in 1/m.
  ModeFieldComponents field(double rho) const {
    if (!(rho >= 0.0)) throw DomainError("mode field: rho must be >= 0");
    auto f = raw(rho / fp_.a());
    const double s = sign_ / (norm_ * fp_.a());
    return {f.e_rho * s, f.e_phi * s, f.e_z * s};
  }

  complex projection(const PolarizationVector& nu, double rho) const {
    const auto f = field(rho);
    return nu.nu_rho() * f.e_rho + nu.nu_phi() * f.e_phi;
  }

  /// 2 pi int_0^a rho |nu.psi|^2 d rho (dimensionless), adaptive Gauss-Kronrod.
  double core_fraction(const PolarizationVector& nu, double rel_tol = 1e-9) const {
    const auto integrand = [&](double r) {
      const auto f = raw(r);
      const complex p = nu.nu_rho() * f.e_rho + nu.nu_phi() * f.e_phi;
      return r * std::norm(p);
    };
    double err = 0.0;
    const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15, rel_tol, &err);
    if (err > rel_tol * std::abs(val) && err > 1e-300) throw QuadratureError("core fraction quadrature", err);
    return 2.0 * std::numbers::pi * val / (norm_ * norm_);
  }

 private:
  // Unnormalised, unsigned field at r = rho / a.
  ModeFieldComponents raw(double r) const {
    const FunctionOrder order(m_);
    const double m = m_;
    const complex i(0.0, 1.0);
    if (r <= 1.0) {
      const double x = u_ * r;
      const auto j = kernels::bessel_j_with_derivative(order, x);
      const double j_over_r = r > 0.0 ? j.value / r : (m_ == 1 ? 0.5 * u_ : 0.0);
      const double inv = 1.0 / (u_ * u_);
      return {i * inv * (b_ * u_ * j.derivative - fp_.mu1() * eta_ * m * j_over_r),
              -inv * (b_ * m * j_over_r - fp_.mu1() * eta_ * u_ * j.derivative), j.value};
    }
    if (w_ * (r - 1.0) > 700.0) return {0.0, 0.0, 0.0};
    const double x = w_ * r;
    const auto ks = kernels::bessel_k_scaled_with_derivative(order, x);
    // C K(wr) = J(u) (e^{wr} K(wr)) / (e^{w} K(w)) e^{-w (r - 1)}
    const double c = ju_ / kw_scaled_ * std::exp(-w_ * (r - 1.0));
    const double kv = c * ks.value;
    const double kd = c * ks.derivative;
    const double inv = 1.0 / (w_ * w_);
    return {-i * inv * (b_ * w_ * kd - fp_.mu2() * eta_ * m * kv / r),
            inv * (b_ * m * kv / r - fp_.mu2() * eta_ * w_ * kd), kv};
  }

  double power_integral() const {
    const auto density = [&](double r) {
      const auto f = raw(r);
      return r * (std::norm(f.e_rho) + std::norm(f.e_phi) + std::norm(f.e_z));
    };
    double err_core = 0.0;
    const double core =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(density, 0.0, 1.0, 15, 1e-12, &err_core);
    boost::math::quadrature::exp_sinh<double> tail;
    double err_clad = 0.0;
    const double clad = tail.integrate([&](double s) { return density(1.0 + s); }, 1e-12, &err_clad);
    return 2.0 * std::numbers::pi * (fp_.eps1() * core + fp_.eps2() * clad);
  }

  FiberParameters fp_;
  int m_;
  double omega_ = 0.0, u_ = 0.0, w_ = 0.0, b_ = 0.0, eta_ = 0.0;
  double ju_ = 0.0, kw_scaled_ = 0.0;
  double sign_ = 1.0, norm_ = 1.0;
};

/// nu.psi at axial wavenumber k; k < 0 gives the complex conjugate of the +|k| mode.
inline complex mode_projection(const FiberParameters& fp, FunctionOrder m, double k, const PolarizationVector& nu,
                               double rho) {
  if (k == 0.0) throw DomainError("mode_projection: k = 0 requires regularisation");
  const StepIndexMode mode(fp, m, std::abs(k));
  const complex p = mode.projection(nu, rho);
  return k > 0.0 ? p : std::conj(p);
}

/// Mode data at one wavenumber for any dispersion law. The analytic laws use
/// the uniform core profile psi = 1/(a sqrt(pi)) for every polarization.
class ModeAtK {
 public:
  ModeAtK(const DispersionModel& model, double k_effective) {
    const double ka = std::abs(k_effective);
    if (ka == 0.0) {
      omega_ = model.omega(0.0);
    } else if (const auto* fiber = model.fiber()) {
      fiber_.emplace(fiber->fiber, fiber->order, ka);
      omega_ = fiber_->omega();
    } else {
      omega_ = model.omega(ka);
    }
    radius_ = model.core_radius();
    conjugate_ = k_effective < 0.0;
  }

  double omega() const noexcept { return omega_; }

  complex projection(const PolarizationVector& nu, double rho) const {
    if (!fiber_) return rho <= radius_ ? 1.0 / (radius_ * std::sqrt(std::numbers::pi)) : 0.0;
    const complex p = fiber_->projection(nu, rho);
    return conjugate_ ? std::conj(p) : p;
  }

  double core_fraction(const PolarizationVector& nu) const { return fiber_ ? fiber_->core_fraction(nu) : 1.0; }

 private:
  std::optional<StepIndexMode> fiber_;
  double omega_ = 0.0;
  double radius_ = 1.0;
  bool conjugate_ = false;
};

/// f(rho) = g(k) sqrt(hbar omega_eps / (2 eps0)) nu.psi_eps(rho), with the mode
/// and frequency taken at the regularised wavenumber.
inline complex per_k_amplitude(const SpectralAmplitude& g, const DispersionModel& model, double k,
                               const PolarizationVector& nu, double rho, RegularizationParameter reg = {}) {
  const complex gk = g(k);
  if (gk == 0.0) return 0.0;
  const double k_eff = std::copysign(reg.effective_k(k), k);
  const ModeAtK mode(model, k_eff);
  const auto& pc = model.constants();
  return gk * std::sqrt(pc.hbar * mode.omega() / (2.0 * pc.eps0)) * mode.projection(nu, rho);
}

struct SpectralWeight {
  std::vector<double> k;       ///< rad/m, increasing, symmetric about 0
  std::vector<double> weight;  ///< |f|^2(k)
  RegularizationParameter reg{};
};

/// |f(k)|^2 over k_grid; the value at -k reuses +k (evenness is exact).
inline SpectralWeight spectral_weight(const SpectralAmplitude& g, const DispersionModel& model,
                                      const PolarizationVector& nu, RegularizationParameter reg,
                                      std::vector<double> k_grid) {
  for (std::size_t i = 1; i < k_grid.size(); ++i) {
    if (!(k_grid[i] > k_grid[i - 1])) throw DomainError("spectral_weight: k grid must increase strictly");
  }
  SpectralWeight out;
  out.reg = reg;
  out.weight.assign(k_grid.size(), 0.0);
  const auto& pc = model.constants();
  std::vector<std::pair<double, double>> cache;  // |k| -> weight
  const auto lookup = [&](double ka) -> std::optional<double> {
    const auto it = std::lower_bound(cache.begin(), cache.end(), std::make_pair(ka, -1.0));
    if (it != cache.end() && it->first == ka) return it->second;
    return std::nullopt;
  };
  // Positive (or zero) nodes first, in increasing order so the cache stays sorted.
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    const double k = k_grid[i];
    if (k < 0.0) continue;
    const double g2 = std::norm(g(k));
    double w = 0.0;
    if (g2 > 0.0) {
      const ModeAtK mode(model, reg.effective_k(k));
      w = g2 * pc.hbar * mode.omega() / (2.0 * pc.eps0) * mode.core_fraction(nu);
    }
    out.weight[i] = w;
    cache.emplace_back(k, w);
  }
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    const double k = k_grid[i];
    if (k >= 0.0) continue;
    if (auto w = lookup(-k)) {
      out.weight[i] = *w;
      continue;
    }
    const double g2 = std::norm(g(k));
    if (g2 > 0.0) {
      const ModeAtK mode(model, reg.effective_k(k));
      out.weight[i] = g2 * pc.hbar * mode.omega() / (2.0 * pc.eps0) * mode.core_fraction(nu);
    }
  }
  out.k = std::move(k_grid);
  return out;
}

/// Symmetric weight grid with n_half nodes per side. Uniform over the source
/// support when it stays clear of k = 0, otherwise cell-centred at (j + 1/2) h.
inline std::vector<double> weight_grid(const SpectralAmplitude& g, std::size_t n_half, double span = 8.0) {
  if (n_half < 8) throw DomainError("weight_grid: need at least 8 nodes per side");
  auto [lo, hi] = g.support(span);
  std::vector<double> pos;
  if (lo > 0.0) {
    pos = numerics::linspace(lo, hi, n_half);
  } else {
    const double h = hi / static_cast<double>(n_half);
    for (std::size_t j = 0; j < n_half; ++j) pos.push_back((static_cast<double>(j) + 0.5) * h);
  }
  std::vector<double> grid;
  grid.reserve(2 * n_half);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) grid.push_back(-*it);
  grid.insert(grid.end(), pos.begin(), pos.end());
  return grid;
}

}  // namespace photodur
