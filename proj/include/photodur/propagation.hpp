#pragma once

// Space-time amplitude A(rho, z, t) = int dk f(rho, k) exp(i(kz - omega t)) by
// trapezoid quadrature on a uniform, edge-tapered k grid, and the arrival
// density P(z, t) = 2 pi int_0^a |A|^2 rho d rho.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "photodur/dispersion.hpp"
#include "photodur/errors.hpp"
#include "photodur/mode_fields.hpp"
#include "photodur/numerics.hpp"
#include "photodur/parallel.hpp"

namespace photodur {

/// Which part of the conjugate-symmetric spectrum is launched.
enum class Support {
  forward,    ///< k > 0 only: a packet moving toward +z
  two_sided,  ///< the full real line, including the backward-moving half
};

struct PropagationOptions {
  Support support = Support::forward;
  std::size_t radial_nodes = 0;   ///< 0 selects 16 for the fiber and 1 for the uniform-profile laws
  double span = 8.0;              ///< Gaussian source support in widths
  double samples_per_period = 8.0;
  double margin = 1.5;
  std::size_t min_k_nodes = 256;
  std::size_t max_k_nodes = std::size_t{1} << 22;
  std::size_t max_refinement = 64;
  double taper_fraction = 0.1;
  std::size_t time_points = 1201;
  double n_sigma = 12.0;
  double tail_bound = 1e-6;
  RegularizationParameter reg{};
  unsigned threads = 1;
};

struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;
};

/// Arrival density P(z, t) sampled at fixed z.
struct ArrivalDistribution {
  double z = 0.0;
  std::vector<double> t;
  std::vector<double> P;
  double p_nu = 1.0;
  double tail_mass_estimate = 0.0;  ///< fraction of int P dt in the outer 5% of the window
  double tail_bound = 1e-6;
  std::size_t k_nodes = 0;
  std::size_t radial_nodes = 0;
};

/// Fraction of int t^n P dt carried by the outer 5% of the samples at each end
/// of the window: large values mean the window truncates the pulse.
inline double tail_mass(const ArrivalDistribution& d, int n = 0) {
  const std::size_t m = d.t.size();
  if (m < 3 || d.P.size() != m) throw DomainError("tail_mass: malformed distribution");
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = std::pow(d.t[i], n) * d.P[i];
  const double total = numerics::trapezoid(d.t, y);
  if (!(total > 0.0)) return 0.0;
  const std::size_t edge = std::max<std::size_t>(1, m / 20);
  const auto part = [&](std::size_t lo, std::size_t hi) {
    return numerics::trapezoid(std::span(d.t).subspan(lo, hi - lo + 1), std::span<const double>(y).subspan(lo, hi - lo + 1));
  };
  return (part(0, edge) + part(m - 1 - edge, m - 1)) / total;
}

inline void require_tail_bound(const ArrivalDistribution& d, int n) {
  const double tail = tail_mass(d, n);
  if (tail > d.tail_bound) {
    throw TailTruncationError("time window truncates the t^" + std::to_string(n) + "-weighted density (edge fraction " +
                                  std::to_string(tail) + " > bound " + std::to_string(d.tail_bound) + ")",
                              n);
  }
}

/// t -> p(z, t) = P / (P_nu int P dt), piecewise linear between samples, zero outside.
class NormalizedDensity {
 public:
  explicit NormalizedDensity(const ArrivalDistribution& d) : t_(d.t), P_(d.P) {
    require_tail_bound(d, 0);
    const double total = numerics::trapezoid(d.t, d.P);
    if (!(total > 0.0)) throw DomainError("normalized_density: distribution has no mass");
    scale_ = 1.0 / (d.p_nu * total);
  }
  double operator()(double t) const {
    if (t < t_.front() || t > t_.back()) return 0.0;
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = it == t_.end() ? t_.size() - 2 : static_cast<std::size_t>(it - t_.begin()) - 1;
    const double s = (t - t_[i]) / (t_[i + 1] - t_[i]);
    return scale_ * ((1.0 - s) * P_[i] + s * P_[i + 1]);
  }

 private:
  std::vector<double> t_, P_;
  double scale_ = 0.0;
};

inline NormalizedDensity normalized_density(const ArrivalDistribution& d) { return NormalizedDensity(d); }

/// int_{t1}^{t2} p(z, t) dt of the piecewise-linear density.
inline double interval_probability(const ArrivalDistribution& d, double t1, double t2) {
  if (!(t1 >= 0.0) || !(t2 >= t1)) throw DomainError("interval_probability: need 0 <= t1 <= t2");
  const NormalizedDensity p(d);
  const double lo = std::max(t1, d.t.front());
  const double hi = std::min(t2, d.t.back());
  if (!(hi > lo)) return 0.0;
  numerics::CompensatedSum s;
  double prev_t = lo, prev_p = p(lo);
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    if (d.t[i] <= lo) continue;
    if (d.t[i] >= hi) break;
    const double v = p(d.t[i]);
    s.add(0.5 * (d.t[i] - prev_t) * (v + prev_p));
    prev_t = d.t[i];
    prev_p = v;
  }
  s.add(0.5 * (hi - prev_t) * (p(hi) + prev_p));
  return s.value();
}

/// Uniform k grid with precomputed quadrature coefficients c_k f(k, rho_r).
struct KGrid {
  struct Segment {
    std::size_t begin = 0, end = 0;  ///< node range
    double dk = 0.0;
    double omega_prime_min = 0.0, omega_prime_max = 0.0;
  };
  std::vector<double> k;
  std::vector<double> delta_omega;  ///< omega(k) - omega_ref
  std::vector<complex> coefficient; ///< trapezoid weight x taper x g x sqrt(hbar omega / 2 eps0)
  std::vector<ModeAtK> modes;
  std::vector<complex> f;           ///< k-major matrix coefficient x nu.psi(rho_r)
  std::vector<double> rho;
  std::vector<double> radial_weight;  ///< 2 pi rho_r w_r
  std::vector<Segment> segments;
  double k_ref = 0.0;
  double omega_ref = 0.0;

  std::size_t radial_count() const noexcept { return rho.size(); }

  /// Largest |z - omega'(k) t| over the grid.
  double phase_rate(double z, double t) const {
    double r = 0.0;
    for (const auto& s : segments) {
      r = std::max({r, std::abs(z - s.omega_prime_min * t), std::abs(z - s.omega_prime_max * t)});
    }
    return r;
  }
  double coarsest_step() const {
    double h = 0.0;
    for (const auto& s : segments) h = std::max(h, s.dk);
    return h;
  }
};

class Propagator {
 public:
  Propagator(DispersionModel model, SpectralAmplitude g, PolarizationVector nu, PropagationOptions options = {})
      : model_(std::move(model)), g_(std::move(g)), nu_(nu), opt_(options) {
    if (opt_.samples_per_period < 2.0) throw InvariantError("propagation: samples_per_period must be >= 2");
    if (opt_.time_points < 3) throw InvariantError("propagation: time_points must be >= 3");
    if (!(opt_.tail_bound > 0.0)) throw InvariantError("propagation: tail_bound must be > 0");
    if (!(opt_.taper_fraction >= 0.0 && opt_.taper_fraction < 0.5)) {
      throw InvariantError("propagation: taper_fraction must lie in [0, 0.5)");
    }
    radial_ = opt_.radial_nodes ? opt_.radial_nodes : (model_.fiber() ? 16u : 1u);
    std::tie(k_lo_, k_hi_) = g_.support(opt_.span);
    k_ref_ = g_.kind() == SpectralAmplitude::Kind::gaussian ? g_.k_center() : 0.5 * (k_lo_ + k_hi_);
    if (!(k_hi_ > k_lo_)) throw DomainError("propagation: empty source support");
    const std::size_t samples = 65;
    const auto ks = numerics::linspace(k_lo_ > 0.0 ? k_lo_ : k_hi_ * 1e-6, k_hi_, samples);
    vg_min_ = std::numeric_limits<double>::infinity();
    vg_max_ = -vg_min_;
    for (double k : ks) {
      const double v = model_.omega_prime(reg_k(k));
      vg_min_ = std::min(vg_min_, v);
      vg_max_ = std::max(vg_max_, v);
    }
    spectral_moments();
  }

  const DispersionModel& model() const noexcept { return model_; }
  const PropagationOptions& options() const noexcept { return opt_; }
  std::size_t radial_nodes() const noexcept { return radial_; }
  double mean_wavenumber() const noexcept { return k_mean_; }
  double wavenumber_spread() const noexcept { return k_std_; }

  /// Window [t_g - n sigma_g, t_g + n sigma_g] clipped at 0, with t_g = z / v_g
  /// and sigma_g^2 = sigma_0^2 + (|omega''| s_k z / v_g^2)^2 at the mean wavenumber.
  TimeWindow window_guess(double z) const {
    const double vg = model_.omega_prime(reg_k(k_mean_));
    const double w2 = model_.omega_second(reg_k(k_mean_));
    const double sigma0 = 1.0 / (2.0 * k_std_ * std::abs(vg));
    const double spread = std::abs(w2) * k_std_ * std::abs(z) / (vg * vg);
    const double sigma = std::hypot(sigma0, spread);
    const double centre = std::abs(z) / std::abs(vg);
    return {std::max(0.0, centre - opt_.n_sigma * sigma), centre + opt_.n_sigma * sigma};
  }

  /// Largest |z - omega'(k) t| over the source support and the window.
  double required_rate(double z, const TimeWindow& w) const {
    double r = 0.0;
    for (double t : {w.begin, w.end}) {
      r = std::max({r, std::abs(z - vg_min_ * t), std::abs(z - vg_max_ * t)});
      if (opt_.support == Support::two_sided) r = std::max({r, std::abs(z + vg_min_ * t), std::abs(z + vg_max_ * t)});
    }
    return r;
  }

  /// A k grid resolving phase rates up to `rate` with the configured samples per period.
  KGrid plan(double rate) const {
    const double length = k_hi_ - k_lo_;
    const double periods = rate * length / (2.0 * std::numbers::pi);
    const double wanted = std::ceil(opt_.margin * opt_.samples_per_period * periods) + 1.0;
    if (wanted > static_cast<double>(opt_.max_k_nodes)) {
      throw PhaseResolutionError("k grid would need " + std::to_string(wanted) + " nodes (limit " +
                                 std::to_string(opt_.max_k_nodes) + ")");
    }
    const std::size_t n = std::max(opt_.min_k_nodes, static_cast<std::size_t>(wanted));
    return build_grid(n);
  }

  KGrid plan_for(double z, const TimeWindow& w) const { return plan(required_rate(z, w)); }

  /// A(rho, z, t) on a grid planned for this single point.
  complex amplitude(double z, double t, double rho) const {
    const KGrid grid = plan(required_rate(z, {t, t}));
    return amplitude(grid, z, t, rho);
  }
  complex amplitude(const KGrid& grid, double z, double t, double rho) const {
    check_phase(grid, z, t);
    numerics::CompensatedSum re, im;
    for (std::size_t i = 0; i < grid.k.size(); ++i) {
      if (grid.coefficient[i] == 0.0) continue;
      const complex v = grid.coefficient[i] * grid.modes[i].projection(nu_, rho) * phase(grid, i, z, t);
      re.add(v.real());
      im.add(v.imag());
    }
    return {re.value(), im.value()};
  }

  double probability_density(double z, double t, double rho) const { return std::norm(amplitude(z, t, rho)); }
  double probability_density(const KGrid& grid, double z, double t, double rho) const {
    return std::norm(amplitude(grid, z, t, rho));
  }

  /// P(z, t) = 2 pi int_0^a |A|^2 rho d rho with Gauss-Legendre radial nodes.
  double cross_section_density(double z, double t) const {
    const KGrid grid = plan(required_rate(z, {t, t}));
    return cross_section_density(grid, z, t);
  }
  double cross_section_density(const KGrid& grid, double z, double t) const {
    check_phase(grid, z, t);
    const std::size_t nr = grid.radial_count();
    std::vector<double> re(nr, 0.0), im(nr, 0.0);
    for (std::size_t i = 0; i < grid.k.size(); ++i) {
      if (grid.coefficient[i] == 0.0) continue;
      const complex e = phase(grid, i, z, t);
      const complex* row = &grid.f[i * nr];
      for (std::size_t r = 0; r < nr; ++r) {
        const complex v = row[r] * e;
        re[r] += v.real();
        im[r] += v.imag();
      }
    }
    double p = 0.0;
    for (std::size_t r = 0; r < nr; ++r) p += grid.radial_weight[r] * (re[r] * re[r] + im[r] * im[r]);
    return p;
  }

  /// P(z, .) on an explicit time grid.
  ArrivalDistribution distribution(const KGrid& grid, double z, std::vector<double> t) const {
    ArrivalDistribution d;
    d.z = z;
    d.p_nu = nu_.p_nu();
    d.tail_bound = opt_.tail_bound;
    d.radial_nodes = grid.radial_count();
    d.P.assign(t.size(), 0.0);
    const KGrid* use = &grid;
    KGrid refined;
    if (!t.empty()) {
      const double rate = std::max(grid.phase_rate(z, t.front()), grid.phase_rate(z, t.back()));
      if (rate * grid.coarsest_step() > resolvable()) {
        refined = refine(grid, rate);
        use = &refined;
      }
    }
    d.k_nodes = use->k.size();
    parallel_for(t.size(), opt_.threads, [&](std::size_t i) { d.P[i] = cross_section_density(*use, z, t[i]); });
    d.t = std::move(t);
    d.tail_mass_estimate = d.t.size() >= 3 ? tail_mass(d, 0) : 0.0;
    return d;
  }

  /// P(z, .) on the default window for z.
  ArrivalDistribution distribution(double z) const {
    const auto w = window_guess(z);
    return distribution(plan_for(z, w), z, numerics::linspace(w.begin, w.end, opt_.time_points));
  }

  /// One shared k grid for the whole z ladder.
  std::vector<ArrivalDistribution> ladder(std::span<const double> zs) const {
    double rate = 0.0;
    std::vector<TimeWindow> windows;
    for (double z : zs) {
      windows.push_back(window_guess(z));
      rate = std::max(rate, required_rate(z, windows.back()));
    }
    const KGrid grid = plan(rate);
    std::vector<ArrivalDistribution> out;
    for (std::size_t i = 0; i < zs.size(); ++i) {
      out.push_back(distribution(grid, zs[i], numerics::linspace(windows[i].begin, windows[i].end, opt_.time_points)));
    }
    return out;
  }

 private:
  double reg_k(double k) const { return std::copysign(opt_.reg.effective_k(k), k); }
  double resolvable() const { return 2.0 * std::numbers::pi / opt_.samples_per_period; }

  void check_phase(const KGrid& grid, double z, double t) const {
    const double rate = grid.phase_rate(z, t);
    if (rate * grid.coarsest_step() > resolvable() * (1.0 + 1e-12)) {
      throw PhaseResolutionError("k grid step " + std::to_string(grid.coarsest_step()) + " rad/m cannot resolve the phase at z = " +
                                 std::to_string(z) + " m, t = " + std::to_string(t) + " s");
    }
  }

  KGrid refine(const KGrid& grid, double rate) const {
    const std::size_t base = grid.segments.front().end - grid.segments.front().begin;
    for (std::size_t factor = 2; factor <= opt_.max_refinement; factor *= 2) {
      const std::size_t n = (base - 1) * factor + 1;
      if (n > opt_.max_k_nodes) break;
      if (rate * grid.coarsest_step() / static_cast<double>(factor) <= resolvable()) return build_grid(n);
    }
    throw PhaseResolutionError("phase rate " + std::to_string(rate) + " exceeds what " + std::to_string(opt_.max_refinement) +
                               "x refinement of the k grid can resolve");
  }

  complex phase(const KGrid& grid, std::size_t i, double z, double t) const {
    const double phi = (grid.k[i] - grid.k_ref) * z - grid.delta_omega[i] * t;
    return {std::cos(phi), std::sin(phi)};
  }

  // Intensity-weighted mean and spread of k over the launched half.
  void spectral_moments() {
    const auto ks = numerics::linspace(k_lo_, k_hi_, 257);
    numerics::CompensatedSum s0, s1, s2;
    for (double k : ks) {
      if (k == 0.0) continue;
      const double w = std::norm(g_(k)) * model_.omega(reg_k(k));
      s0.add(w);
      s1.add(w * k);
      s2.add(w * k * k);
    }
    if (!(s0.value() > 0.0)) throw DomainError("propagation: source amplitude vanishes on its support");
    k_mean_ = s1.value() / s0.value();
    k_std_ = std::sqrt(std::max(0.0, s2.value() / s0.value() - k_mean_ * k_mean_));
    if (!(k_std_ > 0.0)) throw DomainError("propagation: source spectrum has zero width");
  }

  KGrid build_grid(std::size_t n) const {
    KGrid grid;
    grid.k_ref = k_ref_;
    grid.omega_ref = model_.omega(reg_k(k_ref_));
    const auto add_segment = [&](double lo, double hi, double vmin, double vmax) {
      KGrid::Segment seg;
      seg.begin = grid.k.size();
      const auto ks = numerics::linspace(lo, hi, n);
      grid.k.insert(grid.k.end(), ks.begin(), ks.end());
      seg.end = grid.k.size();
      seg.dk = (hi - lo) / static_cast<double>(n - 1);
      seg.omega_prime_min = vmin;
      seg.omega_prime_max = vmax;
      grid.segments.push_back(seg);
    };
    if (opt_.support == Support::two_sided) {
      if (k_lo_ > 0.0) {
        add_segment(-k_hi_, -k_lo_, -vg_max_, -vg_min_);
        add_segment(k_lo_, k_hi_, vg_min_, vg_max_);
      } else {
        add_segment(-k_hi_, k_hi_, -vg_max_, vg_max_);
      }
    } else {
      add_segment(k_lo_, k_hi_, vg_min_, vg_max_);
    }

    if (radial_ == 1 && !model_.fiber()) {
      grid.rho = {0.5 * model_.core_radius()};
      grid.radial_weight = {2.0 * std::numbers::pi * 0.5 * model_.core_radius() * model_.core_radius()};
    } else {
      const auto rule = numerics::gauss_legendre(radial_, 0.0, model_.core_radius());
      grid.rho = rule.nodes;
      for (std::size_t r = 0; r < radial_; ++r) grid.radial_weight.push_back(2.0 * std::numbers::pi * rule.nodes[r] * rule.weights[r]);
    }

    const std::size_t nk = grid.k.size();
    const std::size_t nr = grid.rho.size();
    grid.delta_omega.assign(nk, 0.0);
    grid.coefficient.assign(nk, 0.0);
    grid.f.assign(nk * nr, 0.0);
    grid.modes.reserve(nk);
    const auto& pc = model_.constants();
    std::vector<std::optional<ModeAtK>> modes(nk);
    parallel_for(nk, opt_.threads, [&](std::size_t i) {
      const double k = grid.k[i];
      const complex gk = g_(k);
      if (gk == 0.0 && k == 0.0) return;
      const double k_eff = reg_k(k);
      modes[i].emplace(model_, k_eff);
      grid.delta_omega[i] = model_.kind() == DispersionKind::fiber ? modes[i]->omega() - grid.omega_ref
                                                                    : model_.omega_difference(k_eff, reg_k(k_ref_));
      grid.coefficient[i] = gk * std::sqrt(pc.hbar * modes[i]->omega() / (2.0 * pc.eps0));
    });
    for (std::size_t i = 0; i < nk; ++i) {
      grid.modes.push_back(modes[i] ? *modes[i] : ModeAtK(model_, reg_k(k_ref_)));
    }
    for (const auto& seg : grid.segments) {
      const std::size_t count = seg.end - seg.begin;
      const double taper_nodes = opt_.taper_fraction * static_cast<double>(count - 1);
      for (std::size_t j = 0; j < count; ++j) {
        const std::size_t i = seg.begin + j;
        double w = seg.dk * ((j == 0 || j + 1 == count) ? 0.5 : 1.0);
        if (taper_nodes > 0.0) {
          const double from_edge = static_cast<double>(std::min(j, count - 1 - j));
          w *= numerics::smooth_step(from_edge / taper_nodes);
        }
        grid.coefficient[i] *= w;
      }
    }
    parallel_for(nk, opt_.threads, [&](std::size_t i) {
      if (grid.coefficient[i] == 0.0) return;
      for (std::size_t r = 0; r < nr; ++r) grid.f[i * nr + r] = grid.coefficient[i] * grid.modes[i].projection(nu_, grid.rho[r]);
    });
    return grid;
  }

  DispersionModel model_;
  SpectralAmplitude g_;
  PolarizationVector nu_;
  PropagationOptions opt_;
  std::size_t radial_ = 1;
  double k_lo_ = 0.0, k_hi_ = 0.0, k_ref_ = 0.0;
  double vg_min_ = 0.0, vg_max_ = 0.0;
  double k_mean_ = 0.0, k_std_ = 0.0;
};

/// Distributions at one z for a decreasing sequence of regularisation
/// parameters eps = factor * k_center, demonstrating the eps -> 0 limit.
inline std::vector<std::pair<double, ArrivalDistribution>> regularization_sequence(
    const DispersionModel& model, const SpectralAmplitude& g, const PolarizationVector& nu, PropagationOptions options,
    double z, std::span<const double> factors) {
  std::vector<std::pair<double, ArrivalDistribution>> out;
  const double k_scale = g.kind() == SpectralAmplitude::Kind::gaussian ? g.k_center() : g.support().second;
  for (double f : factors) {
    options.reg = RegularizationParameter(f * k_scale);
    const Propagator p(model, g, nu, options);
    out.emplace_back(options.reg.eps, p.distribution(z));
  }
  return out;
}

}  // namespace photodur
