#pragma once

// Arrival-time moments tau_n = int t^n P dt, the mean and duration derived from
// them, expectations under p = P / (P_nu int P dt), and a Monte Carlo sampler
// with the sample-variance duration estimator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "photodur/errors.hpp"
#include "photodur/numerics.hpp"
#include "photodur/parallel.hpp"
#include "photodur/propagation.hpp"
#include "photodur/random.hpp"

namespace photodur {

struct MomentSet {
  double z = 0.0;
  int n_max = 2;
  std::array<double, 3> tau{};    ///< tau_0, tau_1, tau_2 (entries above n_max are unset)
  std::array<double, 3> error{};  ///< Richardson estimates |T_h - T_2h| / 3

  double tau0() const { return tau[0]; }
  double tau1() const { return tau[1]; }
  double tau2() const { return tau[2]; }
};

struct ArrivalStatistics {
  double z = 0.0;
  double t_mean = 0.0;
  double sigma = 0.0;
  double p_nu = 1.0;
};

/// Relative tolerance below which a negative variance radicand is roundoff.
inline constexpr double variance_tolerance = 1e-10;

inline MomentSet moments(const ArrivalDistribution& d, int n_max = 2) {
  if (n_max < 0 || n_max > 2) throw DomainError("moments: n_max must be 0, 1 or 2");
  if (d.t.size() != d.P.size() || d.t.size() < 3) throw DomainError("moments: malformed distribution");
  require_tail_bound(d, n_max);
  MomentSet ms;
  ms.z = d.z;
  ms.n_max = n_max;
  std::vector<double> y(d.t.size());
  for (int n = 0; n <= n_max; ++n) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::pow(d.t[i], n) * d.P[i];
    const auto q = numerics::trapezoid_with_error(d.t, y);
    ms.tau[n] = q.value;
    ms.error[n] = q.error;
  }
  if (n_max == 2) {
    const double cs = ms.tau[2] * ms.tau[0] - ms.tau[1] * ms.tau[1];
    if (cs < -variance_tolerance * ms.tau[2] * ms.tau[0]) {
      throw NegativeVarianceError("moments: tau2 tau0 < tau1^2 beyond roundoff", cs);
    }
  }
  return ms;
}

/// t_mean = tau1 / (P_nu tau0), sigma = sqrt(tau2 / (P_nu tau0) - t_mean^2), as written.
inline ArrivalStatistics mean_and_sigma(const MomentSet& ms, double p_nu = 1.0) {
  if (ms.n_max < 2) throw DomainError("mean_and_sigma: needs moments up to n = 2");
  if (!(p_nu > 0.0 && p_nu <= 1.0)) throw DomainError("mean_and_sigma: P_nu must lie in (0, 1]");
  if (!(ms.tau0() > 0.0)) throw DomainError("mean_and_sigma: tau0 must be positive");
  ArrivalStatistics s;
  s.z = ms.z;
  s.p_nu = p_nu;
  s.t_mean = ms.tau1() / (p_nu * ms.tau0());
  const double second = ms.tau2() / (p_nu * ms.tau0());
  const double radicand = second - s.t_mean * s.t_mean;
  if (radicand < -variance_tolerance * std::abs(second)) {
    throw NegativeVarianceError("mean_and_sigma: variance radicand " + std::to_string(radicand) + " is negative", radicand);
  }
  s.sigma = std::sqrt(std::max(radicand, 0.0));
  return s;
}

inline ArrivalStatistics statistics(const ArrivalDistribution& d) { return mean_and_sigma(moments(d), d.p_nu); }

/// int f(t) p(z, t) dt on the stored grid.
inline double expectation(const ArrivalDistribution& d, const std::function<double(double)>& f) {
  require_tail_bound(d, 0);
  const double total = numerics::trapezoid(d.t, d.P);
  if (!(total > 0.0)) throw DomainError("expectation: distribution has no mass");
  std::vector<double> y(d.t.size()), a(d.t.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = f(d.t[i]) * d.P[i];
    a[i] = std::abs(y[i]);
  }
  // The f-weighted density must not be truncated either.
  const std::size_t edge = std::max<std::size_t>(1, y.size() / 20);
  const double abs_total = numerics::trapezoid(d.t, a);
  if (abs_total > 0.0) {
    const auto part = [&](std::size_t lo, std::size_t hi) {
      return numerics::trapezoid(std::span<const double>(d.t).subspan(lo, hi - lo + 1),
                                 std::span<const double>(a).subspan(lo, hi - lo + 1));
    };
    const double tail = (part(0, edge) + part(y.size() - 1 - edge, y.size() - 1)) / abs_total;
    if (tail > d.tail_bound) throw TailTruncationError("expectation: window truncates f(t) P(z, t)", 0);
  }
  return numerics::trapezoid(d.t, y) / (d.p_nu * total);
}

struct SampleSet {
  double z = 0.0;
  std::vector<double> t;
  std::uint64_t seed = 0;
};

/// Inverse-CDF sampler of the unit-mass piecewise-linear density p P_nu.
class ArrivalSampler {
 public:
  explicit ArrivalSampler(const ArrivalDistribution& d) : t_(d.t), P_(d.P), cdf_(d.t.size(), 0.0) {
    require_tail_bound(d, 0);
    if (t_.size() < 2 || t_.front() < 0.0) throw DomainError("sampler: need a time grid on t >= 0");
    numerics::CompensatedSum s;
    for (std::size_t i = 1; i < t_.size(); ++i) {
      if (P_[i] < 0.0 || P_[i - 1] < 0.0) throw DomainError("sampler: negative density sample");
      s.add(0.5 * (t_[i] - t_[i - 1]) * (P_[i] + P_[i - 1]));
      cdf_[i] = s.value();
    }
    if (!(cdf_.back() > 0.0)) throw DomainError("sampler: distribution has no mass");
  }

  /// Arrival time at cumulative probability u in (0, 1).
  double operator()(double u) const {
    const double target = u * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t i = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
    i = std::min(i, t_.size() - 2);
    const double h = t_[i + 1] - t_[i];
    const double r = std::clamp(target - cdf_[i], 0.0, cdf_[i + 1] - cdf_[i]);
    const double p0 = P_[i];
    const double slope = (P_[i + 1] - P_[i]) / h;
    // Solve p0 x + slope x^2 / 2 = r in the cancellation-free form.
    const double disc = std::max(p0 * p0 + 2.0 * slope * r, 0.0);
    const double denom = p0 + std::sqrt(disc);
    const double x = denom > 0.0 ? 2.0 * r / denom : 0.0;
    return t_[i] + std::clamp(x, 0.0, h);
  }

 private:
  std::vector<double> t_, P_, cdf_;
};

inline SampleSet sample_arrival_times(const ArrivalDistribution& d, std::size_t n, std::uint64_t seed, unsigned threads = 1) {
  if (n < 2) throw DomainError("sample_arrival_times: need N >= 2");
  const ArrivalSampler sampler(d);
  const CounterStream stream(seed);
  SampleSet ss;
  ss.z = d.z;
  ss.seed = seed;
  ss.t.resize(n);
  parallel_for(n, threads, [&](std::size_t i) { ss.t[i] = sampler(stream.uniform(i)); });
  return ss;
}

/// sqrt( (sum t^2 - (sum t)^2 / N) / (N - 1) ), evaluated on t - t_1 to avoid
/// cancellation (the expression is shift invariant).
inline double estimate_sigma(std::span<const double> t) {
  const std::size_t n = t.size();
  if (n < 2) throw DomainError("estimate_sigma: need N >= 2 samples");
  const double shift = t.front();
  numerics::CompensatedSum s1, s2;
  for (double x : t) {
    const double d = x - shift;
    s1.add(d);
    s2.add(d * d);
  }
  const double nn = static_cast<double>(n);
  const double radicand = (s2.value() - s1.value() * s1.value() / nn) / (nn - 1.0);
  return std::sqrt(std::max(radicand, 0.0));
}

inline double estimate_sigma(const SampleSet& ss) { return estimate_sigma(ss.t); }

}  // namespace photodur
