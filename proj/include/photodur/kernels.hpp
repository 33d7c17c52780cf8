#pragma once

// Integer-order cylinder functions J_m and K_m of real argument.
//
// J_m: power series for x < 4, Miller backward recurrence normalised with
// J_0 + 2 sum J_2k = 1 up to x = 1000, Hankel expansion beyond that.
// K_m: series for K_0, K_1 when x <= 2, Steed's continued fraction (which
// yields e^x K directly) otherwise, then upward recurrence in the order.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "photodur/errors.hpp"

namespace photodur::kernels {

/// Azimuthal mode index m >= 0.
class FunctionOrder {
 public:
  constexpr explicit FunctionOrder(int m) : m_(m) {
    if (m < 0) throw DomainError("function order must be non-negative, got " + std::to_string(m));
  }
  constexpr int value() const noexcept { return m_; }
  friend constexpr bool operator==(FunctionOrder, FunctionOrder) = default;

 private:
  int m_;
};

struct ValueAndDerivative {
  double value = 0.0;
  double derivative = 0.0;
};

namespace detail {

inline constexpr double euler_gamma = 0.57721566490153286060651209;

inline double j_series(int n, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int i = 1; i <= n; ++i) term *= half / i;
  double sum = term;
  const double q = -half * half;
  for (int j = 1; j < 300; ++j) {
    term *= q / (static_cast<double>(j) * static_cast<double>(j + n));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Hankel asymptotic expansion for large x (n small compared to x).
inline double j_hankel(int n, double x) {
  const double mu = 4.0 * n * n;
  const double ex = 8.0 * x;
  double p = 1.0, q = 0.0;
  double term = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * ex);
    if (std::abs(term) > last) break;
    last = std::abs(term);
    // term_k carries (-1)^floor(k/2) on alternate P and Q contributions.
    const int r = k % 4;
    if (r == 1) q += term;
    else if (r == 2) p -= term;
    else if (r == 3) q -= term;
    else p += term;
    if (std::abs(term) < 1e-17) break;
  }
  const double chi = x - (0.5 * n + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Fills out[0..nmax] with J_0..J_nmax at x > 0 using Miller's algorithm.
inline void j_miller(int nmax, double x, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(nmax) + 1, 0.0);
  const double scale_ref = std::max({static_cast<double>(nmax), x, 1.0});
  int top = static_cast<int>(std::ceil(scale_ref)) + 30 + static_cast<int>(std::ceil(std::sqrt(60.0 * scale_ref)));
  if (top % 2) ++top;
  double next = 0.0;   // J_{n+1}
  double cur = 1e-300; // J_n, arbitrary start
  double norm = 0.0;
  for (int n = top; n >= 1; --n) {
    const double prev = 2.0 * n / x * cur - next;  // J_{n-1}
    next = cur;
    cur = prev;
    if (n - 1 <= nmax) out[static_cast<std::size_t>(n - 1)] = cur;
    if (n == top && nmax >= top) out[static_cast<std::size_t>(n)] = next;
    if ((n - 1) % 2 == 0 && n - 1 > 0) norm += 2.0 * cur;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
      for (int i = n - 1; i <= nmax; ++i) out[static_cast<std::size_t>(i)] *= 1e-250;
    }
  }
  norm += cur;  // J_0 term
  for (auto& v : out) v /= norm;
}

// J_{m-1}, J_m, J_{m+1} with the convention J_{-1} = -J_1.
inline std::array<double, 3> j_triple(int m, double x) {
  if (x == 0.0) {
    return {m == 1 ? 1.0 : 0.0, m == 0 ? 1.0 : 0.0, 0.0};
  }
  std::array<double, 3> r{};
  if (x < 4.0) {
    r[1] = j_series(m, x);
    r[2] = j_series(m + 1, x);
    r[0] = m == 0 ? -j_series(1, x) : j_series(m - 1, x);
    return r;
  }
  if (x > 1000.0 && m + 1 < x / 10.0) {
    r[1] = j_hankel(m, x);
    r[2] = j_hankel(m + 1, x);
    r[0] = m == 0 ? -j_hankel(1, x) : j_hankel(m - 1, x);
    return r;
  }
  std::vector<double> seq;
  j_miller(m + 1, x, seq);
  r[1] = seq[static_cast<std::size_t>(m)];
  r[2] = seq[static_cast<std::size_t>(m + 1)];
  r[0] = m == 0 ? -seq[1] : seq[static_cast<std::size_t>(m - 1)];
  return r;
}

inline std::array<double, 2> i01_series(double x) {
  const double q = 0.25 * x * x;
  double t0 = 1.0, s0 = 1.0;
  double t1 = 0.5 * x, s1 = t1;
  for (int k = 1; k < 100; ++k) {
    t0 *= q / (static_cast<double>(k) * k);
    t1 *= q / (static_cast<double>(k) * (k + 1));
    s0 += t0;
    s1 += t1;
    if (t0 < 1e-17 * s0 && t1 < 1e-17 * s1) break;
  }
  return {s0, s1};
}

// K_0 and K_1 for 0 < x <= 2 from the logarithmic series.
inline std::array<double, 2> k01_series(double x) {
  const auto [i0, i1] = i01_series(x);
  const double lnh = std::log(0.5 * x);
  const double q = 0.25 * x * x;
  double harmonic = 0.0;
  double t = 1.0;  // q^k / (k!)^2
  double s0 = 0.0;
  double t1 = 1.0;  // q^k / (k! (k+1)!)
  double s1 = 0.0;
  for (int k = 0; k < 100; ++k) {
    if (k > 0) {
      harmonic += 1.0 / k;
      t *= q / (static_cast<double>(k) * k);
      t1 *= q / (static_cast<double>(k) * (k + 1));
    }
    s0 += t * harmonic;
    const double psi_sum = (-euler_gamma + harmonic) + (-euler_gamma + harmonic + 1.0 / (k + 1));
    const double inc = t1 * psi_sum;
    s1 += inc;
    if (k > 2 && std::abs(t) < 1e-18 && std::abs(inc) < 1e-18 * std::abs(s1)) break;
  }
  const double k0 = -(lnh + euler_gamma) * i0 + s0;
  const double k1 = 1.0 / x + lnh * i1 - 0.25 * x * s1;
  return {k0, k1};
}

// e^x K_0(x), e^x K_1(x) for x > 2 via Steed's continued fraction.
inline std::array<double, 2> k01_scaled_cf(double x) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  double q = a1, c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i < 100000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < 1e-17) break;
  }
  h *= a1;
  const double k0 = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
  const double k1 = k0 * (x + 0.5 - h) / x;
  return {k0, k1};
}

// e^x K_{m-1}, e^x K_m, e^x K_{m+1} with K_{-1} = K_1.
inline std::array<double, 3> k_scaled_triple(int m, double x) {
  double k0, k1;
  if (x <= 2.0) {
    const auto [a, b] = k01_series(x);
    const double e = std::exp(x);
    k0 = a * e;
    k1 = b * e;
  } else {
    const auto [a, b] = k01_scaled_cf(x);
    k0 = a;
    k1 = b;
  }
  if (m == 0) return {k1, k0, k1};
  double km1 = k0, kc = k1;
  for (int n = 1; n < m; ++n) {
    const double kn = km1 + 2.0 * n / x * kc;
    km1 = kc;
    kc = kn;
  }
  return {km1, kc, km1 + 2.0 * m / x * kc};
}

}  // namespace detail

inline double bessel_j(FunctionOrder m, double x) {
  if (!std::isfinite(x) || x < 0.0) throw DomainError("bessel_j: x must be finite and non-negative");
  return detail::j_triple(m.value(), x)[1];
}

/// J_m'(x) = (J_{m-1}(x) - J_{m+1}(x)) / 2.
inline double bessel_j_prime(FunctionOrder m, double x) {
  if (!std::isfinite(x) || x < 0.0) throw DomainError("bessel_j_prime: x must be finite and non-negative");
  const auto t = detail::j_triple(m.value(), x);
  return 0.5 * (t[0] - t[2]);
}

inline ValueAndDerivative bessel_j_with_derivative(FunctionOrder m, double x) {
  if (!std::isfinite(x) || x < 0.0) throw DomainError("bessel_j: x must be finite and non-negative");
  const auto t = detail::j_triple(m.value(), x);
  return {t[1], 0.5 * (t[0] - t[2])};
}

/// e^x K_m(x); finite for every x > 0, used where K_m alone would underflow.
inline ValueAndDerivative bessel_k_scaled_with_derivative(FunctionOrder m, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("bessel_k: x must be finite and strictly positive");
  const auto t = detail::k_scaled_triple(m.value(), x);
  return {t[1], -0.5 * (t[0] + t[2])};
}

inline double bessel_k_scaled(FunctionOrder m, double x) { return bessel_k_scaled_with_derivative(m, x).value; }

/// ln K_m(x), finite for all x > 0.
inline double log_bessel_k(FunctionOrder m, double x) { return std::log(bessel_k_scaled(m, x)) - x; }

inline double bessel_k(FunctionOrder m, double x) { return bessel_k_scaled(m, x) * std::exp(-x); }

/// K_m'(x) = -(K_{m-1}(x) + K_{m+1}(x)) / 2.
inline double bessel_k_prime(FunctionOrder m, double x) {
  return bessel_k_scaled_with_derivative(m, x).derivative * std::exp(-x);
}

}  // namespace photodur::kernels
