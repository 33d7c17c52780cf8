#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "photodur/errors.hpp"

namespace photodur::numerics {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw DomainError("linspace needs at least two points");
  std::vector<double> out(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + h * static_cast<double>(i);
  out.back() = hi;
  return out;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo)) throw DomainError("logspace needs 0 < lo < hi");
  auto e = linspace(std::log(lo), std::log(hi), n);
  for (auto& v : e) v = std::exp(v);
  e.front() = lo;
  e.back() = hi;
  return e;
}

/// Composite trapezoid rule on an arbitrary increasing grid.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("trapezoid: size mismatch");
  CompensatedSum s;
  for (std::size_t i = 1; i < x.size(); ++i) s.add(0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]));
  return s.value();
}

/// Trapezoid value together with a Richardson estimate |T_h - T_2h| / 3.
struct QuadratureValue {
  double value = 0.0;
  double error = 0.0;
};

inline QuadratureValue trapezoid_with_error(std::span<const double> x, std::span<const double> y) {
  QuadratureValue q;
  q.value = trapezoid(x, y);
  if (x.size() < 5) {
    q.error = std::abs(q.value);
    return q;
  }
  std::vector<double> xc, yc;
  for (std::size_t i = 0; i < x.size(); i += 2) {
    xc.push_back(x[i]);
    yc.push_back(y[i]);
  }
  if (xc.back() != x.back()) {
    xc.push_back(x.back());
    yc.push_back(y.back());
  }
  q.error = std::abs(q.value - trapezoid(xc, yc)) / 3.0;
  return q;
}

/// Splits a sorted grid into maximal runs whose spacing does not jump by more
/// than a factor 1.5 (a symmetric grid with a hole around k = 0 gives two runs).
inline std::vector<std::pair<std::size_t, std::size_t>> contiguous_runs(std::span<const double> x) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  if (x.empty()) return runs;
  std::size_t start = 0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double left = x[i] - x[i - 1];
    const double right = x[i + 1] - x[i];
    if (right > 1.5 * left && i + 1 - start >= 2) {
      runs.emplace_back(start, i + 1);
      start = i + 1;
    }
  }
  runs.emplace_back(start, x.size());
  return runs;
}

/// Natural cubic spline through (x_i, y_i).
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw DomainError("CubicSpline needs >= 3 matching points");
    for (std::size_t i = 1; i < n; ++i) {
      if (!(x_[i] > x_[i - 1])) throw DomainError("CubicSpline abscissae must increase strictly");
    }
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      const double a = h0 / 6.0;
      const double b = (h0 + h1) / 3.0;
      const double cc = h1 / 6.0;
      const double rhs = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
      const double denom = b - a * c[i - 1];
      c[i] = cc / denom;
      d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = d[i] - c[i] * m_[i + 1];
      if (i == 1) break;
    }
  }

  double operator()(double t) const { return eval(t, 0); }
  double derivative(double t) const { return eval(t, 1); }
  double second_derivative(double t) const { return eval(t, 2); }

  /// Second derivative at the knots (the spline moments).
  const std::vector<double>& moments() const noexcept { return m_; }
  const std::vector<double>& knots() const noexcept { return x_; }
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  double eval(double t, int order) const {
    const std::size_t n = x_.size();
    std::size_t i = 0;
    if (t >= x_.back()) {
      i = n - 2;
    } else if (t > x_.front()) {
      i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    }
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h;
    const double b = (t - x_[i]) / h;
    switch (order) {
      case 0:
        return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
      case 1:
        return (y_[i + 1] - y_[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m_[i] + (3.0 * b * b - 1.0) / 6.0 * h * m_[i + 1];
      default:
        return a * m_[i] + b * m_[i + 1];
    }
  }

  std::vector<double> x_, y_, m_;
};

/// Gauss-Legendre nodes and weights on [lo, hi].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(std::size_t n, double lo, double hi) {
  if (n == 0) throw DomainError("gauss_legendre: n must be positive");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(j) - 1.0) * x * p1 - (static_cast<double>(j) - 1.0) * p2) / static_cast<double>(j);
      }
      dp = static_cast<double>(n) * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

/// C-infinity taper: 0 at s <= 0, 1 at s >= 1.
inline double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const auto bump = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  const double a = bump(s);
  const double b = bump(1.0 - s);
  return a / (a + b);
}

}  // namespace photodur::numerics
