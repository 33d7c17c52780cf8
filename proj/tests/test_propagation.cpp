#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "photodur/propagation.hpp"

using namespace photodur;
using Catch::Approx;

namespace {

constexpr double k0 = 5.8616e6;
constexpr double v = 2e8;

DispersionModel flat() { return DispersionModel(DispersionlessLaw(v)); }
DispersionModel massive() { return DispersionModel(MassiveLaw(v, v * k0)); }
DispersionModel fiber() { return DispersionModel(FiberLaw(FiberParameters(4e-6, 1.0, 2.1025, 1.0, 2.085), FunctionOrder(1))); }
SpectralAmplitude narrow() { return SpectralAmplitude::gaussian(k0, 0.02 * k0); }

double trapz_moment(const ArrivalDistribution& d, int n) {
  std::vector<double> y(d.t.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::pow(d.t[i], n) * d.P[i];
  return numerics::trapezoid(d.t, y);
}

}  // namespace

TEST_CASE("amplitude at the origin is the plain k integral of f") {
  const Propagator p(massive(), narrow(), PolarizationVector{});
  const auto g = narrow();
  const auto model = massive();
  const double rho = 0.3;
  const auto [lo, hi] = g.support();
  const auto f = [&](double k) { return per_k_amplitude(g, model, k, PolarizationVector{}, rho); };
  const double re = oracle::trapezoid([&](double k) { return f(k).real(); }, lo, hi, 20000);
  const double im = oracle::trapezoid([&](double k) { return f(k).imag(); }, lo, hi, 20000);
  const complex a = p.amplitude(0.0, 0.0, rho);
  CHECK(std::abs(a - complex(re, im)) < 1e-8 * std::abs(a));
}

TEST_CASE("dispersionless amplitude translates rigidly") {
  const Propagator p(flat(), narrow(), PolarizationVector{});
  const double z = 0.5;
  for (double s : {-3e-13, -1e-13, 0.0, 5e-14, 2e-13}) {
    const double t = z / v + s;
    const double a = std::abs(p.amplitude(z, t, 0.2));
    const double b = std::abs(p.amplitude(0.0, s, 0.2));
    CHECK(std::abs(a - b) <= 1e-6 * std::max(b, std::abs(p.amplitude(0.0, 0.0, 0.2)) * 1e-3));
  }
}

TEST_CASE("dispersionless density keeps its shape along z") {
  const Propagator p(flat(), narrow(), PolarizationVector{});
  const auto d0 = p.distribution(0.01);
  const double shift = 0.15 / v;
  const auto grid = p.plan_for(0.16, {d0.t.front() + shift, d0.t.back() + shift});
  std::vector<double> t1 = d0.t;
  for (auto& t : t1) t += shift;
  const auto d1 = p.distribution(grid, 0.16, t1);
  double peak = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < d0.P.size(); ++i) {
    peak = std::max(peak, d0.P[i]);
    diff = std::max(diff, std::abs(d1.P[i] - d0.P[i]));
  }
  CHECK(diff <= 1e-5 * peak);
}

TEST_CASE("linearity, phase invariance and |A|^2") {
  const auto g = narrow();
  const Propagator p1(massive(), g, PolarizationVector{});
  const Propagator p2(massive(), g.scaled(complex(0.0, 2.0)), PolarizationVector{});
  const Propagator p3(massive(), g.scaled(std::polar(1.0, 0.7)), PolarizationVector{});
  const double z = 0.05;
  const auto w = p1.window_guess(z);
  const auto grid1 = p1.plan_for(z, w);
  const auto grid2 = p2.plan_for(z, w);
  const auto grid3 = p3.plan_for(z, w);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(w.begin, w.end), ur(0.0, 1.0);
  const double peak = p1.probability_density(grid1, z, 0.5 * (w.begin + w.end), 0.5);
  for (int i = 0; i < 100; ++i) {
    const double t = ut(rng), rho = ur(rng);
    const complex a1 = p1.amplitude(grid1, z, t, rho);
    const complex a2 = p2.amplitude(grid2, z, t, rho);
    CHECK(std::abs(a2 - complex(0.0, 2.0) * a1) <= 1e-12 * std::abs(a2) + 1e-300);
    CHECK(p1.probability_density(grid1, z, t, rho) == std::norm(a1));
    const double pd = p1.probability_density(grid1, z, t, rho);
    CHECK(std::abs(p3.probability_density(grid3, z, t, rho) - pd) <= 1e-12 * peak);
    CHECK(pd >= 0.0);
  }
}

TEST_CASE("zero source is rejected when it has no support") {
  CHECK_THROWS_AS(Propagator(massive(), narrow().scaled(0.0), PolarizationVector{}), DomainError);
}

TEST_CASE("cross-section density with the fiber mode") {
  PropagationOptions coarse;
  PropagationOptions fine;
  fine.radial_nodes = 32;
  const auto g = SpectralAmplitude::gaussian(k0, 0.05 * k0);
  const Propagator p16(fiber(), g, PolarizationVector{}, coarse);
  const Propagator p32(fiber(), g, PolarizationVector{}, fine);
  const double z = 0.02;
  const auto w = p16.window_guess(z);
  const auto grid16 = p16.plan_for(z, w);
  const auto grid32 = p32.plan_for(z, w);
  for (double s : {0.3, 0.5, 0.7}) {
    const double t = w.begin + s * (w.end - w.begin);
    const double a = p16.cross_section_density(grid16, z, t);
    const double b = p32.cross_section_density(grid32, z, t);
    CHECK(a > 0.0);
    CHECK(std::abs(a - b) < 1e-7 * b);
    // Direct radial quadrature of |A|^2.
    const double direct = oracle::trapezoid(
        [&](double rho) { return 2.0 * std::numbers::pi * rho * p16.probability_density(grid16, z, t, rho); }, 0.0, 4e-6,
        400);
    CHECK(std::abs(a - direct) < 1e-5 * a);
  }
}

TEST_CASE("normalised density and interval probabilities") {
  PropagationOptions opt;
  const Propagator p(massive(), narrow(), PolarizationVector(1.0, 0.0, 0.5), opt);
  const auto d = p.distribution(0.04);
  const auto dens = normalized_density(d);
  CHECK(interval_probability(d, 0.0, 1.0) == Approx(2.0).epsilon(1e-12));
  CHECK(interval_probability(d, d.t[400], d.t[400]) == 0.0);
  const double a = interval_probability(d, d.t[300], d.t[700]);
  const double b = interval_probability(d, d.t[200], d.t[800]);
  CHECK(a <= b);
  CHECK(b <= 2.0);
  CHECK(dens(d.t.front() - 1.0) == 0.0);
  CHECK(dens(d.t[600]) == Approx(d.P[600] / (0.5 * numerics::trapezoid(d.t, d.P))));
  CHECK_THROWS_AS(interval_probability(d, 2.0, 1.0), DomainError);

  const Propagator unit(massive(), narrow(), PolarizationVector{}, opt);
  const auto du = unit.distribution(0.04);
  const double m0 = trapz_moment(du, 0);
  const double mean = trapz_moment(du, 1) / m0;
  const double sigma = std::sqrt(trapz_moment(du, 2) / m0 - mean * mean);
  CHECK(interval_probability(du, mean - 3 * sigma, mean + 3 * sigma) > 0.95);
}

TEST_CASE("a truncating window is reported") {
  const Propagator p(massive(), narrow(), PolarizationVector{});
  const auto w = p.window_guess(0.04);
  const double mid = 0.5 * (w.begin + w.end);
  const auto grid = p.plan_for(0.04, w);
  const auto d = p.distribution(grid, 0.04, numerics::linspace(mid, w.end, 601));
  CHECK(d.tail_mass_estimate > 1e-3);
  CHECK_THROWS_AS(normalized_density(d), TailTruncationError);
  CHECK_THROWS_AS(interval_probability(d, 0.0, 1.0), TailTruncationError);
}

TEST_CASE("phase resolution is enforced") {
  PropagationOptions opt;
  opt.max_k_nodes = 300;
  const Propagator p(massive(), narrow(), PolarizationVector{}, opt);
  CHECK_THROWS_AS(p.distribution(1.0), PhaseResolutionError);

  PropagationOptions ok;
  const Propagator q(massive(), narrow(), PolarizationVector{}, ok);
  const auto small = q.plan_for(0.01, q.window_guess(0.01));
  const auto w = q.window_guess(0.02);
  CHECK_THROWS_AS(q.cross_section_density(small, 0.02, w.end), PhaseResolutionError);
  // distribution() refines the shared grid when it is too coarse.
  const auto d = q.distribution(small, 0.02, numerics::linspace(w.begin, w.end, 101));
  CHECK(d.k_nodes > small.k.size());
  ok.max_refinement = 1;
  const Propagator r(massive(), narrow(), PolarizationVector{}, ok);
  CHECK_THROWS_AS(r.distribution(small, 0.16, numerics::linspace(r.window_guess(0.16).begin, r.window_guess(0.16).end, 11)),
                  PhaseResolutionError);
}

TEST_CASE("results do not depend on the worker count") {
  PropagationOptions one, three;
  three.threads = 3;
  const Propagator p1(massive(), narrow(), PolarizationVector{}, one);
  const Propagator p3(massive(), narrow(), PolarizationVector{}, three);
  const auto a = p1.distribution(0.04);
  const auto b = p3.distribution(0.04);
  REQUIRE(a.P.size() == b.P.size());
  for (std::size_t i = 0; i < a.P.size(); ++i) CHECK(a.P[i] == b.P[i]);
}

TEST_CASE("halving the k and t steps leaves the moments unchanged") {
  PropagationOptions base, fine;
  fine.samples_per_period = 16.0;
  fine.min_k_nodes = 512;
  fine.time_points = 2401;
  const Propagator p(massive(), narrow(), PolarizationVector{}, base);
  const Propagator q(massive(), narrow(), PolarizationVector{}, fine);
  const auto a = p.distribution(0.08);
  const auto b = q.distribution(0.08);
  CHECK(b.k_nodes >= 2 * a.k_nodes - 1);
  for (int n = 0; n <= 2; ++n) {
    CHECK(std::abs(trapz_moment(a, n) / trapz_moment(b, n) - 1.0) < 1e-4);
  }
}

TEST_CASE("two-sided support adds the backward-moving half") {
  PropagationOptions opt;
  opt.support = Support::two_sided;
  const Propagator both(flat(), narrow(), PolarizationVector{}, opt);
  const Propagator forward(flat(), narrow(), PolarizationVector{});
  // At z = t = 0 the two halves are complex conjugates of each other, so A is real.
  const complex a = both.amplitude(0.0, 0.0, 0.3);
  const complex f = forward.amplitude(0.0, 0.0, 0.3);
  CHECK(std::abs(a.imag()) < 1e-10 * std::abs(a));
  CHECK(a.real() == Approx(2.0 * f.real()).epsilon(1e-10));
}

TEST_CASE("regularisation sequence converges to the eps = 0 result") {
  const std::vector<double> factors{1e-2, 1e-3, 1e-4};
  const auto seq = regularization_sequence(massive(), narrow(), PolarizationVector{}, {}, 0.04, factors);
  const Propagator p(massive(), narrow(), PolarizationVector{});
  const auto exact = p.distribution(0.04);
  const double m_exact = trapz_moment(exact, 1) / trapz_moment(exact, 0);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& [eps, d] : seq) {
    const double m = trapz_moment(d, 1) / trapz_moment(d, 0);
    const double err = std::abs(m - m_exact);
    CHECK(err <= prev);
    prev = err;
  }
  CHECK(prev / m_exact < 1e-7);
}
