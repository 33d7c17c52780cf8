#include <catch_amalgamated.hpp>

#include <filesystem>

#include "photodur/io.hpp"
#include "photodur/report.hpp"
#include "photodur/scenario.hpp"

using namespace photodur;
using Catch::Approx;

TEST_CASE("every preset builds and validates") {
  for (const auto& name : preset_names()) {
    INFO(name);
    const auto s = preset(name);
    CHECK_NOTHROW(s.validate());
    CHECK(s.z.size() >= 2);
  }
  CHECK_THROWS_AS(preset("vacuum"), InvariantError);
}

TEST_CASE("scenario validation rejects bad input") {
  auto s = preset("massive");
  s.z = {0.1, 0.05};
  CHECK_THROWS_AS(s.validate(), InvariantError);
  s = preset("massive");
  s.polarization.p_nu = 1.5;
  CHECK_THROWS_AS(s.validate(), InvariantError);
  s = preset("massive");
  s.velocity = -1.0;
  CHECK_THROWS(s.validate());
  s = preset("massive");
  s.regularization = -1.0;
  CHECK_THROWS_AS(s.validate(), InvariantError);
}

TEST_CASE("telecom preset reproduces its target dispersion") {
  const auto m = preset("telecom").model();
  const double k = reference_k0;
  CHECK(m.omega_prime(k) == Approx(2.042e8).epsilon(1e-12));
  CHECK(m.omega_second(k) == Approx(0.185).epsilon(1e-9));
}

TEST_CASE("flux plan") {
  const auto f = flux_plan(1e-12, 1000.0, 100.0);
  CHECK(f.max_flux == Approx(1e7).epsilon(1e-14));
  CHECK(f.safety_factor == 100.0);
  CHECK_THROWS_AS(flux_plan(1e-12, 1000.0, 0.5), DomainError);
  CHECK_THROWS_AS(flux_plan(0.0, 1000.0, 100.0), DomainError);
  CHECK_THROWS_AS(flux_plan(1e-12, 0.0, 100.0), DomainError);
  CHECK_THROWS_AS(flux_plan(-1e-12, 1000.0, 100.0), DomainError);
}

TEST_CASE("duration report fits a slope through the origin") {
  std::vector<ArrivalStatistics> st;
  for (double z : {1.0, 2.0, 4.0, 8.0}) st.push_back({z, 5.0 * z, 3e-12 * z, 1.0});
  const auto r = report_duration_growth(st);
  CHECK(r.slope == Approx(3e-12).epsilon(1e-15));
  CHECK(r.standard_error < 1e-26);
  CHECK(r.rows.size() == 4);
  CHECK(r.rows[2].sigma_over_z == Approx(3e-12).epsilon(1e-15));
  CHECK(r.affine_slope == Approx(3e-12).epsilon(1e-12));
  CHECK(std::abs(r.affine_intercept) < 1e-24);
  CHECK_THROWS_AS(report_duration_growth({st[0], st[1]}), DomainError);

  // Alternating noise: slope stays inside its own 2 SE band around the truth.
  std::vector<ArrivalStatistics> noisy;
  for (int i = 1; i <= 6; ++i) noisy.push_back({double(i), 0.0, 2.0 * i + (i % 2 ? 0.1 : -0.1), 1.0});
  const auto n = report_duration_growth(noisy);
  CHECK(n.standard_error > 0.0);
  CHECK(n.band_low < 2.0);
  CHECK(n.band_high > 2.0);
  CHECK(n.band_high - n.slope == Approx(2.0 * n.standard_error));
}

TEST_CASE("dispersionless preset: duration slope is zero within noise") {
  auto s = preset("dispersionless");
  s.propagation.threads = 4;
  const auto run = direct_run(s);
  const auto r = report_duration_growth(run.statistics);
  const double sigma0 = run.statistics.front().sigma;
  // Through the origin a constant sigma_0 fits as sigma_0 sum z / sum z^2.
  double zz = 0.0, z1 = 0.0;
  for (double z : s.z) z1 += z, zz += z * z;
  CHECK(r.slope == Approx(sigma0 * z1 / zz).epsilon(1e-4));
  // Growth beyond the initial duration vanishes within the fit noise.
  CHECK(std::abs(r.affine_slope) <= std::max(2.0 * r.affine_standard_error, 1e-6 * sigma0 / s.z.back()));
  CHECK(r.affine_intercept == Approx(sigma0).epsilon(1e-4));
}

TEST_CASE("config hash covers results and ignores the worker count") {
  auto a = preset("massive");
  auto b = a;
  b.propagation.threads = 8;
  CHECK(io::config_hash(a) == io::config_hash(b));
  b.seed = 2;
  CHECK(io::config_hash(a) != io::config_hash(b));
  CHECK(io::config_hash(a).size() == 16);
  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("weight CSV round-trips exactly") {
  auto s = preset("massive");
  s.source.nodes = 64;
  s.regularization = 1.5;
  const auto w = scenario_weight(s);
  const auto dir = std::filesystem::temp_directory_path() / "photodur_test_scenario";
  const auto path = dir / "weight.csv";
  io::write_text(path, io::weight_csv(w, io::meta_for(s, "weight")));
  const auto r = io::read_weight_csv(path);
  CHECK(r.k == w.k);
  CHECK(r.weight == w.weight);
  CHECK(r.reg.eps == 1.5);
  io::write_text(dir / "bad.csv", "k,weight\n1.0;2.0\n");
  CHECK_THROWS_AS(io::read_weight_csv(dir / "bad.csv"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("artifacts carry version and config hash") {
  const auto s = preset("dispersionless");
  const auto m = io::meta_for(s, "dispersion");
  const auto csv = io::dispersion_csv(dispersion_table(s), m);
  CHECK(csv.rfind("# photodur " + std::string(io::version) + " config_hash=" + m.config_hash, 0) == 0);
  CHECK(csv.find("\nk,omega,omega_prime,omega_double_prime\n") != std::string::npos);
  const auto j = io::to_json(flux_plan(1e-12, 1000.0, 100.0));
  CHECK(j.at("max_flux").get<double>() == Approx(1e7));
  ArrivalDistribution d;
  d.z = 2.0;
  d.t = {0.0, 1.0};
  d.P = {0.0, 0.0};
  const auto side = io::distribution_sidecar(d, m);
  CHECK(side.at("meta").at("config_hash") == m.config_hash);
  CHECK(side.at("z") == 2.0);
}
