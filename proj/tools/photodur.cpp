// photodur: command-line driver for the photon-duration pipelines.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "config.hpp"
#include "photodur/io.hpp"
#include "photodur/verification.hpp"

namespace fs = std::filesystem;
using namespace photodur;
using io::json;

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

void add_common(CLI::App* app, Common& c, bool needs_out = true) {
  app->add_option("--config", c.config, "YAML scenario file")->check(CLI::ExistingFile);
  app->add_option("--preset", c.preset, "Built-in scenario: dispersionless, massive, he11-fiber, telecom");
  if (needs_out) app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "Random seed (overrides sampling.seed)");
  app->add_option("--threads", c.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
}

Scenario scenario_from(const Common& c) {
  if (!c.config.empty() && !c.preset.empty()) throw DomainError("give either --config or --preset, not both");
  Scenario s = !c.config.empty() ? config::load(c.config) : preset(c.preset.empty() ? "dispersionless" : c.preset);
  if (c.seed) s.seed = *c.seed;
  s.propagation.threads = c.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : c.threads;
  s.validate();
  return s;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const config::ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const NegativeVarianceError*>(&e)) return "NegativeVarianceError";
  if (dynamic_cast<const TailTruncationError*>(&e)) return "TailTruncationError";
  if (dynamic_cast<const QuadratureError*>(&e)) return "QuadratureError";
  if (dynamic_cast<const CrossCheckMismatch*>(&e)) return "CrossCheckMismatch";
  if (dynamic_cast<const IntegrabilityError*>(&e)) return "IntegrabilityError";
  if (dynamic_cast<const PhaseResolutionError*>(&e)) return "PhaseResolutionError";
  if (dynamic_cast<const NoGuidedMode*>(&e)) return "NoGuidedMode";
  if (dynamic_cast<const NotAsymptotic*>(&e)) return "NotAsymptotic";
  if (dynamic_cast<const InvariantError*>(&e)) return "InvariantError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "InternalError";
}

void announce(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

void write(const fs::path& p, const std::string& text) {
  io::write_text(p, text);
  announce(p);
}

std::string z_tag(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "z%02zu", i);
  return buf;
}

int cmd_dispersion(const Common& c) {
  const auto s = scenario_from(c);
  write(fs::path(c.out) / "dispersion.csv", io::dispersion_csv(dispersion_table(s), io::meta_for(s, "dispersion")));
  return 0;
}

int cmd_weight(const Common& c) {
  const auto s = scenario_from(c);
  write(fs::path(c.out) / "weight.csv", io::weight_csv(scenario_weight(s), io::meta_for(s, "weight")));
  return 0;
}

int cmd_propagate(const Common& c) {
  const auto s = scenario_from(c);
  const auto m = io::meta_for(s, "propagate");
  const Propagator p(s.model(), s.amplitude(), s.polarization_vector(), s.propagation_options());
  const auto ds = p.ladder(s.z);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    require_tail_bound(ds[i], 0);
    const auto base = fs::path(c.out) / ("distribution_" + z_tag(i));
    write(base.string() + ".csv", io::distribution_csv(ds[i], m));
    write(base.string() + ".json", io::dump(io::distribution_sidecar(ds[i], m)));
  }
  return 0;
}

int cmd_stats(const Common& c) {
  const auto s = scenario_from(c);
  const auto m = io::meta_for(s, "stats");
  const auto run = direct_run(s);
  json records = json::array();
  for (std::size_t i = 0; i < run.statistics.size(); ++i) records.push_back(io::to_json(run.moments[i], run.statistics[i]));
  json doc{{"meta", io::to_json(m)}, {"statistics", records}};
  if (run.statistics.size() >= 3) {
    const auto r = report_duration_growth(run.statistics);
    doc["duration_growth"] = io::to_json(r);
    write(fs::path(c.out) / "duration_growth.csv", io::duration_csv(r, m));
  }
  write(fs::path(c.out) / "stats.json", io::dump(doc));
  return 0;
}

int cmd_asymptotics(const Common& c, const std::string& weight_file) {
  const auto s = scenario_from(c);
  auto m = io::meta_for(s, "asymptotics");
  SpectralWeight w;
  if (weight_file.empty()) {
    w = scenario_weight(s);
  } else {
    w = io::read_weight_csv(weight_file);
    m.command += " --weight " + fs::path(weight_file).filename().string();
  }
  const auto k = asymptotic_constants(s, w);
  json doc = io::to_json(k);
  doc["meta"] = io::to_json(m);
  write(fs::path(c.out) / "asymptotics.json", io::dump(doc));
  return 0;
}

int cmd_sample(const Common& c, std::optional<double> z) {
  const auto s = scenario_from(c);
  const auto m = io::meta_for(s, "sample");
  const double zz = z ? *z : s.z.back();
  const Propagator p(s.model(), s.amplitude(), s.polarization_vector(), s.propagation_options());
  const auto d = p.distribution(zz);
  const auto samples = sample_arrival_times(d, s.samples, s.seed, s.propagation.threads);
  const auto ms = moments(d);
  const double mean = ms.tau1() / ms.tau0();
  json doc{{"meta", io::to_json(m)},
           {"z", zz},
           {"n", s.samples},
           {"seed", s.seed},
           {"sigma_estimate", estimate_sigma(samples)},
           {"sigma_density", std::sqrt(std::max(0.0, ms.tau2() / ms.tau0() - mean * mean))},
           {"statistics", io::to_json(ms, mean_and_sigma(ms, d.p_nu))}};
  write(fs::path(c.out) / "samples.csv", io::samples_csv(samples, m));
  write(fs::path(c.out) / "sample_stats.json", io::dump(doc));
  return 0;
}

int cmd_verify(const Common& c) {
  const auto s = scenario_from(c);
  const auto m = io::meta_for(s, "verify");
  const auto r = verify_scenario(s);
  json checks = json::array();
  for (const auto& ch : r.checks) {
    std::cout << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
    checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
  }
  json doc{{"meta", io::to_json(m)}, {"scenario", s.name}, {"pass", r.pass()}, {"checks", checks},
           {"asymptotics", io::to_json(r.constants)}};
  if (r.growth) doc["duration_growth"] = io::to_json(*r.growth);
  write(fs::path(c.out) / "verify.json", io::dump(doc));
  std::cout << (r.pass() ? "PASS" : "FAIL") << " verify " << s.name << " (B = " << io::number(r.constants.B) << " s/m)\n";
  return r.pass() ? 0 : 1;
}

int cmd_fluxplan(const Common& c, std::optional<double> B, std::optional<double> z, std::optional<double> safety,
                 bool out_given) {
  FluxPlan f;
  json meta;
  if (B && z && c.config.empty() && c.preset.empty()) {
    f = flux_plan(*B, *z, safety.value_or(100.0));
    meta = io::to_json(io::Meta{io::version, "none", "fluxplan"});
  } else {
    const auto s = scenario_from(c);
    const double b = B ? *B : (s.flux.B > 0.0 ? s.flux.B : asymptotic_constants(s).B);
    const double zz = z ? *z : (s.flux.z > 0.0 ? s.flux.z : s.z.back());
    f = flux_plan(b, zz, safety.value_or(s.flux.safety_factor));
    meta = io::to_json(io::meta_for(s, "fluxplan"));
  }
  json doc = io::to_json(f);
  doc["meta"] = meta;
  std::cout << io::dump(doc);
  if (out_given) write(fs::path(c.out) / "fluxplan.json", io::dump(doc));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"photodur: photon arrival-time duration in dispersive fibers"};
  app.set_version_flag("--version", std::string("photodur ") + io::version);
  app.require_subcommand(1);

  Common c;
  std::string weight_file;
  std::optional<double> sample_z, flux_B, flux_z, flux_safety;

  auto* dispersion = app.add_subcommand("dispersion", "Tabulate omega(k) and its derivatives");
  auto* weight = app.add_subcommand("weight", "Export the spectral weight |f|^2(k)");
  auto* propagate = app.add_subcommand("propagate", "Arrival-time densities over the z ladder");
  auto* stats = app.add_subcommand("stats", "Moments, mean and duration per z, plus the growth report");
  auto* asym = app.add_subcommand("asymptotics", "Asymptotic constants and slopes A, B");
  auto* sample = app.add_subcommand("sample", "Monte Carlo arrival times and the sample duration");
  auto* verify = app.add_subcommand("verify", "Cross-pipeline consistency checks");
  auto* flux = app.add_subcommand("fluxplan", "Largest photon flux for a given duration slope and distance");
  for (auto* sub : {dispersion, weight, propagate, stats, asym, sample, verify, flux}) add_common(sub, c);
  asym->add_option("--weight", weight_file, "Weight CSV from the weight command")->check(CLI::ExistingFile);
  sample->add_option("--z", sample_z, "Distance in m (default: largest ladder distance)")->check(CLI::PositiveNumber);
  flux->add_option("--B", flux_B, "Duration slope in s/m");
  flux->add_option("--z", flux_z, "Distance in m");
  flux->add_option("--safety-factor", flux_safety, "Mean emission interval / photon duration (>= 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dispersion) return cmd_dispersion(c);
    if (*weight) return cmd_weight(c);
    if (*propagate) return cmd_propagate(c);
    if (*stats) return cmd_stats(c);
    if (*asym) return cmd_asymptotics(c, weight_file);
    if (*sample) return cmd_sample(c, sample_z);
    if (*verify) return cmd_verify(c);
    if (*flux) return cmd_fluxplan(c, flux_B, flux_z, flux_safety, flux->count("--out") > 0);
  } catch (const std::exception& e) {
    const json report{{"error", {{"type", error_kind(e)}, {"message", e.what()}}}};
    std::cerr << "photodur: error: " << e.what() << "\n" << report.dump() << "\n";
    return 2;
  }
  return 0;
}
