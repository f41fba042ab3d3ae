// SPDX-License-Identifier: MIT
// Command-line front end: run, validate, pulse-wav, list-presets.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "sonicdist/dsp/pulse.hpp"
#include "sonicdist/dsp/wav.hpp"
#include "sonicdist/error.hpp"
#include "sonicdist/scenario/presets.hpp"
#include "sonicdist/scenario/report.hpp"
#include "sonicdist/scenario/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kSimulation = 2;

namespace sc = sonicdist::scenario;

void print_brief(const sc::ScenarioConfig& cfg, const sc::RunResult& result) {
  for (const auto& r : result.replicates) {
    const auto& s = r.summary;
    std::printf("%s replicate %zu seed %llu: %zu estimates", cfg.name.c_str(), r.replicate,
                static_cast<unsigned long long>(r.seed), s.estimate_count);
    if (s.mad_m) std::printf(", MAD %.4f m", *s.mad_m);
    std::printf(", %zu alerts", s.alert_count);
    if (s.alert_distance_m) std::printf(", alert distance %.3f m", *s.alert_distance_m);
    if (const auto m = sc::mean(s.times_to_alert_s)) std::printf(", mean time to alert %.3f s", *m);
    if (s.update_period_s) std::printf(", update period %.3f s", *s.update_period_s);
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ultrasonic distance ranging simulator"};
  app.require_subcommand(1);

  std::string scenario_arg, out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  unsigned threads = 1;
  auto* run = app.add_subcommand("run", "Simulate a scenario file or preset and write reports");
  run->add_option("scenario", scenario_arg, "Scenario file or preset name")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--replicates", replicates, "Override the replicate count")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--threads", threads, "Replicates run concurrently")->check(CLI::PositiveNumber)->capture_default_str();

  std::string validate_arg;
  auto* validate = app.add_subcommand("validate", "Check a scenario file or preset without running it");
  validate->add_option("scenario", validate_arg, "Scenario file or preset name")->required();

  std::string wav_path;
  unsigned rate = 48000;
  auto* pulse = app.add_subcommand("pulse-wav", "Write the ranging pulse as a WAV file");
  pulse->add_option("out", wav_path, "Output WAV path")->required();
  pulse->add_option("--rate", rate, "Sample rate")->check(CLI::IsMember({44100u, 48000u}))->capture_default_str();

  auto* list = app.add_subcommand("list-presets", "List the built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*list) {
      for (const auto& name : sc::preset_names()) {
        const auto cfg = sc::load_preset(name);
        std::printf("%-28s %s\n", name.c_str(), cfg.description.c_str());
      }
      return kOk;
    }
    if (*pulse) {
      sonicdist::dsp::PulseTemplate tpl;
      tpl.sample_rate_hz = rate;
      const auto buf = sonicdist::dsp::synthesize_pulse(tpl);
      sonicdist::dsp::write_wav(wav_path, buf.samples, rate);
      std::printf("wrote %zu samples at %u Hz to %s\n", buf.size(), rate, wav_path.c_str());
      return kOk;
    }
    if (*validate) {
      const auto cfg = sc::resolve_scenario(validate_arg);
      std::printf("%s: ok (%zu devices, %zu links, %.1f s, %zu replicates)\n", cfg.name.c_str(), cfg.devices.size(),
                  cfg.links.size(), cfg.duration_s, cfg.replicates);
      return kOk;
    }
    auto cfg = sc::resolve_scenario(scenario_arg);
    if (seed) cfg.seed = *seed;
    if (replicates) cfg.replicates = *replicates;
    cfg.validate();
    const auto result = sc::run_scenario(cfg, threads);
    sc::emit_run(cfg, result, out_dir);
    print_brief(cfg, result);
    return kOk;
  } catch (const sonicdist::ScenarioError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const sonicdist::InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const sonicdist::SimulationError& e) {
    std::fprintf(stderr, "simulation error: %s\n", e.what());
    return kSimulation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSimulation;
  }
}
