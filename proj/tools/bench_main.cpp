// Latency grid benchmark over delay-configured fake backends.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "facechat/bench/bench.hpp"
#include "facechat/pipeline/config.hpp"

using namespace facechat;

int main(int argc, char** argv) {
  CLI::App app{"Measure utterance-to-response latency over a chat x ASR preset grid."};
  std::string grid_path;
  int trials = 0;
  std::string format = "text";
  std::uint64_t seed = 1;
  std::string out_path;
  std::string json_path;
  std::size_t parallel = 1;
  bool allow_real = false;
  std::string config_path;
  bool virtual_clock = false;
  std::string gate = "all";
  std::string allowance = "calibrate";
  double tolerance_ms = 10.0;

  app.add_option("--grid", grid_path, "Grid file (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--trials", trials, "Turns per cell (default: the grid's value)")->check(CLI::Range(2, 100000));
  app.add_option("--format", format, "text, csv or md")->check(CLI::IsMember({"text", "csv", "md", "markdown"}));
  app.add_option("--seed", seed, "Jitter RNG seed");
  app.add_option("--out", out_path, "Write the table here instead of stdout");
  app.add_option("--json", json_path, "Write the full report and flags as JSON");
  app.add_option("--parallel-sessions", parallel, "Cells measured concurrently (default 1)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{64}));
  app.add_flag("--allow-real", allow_real, "Permit non-fake backends from --config (results not reproducible)");
  app.add_option("--config", config_path, "Config whose adapters section supplies real backends")
      ->check(CLI::ExistingFile);
  app.add_flag("--virtual-clock", virtual_clock, "Run on virtual time (bit-identical reports per seed)");
  app.add_option("--gate", gate, "Flags that set the exit code: all, dominance or none")
      ->check(CLI::IsMember({"all", "dominance", "none"}));
  app.add_option("--overhead-allowance-ms", allowance,
                 "\"calibrate\" (zero-delay run), \"grid\" (the file's value) or a number");
  app.add_option("--tolerance-ms", tolerance_ms, "Monotonicity tolerance");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto grid = bench::BenchGrid::load(grid_path);
    bench::BenchOptions options;
    options.seed = seed;
    if (trials > 0) options.trials = trials;
    options.virtual_clock = virtual_clock;
    options.parallel_sessions = parallel;
    options.allow_real = allow_real;
    if (!config_path.empty()) {
      options.backends = pipeline::AppConfig::load(config_path).session.adapters;
    }
    if (allowance == "grid") {
      options.overhead_allowance_ms = grid.overhead_allowance_ms;
    } else if (allowance != "calibrate") {
      try {
        options.overhead_allowance_ms = std::stod(allowance);
      } catch (const std::exception&) {
        std::cerr << "--overhead-allowance-ms: expected calibrate, grid or a number\n";
        return 2;
      }
    }

    const auto report = bench::run_bench(grid, options);
    const auto flags = bench::check_monotonicity(report, tolerance_ms);
    const auto table = bench::render_table(report, *bench::parse_table_format(format));
    if (out_path.empty()) {
      std::cout << table;
    } else {
      std::ofstream(out_path) << table;
    }
    if (!json_path.empty()) {
      auto j = report.to_json();
      j["flags"] = flags.to_json();
      std::ofstream(json_path) << j.dump(2) << '\n';
    }

    std::fprintf(stderr, "%s backends, %d trials per cell, seed %llu%s\n",
                 report.real_backends ? "REAL (non-reproducible)" : "fake", report.trials,
                 static_cast<unsigned long long>(report.seed), report.virtual_clock ? ", virtual clock" : "");
    std::fprintf(stderr, "overhead allowance %.2f ms (%s)%s\n", report.allowance_ms,
                 report.allowance_calibrated ? "calibrated" : "fixed",
                 report.allowance_ms <= 50.0 ? "" : "  WARNING: above 50 ms");
    double worst = 0.0;
    for (const auto& c : report.cells) worst = std::max(worst, std::abs(c.mean_s - c.target.mean_s));
    std::fprintf(stderr, "largest |measured - target| = %.3f s\n", worst);
    for (const auto* group : {&flags.rows, &flags.columns}) {
      for (const auto& f : *group) {
        std::fprintf(stderr, "%-4s %s %s\n", f.pass ? "PASS" : "FAIL", f.name.c_str(), f.detail.c_str());
      }
    }
    std::fprintf(stderr, "%-4s %s %s\n", flags.dominance.pass ? "PASS" : "FAIL", flags.dominance.name.c_str(),
                 flags.dominance.detail.c_str());

    const bool ok = gate == "none" || (gate == "dominance" ? flags.dominance.pass : flags.all_pass());
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 2;
  }
}
