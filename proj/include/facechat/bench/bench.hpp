#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "facechat/adapters/factory.hpp"
#include "facechat/pipeline/metrics.hpp"

namespace facechat::bench {

class BenchError : public std::runtime_error {
 public:
  enum class Code { BackendNotFake, IncompleteGrid, InvalidGrid, TrialFailed };
  BenchError(Code code, const std::string& detail);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

std::string_view to_string(BenchError::Code code);

struct CellTarget {
  double mean_s = 0.0;
  double std_s = 0.0;
};

// Presets are listed smallest model first. Each cell's fake delays are split from
// its target mean: fixed ASR and TTS delays per preset, the rest goes to chat.
struct BenchGrid {
  std::vector<std::string> chat_presets;
  std::vector<std::string> asr_presets;
  std::map<std::string, double> asr_delay_ms;
  double tts_delay_ms = 20.0;
  double overhead_allowance_ms = 50.0;
  std::map<std::pair<std::string, std::string>, CellTarget> targets;  // (chat, asr)
  int trials = 20;

  // Throws BenchError(InvalidGrid) or IncompleteGrid.
  void validate(double allowance_ms) const;
  const CellTarget& target(const std::string& chat, const std::string& asr) const;

  static BenchGrid from_json(const nlohmann::json& j);
  static BenchGrid load(const std::filesystem::path& path);
};

struct CellDelays {
  double asr_ms = 0.0;
  double chat_ms = 0.0;
  double chat_jitter_ms = 0.0;  // uniform half-width giving the target std
  double tts_ms = 0.0;
  double configured_ms() const { return asr_ms + chat_ms + tts_ms; }
};

CellDelays derive_delays(const BenchGrid& grid, const std::string& chat, const std::string& asr,
                         double allowance_ms);

struct BenchOptions {
  std::uint64_t seed = 1;
  std::optional<int> trials;               // overrides grid.trials
  bool virtual_clock = false;              // deterministic virtual time
  std::size_t parallel_sessions = 1;       // cells measured concurrently
  bool allow_real = false;
  std::optional<adapters::AdapterSpecs> backends;  // non-fake specs need allow_real
  // Unset: calibrate the allowance from a zero-delay run.
  std::optional<double> overhead_allowance_ms;
  double utterance_ms = 1000.0;
};

struct CellResult {
  std::string chat;
  std::string asr;
  CellTarget target;
  CellDelays delays;
  std::vector<double> totals_ms;
  double mean_s = 0.0;
  double std_s = 0.0;
  double overhead_ms = 0.0;  // measured mean minus configured delay sum
  pipeline::Acceptability acceptability = pipeline::Acceptability::Acceptable;
};

struct BenchReport {
  std::vector<std::string> chat_presets;
  std::vector<std::string> asr_presets;
  std::vector<CellResult> cells;
  int trials = 0;
  std::uint64_t seed = 0;
  bool virtual_clock = false;
  bool real_backends = false;
  double allowance_ms = 0.0;
  bool allowance_calibrated = false;

  const CellResult* find(const std::string& chat, const std::string& asr) const;
  // Throws BenchError(IncompleteGrid).
  const CellResult& cell(const std::string& chat, const std::string& asr) const;
  nlohmann::json to_json() const;
};

// Mean total latency (ms) of zero-delay turns: pure orchestration overhead.
pipeline::SampleStats measure_overhead(int trials, const BenchOptions& options);

// Totals (ms) of `trials` full turns through one session.
std::vector<double> run_trials(const CellDelays& delays, int trials, std::uint64_t seed,
                               const BenchOptions& options);

BenchReport run_bench(const BenchGrid& grid, const BenchOptions& options);

struct Flag {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct MonotonicityFlags {
  std::vector<Flag> rows;     // per chat preset, latency non-decreasing with ASR size
  std::vector<Flag> columns;  // per ASR preset, latency non-decreasing with chat size
  Flag dominance;             // largest chat preset is maximal in every column
  bool monotone() const;
  bool all_pass() const { return monotone() && dominance.pass; }
  nlohmann::json to_json() const;
};

// Throws BenchError(IncompleteGrid).
MonotonicityFlags check_monotonicity(const BenchReport& report, double tolerance_ms = 10.0);

enum class TableFormat { Text, Csv, Markdown };
std::optional<TableFormat> parse_table_format(std::string_view name);

// Rows largest chat preset first, as in the source table; cells "mean ± std" in
// seconds with two decimals.
std::string render_table(const BenchReport& report, TableFormat format);
std::string format_cell(double mean_s, double std_s);

}  // namespace facechat::bench
