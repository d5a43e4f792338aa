#include "facechat/bench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "facechat/adapters/clock.hpp"
#include "facechat/pipeline/session.hpp"
#include "facechat/vad/synthetic.hpp"

namespace facechat::bench {

namespace {

constexpr std::size_t kPacketSamples = 2048;
constexpr double kLeadSilenceMs = 300.0;
constexpr double kTailSilenceMs = 900.0;
constexpr auto kTurnTimeout = std::chrono::seconds(120);

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  // Avoid "-0.00".
  return std::string(buf) == "-0.00" ? "0.00" : buf;
}

std::vector<std::int16_t> trial_audio(double utterance_ms, std::uint64_t seed) {
  vad::SignalRng rng(seed);
  const double total_ms = kLeadSilenceMs + utterance_ms + kTailSilenceMs;
  auto mix = vad::white_noise(total_ms, 0.001, rng);
  vad::mix_into(mix, vad::voiced_speech(utterance_ms, 140.0, 0.4, rng),
                static_cast<std::size_t>(kLeadSilenceMs * vad::kSampleRate / 1000.0));
  return vad::to_pcm16(mix);
}

}  // namespace

BenchError::BenchError(Code code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

std::string_view to_string(BenchError::Code code) {
  switch (code) {
    case BenchError::Code::BackendNotFake: return "BackendNotFake";
    case BenchError::Code::IncompleteGrid: return "IncompleteGrid";
    case BenchError::Code::InvalidGrid: return "InvalidGrid";
    case BenchError::Code::TrialFailed: return "TrialFailed";
  }
  return "Unknown";
}

const CellTarget& BenchGrid::target(const std::string& chat, const std::string& asr) const {
  auto it = targets.find({chat, asr});
  if (it == targets.end()) {
    throw BenchError(BenchError::Code::IncompleteGrid, "no target for " + chat + "/" + asr);
  }
  return it->second;
}

CellDelays derive_delays(const BenchGrid& grid, const std::string& chat, const std::string& asr,
                         double allowance_ms) {
  const auto& t = grid.target(chat, asr);
  auto asr_it = grid.asr_delay_ms.find(asr);
  if (asr_it == grid.asr_delay_ms.end()) {
    throw BenchError(BenchError::Code::InvalidGrid, "no delay for ASR preset " + asr);
  }
  CellDelays d;
  d.asr_ms = asr_it->second;
  d.tts_ms = grid.tts_delay_ms;
  d.chat_ms = t.mean_s * 1000.0 - allowance_ms - d.asr_ms - d.tts_ms;
  // Uniform +/- a has standard deviation a / sqrt(3).
  d.chat_jitter_ms = std::clamp(t.std_s * 1000.0 * std::sqrt(3.0), 0.0, std::max(0.0, d.chat_ms));
  return d;
}

void BenchGrid::validate(double allowance_ms) const {
  if (chat_presets.empty() || asr_presets.empty()) {
    throw BenchError(BenchError::Code::InvalidGrid, "grid needs chat and asr presets");
  }
  if (trials < 2) throw BenchError(BenchError::Code::InvalidGrid, "trials must be >= 2");
  if (tts_delay_ms < 0.0) throw BenchError(BenchError::Code::InvalidGrid, "tts delay must be >= 0");
  for (const auto& chat : chat_presets) {
    for (const auto& asr : asr_presets) {
      const auto d = derive_delays(*this, chat, asr, allowance_ms);
      if (d.asr_ms < 0.0 || d.chat_ms < 0.0) {
        throw BenchError(BenchError::Code::InvalidGrid,
                         "cell " + chat + "/" + asr + " derives a negative delay");
      }
    }
  }
}

BenchGrid BenchGrid::from_json(const nlohmann::json& j) {
  BenchGrid g;
  try {
    g.chat_presets = j.at("chat_presets").get<std::vector<std::string>>();
    g.asr_presets = j.at("asr_presets").get<std::vector<std::string>>();
    g.asr_delay_ms = j.at("asr_delay_ms").get<std::map<std::string, double>>();
    g.tts_delay_ms = j.value("tts_delay_ms", g.tts_delay_ms);
    g.overhead_allowance_ms = j.value("overhead_allowance_ms", g.overhead_allowance_ms);
    g.trials = j.value("trials", g.trials);
    for (const auto& [chat, row] : j.at("cells").items()) {
      for (const auto& [asr, cell] : row.items()) {
        g.targets[{chat, asr}] = {cell.at("mean_s").get<double>(), cell.value("std_s", 0.0)};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw BenchError(BenchError::Code::InvalidGrid, e.what());
  }
  return g;
}

BenchGrid BenchGrid::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BenchError(BenchError::Code::InvalidGrid, "cannot read " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw BenchError(BenchError::Code::InvalidGrid, path.string() + ": " + e.what());
  }
}

std::vector<double> run_trials(const CellDelays& delays, int trials, std::uint64_t seed,
                               const BenchOptions& options) {
  adapters::AdapterSpecs specs;
  if (options.backends && !options.backends->all_fake()) {
    specs = *options.backends;
  } else {
    specs.asr = adapters::AdapterSpec::fake(adapters::AdapterKind::Asr, delays.asr_ms);
    specs.chat = adapters::AdapterSpec::fake(adapters::AdapterKind::Chat, delays.chat_ms,
                                             delays.chat_jitter_ms);
    specs.chat.seed = seed;
    specs.tts = adapters::AdapterSpec::fake(adapters::AdapterKind::Tts, delays.tts_ms);
  }

  std::shared_ptr<adapters::Clock> clock;
  if (options.virtual_clock) {
    clock = std::make_shared<adapters::ManualClock>();
  } else {
    clock = adapters::SteadyClock::shared();
  }
  pipeline::SessionConfig config;
  config.adapters = specs;
  config.pacing = pipeline::PlaybackPacing::None;
  pipeline::Session session(transport::SessionId{}, config,
                            adapters::make_adapters(specs, clock), clock);

  const auto pcm = trial_audio(options.utterance_ms, seed ^ 0x5eedULL);
  std::uint32_t seq = 0;
  std::uint64_t audio_ms = 0;
  for (int t = 0; t < trials; ++t) {
    for (std::size_t pos = 0; pos < pcm.size(); pos += kPacketSamples) {
      const std::size_t n = std::min(kPacketSamples, pcm.size() - pos);
      transport::Packet p;
      p.kind = transport::PacketKind::Audio;
      p.seq = seq++;
      p.timestamp_ms = audio_ms;
      p.payload = transport::encode_audio_payload(std::span(pcm).subspan(pos, n), transport::kRate16k);
      session.handle_packet(p);
      audio_ms += n * 1000 / transport::kRate16k;
    }
    if (!session.wait_for_turns(static_cast<std::uint64_t>(t) + 1, kTurnTimeout) ||
        session.failed_turns() != 0) {
      throw BenchError(BenchError::Code::TrialFailed,
                       "trial " + std::to_string(t) + " did not complete a turn (completed " +
                           std::to_string(session.completed_turns()) + ", failed " +
                           std::to_string(session.failed_turns()) + ")");
    }
    session.wait_audio_drained(kTurnTimeout);
  }
  std::vector<double> totals;
  for (const auto& r : session.records()) totals.push_back(r.total_ms);
  if (totals.size() != static_cast<std::size_t>(trials)) {
    throw BenchError(BenchError::Code::TrialFailed,
                     "expected " + std::to_string(trials) + " turns, got " + std::to_string(totals.size()));
  }
  return totals;
}

pipeline::SampleStats measure_overhead(int trials, const BenchOptions& options) {
  BenchOptions zero = options;
  zero.backends.reset();
  const auto totals = run_trials(CellDelays{}, trials, options.seed, zero);
  return pipeline::sample_stats(totals);
}

const CellResult* BenchReport::find(const std::string& chat, const std::string& asr) const {
  for (const auto& c : cells) {
    if (c.chat == chat && c.asr == asr) return &c;
  }
  return nullptr;
}

const CellResult& BenchReport::cell(const std::string& chat, const std::string& asr) const {
  const auto* c = find(chat, asr);
  if (!c) throw BenchError(BenchError::Code::IncompleteGrid, "missing cell " + chat + "/" + asr);
  return *c;
}

nlohmann::json BenchReport::to_json() const {
  nlohmann::json j{{"chat_presets", chat_presets},
                   {"asr_presets", asr_presets},
                   {"trials", trials},
                   {"seed", seed},
                   {"virtual_clock", virtual_clock},
                   {"real_backends", real_backends},
                   {"allowance_ms", allowance_ms},
                   {"allowance_calibrated", allowance_calibrated},
                   {"cells", nlohmann::json::array()}};
  for (const auto& c : cells) {
    j["cells"].push_back({{"chat", c.chat},
                          {"asr", c.asr},
                          {"target_mean_s", c.target.mean_s},
                          {"target_std_s", c.target.std_s},
                          {"configured_ms", c.delays.configured_ms()},
                          {"mean_s", c.mean_s},
                          {"std_s", c.std_s},
                          {"overhead_ms", c.overhead_ms},
                          {"acceptability", pipeline::to_string(c.acceptability)},
                          {"totals_ms", c.totals_ms}});
  }
  return j;
}

BenchReport run_bench(const BenchGrid& grid, const BenchOptions& options) {
  const bool real = options.backends && !options.backends->all_fake();
  if (real && !options.allow_real) {
    throw BenchError(BenchError::Code::BackendNotFake,
                     "refusing to benchmark non-fake backends without allow_real");
  }
  const int trials = options.trials.value_or(grid.trials);
  BenchReport report;
  report.chat_presets = grid.chat_presets;
  report.asr_presets = grid.asr_presets;
  report.trials = trials;
  report.seed = options.seed;
  report.virtual_clock = options.virtual_clock;
  report.real_backends = real;
  if (options.overhead_allowance_ms) {
    report.allowance_ms = *options.overhead_allowance_ms;
  } else {
    report.allowance_ms = std::max(0.0, measure_overhead(trials, options).mean);
    report.allowance_calibrated = true;
  }
  BenchGrid checked = grid;
  checked.trials = trials;
  checked.validate(report.allowance_ms);

  for (const auto& chat : grid.chat_presets) {
    for (const auto& asr : grid.asr_presets) {
      CellResult c;
      c.chat = chat;
      c.asr = asr;
      c.target = grid.target(chat, asr);
      c.delays = derive_delays(grid, chat, asr, report.allowance_ms);
      report.cells.push_back(std::move(c));
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= report.cells.size()) return;
      {
        std::lock_guard lock(error_mutex);
        if (error) return;
      }
      try {
        auto& c = report.cells[i];
        c.totals_ms = run_trials(c.delays, trials, options.seed * 1000003ULL + i, options);
        const auto stats = pipeline::sample_stats(c.totals_ms);
        c.mean_s = stats.mean / 1000.0;
        c.std_s = stats.std / 1000.0;
        c.overhead_ms = stats.mean - c.delays.configured_ms();
        c.acceptability = pipeline::classify_latency(stats.mean);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.parallel_sessions, 1, report.cells.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return report;
}

bool MonotonicityFlags::monotone() const {
  auto ok = [](const std::vector<Flag>& flags) {
    return std::all_of(flags.begin(), flags.end(), [](const Flag& f) { return f.pass; });
  };
  return ok(rows) && ok(columns);
}

nlohmann::json MonotonicityFlags::to_json() const {
  auto list = [](const std::vector<Flag>& flags) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& f : flags) a.push_back({{"name", f.name}, {"pass", f.pass}, {"detail", f.detail}});
    return a;
  };
  return {{"rows", list(rows)},
          {"columns", list(columns)},
          {"dominance", {{"name", dominance.name}, {"pass", dominance.pass}, {"detail", dominance.detail}}}};
}

MonotonicityFlags check_monotonicity(const BenchReport& report, double tolerance_ms) {
  const double tol_s = tolerance_ms / 1000.0;
  MonotonicityFlags flags;
  auto mean = [&report](const std::string& chat, const std::string& asr) {
    return report.cell(chat, asr).mean_s;
  };
  for (const auto& chat : report.chat_presets) {
    Flag f{"row " + chat, true, {}};
    for (std::size_t k = 1; k < report.asr_presets.size(); ++k) {
      const double prev = mean(chat, report.asr_presets[k - 1]);
      const double cur = mean(chat, report.asr_presets[k]);
      if (cur + tol_s < prev) {
        f.pass = false;
        f.detail += report.asr_presets[k] + " " + fixed2(cur) + " s < " + report.asr_presets[k - 1] +
                    " " + fixed2(prev) + " s; ";
      }
    }
    flags.rows.push_back(std::move(f));
  }
  for (const auto& asr : report.asr_presets) {
    Flag f{"column " + asr, true, {}};
    for (std::size_t k = 1; k < report.chat_presets.size(); ++k) {
      const double prev = mean(report.chat_presets[k - 1], asr);
      const double cur = mean(report.chat_presets[k], asr);
      if (cur + tol_s < prev) {
        f.pass = false;
        f.detail += report.chat_presets[k] + " " + fixed2(cur) + " s < " + report.chat_presets[k - 1] +
                    " " + fixed2(prev) + " s; ";
      }
    }
    flags.columns.push_back(std::move(f));
  }
  const auto& top = report.chat_presets.back();
  flags.dominance = {"dominance " + top, true, {}};
  for (const auto& asr : report.asr_presets) {
    const double top_mean = mean(top, asr);
    for (const auto& chat : report.chat_presets) {
      if (chat != top && mean(chat, asr) > top_mean) {
        flags.dominance.pass = false;
        flags.dominance.detail += chat + "/" + asr + " exceeds " + top + "; ";
      }
    }
  }
  return flags;
}

std::optional<TableFormat> parse_table_format(std::string_view name) {
  if (name == "text") return TableFormat::Text;
  if (name == "csv") return TableFormat::Csv;
  if (name == "md" || name == "markdown") return TableFormat::Markdown;
  return std::nullopt;
}

std::string format_cell(double mean_s, double std_s) {
  return fixed2(mean_s) + " ± " + fixed2(std_s);
}

std::string render_table(const BenchReport& report, TableFormat format) {
  std::ostringstream out;
  const std::vector<std::string> rows(report.chat_presets.rbegin(), report.chat_presets.rend());
  switch (format) {
    case TableFormat::Csv: {
      out << "chat,asr,mean_s,std_s,overhead_ms,acceptability\n";
      for (const auto& chat : rows) {
        for (const auto& asr : report.asr_presets) {
          const auto& c = report.cell(chat, asr);
          char overhead[32];
          std::snprintf(overhead, sizeof overhead, "%.1f", c.overhead_ms);
          out << chat << ',' << asr << ',' << fixed2(c.mean_s) << ',' << fixed2(c.std_s) << ','
              << overhead << ',' << pipeline::to_string(c.acceptability) << '\n';
        }
      }
      break;
    }
    case TableFormat::Markdown: {
      out << "| GPT \\ Whisper |";
      for (const auto& asr : report.asr_presets) out << ' ' << asr << " |";
      out << "\n|---|";
      for (std::size_t k = 0; k < report.asr_presets.size(); ++k) out << "---|";
      out << '\n';
      for (const auto& chat : rows) {
        out << "| " << chat << " |";
        for (const auto& asr : report.asr_presets) {
          const auto& c = report.cell(chat, asr);
          out << ' ' << format_cell(c.mean_s, c.std_s) << " |";
        }
        out << '\n';
      }
      break;
    }
    case TableFormat::Text: {
      constexpr int kWidth = 13;
      auto pad = [](const std::string& s, int width) {
        // "±" is two bytes but one column.
        const auto cols = static_cast<int>(s.size()) - (s.find("±") != std::string::npos ? 1 : 0);
        return s + std::string(static_cast<std::size_t>(std::max(0, width - cols)), ' ');
      };
      out << pad("GPT \\ Whisper", 15);
      for (const auto& asr : report.asr_presets) out << pad(asr, kWidth);
      out << '\n';
      for (const auto& chat : rows) {
        out << pad(chat, 15);
        for (const auto& asr : report.asr_presets) {
          const auto& c = report.cell(chat, asr);
          out << pad(format_cell(c.mean_s, c.std_s), kWidth);
        }
        out << '\n';
      }
      break;
    }
  }
  return out.str();
}

}  // namespace facechat::bench
