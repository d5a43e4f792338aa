// Offline endpointing: WAV in, one JSON line per emitted segment out.
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "facechat/pipeline/config.hpp"
#include "facechat/transport/resampler.hpp"
#include "facechat/transport/wav.hpp"
#include "facechat/vad/evaluation.hpp"
#include "facechat/vad/stream.hpp"
#include "facechat/vad/synthetic.hpp"

using namespace facechat;

namespace {

void print_segment(const vad::UtteranceSegment& seg, bool as_json) {
  if (as_json) {
    std::cout << nlohmann::json{{"start_ms", seg.start_ms},
                                {"onset_ms", seg.onset_ms},
                                {"end_ms", seg.end_ms},
                                {"verifier_score", seg.verifier_score}}
                     .dump()
              << '\n';
  } else {
    std::cout << seg.start_ms << " .. " << seg.end_ms << " ms  (onset " << seg.onset_ms << ", score "
              << seg.verifier_score << ")\n";
  }
}

int evaluate_synthetic(const vad::VadConfig& config, std::uint64_t seed, int clips) {
  const auto corpus = vad::synthetic_corpus(seed, clips);
  for (auto system : {vad::VadSystem::Stage1Only, vad::VadSystem::Stage2FixedWindows, vad::VadSystem::TwoStage}) {
    const auto pr = vad::evaluate_vad(corpus, system, config);
    std::cout << nlohmann::json{{"system", vad::to_string(system)},
                                {"precision", pr.precision},
                                {"recall", pr.recall},
                                {"tp", pr.true_positive},
                                {"fp", pr.false_positive},
                                {"fn", pr.false_negative}}
                     .dump()
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run the two-stage endpointer over a WAV file (16-bit PCM, 16 or 44.1 kHz)."};
  std::string wav_path;
  std::string config_path;
  bool emit_json = false;
  bool eval_synthetic = false;
  std::uint64_t seed = 20230601;
  int clips = 16;
  app.add_option("--wav", wav_path, "Input file")->check(CLI::ExistingFile);
  app.add_option("--config", config_path, "Config file; only the vad section is used")->check(CLI::ExistingFile);
  app.add_flag("--emit-json", emit_json, "One JSON object per segment");
  app.add_flag("--eval-synthetic", eval_synthetic, "Score all VAD systems on the synthetic corpus instead");
  app.add_option("--seed", seed, "Synthetic corpus seed");
  app.add_option("--clips", clips, "Synthetic corpus size")->check(CLI::Range(1, 10000));
  CLI11_PARSE(app, argc, argv);

  try {
    vad::VadConfig config;
    if (!config_path.empty()) config = pipeline::AppConfig::load(config_path).session.vad;
    config.validate();
    if (eval_synthetic) return evaluate_synthetic(config, seed, clips);
    if (wav_path.empty()) {
      std::cerr << "endpoint: --wav is required\n";
      return 2;
    }

    auto audio = transport::read_wav(wav_path);
    if (!transport::is_supported_rate(audio.sample_rate_hz)) {
      std::cerr << "endpoint: unsupported sample rate " << audio.sample_rate_hz << '\n';
      return 2;
    }
    std::vector<std::int16_t> pcm;
    if (audio.sample_rate_hz == transport::kRate16k) {
      pcm = std::move(audio.samples);
    } else {
      transport::StreamingResampler resampler(audio.sample_rate_hz);
      pcm = resampler.process(audio.samples);
      const auto tail = resampler.flush();
      pcm.insert(pcm.end(), tail.begin(), tail.end());
    }
    // Trailing silence lets an utterance running to end of file close normally.
    const std::size_t closing = static_cast<std::size_t>(config.hangover_ms + 2 * config.frame_ms) *
                                vad::kSampleRate / 1000;
    pcm.insert(pcm.end(), closing, 0);

    vad::VadStream stream(config);
    for (const auto& seg : stream.push(pcm)) print_segment(seg, emit_json);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "endpoint: " << e.what() << '\n';
    return 2;
  }
}
