#include "facechat/vad/evaluation.hpp"

#include <algorithm>

#include "facechat/vad/stream.hpp"

namespace facechat::vad {

std::string_view to_string(VadSystem system) {
  switch (system) {
    case VadSystem::Stage1Only: return "stage1-only";
    case VadSystem::Stage2FixedWindows: return "stage2-fixed-windows";
    case VadSystem::TwoStage: return "two-stage";
  }
  return "unknown";
}

std::vector<bool> frame_labels(std::span<const Interval> intervals, std::size_t frames, int frame_ms) {
  std::vector<bool> labels(frames, false);
  for (const auto& iv : intervals) {
    for (std::size_t i = 0; i < frames; ++i) {
      // Midpoint in doubled units to stay integral.
      const std::uint64_t mid2 = (2 * i + 1) * static_cast<std::uint64_t>(frame_ms);
      if (mid2 >= 2 * iv.start_ms && mid2 < 2 * iv.end_ms) labels[i] = true;
    }
  }
  return labels;
}

std::vector<Interval> predict_intervals(const LabeledClip& clip, VadSystem system,
                                        const VadConfig& config,
                                        std::shared_ptr<SegmentVerifier> verifier) {
  if (!verifier) verifier = std::make_shared<SpectralVerifier>(config);
  std::vector<Interval> out;
  const auto frame_ms = static_cast<std::uint64_t>(config.frame_ms);

  switch (system) {
    case VadSystem::Stage1Only: {
      EnergyBandGate gate(config);
      const std::size_t n = config.frame_samples();
      for (std::size_t pos = 0, i = 0; pos + n <= clip.pcm.size(); pos += n, ++i) {
        const auto d = gate.classify(std::span(clip.pcm).subspan(pos, n), i * frame_ms);
        if (d.is_speech) out.push_back({d.timestamp_ms, d.timestamp_ms + frame_ms});
      }
      break;
    }
    case VadSystem::Stage2FixedWindows: {
      const std::size_t n = static_cast<std::size_t>(config.fixed_window_ms) * kSampleRate / 1000;
      for (std::size_t pos = 0; pos < clip.pcm.size(); pos += n) {
        const std::size_t len = std::min(n, clip.pcm.size() - pos);
        const double score = verifier->score(std::span(clip.pcm).subspan(pos, len));
        if (score >= config.verifier_threshold) {
          const std::uint64_t s = pos * 1000 / kSampleRate;
          out.push_back({s, (pos + len) * 1000 / kSampleRate});
        }
      }
      break;
    }
    case VadSystem::TwoStage: {
      VadStream stream(config, verifier);
      auto segments = stream.push(clip.pcm);
      // Drain anything still open at the end of the clip with trailing silence.
      std::vector<std::int16_t> tail(
          static_cast<std::size_t>(config.hangover_ms + 2 * config.frame_ms) * kSampleRate / 1000, 0);
      auto more = stream.push(tail);
      segments.insert(segments.end(), std::make_move_iterator(more.begin()),
                      std::make_move_iterator(more.end()));
      for (const auto& seg : segments) out.push_back({seg.onset_ms, seg.end_ms});
      break;
    }
  }
  return out;
}

PrecisionRecall evaluate_predictions(std::span<const LabeledClip> corpus,
                                     std::span<const std::vector<Interval>> predictions,
                                     int frame_ms) {
  if (corpus.empty()) throw VadError(VadError::Code::EmptyCorpus, "no clips to evaluate");
  PrecisionRecall pr;
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const auto& clip = corpus[c];
    const std::size_t frames =
        clip.pcm.size() * 1000 / kSampleRate / static_cast<std::size_t>(frame_ms);
    const auto ref = frame_labels(clip.reference, frames, frame_ms);
    const auto hyp = c < predictions.size() ? frame_labels(predictions[c], frames, frame_ms)
                                            : std::vector<bool>(frames, false);
    for (std::size_t i = 0; i < frames; ++i) {
      if (hyp[i] && ref[i]) ++pr.true_positive;
      if (hyp[i] && !ref[i]) ++pr.false_positive;
      if (!hyp[i] && ref[i]) ++pr.false_negative;
    }
  }
  const auto predicted = pr.true_positive + pr.false_positive;
  const auto actual = pr.true_positive + pr.false_negative;
  pr.precision = predicted == 0 ? 1.0 : static_cast<double>(pr.true_positive) / predicted;
  pr.recall = actual == 0 ? 1.0 : static_cast<double>(pr.true_positive) / actual;
  return pr;
}

PrecisionRecall evaluate_vad(std::span<const LabeledClip> corpus, VadSystem system,
                             const VadConfig& config, std::shared_ptr<SegmentVerifier> verifier) {
  if (corpus.empty()) throw VadError(VadError::Code::EmptyCorpus, "no clips to evaluate");
  std::vector<std::vector<Interval>> predictions;
  predictions.reserve(corpus.size());
  for (const auto& clip : corpus) predictions.push_back(predict_intervals(clip, system, config, verifier));
  return evaluate_predictions(corpus, predictions, config.frame_ms);
}

}  // namespace facechat::vad
