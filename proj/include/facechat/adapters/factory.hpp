#pragma once

#include <memory>

#include <nlohmann/json.hpp>

#include "facechat/adapters/adapter.hpp"
#include "facechat/adapters/clock.hpp"

namespace facechat::adapters {

struct AdapterSpecs {
  AdapterSpec asr = AdapterSpec::fake(AdapterKind::Asr);
  AdapterSpec chat = AdapterSpec::fake(AdapterKind::Chat);
  AdapterSpec tts = AdapterSpec::fake(AdapterKind::Tts);
  AdapterSpec emotion = AdapterSpec::fake(AdapterKind::Emotion);

  bool all_fake() const;
  // Replaces every http spec by a zero-delay fake of the same kind.
  void force_fake();
  void validate() const;

  static AdapterSpecs from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct AdapterSet {
  std::shared_ptr<AsrAdapter> asr;
  std::shared_ptr<ChatAdapter> chat;
  std::shared_ptr<TtsAdapter> tts;
  std::shared_ptr<EmotionAdapter> emotion;
};

// Fakes sleep on the given clock; http adapters always measure wall time.
AdapterSet make_adapters(const AdapterSpecs& specs, std::shared_ptr<Clock> clock);

}  // namespace facechat::adapters
