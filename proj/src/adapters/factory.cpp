#include "facechat/adapters/factory.hpp"

#include "facechat/adapters/fake.hpp"
#include "facechat/adapters/http.hpp"

namespace facechat::adapters {

bool AdapterSpecs::all_fake() const {
  return asr.impl == AdapterImpl::Fake && chat.impl == AdapterImpl::Fake &&
         tts.impl == AdapterImpl::Fake && emotion.impl == AdapterImpl::Fake;
}

void AdapterSpecs::force_fake() {
  for (AdapterSpec* s : {&asr, &chat, &tts, &emotion}) {
    if (s->impl == AdapterImpl::Http) *s = AdapterSpec::fake(s->kind);
  }
}

void AdapterSpecs::validate() const {
  for (const AdapterSpec* s : {&asr, &chat, &tts, &emotion}) s->validate();
}

AdapterSpecs AdapterSpecs::from_json(const nlohmann::json& j) {
  AdapterSpecs specs;
  if (j.contains("asr")) specs.asr = AdapterSpec::from_json(AdapterKind::Asr, j.at("asr"));
  if (j.contains("chat")) specs.chat = AdapterSpec::from_json(AdapterKind::Chat, j.at("chat"));
  if (j.contains("tts")) specs.tts = AdapterSpec::from_json(AdapterKind::Tts, j.at("tts"));
  if (j.contains("emotion")) {
    specs.emotion = AdapterSpec::from_json(AdapterKind::Emotion, j.at("emotion"));
  }
  return specs;
}

nlohmann::json AdapterSpecs::to_json() const {
  return {{"asr", asr.to_json()}, {"chat", chat.to_json()}, {"tts", tts.to_json()},
          {"emotion", emotion.to_json()}};
}

AdapterSet make_adapters(const AdapterSpecs& specs, std::shared_ptr<Clock> clock) {
  specs.validate();
  AdapterSet set;
  if (specs.asr.impl == AdapterImpl::Fake) {
    set.asr = std::make_shared<FakeAsr>(specs.asr, clock);
  } else {
    set.asr = std::make_shared<HttpAsr>(specs.asr);
  }
  if (specs.chat.impl == AdapterImpl::Fake) {
    set.chat = std::make_shared<FakeChat>(specs.chat, clock);
  } else {
    set.chat = std::make_shared<HttpChat>(specs.chat);
  }
  if (specs.tts.impl == AdapterImpl::Fake) {
    set.tts = std::make_shared<FakeTts>(specs.tts, clock);
  } else {
    set.tts = std::make_shared<HttpTts>(specs.tts);
  }
  if (specs.emotion.impl == AdapterImpl::Fake) {
    set.emotion = std::make_shared<FakeEmotion>(specs.emotion, clock);
  } else {
    set.emotion = std::make_shared<HttpEmotion>(specs.emotion);
  }
  return set;
}

}  // namespace facechat::adapters
