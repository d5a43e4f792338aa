#include "facechat/emotion/label.hpp"

namespace facechat::emotion {

std::string_view to_string(Emotion emotion) {
  switch (emotion) {
    case Emotion::Happy: return "happy";
    case Emotion::Sad: return "sad";
    case Emotion::Angry: return "angry";
    case Emotion::Neutral: return "neutral";
  }
  return "neutral";
}

std::optional<Emotion> parse_emotion(std::string_view name) {
  for (Emotion e : kAllEmotions) {
    if (to_string(e) == name) return e;
  }
  return std::nullopt;
}

std::string emotion_to_text(Emotion emotion) {
  return "the user looks " + std::string(to_string(emotion));
}

}  // namespace facechat::emotion
