#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace facechat::emotion {

enum class Emotion { Happy, Sad, Angry, Neutral };

inline constexpr std::array<Emotion, 4> kAllEmotions{Emotion::Happy, Emotion::Sad, Emotion::Angry,
                                                     Emotion::Neutral};

struct EmotionLabel {
  Emotion label = Emotion::Neutral;
  double confidence = 0.0;
  std::uint64_t timestamp_ms = 0;

  friend bool operator==(const EmotionLabel&, const EmotionLabel&) = default;
};

std::string_view to_string(Emotion emotion);

// Accepts only the four class names (lower case).
std::optional<Emotion> parse_emotion(std::string_view name);

// "the user looks <label>", the textual form injected into the prompt.
std::string emotion_to_text(Emotion emotion);
inline std::string emotion_to_text(const EmotionLabel& label) { return emotion_to_text(label.label); }

}  // namespace facechat::emotion
