#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facechat/dialogue/history.hpp"
#include "facechat/emotion/label.hpp"

namespace facechat::dialogue {

struct PromptDocument {
  std::string persona;
  std::string instruction;
  std::vector<DialogTurn> history;
  std::string current_user_text;
  emotion::EmotionLabel current_emotion;
};

// Length is counted in Unicode code points of the rendered UTF-8 text.
struct PromptBudget {
  std::size_t max_chars = 6000;
};

// Placeholders {persona} {instruction} {history} {emotion_text} {user_text}, each
// exactly once and in that order, with emotion_text and user_text on one line.
// "{{" and "}}" stand for literal braces.
class PromptTemplate {
 public:
  enum class Slot { Persona, Instruction, History, EmotionText, UserText };

  // Throws DialogueError(InvalidTemplate).
  static PromptTemplate parse(std::string_view text);
  static PromptTemplate load(const std::filesystem::path& path);
  static const PromptTemplate& canonical();

  struct Values {
    std::string_view persona;
    std::string_view instruction;
    std::string_view history;
    std::string_view emotion_text;
    std::string_view user_text;
  };
  // Single pass; placeholder-like text inside values is never expanded.
  std::string substitute(const Values& values) const;

  const std::string& source() const { return source_; }

 private:
  struct Piece {
    bool is_slot = false;
    Slot slot = Slot::Persona;
    std::string literal;
  };
  std::string source_;
  std::vector<Piece> pieces_;
};

inline constexpr std::string_view kCanonicalTemplate =
    "{persona}\n\n{instruction}\n\n{history}User ({emotion_text}): {user_text}\nAI:";

std::size_t count_chars(std::string_view utf8);

// Newlines inside turn text become spaces so every turn is one line.
std::string single_line(std::string_view text);

// "User: ...\n" / "AI: ...\n" per turn, in order.
std::string render_history(std::span<const DialogTurn> turns);

struct RenderedPrompt {
  std::string text;
  std::size_t dropped_turns = 0;
};

// Drops the oldest whole turns until the prompt fits. The fit is computed with the
// longest emotion text, so the kept history never depends on the current emotion.
// Throws EmptyComponent (blank persona or instruction) and BudgetUnsatisfiable.
RenderedPrompt render_prompt_detailed(const PromptDocument& doc, const PromptBudget& budget = {},
                                      const PromptTemplate& tmpl = PromptTemplate::canonical());

inline std::string render_prompt(const PromptDocument& doc, const PromptBudget& budget = {},
                                 const PromptTemplate& tmpl = PromptTemplate::canonical()) {
  return render_prompt_detailed(doc, budget, tmpl).text;
}

std::string read_text_file(const std::filesystem::path& path);

}  // namespace facechat::dialogue
