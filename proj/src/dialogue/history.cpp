#include "facechat/dialogue/history.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>

namespace facechat::dialogue {

DialogueError::DialogueError(Code code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

std::string_view to_string(DialogueError::Code code) {
  switch (code) {
    case DialogueError::Code::NonMonotonicTurnId: return "NonMonotonicTurnId";
    case DialogueError::Code::UnknownTurnId: return "UnknownTurnId";
    case DialogueError::Code::NotUserTurn: return "NotUserTurn";
    case DialogueError::Code::EmptyTurnText: return "EmptyTurnText";
    case DialogueError::Code::EmotionOnSystemTurn: return "EmotionOnSystemTurn";
    case DialogueError::Code::BudgetUnsatisfiable: return "BudgetUnsatisfiable";
    case DialogueError::Code::InvalidTemplate: return "InvalidTemplate";
    case DialogueError::Code::EmptyComponent: return "EmptyComponent";
  }
  return "Unknown";
}

std::string_view to_string(Speaker speaker) {
  return speaker == Speaker::User ? "user" : "system";
}

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
}

nlohmann::json turn_event(const DialogTurn& turn) {
  nlohmann::json j{{"type", "turn"},
                   {"turn_id", turn.turn_id},
                   {"speaker", to_string(turn.speaker)},
                   {"text", turn.text}};
  if (turn.emotion) j["emotion"] = emotion::to_string(turn.emotion->label);
  return j;
}

std::uint64_t DialogHistory::next_turn_id() const {
  std::shared_lock lock(mutex_);
  return turns_.empty() ? 1 : turns_.back().turn_id + 1;
}

void DialogHistory::append_locked(const DialogTurn& turn) {
  const std::uint64_t expected = turns_.empty() ? 1 : turns_.back().turn_id + 1;
  if (turn.turn_id != expected) {
    throw DialogueError(DialogueError::Code::NonMonotonicTurnId,
                        "expected turn id " + std::to_string(expected) + ", got " +
                            std::to_string(turn.turn_id));
  }
  if (is_blank(turn.text)) throw DialogueError(DialogueError::Code::EmptyTurnText, "turn text is blank");
  if (turn.speaker == Speaker::System && turn.emotion) {
    throw DialogueError(DialogueError::Code::EmotionOnSystemTurn, "system turns carry no emotion");
  }
  turns_.push_back(turn);
}

void DialogHistory::append(const DialogTurn& turn) {
  std::unique_lock lock(mutex_);
  append_locked(turn);
}

DialogTurn DialogHistory::append(Speaker speaker, std::string text,
                                 std::optional<emotion::EmotionLabel> emotion,
                                 std::uint64_t created_at_ms) {
  std::unique_lock lock(mutex_);
  DialogTurn turn{speaker, std::move(text), std::move(emotion),
                  turns_.empty() ? 1 : turns_.back().turn_id + 1, created_at_ms};
  append_locked(turn);
  return turn;
}

DialogTurn DialogHistory::edit(std::uint64_t turn_id, std::string new_text) {
  std::unique_lock lock(mutex_);
  auto it = std::find_if(turns_.begin(), turns_.end(),
                         [turn_id](const DialogTurn& t) { return t.turn_id == turn_id; });
  if (it == turns_.end()) {
    throw DialogueError(DialogueError::Code::UnknownTurnId, "no turn " + std::to_string(turn_id));
  }
  if (it->speaker != Speaker::User) {
    throw DialogueError(DialogueError::Code::NotUserTurn,
                        "turn " + std::to_string(turn_id) + " is a system turn");
  }
  if (is_blank(new_text)) throw DialogueError(DialogueError::Code::EmptyTurnText, "edit text is blank");
  it->text = std::move(new_text);
  return *it;
}

std::vector<DialogTurn> DialogHistory::snapshot() const {
  std::shared_lock lock(mutex_);
  return turns_;
}

std::size_t DialogHistory::size() const {
  std::shared_lock lock(mutex_);
  return turns_.size();
}

}  // namespace facechat::dialogue
