#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "facechat/emotion/label.hpp"

namespace facechat::dialogue {

class DialogueError : public std::runtime_error {
 public:
  enum class Code {
    NonMonotonicTurnId,
    UnknownTurnId,
    NotUserTurn,
    EmptyTurnText,
    EmotionOnSystemTurn,
    BudgetUnsatisfiable,
    InvalidTemplate,
    EmptyComponent,
  };
  DialogueError(Code code, const std::string& detail);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

std::string_view to_string(DialogueError::Code code);

enum class Speaker { User, System };
std::string_view to_string(Speaker speaker);

struct DialogTurn {
  Speaker speaker = Speaker::User;
  std::string text;
  std::optional<emotion::EmotionLabel> emotion;  // user turns only
  std::uint64_t turn_id = 0;
  std::uint64_t created_at_ms = 0;

  friend bool operator==(const DialogTurn&, const DialogTurn&) = default;
};

nlohmann::json turn_event(const DialogTurn& turn);

// Turn ids start at 1 and grow by one. Turns are immutable once appended except
// for the text of user turns, which edit() may replace. Readers and the single
// writer serialize on an internal lock.
class DialogHistory {
 public:
  std::uint64_t next_turn_id() const;

  // Throws NonMonotonicTurnId, EmptyTurnText, EmotionOnSystemTurn.
  void append(const DialogTurn& turn);
  // Assigns the next id. Returns the stored turn.
  DialogTurn append(Speaker speaker, std::string text,
                    std::optional<emotion::EmotionLabel> emotion = std::nullopt,
                    std::uint64_t created_at_ms = 0);

  // Throws UnknownTurnId, NotUserTurn, EmptyTurnText. Returns the edited turn.
  DialogTurn edit(std::uint64_t turn_id, std::string new_text);

  std::vector<DialogTurn> snapshot() const;
  std::size_t size() const;

 private:
  void append_locked(const DialogTurn& turn);

  mutable std::shared_mutex mutex_;
  std::vector<DialogTurn> turns_;
};

bool is_blank(std::string_view text);

}  // namespace facechat::dialogue
