#include "facechat/dialogue/prompt.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace facechat::dialogue {

namespace {

constexpr std::array<std::pair<std::string_view, PromptTemplate::Slot>, 5> kSlots{{
    {"persona", PromptTemplate::Slot::Persona},
    {"instruction", PromptTemplate::Slot::Instruction},
    {"history", PromptTemplate::Slot::History},
    {"emotion_text", PromptTemplate::Slot::EmotionText},
    {"user_text", PromptTemplate::Slot::UserText},
}};

[[noreturn]] void invalid(const std::string& what) {
  throw DialogueError(DialogueError::Code::InvalidTemplate, what);
}

std::size_t longest_emotion_text() {
  std::size_t n = 0;
  for (auto e : emotion::kAllEmotions) n = std::max(n, count_chars(emotion::emotion_to_text(e)));
  return n;
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view text) {
  PromptTemplate t;
  t.source_ = std::string(text);
  std::string literal;
  std::vector<Slot> seen;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '}') {
      if (i + 1 < text.size() && text[i + 1] == '}') {
        literal.push_back('}');
        ++i;
        continue;
      }
      invalid("unmatched '}' at offset " + std::to_string(i));
    }
    if (c != '{') {
      literal.push_back(c);
      continue;
    }
    if (i + 1 < text.size() && text[i + 1] == '{') {
      literal.push_back('{');
      ++i;
      continue;
    }
    const auto close = text.find('}', i);
    if (close == std::string_view::npos) invalid("unterminated placeholder at offset " + std::to_string(i));
    const auto name = text.substr(i + 1, close - i - 1);
    auto slot = std::find_if(kSlots.begin(), kSlots.end(), [&](const auto& s) { return s.first == name; });
    if (slot == kSlots.end()) invalid("unknown placeholder {" + std::string(name) + "}");
    if (std::find(seen.begin(), seen.end(), slot->second) != seen.end()) {
      invalid("placeholder {" + std::string(name) + "} appears twice");
    }
    if (!literal.empty()) t.pieces_.push_back({false, Slot::Persona, std::move(literal)});
    literal.clear();
    t.pieces_.push_back({true, slot->second, {}});
    seen.push_back(slot->second);
    i = close;
  }
  if (!literal.empty()) t.pieces_.push_back({false, Slot::Persona, std::move(literal)});

  if (seen.size() != kSlots.size()) invalid("every placeholder must appear exactly once");
  for (std::size_t k = 0; k < kSlots.size(); ++k) {
    if (seen[k] != kSlots[k].second) {
      invalid("placeholders must appear in the order persona, instruction, history, emotion_text, user_text");
    }
  }
  // emotion_text and user_text share the final query line.
  bool between = false;
  for (const auto& p : t.pieces_) {
    if (p.is_slot) {
      if (p.slot == Slot::EmotionText) between = true;
      if (p.slot == Slot::UserText) between = false;
    } else if (between && p.literal.find('\n') != std::string::npos) {
      invalid("{emotion_text} and {user_text} must be on the same line");
    }
  }
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  auto text = read_text_file(path);
  // A trailing newline added by editors is not part of the template.
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return parse(text);
}

const PromptTemplate& PromptTemplate::canonical() {
  static const PromptTemplate t = parse(kCanonicalTemplate);
  return t;
}

std::string PromptTemplate::substitute(const Values& values) const {
  std::string out;
  for (const auto& p : pieces_) {
    if (!p.is_slot) {
      out += p.literal;
      continue;
    }
    switch (p.slot) {
      case Slot::Persona: out += values.persona; break;
      case Slot::Instruction: out += values.instruction; break;
      case Slot::History: out += values.history; break;
      case Slot::EmotionText: out += values.emotion_text; break;
      case Slot::UserText: out += values.user_text; break;
    }
  }
  return out;
}

std::size_t count_chars(std::string_view utf8) {
  // Every byte that is not a continuation byte starts a code point.
  return static_cast<std::size_t>(std::count_if(utf8.begin(), utf8.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

std::string single_line(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      out.push_back(' ');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else if (text[i] == '\n') {
      out.push_back(' ');
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::string render_history(std::span<const DialogTurn> turns) {
  std::string out;
  for (const auto& t : turns) {
    out += t.speaker == Speaker::User ? "User: " : "AI: ";
    out += single_line(t.text);
    out += '\n';
  }
  return out;
}

RenderedPrompt render_prompt_detailed(const PromptDocument& doc, const PromptBudget& budget,
                                      const PromptTemplate& tmpl) {
  if (is_blank(doc.persona)) throw DialogueError(DialogueError::Code::EmptyComponent, "persona is blank");
  if (is_blank(doc.instruction)) {
    throw DialogueError(DialogueError::Code::EmptyComponent, "instruction is blank");
  }
  const std::string user_text = single_line(doc.current_user_text);
  const std::string emotion_text = emotion::emotion_to_text(doc.current_emotion);

  const std::string fixed =
      tmpl.substitute({doc.persona, doc.instruction, "", emotion_text, user_text});
  const std::size_t fixed_chars =
      count_chars(fixed) - count_chars(emotion_text) + longest_emotion_text();
  if (fixed_chars > budget.max_chars) {
    throw DialogueError(DialogueError::Code::BudgetUnsatisfiable,
                        "fixed components need " + std::to_string(fixed_chars) +
                            " chars, budget is " + std::to_string(budget.max_chars));
  }

  // Keep the longest suffix of turns that fits beside the fixed parts.
  std::size_t used = fixed_chars;
  std::size_t first_kept = doc.history.size();
  while (first_kept > 0) {
    const auto line = render_history(std::span(doc.history).subspan(first_kept - 1, 1));
    const std::size_t n = count_chars(line);
    if (used + n > budget.max_chars) break;
    used += n;
    --first_kept;
  }
  const auto kept = std::span(doc.history).subspan(first_kept);
  const std::string history = render_history(kept);
  return {tmpl.substitute({doc.persona, doc.instruction, history, emotion_text, user_text}), first_kept};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace facechat::dialogue
