#pragma once

// Prompt snapshot goldens, shared by the unit tests and the acceptance binary.
// Set PUBRANK_UPDATE_SNAPSHOTS=1 to rewrite the goldens from the current code.

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "pubrank/dataset.hpp"
#include "pubrank/errors.hpp"
#include "pubrank/files.hpp"
#include "pubrank/prompts.hpp"

namespace snapshots {

inline std::filesystem::path data_dir() { return PUBRANK_TEST_DATA_DIR; }

inline bool update_requested() {
  const char* v = std::getenv("PUBRANK_UPDATE_SNAPSHOTS");
  return v != nullptr && std::string(v) == "1";
}

inline const std::vector<pubrank::Question>& questions() {
  static const auto qs = pubrank::load_bioasq(data_dir() / "snapshot_questions.json");
  return qs;
}

inline constexpr std::size_t kShotCounts[] = {0, 1, 10};
inline constexpr std::uint64_t kFewshotSeed = 7;

struct Case {
  pubrank::prompts::PromptSpec spec;
  std::string name;
};

inline std::vector<Case> all_cases() {
  std::vector<Case> out;
  for (int style = 1; style <= 3; ++style) {
    for (auto n : kShotCounts) {
      for (auto t : pubrank::kQuestionTypes) {
        for (auto kind : {pubrank::prompts::AnswerKind::exact, pubrank::prompts::AnswerKind::ideal}) {
          Case c;
          c.spec.style = style;
          c.spec.n_shots = n;
          c.spec.qtype = t;
          c.spec.answer_kind = kind;
          c.name = "s" + std::to_string(style) + "_n" + std::to_string(n) + "_" + std::string(pubrank::to_string(t)) +
                   "_" + std::string(pubrank::prompts::to_string(kind));
          out.push_back(c);
        }
      }
    }
  }
  return out;
}

/// The prompt for a case: the first question of its type is the target, the
/// rest of that type form the few-shot pool.
inline std::vector<pubrank::ChatMessage> build(const pubrank::prompts::PromptSpec& spec) {
  const auto& qs = questions();
  const pubrank::Question* target = nullptr;
  std::vector<pubrank::Question> pool;
  for (const auto& q : qs) {
    if (q.type != spec.qtype) continue;
    if (target == nullptr) target = &q;
    else pool.push_back(q);
  }
  if (target == nullptr) throw pubrank::UsageError("snapshot questions lack a target question");
  std::vector<pubrank::Question> shots;
  if (spec.n_shots > 0) shots = pubrank::sample_fewshot(pool, spec.qtype, spec.n_shots, kFewshotSeed);
  std::vector<std::string> snippets;
  for (const auto& s : target->gold_snippets) snippets.push_back(s.text);
  std::optional<pubrank::prompts::ExactAnswer> hint;
  if (target->has_exact_answer()) hint = pubrank::prompts::gold_exact_answer(*target);
  return pubrank::prompts::build_prompt(*target, snippets, spec, shots, hint);
}

inline std::string render(const std::vector<pubrank::ChatMessage>& messages) {
  return pubrank::messages_to_json(messages, 2) + "\n";
}

struct Outcome {
  std::size_t matched = 0;
  std::size_t rejected = 0;  // summary x exact, refused as expected
  std::vector<std::string> failures;
};

inline Outcome check_all() {
  Outcome out;
  bool update = update_requested();
  auto dir = data_dir() / "prompts";
  for (const auto& c : all_cases()) {
    bool invalid = c.spec.qtype == pubrank::QuestionType::summary &&
                   c.spec.answer_kind == pubrank::prompts::AnswerKind::exact;
    if (invalid) {
      try {
        build(c.spec);
        out.failures.push_back(c.name + ": expected a usage error");
      } catch (const pubrank::UsageError&) {
        ++out.rejected;
      }
      continue;
    }
    auto messages = build(c.spec);
    auto text = render(messages);
    if (render(build(c.spec)) != text) out.failures.push_back(c.name + ": two builds differ");
    if (messages.size() != 2 * c.spec.n_shots + 2) {
      out.failures.push_back(c.name + ": " + std::to_string(messages.size()) + " messages");
    }
    bool wants_hint = c.spec.style != 1 && c.spec.answer_kind == pubrank::prompts::AnswerKind::ideal &&
                      c.spec.qtype != pubrank::QuestionType::summary;
    bool has_hint = messages.back().content.find("Hint: short answer is") != std::string::npos;
    if (wants_hint != has_hint) out.failures.push_back(c.name + ": hint presence wrong");

    auto path = dir / (c.name + ".json");
    if (update) {
      std::filesystem::create_directories(dir);
      pubrank::write_file(path, text);
      ++out.matched;
      continue;
    }
    if (!std::filesystem::exists(path)) {
      out.failures.push_back(c.name + ": golden missing");
      continue;
    }
    if (pubrank::read_file(path) != text) out.failures.push_back(c.name + ": differs from golden");
    else ++out.matched;
  }
  return out;
}

}  // namespace snapshots
