#pragma once

// Phase B prompt construction and answer parsing.
//
// A prompt is the fixed system preamble, n few-shot (user, assistant) pairs and
// a final user query. Query template 1 is
//
//   Passage: <snippets, newline separated>
//   Question: <body>
//   <answer formatting block>
//
// Query template 2 is identical except for non-summary ideal-answer prompts,
// where " (Hint: short answer is <exact answer>)" follows the body, and list
// few-shot examples show the complete gold list instead of a single item.
// Styles: 1 = (QT1, AFT1), 2 = (QT2, AFT1), 3 = (QT2, AFT2).

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pubrank/clients.hpp"
#include "pubrank/dataset.hpp"
#include "pubrank/errors.hpp"

namespace pubrank::prompts {

inline constexpr std::string_view kSystemPreamble =
    "You are a biomedical assistant. You answer questions based on background knowledge and return the answer in "
    "the requested format.";

enum class AnswerKind { exact, ideal };
std::string_view to_string(AnswerKind kind) noexcept;
AnswerKind parse_answer_kind(std::string_view text);

struct PromptSpec {
  int style = 1;  // 1..3
  std::size_t n_shots = 0;
  QuestionType qtype = QuestionType::yesno;
  AnswerKind answer_kind = AnswerKind::exact;
  std::size_t snippet_char_budget = 12000;

  int query_template() const noexcept { return style == 1 ? 1 : 2; }
  int formatting_template() const noexcept { return style == 3 ? 2 : 1; }
  void validate() const;
};

/// Answer-formatting blocks, keyed by (template, qtype, kind). The built-in set
/// is compiled from assets/templates; a directory can be loaded instead. Either
/// way every file is checked against the MANIFEST checksums.
class TemplateSet {
 public:
  static const TemplateSet& builtin();
  static TemplateSet load(const std::filesystem::path& dir);
  /// Parses manifest text against in-memory files (name -> content).
  static TemplateSet from_files(std::string_view manifest, const std::map<std::string, std::string>& files);

  /// Throws UsageError for combinations with no block (summary exact answers).
  const std::string& block(QuestionType qtype, AnswerKind kind, int formatting_template) const;
  const std::string& version() const noexcept { return version_; }

 private:
  std::string version_;
  std::map<std::string, std::string> blocks_;
};

/// The formatting block for a question type, answer kind and template (1|2).
std::string formatting_block(QuestionType qtype, AnswerKind kind, int formatting_template,
                             const TemplateSet& templates = TemplateSet::builtin());

struct YesNoAnswer {
  bool yes = false;
  friend bool operator==(const YesNoAnswer&, const YesNoAnswer&) = default;
};
struct FactoidAnswer {
  std::vector<std::string> entities;  // normalized, unique, at most 5
  friend bool operator==(const FactoidAnswer&, const FactoidAnswer&) = default;
};
struct ListAnswer {
  std::vector<std::string> items;  // normalized, unique, each at most 100 code points
  friend bool operator==(const ListAnswer&, const ListAnswer&) = default;
};
using ExactAnswer = std::variant<YesNoAnswer, FactoidAnswer, ListAnswer>;

inline constexpr std::size_t kMaxFactoidEntities = 5;
inline constexpr std::size_t kMaxListItemChars = 100;

QuestionType type_of(const ExactAnswer& answer) noexcept;

/// Text form: "yes"/"no", or one entity per line.
std::string render_exact_text(const ExactAnswer& answer);
/// Inline form used in hints: entities joined by ", ".
std::string render_exact_inline(const ExactAnswer& answer);

/// Gold exact answer of a question as an ExactAnswer (first synonym of each
/// group). Throws UsageError when the question has none.
ExactAnswer gold_exact_answer(const Question& q);

/// Parse error for yes/no text that does not reduce to yes or no, or factoid and
/// list text with no entities.
class AnswerParseError : public DataError {
 public:
  explicit AnswerParseError(const std::string& what) : DataError(what) {}
};

/// yesno: strict (bare yes/no after trimming punctuation, or a leading "yes,"/"no,"
/// clause). factoid/list: lenient on list markers; newline-separated entries, or
/// comma-separated when the text is a single line; normalized and de-duplicated
/// in order; factoid capped at 5.
ExactAnswer parse_exact_answer(std::string_view raw, QuestionType qtype);

/// Joins snippets with newlines, dropping whole snippets from the end to stay
/// within `budget` code points. A lone oversize first snippet is cut at the budget.
std::string join_snippets(std::span<const std::string> snippets, std::size_t budget);

/// Full message list for one question. `fewshot` must hold exactly spec.n_shots
/// questions of the same type with the gold material the prompt needs. `hint` is
/// the system-generated exact answer, required for style 2/3 non-summary ideal prompts.
std::vector<ChatMessage> build_prompt(const Question& question, std::span<const std::string> snippets,
                                      const PromptSpec& spec, std::span<const Question> fewshot,
                                      const std::optional<ExactAnswer>& hint = std::nullopt,
                                      const TemplateSet& templates = TemplateSet::builtin());

struct AnswerRecord {
  std::string id;
  std::optional<ExactAnswer> exact;
  std::optional<std::string> ideal;
};

/// {"questions": [{"id", "exact_answer", "ideal_answer"}]}; exact_answer is a
/// string for yesno and a list of single-item lists for factoid and list, and
/// is omitted for summary questions or when absent.
std::string render_answers_file(const std::vector<Question>& questions, const std::vector<AnswerRecord>& answers);

/// Reads a submission-shaped answers file back, using the gold questions for types.
std::vector<AnswerRecord> parse_answers_file(std::string_view json_text, const std::vector<Question>& questions);

}  // namespace pubrank::prompts
