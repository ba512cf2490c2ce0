#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pubrank/metrics.hpp"
#include "pubrank/run.hpp"

namespace pubrank {

enum class QuestionType { yesno, factoid, list, summary };
inline constexpr std::array<QuestionType, 4> kQuestionTypes{QuestionType::yesno, QuestionType::factoid,
                                                            QuestionType::list, QuestionType::summary};
std::string_view to_string(QuestionType t) noexcept;
QuestionType parse_question_type(std::string_view text);

struct Snippet {
  std::string pmid;
  std::string text;
};

/// Raw synonym groups as they appear in the gold file: each inner list is one
/// acceptable answer with its synonyms.
using AnswerGroups = std::vector<std::vector<std::string>>;

struct Question {
  std::string id;
  std::string body;
  QuestionType type = QuestionType::summary;
  std::set<std::string> gold_documents;
  std::vector<Snippet> gold_snippets;
  std::optional<bool> yes;          // yesno only
  AnswerGroups answer_groups;       // factoid and list only
  std::string ideal_answer;

  /// Exact answer present with the shape the type requires (summary has none).
  bool has_exact_answer() const noexcept;
  metrics::GoldSet gold_set() const;
  metrics::FactoidGold factoid_gold() const { return metrics::make_factoid_gold(answer_groups); }
};

/// Extracts the trailing digits of a `.../pubmed/<pmid>` URL; empty when the URL
/// does not have that shape.
std::string pmid_from_url(std::string_view url);

/// BioASQ JSON: top-level "questions" array. Throws DataError on unknown types,
/// non-PubMed document URLs (listing all offenders) and malformed entries.
std::vector<Question> load_bioasq(const std::filesystem::path& path);
std::vector<Question> parse_bioasq(std::string_view json_text);

/// Inverse of parse_bioasq for the fields this library reads.
std::string dump_bioasq(const std::vector<Question>& questions);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct Split {
  std::vector<Question> train;
  std::vector<Question> val;
  std::vector<Question> test;
  std::vector<std::string> warnings;
};

/// Question-level split stratified by type. Within each type sizes follow the
/// ratios by largest remainder, with fractional ties going to the split that is
/// furthest behind its running target; members are chosen by a seeded shuffle.
/// A type with fewer questions than splits goes wholly to train.
Split stratified_split(const std::vector<Question>& questions, const SplitRatios& ratios, std::uint64_t seed);

struct TrainingPair {
  std::string question_id;
  std::string pmid;
  std::string question_text;
  std::string doc_text;  // attached by the caller from the corpus; may be empty
  int label = 0;
};

/// Positives: every golden document. Negatives: the first `depth` retrieved
/// documents that are not golden. Empty gold yields no pairs. Output sorted by
/// (label desc, numeric pmid).
std::vector<TrainingPair> mine_hard_negatives(const Question& question, const RankedRun& retrieved,
                                              std::size_t depth);

/// Keeps the last ceil(fraction * n) questions; file order stands in for age.
std::vector<Question> filter_recent(const std::vector<Question>& questions, double fraction);

/// Deterministic sample of n distinct questions of `type` from `pool`.
/// Throws UsageError stating the available count when the pool is too small.
std::vector<Question> sample_fewshot(const std::vector<Question>& pool, QuestionType type, std::size_t n,
                                     std::uint64_t seed);

/// pairs.tsv: question_id, pmid, label, question_text, doc_text; tabs and
/// newlines inside text become spaces.
std::string format_pairs_tsv(const std::vector<TrainingPair>& pairs);

/// Seeded Fisher-Yates over indices, independent of the standard library's
/// distribution implementations.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace pubrank
