#pragma once

// Phase A (document ranking) and Phase B (answer quality) metrics.
//
// Zero-denominator convention everywhere: a precision, recall or F1 whose
// denominator is zero is 0.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "pubrank/run.hpp"

namespace pubrank::metrics {

struct GoldSet {
  std::string question_id;
  std::unordered_set<std::string> relevant;
};

/// |top-n(run) ∩ gold| / |gold|. Throws UsageError on empty gold.
double recall_at_n(const RankedRun& run, const GoldSet& gold, std::size_t n);

/// AP over the first 10 items, normalised by min(|gold|, 10):
///   AP = sum_r P(r) * rel(r) / min(|gold|, 10)
/// Throws DataError on duplicate pmids in the run, UsageError on empty gold.
double average_precision_at10(const RankedRun& run, const GoldSet& gold);

/// Mean AP over questions. Every run must have a gold set and vice versa.
double map_at10(std::span<const RankedRun> runs, const std::map<std::string, GoldSet>& golds);

/// Ordered answer alternatives; each group is one acceptable answer with its
/// synonyms, already normalized.
struct FactoidGold {
  std::vector<std::vector<std::string>> synonym_groups;
};

/// Builds a FactoidGold by normalizing raw synonym groups; empty entries dropped.
FactoidGold make_factoid_gold(const std::vector<std::vector<std::string>>& raw_groups);

/// 1/r for the first prediction matching any synonym of any group; 0 if none.
double reciprocal_rank(std::span<const std::string> predicted, const FactoidGold& gold);

enum class YesNo { yes, no };

struct YesNoScores {
  double f1_yes = 0.0;
  double f1_no = 0.0;
  double macro_f1 = 0.0;
};

/// maF1 = (F1 with "yes" positive + F1 with "no" positive) / 2. A missing
/// prediction (unparseable answer) is wrong: a false negative for the gold class
/// and a false positive for neither.
YesNoScores macro_f1_yesno(std::span<const std::optional<YesNo>> predicted, std::span<const YesNo> gold);

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-question list F1. A prediction is a true positive when it matches a
/// synonym group not yet claimed by an earlier prediction.
PrfScore list_f1(std::span<const std::string> predicted, const FactoidGold& gold);

/// Lowercase, drop characters other than letters, digits and hyphens, trim
/// hyphens off token edges, split on whitespace. Non-ASCII bytes count as letters.
std::vector<std::string> rouge_tokenize(std::string_view text);

struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

/// Clipped bigram overlap.
RougeScore rouge_2(std::string_view candidate, std::string_view reference);

/// Unigrams plus ordered skip-bigrams (t_i, t_j), i < j, j - i <= 4.
RougeScore rouge_su4(std::string_view candidate, std::string_view reference);

RougeScore rouge_2_tokens(std::span<const std::string> candidate, std::span<const std::string> reference);
RougeScore rouge_su4_tokens(std::span<const std::string> candidate, std::span<const std::string> reference);

/// Compensated (Neumaier) sum; order-independent to well below 1e-12 for
/// metric-sized inputs.
double stable_sum(std::span<const double> values) noexcept;
double stable_mean(std::span<const double> values) noexcept;

}  // namespace pubrank::metrics
