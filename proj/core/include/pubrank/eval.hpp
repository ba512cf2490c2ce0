#pragma once

// Phase A and Phase B evaluation reports. Every aggregate is the mean of the
// per-question values that feed it, computed with compensated summation.

#include <cstddef>
#include <string>
#include <vector>

#include "pubrank/dataset.hpp"
#include "pubrank/prompts.hpp"
#include "pubrank/run.hpp"

namespace pubrank::eval {

inline const std::vector<std::size_t> kDefaultRecallDepths{10, 100, 1000, 10000};

struct PhaseAQuestion {
  std::string question_id;
  std::size_t gold_count = 0;
  double ap10 = 0.0;
  std::vector<double> recall;  // parallel to PhaseAReport::recall_depths
};

struct PhaseAReport {
  std::vector<std::size_t> recall_depths;
  std::size_t evaluated = 0;
  double map10 = 0.0;
  std::vector<double> mean_recall;
  std::vector<PhaseAQuestion> questions;  // run order
  std::vector<std::string> warnings;

  std::string to_json() const;
};

/// Scores each run against its question's gold documents. Questions with no gold
/// documents are skipped with a warning; a run for a question id missing from
/// `gold` is a UsageError. Gold questions without a run are not evaluated.
PhaseAReport evaluate_phase_a(const std::vector<RankedRun>& runs, const std::vector<Question>& gold,
                              const std::vector<std::size_t>& recall_depths = kDefaultRecallDepths);

struct PhaseBQuestion {
  std::string question_id;
  QuestionType type = QuestionType::summary;
  bool has_exact = false;          // a usable exact answer was submitted
  double exact_score = 0.0;        // RR for factoid, F1 for list; unused for yesno/summary
  double list_precision = 0.0;
  double list_recall = 0.0;
  std::string yesno_predicted;     // "yes", "no" or "" (missing)
  bool has_ideal = false;
  metrics::RougeScore rouge2;
  metrics::RougeScore rouge_su4;
};

struct PhaseBReport {
  std::size_t yesno_count = 0;
  metrics::YesNoScores yesno;
  std::size_t factoid_count = 0;
  double mrr = 0.0;
  std::size_t list_count = 0;
  double list_precision = 0.0;
  double list_recall = 0.0;
  double list_f1 = 0.0;
  std::size_t ideal_count = 0;
  metrics::RougeScore rouge2;
  metrics::RougeScore rouge_su4;
  std::vector<PhaseBQuestion> questions;  // answers order
  std::vector<std::string> warnings;

  std::string to_json() const;
};

/// Scores submitted answers. A missing exact answer counts as a wrong answer
/// (yes/no: a miss on the gold class; factoid RR 0; list F1 0). Ideal answers
/// are scored only when the gold question has a reference ideal answer; a
/// missing prediction scores as an empty candidate.
PhaseBReport evaluate_phase_b(const std::vector<prompts::AnswerRecord>& answers, const std::vector<Question>& gold);

}  // namespace pubrank::eval
