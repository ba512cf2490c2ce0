#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pubrank/clients.hpp"
#include "pubrank/corpus.hpp"
#include "pubrank/dataset.hpp"
#include "pubrank/run.hpp"

namespace pubrank::rerank {

struct PointwiseOptions {
  std::size_t k = 10;
  std::size_t batch_size = 64;  // documents per /score request
};

/// Scores every candidate against the question body, sorts by score (ties:
/// smaller pmid) and keeps the top k. No score threshold. Scorer failures are
/// rethrown naming the question id.
RankedRun pointwise_rerank(const Question& question, const RankedRun& candidates, const DocumentStore& docs,
                           const ScoreClient& scorer, const PointwiseOptions& options);

struct ListwiseOptions {
  std::size_t want = 10;               // ordinals requested from the model
  std::size_t doc_char_budget = 1200;  // code points per "title — abstract" entry
};

/// System + user message asking for the `min(want, n)` most relevant candidate
/// ordinals as a bracketed list. Candidates are numbered [1]..[n].
std::vector<ChatMessage> build_listwise_prompt(const Question& question, const RankedRun& top,
                                               const DocumentStore& docs, const ListwiseOptions& options = {});

/// First bracketed integer list in `raw`, with out-of-range and repeated ordinals
/// dropped (first occurrence kept), at most `want` entries. Empty when nothing
/// parses; never throws on content.
std::vector<std::size_t> parse_listwise_response(std::string_view raw, std::size_t candidate_count,
                                                 std::size_t want);

struct ListwiseExchange {
  std::string question_id;
  std::vector<ChatMessage> prompt;
  std::string raw_response;
  std::vector<std::size_t> parsed_order;
  std::size_t fallback_fill = 0;

  std::string to_json() const;
};

struct ListwiseResult {
  RankedRun run;
  ListwiseExchange exchange;
};

/// Reorders `top` (the pointwise top-30) with the chat model. Parsed ordinals
/// come first, remaining slots fill from `top`'s own order, truncated to k.
/// Scores are rank points k + 1 - r.
ListwiseResult llm_rerank(const Question& question, const RankedRun& top, const DocumentStore& docs,
                          const ChatClient& chat, std::size_t k = 10, const ListwiseOptions& options = {});

/// Writes `<dir>/<question_id>.json`.
void write_audit(const std::filesystem::path& dir, const ListwiseExchange& exchange);

}  // namespace pubrank::rerank
