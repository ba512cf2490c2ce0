#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pubrank {

/// True when `pmid` is a non-empty string of ASCII decimal digits.
bool is_valid_pmid(std::string_view pmid) noexcept;

/// Numeric ordering on digit strings of any length (leading zeros ignored,
/// then lexicographic as a final tie-break so the order stays total).
bool pmid_less(std::string_view a, std::string_view b) noexcept;

enum class Stage { retrieval, crossencoder, llm, fused };

std::string_view to_string(Stage stage) noexcept;
Stage parse_stage(std::string_view text);

struct RunItem {
  std::string pmid;
  double score = 0.0;

  friend bool operator==(const RunItem&, const RunItem&) = default;
};

/// Ordered candidate list for one question. Shared currency between retrieval,
/// re-ranking, fusion and evaluation.
struct RankedRun {
  std::string question_id;
  Stage stage = Stage::retrieval;
  std::vector<RunItem> items;

  std::size_t size() const noexcept { return items.size(); }
  std::vector<std::string> pmids() const;

  friend bool operator==(const RankedRun&, const RankedRun&) = default;
};

/// Score descending, then smaller numeric pmid.
bool ranks_before(const RunItem& a, const RunItem& b) noexcept;

/// Sorts items by `ranks_before`.
void sort_by_score(std::vector<RunItem>& items);

/// Throws DataError naming the question when a pmid repeats.
void require_unique_pmids(const RankedRun& run);

RankedRun truncated(const RankedRun& run, std::size_t k);

// Run files: one JSON object per line,
// {"question_id": ..., "stage": ..., "items": [{"pmid": ..., "score": ...}]}.
void write_run(std::ostream& out, const RankedRun& run);
void write_runs(std::ostream& out, const std::vector<RankedRun>& runs);
void write_runs_file(const std::string& path, const std::vector<RankedRun>& runs);
std::vector<RankedRun> read_runs(std::istream& in);
std::vector<RankedRun> read_runs_file(const std::string& path);

}  // namespace pubrank
