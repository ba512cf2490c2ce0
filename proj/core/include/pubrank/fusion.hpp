#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "pubrank/metrics.hpp"
#include "pubrank/run.hpp"

namespace pubrank::fusion {

enum class Mode { nominate, weighted };
Mode parse_mode(std::string_view text);
std::string_view to_string(Mode mode) noexcept;

struct FusionConfig {
  Mode mode = Mode::weighted;
  std::size_t k_a = 6;          // nominate: taken from system A
  std::size_t k_total = 10;
  double w1 = 1.0;              // weighted: system A
  double w2 = 7.0;              // weighted: system B
  std::size_t rank_points_k = 10;

  /// Throws UsageError when the active mode's constraints are violated.
  void validate() const;
};

/// Document at 1-based rank r within the first K gets K + 1 - r; the rest of
/// the run is ignored.
std::unordered_map<std::string, double> rank_points(const RankedRun& run, std::size_t k);

/// First k_a of A, then B in order skipping chosen documents; if B runs dry,
/// A's remainder back-fills.
RankedRun fuse_nominate(const RankedRun& a, const RankedRun& b, const FusionConfig& config);

/// fused(d) = w1 * points_A(d) + w2 * points_B(d) over the union of both top-K
/// sets. Ties: more B points first, then smaller numeric pmid.
RankedRun fuse_weighted(const RankedRun& a, const RankedRun& b, const FusionConfig& config);

RankedRun fuse(const RankedRun& a, const RankedRun& b, const FusionConfig& config);

struct WeightPair {
  double w1 = 0.0;
  double w2 = 0.0;
  friend bool operator==(const WeightPair&, const WeightPair&) = default;
};

/// All (w1, w2) with w1, w2 in {0..max}, except (0, 0); w1 outer, w2 inner.
std::vector<WeightPair> integer_grid(int max = 10);

struct GridRow {
  WeightPair weights;
  double map = 0.0;
};

struct GridSearchResult {
  WeightPair best;
  double best_map = 0.0;
  std::vector<GridRow> table;  // grid order
};

/// Evaluates weighted fusion at every grid point, MAP@10 against gold. The best
/// row is the highest MAP; ties go to the smaller w1, then the smaller w2.
/// Throws UsageError listing the symmetric difference when A and B cover
/// different questions.
GridSearchResult grid_search_weights(const std::vector<RankedRun>& runs_a, const std::vector<RankedRun>& runs_b,
                                     const std::map<std::string, metrics::GoldSet>& gold,
                                     const std::vector<WeightPair>& grid, const FusionConfig& base = {});

/// "w1\tw2\tmap" per line, grid order.
std::string format_grid_table(const GridSearchResult& result);

}  // namespace pubrank::fusion
