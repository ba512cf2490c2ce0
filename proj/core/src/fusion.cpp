#include "pubrank/fusion.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "pubrank/errors.hpp"

namespace pubrank::fusion {

Mode parse_mode(std::string_view text) {
  if (text == "nominate") return Mode::nominate;
  if (text == "weighted") return Mode::weighted;
  throw UsageError("unknown fusion mode '" + std::string(text) + "' (nominate|weighted)");
}

std::string_view to_string(Mode mode) noexcept { return mode == Mode::nominate ? "nominate" : "weighted"; }

void FusionConfig::validate() const {
  if (k_total == 0) throw UsageError("fusion k_total must be at least 1");
  if (mode == Mode::nominate && k_a > k_total) throw UsageError("nominate mode needs k_a <= k_total");
  if (mode == Mode::weighted) {
    if (w1 < 0.0 || w2 < 0.0) throw UsageError("fusion weights must be non-negative");
    if (!(w1 + w2 > 0.0)) throw UsageError("fusion weights must not both be zero");
    if (rank_points_k == 0) throw UsageError("rank_points_k must be at least 1");
  }
}

std::unordered_map<std::string, double> rank_points(const RankedRun& run, std::size_t k) {
  std::unordered_map<std::string, double> points;
  auto n = std::min(k, run.items.size());
  for (std::size_t r = 1; r <= n; ++r) {
    points.emplace(run.items[r - 1].pmid, static_cast<double>(k + 1 - r));
  }
  return points;
}

RankedRun fuse_nominate(const RankedRun& a, const RankedRun& b, const FusionConfig& config) {
  config.validate();
  RankedRun out{a.question_id, Stage::fused, {}};
  std::unordered_set<std::string> chosen;
  auto take = [&](const RunItem& item) {
    if (out.items.size() >= config.k_total) return;
    if (chosen.insert(item.pmid).second) out.items.push_back(item);
  };
  std::size_t from_a = std::min(config.k_a, a.items.size());
  for (std::size_t i = 0; i < from_a; ++i) take(a.items[i]);
  for (const auto& item : b.items) take(item);
  for (std::size_t i = from_a; i < a.items.size(); ++i) take(a.items[i]);
  // Scores become rank points of the merged order.
  for (std::size_t r = 0; r < out.items.size(); ++r) {
    out.items[r].score = static_cast<double>(out.items.size() - r);
  }
  return out;
}

RankedRun fuse_weighted(const RankedRun& a, const RankedRun& b, const FusionConfig& config) {
  config.validate();
  auto pa = rank_points(a, config.rank_points_k);
  auto pb = rank_points(b, config.rank_points_k);

  struct Entry {
    std::string pmid;
    double fused;
    double b_points;
  };
  std::vector<Entry> entries;
  entries.reserve(pa.size() + pb.size());
  for (const auto& [pmid, points] : pa) {
    auto it = pb.find(pmid);
    double bp = it == pb.end() ? 0.0 : it->second;
    entries.push_back({pmid, config.w1 * points + config.w2 * bp, bp});
  }
  for (const auto& [pmid, points] : pb) {
    if (pa.count(pmid) == 0) entries.push_back({pmid, config.w2 * points, points});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    if (x.fused != y.fused) return x.fused > y.fused;
    if (x.b_points != y.b_points) return x.b_points > y.b_points;
    return pmid_less(x.pmid, y.pmid);
  });
  RankedRun out{a.question_id.empty() ? b.question_id : a.question_id, Stage::fused, {}};
  auto n = std::min(config.k_total, entries.size());
  for (std::size_t i = 0; i < n; ++i) out.items.push_back({entries[i].pmid, entries[i].fused});
  return out;
}

RankedRun fuse(const RankedRun& a, const RankedRun& b, const FusionConfig& config) {
  return config.mode == Mode::nominate ? fuse_nominate(a, b, config) : fuse_weighted(a, b, config);
}

std::vector<WeightPair> integer_grid(int max) {
  std::vector<WeightPair> grid;
  for (int w1 = 0; w1 <= max; ++w1) {
    for (int w2 = 0; w2 <= max; ++w2) {
      if (w1 == 0 && w2 == 0) continue;
      grid.push_back({static_cast<double>(w1), static_cast<double>(w2)});
    }
  }
  return grid;
}

GridSearchResult grid_search_weights(const std::vector<RankedRun>& runs_a, const std::vector<RankedRun>& runs_b,
                                     const std::map<std::string, metrics::GoldSet>& gold,
                                     const std::vector<WeightPair>& grid, const FusionConfig& base) {
  if (grid.empty()) throw UsageError("weight grid is empty");
  std::map<std::string, const RankedRun*> by_id_b;
  for (const auto& run : runs_b) by_id_b.emplace(run.question_id, &run);
  std::set<std::string> ids_a;
  for (const auto& run : runs_a) ids_a.insert(run.question_id);
  std::vector<std::string> diff;
  for (const auto& id : ids_a) {
    if (by_id_b.count(id) == 0) diff.push_back(id);
  }
  for (const auto& [id, run] : by_id_b) {
    if (ids_a.count(id) == 0) diff.push_back(id);
  }
  if (!diff.empty()) {
    std::sort(diff.begin(), diff.end());
    std::string list;
    for (const auto& d : diff) list += (list.empty() ? "" : ", ") + d;
    throw UsageError("system A and B runs cover different questions: " + list);
  }

  GridSearchResult result;
  result.table.reserve(grid.size());
  bool have_best = false;
  for (const auto& w : grid) {
    FusionConfig cfg = base;
    cfg.mode = Mode::weighted;
    cfg.w1 = w.w1;
    cfg.w2 = w.w2;
    std::vector<RankedRun> fused;
    fused.reserve(runs_a.size());
    for (const auto& run : runs_a) fused.push_back(fuse_weighted(run, *by_id_b.at(run.question_id), cfg));
    double map = metrics::map_at10(fused, gold);
    result.table.push_back({w, map});
    bool better = !have_best || map > result.best_map ||
                  (map == result.best_map &&
                   (w.w1 < result.best.w1 || (w.w1 == result.best.w1 && w.w2 < result.best.w2)));
    if (better) {
      result.best = w;
      result.best_map = map;
      have_best = true;
    }
  }
  return result;
}

std::string format_grid_table(const GridSearchResult& result) {
  std::string out;
  char line[96];
  for (const auto& row : result.table) {
    std::snprintf(line, sizeof line, "%g\t%g\t%.17g\n", row.weights.w1, row.weights.w2, row.map);
    out += line;
  }
  return out;
}

}  // namespace pubrank::fusion
