#pragma once

// Brute-force reference implementations. Each one is written from the metric
// or rule definition directly, favouring obviousness over speed, and shares no
// code with the library beyond plain data types.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline bool numeric_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

/// AP@10: precision recomputed from scratch at every rank of the top 10.
inline double average_precision(const std::vector<std::string>& run, const std::set<std::string>& gold) {
  std::size_t n = std::min<std::size_t>(run.size(), 10);
  double sum = 0.0;
  for (std::size_t r = 1; r <= n; ++r) {
    if (gold.count(run[r - 1]) == 0) continue;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < r; ++i) hits += gold.count(run[i]);
    sum += static_cast<double>(hits) / static_cast<double>(r);
  }
  return sum / static_cast<double>(std::min<std::size_t>(gold.size(), 10));
}

/// Full scan: every (score, pmid) pair sorted by score desc then numeric pmid.
inline std::vector<std::pair<std::string, double>> brute_force_topk(const std::vector<std::vector<float>>& rows,
                                                                    const std::vector<std::string>& pmids,
                                                                    const std::vector<float>& q, std::size_t k) {
  std::vector<std::pair<std::string, double>> all;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) s += static_cast<double>(q[j]) * rows[i][j];
    all.emplace_back(pmids[i], s);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return numeric_less(a.first, b.first);
  });
  if (all.size() > k) all.resize(k);
  return all;
}

/// maF1 from an explicit confusion table. A missing prediction ("") misses the gold class.
inline double macro_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  auto f1_for = [&](const std::string& positive) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      bool p = pred[i] == positive;
      bool g = gold[i] == positive;
      if (p && g) ++tp;
      if (p && !g) ++fp;
      if (!p && g) ++fn;
    }
    double precision = tp + fp == 0 ? 0.0 : tp / (tp + fp);
    double recall = tp + fn == 0 ? 0.0 : tp / (tp + fn);
    return precision + recall == 0 ? 0.0 : 2 * precision * recall / (precision + recall);
  };
  return (f1_for("yes") + f1_for("no")) / 2.0;
}

/// 1/rank of the first prediction equal to any synonym of any group.
inline double reciprocal_rank(const std::vector<std::string>& pred, const std::vector<std::vector<std::string>>& groups) {
  for (std::size_t r = 0; r < pred.size(); ++r) {
    for (const auto& g : groups) {
      if (std::find(g.begin(), g.end(), pred[r]) != g.end()) return 1.0 / static_cast<double>(r + 1);
    }
  }
  return 0.0;
}

/// List F1 with synonym-disjoint groups: TP = number of groups hit at least once.
inline double list_f1(const std::vector<std::string>& pred, const std::vector<std::vector<std::string>>& groups) {
  double tp = 0;
  for (const auto& g : groups) {
    bool hit = std::any_of(pred.begin(), pred.end(),
                           [&](const std::string& p) { return std::find(g.begin(), g.end(), p) != g.end(); });
    if (hit) ++tp;
  }
  double precision = pred.empty() ? 0.0 : tp / static_cast<double>(pred.size());
  double recall = groups.empty() ? 0.0 : tp / static_cast<double>(groups.size());
  return precision + recall == 0 ? 0.0 : 2 * precision * recall / (precision + recall);
}

struct Prf {
  double recall = 0, precision = 0, f1 = 0;
};

/// Clipped overlap over explicitly listed counting units.
inline Prf clipped_overlap(const std::vector<std::string>& cand_units, const std::vector<std::string>& ref_units) {
  std::map<std::string, int> c, r;
  for (const auto& u : cand_units) ++c[u];
  for (const auto& u : ref_units) ++r[u];
  double overlap = 0;
  for (const auto& [u, n] : c) {
    auto it = r.find(u);
    if (it != r.end()) overlap += std::min(n, it->second);
  }
  Prf out;
  out.recall = ref_units.empty() ? 0.0 : overlap / static_cast<double>(ref_units.size());
  out.precision = cand_units.empty() ? 0.0 : overlap / static_cast<double>(cand_units.size());
  out.f1 = out.recall + out.precision == 0 ? 0.0 : 2 * out.recall * out.precision / (out.recall + out.precision);
  return out;
}

inline std::vector<std::string> bigram_units(const std::vector<std::string>& t) {
  std::vector<std::string> u;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) u.push_back(t[i] + "\x1f" + t[i + 1]);
  return u;
}

/// Unigrams plus every ordered pair (t_i, t_j) with 0 < j - i <= 4.
inline std::vector<std::string> su4_units(const std::vector<std::string>& t) {
  std::vector<std::string> u;
  for (const auto& w : t) u.push_back("\x1e" + w);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size() && j - i <= 4; ++j) u.push_back(t[i] + "\x1f" + t[j]);
  }
  return u;
}

/// Nomination merge, step by step.
inline std::vector<std::string> nominate(const std::vector<std::string>& a, const std::vector<std::string>& b,
                                         std::size_t ka, std::size_t k) {
  std::vector<std::string> out;
  auto has = [&](const std::string& d) { return std::find(out.begin(), out.end(), d) != out.end(); };
  for (std::size_t i = 0; i < a.size() && out.size() < std::min(ka, k); ++i) {
    if (!has(a[i])) out.push_back(a[i]);
  }
  for (const auto& d : b) {
    if (out.size() >= k) break;
    if (!has(d)) out.push_back(d);
  }
  for (const auto& d : a) {
    if (out.size() >= k) break;
    if (!has(d)) out.push_back(d);
  }
  return out;
}

/// Weighted rank-point fusion over the top-K of each run.
inline std::vector<std::string> weighted(const std::vector<std::string>& a, const std::vector<std::string>& b,
                                         double w1, double w2, std::size_t K, std::size_t k) {
  std::map<std::string, double> pa, pb;
  for (std::size_t r = 0; r < a.size() && r < K; ++r) pa[a[r]] = static_cast<double>(K - r);
  for (std::size_t r = 0; r < b.size() && r < K; ++r) pb[b[r]] = static_cast<double>(K - r);
  std::set<std::string> docs;
  for (const auto& [d, p] : pa) docs.insert(d);
  for (const auto& [d, p] : pb) docs.insert(d);
  std::vector<std::string> out(docs.begin(), docs.end());
  auto score = [&](const std::string& d) {
    return w1 * (pa.count(d) ? pa[d] : 0.0) + w2 * (pb.count(d) ? pb[d] : 0.0);
  };
  std::sort(out.begin(), out.end(), [&](const std::string& x, const std::string& y) {
    double sx = score(x), sy = score(y);
    if (sx != sy) return sx > sy;
    double bx = pb.count(x) ? pb[x] : 0.0, by = pb.count(y) ? pb[y] : 0.0;
    if (bx != by) return bx > by;
    return numeric_less(x, y);
  });
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace oracle
