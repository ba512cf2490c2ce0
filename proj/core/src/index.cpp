#include "pubrank/index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

#include <zlib.h>

#include "binary_io.hpp"
#include "pubrank/errors.hpp"
#include "pubrank/run.hpp"

namespace pubrank {

std::string_view to_string(IndexKind kind) noexcept { return kind == IndexKind::hnsw ? "hnsw" : "exact"; }

IndexKind parse_index_kind(std::string_view text) {
  if (text == "exact") return IndexKind::exact;
  if (text == "hnsw") return IndexKind::hnsw;
  throw UsageError("unknown index kind '" + std::string(text) + "' (exact|hnsw)");
}

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr int kMaxLevel = 24;

}  // namespace

double VectorIndex::similarity(std::span<const float> q, std::uint32_t id) const noexcept {
  return dot(q, vectors_.row(id));
}

double VectorIndex::similarity(std::uint32_t a, std::uint32_t b) const noexcept {
  return dot(vectors_.row(a), vectors_.row(b));
}

int VectorIndex::sample_level(std::uint64_t ordinal) const {
  std::uint64_t r = splitmix64(params_.seed ^ splitmix64(ordinal));
  double u = (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  double ml = 1.0 / std::log(static_cast<double>(params_.m));
  int level = static_cast<int>(std::floor(-std::log(u) * ml));
  return std::min(level, kMaxLevel);
}

VectorIndex VectorIndex::build(VectorSet vectors, IndexKind kind, HnswParams params) {
  if (vectors.values.size() != vectors.size() * vectors.dimension) {
    throw DataError("vector payload does not match dimension x count");
  }
  if (kind == IndexKind::hnsw) {
    if (params.m < 2) throw UsageError("hnsw M must be at least 2");
    if (params.ef_construction < params.m) throw UsageError("hnsw ef_construction must be >= M");
    if (params.ef_search < 1) throw UsageError("hnsw ef_search must be >= 1");
  }
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (!seen.insert(vectors.pmids[i]).second) throw DataError("duplicate pmid in vectors: " + vectors.pmids[i]);
    double n = std::sqrt(dot(vectors.row(i), vectors.row(i)));
    if (std::abs(n - 1.0) > 1e-4) {
      throw DataError("vector for pmid " + vectors.pmids[i] + " is not unit norm (" + std::to_string(n) + ")");
    }
  }

  VectorIndex index;
  index.kind_ = kind;
  index.params_ = params;
  index.vectors_ = std::move(vectors);
  if (kind == IndexKind::hnsw) {
    auto n = index.vectors_.size();
    index.links_.reserve(n);
    std::vector<std::uint32_t> visited(n, 0);
    std::uint32_t epoch = 0;
    for (std::uint32_t id = 0; id < n; ++id) index.insert(id, visited, epoch);
  }
  return index;
}

std::uint32_t VectorIndex::greedy_descend(std::span<const float> q, std::uint32_t ep, int layer) const {
  double best = similarity(q, ep);
  bool moved = true;
  while (moved) {
    moved = false;
    for (auto nb : neighbors(ep, layer)) {
      double s = similarity(q, nb);
      if (s > best) {
        best = s;
        ep = nb;
        moved = true;
      }
    }
  }
  return ep;
}

std::vector<VectorIndex::Candidate> VectorIndex::search_layer(std::span<const float> q, std::uint32_t ep,
                                                               std::size_t ef, int layer,
                                                               std::vector<std::uint32_t>& visited,
                                                               std::uint32_t& epoch) const {
  if (++epoch == 0) {
    std::fill(visited.begin(), visited.end(), 0);
    epoch = 1;
  }
  auto worse = [](const Candidate& a, const Candidate& b) { return a.score > b.score || (a.score == b.score && a.id < b.id); };
  auto better = [](const Candidate& a, const Candidate& b) { return a.score < b.score || (a.score == b.score && a.id > b.id); };
  // frontier: best first; results: worst on top so it can be evicted.
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(better)> frontier(better);
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> results(worse);

  Candidate start{similarity(q, ep), ep};
  visited[ep] = epoch;
  frontier.push(start);
  results.push(start);
  while (!frontier.empty()) {
    auto cur = frontier.top();
    if (cur.score < results.top().score && results.size() >= ef) break;
    frontier.pop();
    for (auto nb : neighbors(cur.id, layer)) {
      if (visited[nb] == epoch) continue;
      visited[nb] = epoch;
      Candidate c{similarity(q, nb), nb};
      if (results.size() < ef || c.score > results.top().score) {
        frontier.push(c);
        results.push(c);
        if (results.size() > ef) results.pop();
      }
    }
  }
  std::vector<Candidate> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());  // best first
  return out;
}

// Diversity heuristic: keep a candidate only if it is closer to the base point
// than to every neighbour already kept.
std::vector<std::uint32_t> VectorIndex::select_neighbors(const std::vector<Candidate>& sorted, std::size_t m) const {
  std::vector<std::uint32_t> kept;
  kept.reserve(m);
  for (const auto& c : sorted) {
    if (kept.size() >= m) break;
    bool good = true;
    for (auto r : kept) {
      if (similarity(c.id, r) > c.score) {
        good = false;
        break;
      }
    }
    if (good) kept.push_back(c.id);
  }
  return kept;
}

void VectorIndex::insert(std::uint32_t id, std::vector<std::uint32_t>& visited, std::uint32_t& epoch) {
  int level = sample_level(id);
  links_.emplace_back(static_cast<std::size_t>(level) + 1);
  if (max_level_ < 0) {
    entry_ = id;
    max_level_ = level;
    return;
  }
  auto q = vectors_.row(id);
  std::uint32_t ep = entry_;
  for (int layer = max_level_; layer > level; --layer) ep = greedy_descend(q, ep, layer);

  for (int layer = std::min(level, max_level_); layer >= 0; --layer) {
    auto cands = search_layer(q, ep, params_.ef_construction, layer, visited, epoch);
    auto chosen = select_neighbors(cands, params_.m);
    links_[id][static_cast<std::size_t>(layer)] = chosen;
    for (auto nb : chosen) {
      auto& nl = links_[nb][static_cast<std::size_t>(layer)];
      nl.push_back(id);
      if (nl.size() > capacity(layer)) {
        std::vector<Candidate> pool;
        pool.reserve(nl.size());
        for (auto x : nl) pool.push_back({similarity(nb, x), x});
        std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
          return a.score > b.score || (a.score == b.score && a.id < b.id);
        });
        nl = select_neighbors(pool, capacity(layer));
      }
    }
    ep = cands.front().id;
  }
  if (level > max_level_) {
    max_level_ = level;
    entry_ = id;
  }
}

std::vector<SearchHit> VectorIndex::to_hits(std::vector<Candidate> cands, std::size_t k) const {
  auto order = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return pmid_less(vectors_.pmids[a.id], vectors_.pmids[b.id]);
  };
  auto n = std::min(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(n), cands.end(), order);
  std::vector<SearchHit> hits;
  hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) hits.push_back({vectors_.pmids[cands[i].id], cands[i].score});
  return hits;
}

std::vector<SearchHit> VectorIndex::exact_query(std::span<const float> q, std::size_t k) const {
  std::vector<Candidate> all(vectors_.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = {similarity(q, i), i};
  return to_hits(std::move(all), k);
}

std::vector<SearchHit> VectorIndex::query(std::span<const float> q, std::size_t k,
                                          std::optional<std::size_t> ef_search) const {
  if (q.size() != dimension()) {
    throw UsageError("query dimension " + std::to_string(q.size()) + " does not match index dimension " +
                     std::to_string(dimension()));
  }
  if (k == 0) throw UsageError("k must be at least 1");
  if (size() == 0) return {};
  if (kind_ == IndexKind::exact) return exact_query(q, k);

  std::uint32_t ep = entry_;
  for (int layer = max_level_; layer > 0; --layer) ep = greedy_descend(q, ep, layer);
  std::vector<std::uint32_t> visited(size(), 0);
  std::uint32_t epoch = 0;
  auto ef = std::max(ef_search.value_or(params_.ef_search), k);
  return to_hits(search_layer(q, ep, ef, 0, visited, epoch), k);
}

std::vector<std::string> VectorIndex::validate() const {
  std::vector<std::string> problems;
  if (kind_ != IndexKind::hnsw) return problems;
  auto n = size();
  if (links_.size() != n) {
    problems.push_back("graph has " + std::to_string(links_.size()) + " nodes for " + std::to_string(n) + " vectors");
    return problems;
  }
  if (n == 0) return problems;
  if (entry_ >= n) {
    problems.push_back("entry point out of range");
    return problems;
  }
  if (level_of(entry_) != max_level_) problems.push_back("entry point is not on the top level");
  for (std::uint32_t node = 0; node < n; ++node) {
    if (links_[node].empty()) {
      problems.push_back("node " + std::to_string(node) + " has no layers");
      continue;
    }
    if (level_of(node) > max_level_) problems.push_back("node " + std::to_string(node) + " above max level");
    for (int layer = 0; layer <= level_of(node); ++layer) {
      auto nbs = neighbors(node, layer);
      if (nbs.size() > capacity(layer)) {
        problems.push_back("node " + std::to_string(node) + " layer " + std::to_string(layer) + " has " +
                           std::to_string(nbs.size()) + " neighbours (cap " + std::to_string(capacity(layer)) + ")");
      }
      std::unordered_set<std::uint32_t> uniq;
      for (auto nb : nbs) {
        if (nb >= n) {
          problems.push_back("node " + std::to_string(node) + " references missing node " + std::to_string(nb));
        } else if (level_of(nb) < layer) {
          problems.push_back("node " + std::to_string(node) + " links to " + std::to_string(nb) +
                             " on a layer the target does not occupy");
        }
        if (nb == node) problems.push_back("node " + std::to_string(node) + " links to itself");
        if (!uniq.insert(nb).second) problems.push_back("node " + std::to_string(node) + " repeats a neighbour");
      }
    }
  }
  return problems;
}

void VectorIndex::save(const std::filesystem::path& path) const {
  detail::ByteWriter w;
  w.put_bytes("PRIX");
  w.put(kFormatVersion);
  w.put(static_cast<std::uint8_t>(kind_));
  w.put(static_cast<std::uint32_t>(vectors_.dimension));
  w.put(static_cast<std::uint64_t>(vectors_.size()));
  w.put(static_cast<std::uint32_t>(params_.m));
  w.put(static_cast<std::uint32_t>(params_.ef_construction));
  w.put(static_cast<std::uint32_t>(params_.ef_search));
  w.put(params_.seed);
  for (float x : vectors_.values) w.put(x);
  for (const auto& p : vectors_.pmids) w.put_string(p);
  if (kind_ == IndexKind::hnsw) {
    w.put(entry_);
    w.put(static_cast<std::int32_t>(max_level_));
    for (const auto& node : links_) {
      w.put(static_cast<std::uint32_t>(node.size()));
      for (const auto& layer : node) {
        w.put(static_cast<std::uint32_t>(layer.size()));
        for (auto nb : layer) w.put(nb);
      }
    }
  }
  auto& buf = w.buffer();
  auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size())));
  w.put(crc);
  detail::write_whole_file(path.string(), buf);
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
  auto bytes = detail::read_whole_file(path.string());
  const auto name = path.string();
  if (bytes.size() < 12 || std::string_view(bytes).substr(0, 4) != "PRIX") {
    throw CorruptionError(name + ": not a pubrank index file");
  }
  detail::ByteReader header(std::string_view(bytes).substr(4, 4));
  auto version = header.get<std::uint32_t>();
  if (version != kFormatVersion) {
    throw DataError(name + ": index format version " + std::to_string(version) + ", this build reads version " +
                    std::to_string(kFormatVersion));
  }
  std::string_view body(bytes.data(), bytes.size() - 4);
  detail::ByteReader trailer(std::string_view(bytes).substr(bytes.size() - 4));
  auto stored = trailer.get<std::uint32_t>();
  auto actual = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
  if (stored != actual) throw CorruptionError(name + ": checksum mismatch (file truncated or damaged)");

  detail::ByteReader r(body.substr(8));
  VectorIndex index;
  auto kind = r.get<std::uint8_t>();
  if (kind > 1) throw CorruptionError(name + ": unknown index kind " + std::to_string(kind));
  index.kind_ = static_cast<IndexKind>(kind);
  index.vectors_.dimension = r.get<std::uint32_t>();
  auto count = r.get<std::uint64_t>();
  index.params_.m = r.get<std::uint32_t>();
  index.params_.ef_construction = r.get<std::uint32_t>();
  index.params_.ef_search = r.get<std::uint32_t>();
  index.params_.seed = r.get<std::uint64_t>();
  auto dim = index.vectors_.dimension;
  if (dim != 0 && count > r.remaining() / (4ULL * dim)) throw CorruptionError(name + ": vector block too short");
  index.vectors_.values.resize(count * dim);
  for (auto& x : index.vectors_.values) x = r.get<float>();
  index.vectors_.pmids.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) index.vectors_.pmids.push_back(r.get_string());
  if (index.kind_ == IndexKind::hnsw) {
    index.entry_ = r.get<std::uint32_t>();
    index.max_level_ = r.get<std::int32_t>();
    index.links_.resize(count);
    for (auto& node : index.links_) {
      auto layers = r.get<std::uint32_t>();
      if (layers == 0 || layers > kMaxLevel + 1) throw CorruptionError(name + ": bad layer count");
      node.resize(layers);
      for (auto& layer : node) {
        auto deg = r.get<std::uint32_t>();
        if (deg > r.remaining() / 4) throw CorruptionError(name + ": bad neighbour count");
        layer.resize(deg);
        for (auto& nb : layer) nb = r.get<std::uint32_t>();
      }
    }
  }
  if (r.remaining() != 0) throw CorruptionError(name + ": trailing bytes");
  auto problems = index.validate();
  if (!problems.empty()) throw CorruptionError(name + ": " + problems.front());
  return index;
}

}  // namespace pubrank
