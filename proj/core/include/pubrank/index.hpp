#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pubrank/embedding.hpp"

namespace pubrank {

enum class IndexKind : std::uint8_t { exact = 0, hnsw = 1 };
std::string_view to_string(IndexKind kind) noexcept;
IndexKind parse_index_kind(std::string_view text);

struct HnswParams {
  std::size_t m = 16;                // max neighbours per node above layer 0 (2*m on layer 0)
  std::size_t ef_construction = 200;
  std::size_t ef_search = 128;
  std::uint64_t seed = 42;           // level sampling
};

struct SearchHit {
  std::string pmid;
  double score = 0.0;  // cosine similarity

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Cosine nearest-neighbour index over unit vectors. Immutable once built;
/// concurrent queries are safe.
///
/// Hits come back by score descending with equal scores ordered by smaller
/// numeric pmid. The exact kind scans every row; the HNSW kind walks a layered
/// proximity graph built sequentially with seeded level assignment, so two
/// builds over the same input are identical.
class VectorIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  /// Rows must be unit norm (within 1e-4) with unique pmids.
  static VectorIndex build(VectorSet vectors, IndexKind kind, HnswParams params = {});

  /// `ef_search` overrides the build-time default for the HNSW kind.
  std::vector<SearchHit> query(std::span<const float> q, std::size_t k,
                               std::optional<std::size_t> ef_search = std::nullopt) const;

  void save(const std::filesystem::path& path) const;
  /// Throws CorruptionError on checksum or structure failure, DataError on a
  /// format version this build cannot read.
  static VectorIndex load(const std::filesystem::path& path);

  IndexKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return vectors_.dimension; }
  std::size_t size() const noexcept { return vectors_.size(); }
  const HnswParams& params() const noexcept { return params_; }
  const VectorSet& vectors() const noexcept { return vectors_; }

  // Graph introspection (HNSW kind only).
  int max_level() const noexcept { return max_level_; }
  std::uint32_t entry_point() const noexcept { return entry_; }
  int level_of(std::uint32_t node) const { return static_cast<int>(links_[node].size()) - 1; }
  std::span<const std::uint32_t> neighbors(std::uint32_t node, int layer) const {
    return links_[node][static_cast<std::size_t>(layer)];
  }

  /// Structural check of the graph: degree bounds, resolvable references,
  /// no self loops, entry point at the top level. Returns one message per
  /// violation; empty when sound.
  std::vector<std::string> validate() const;

 private:
  struct Candidate {
    double score;
    std::uint32_t id;
  };

  double similarity(std::span<const float> q, std::uint32_t id) const noexcept;
  double similarity(std::uint32_t a, std::uint32_t b) const noexcept;
  std::size_t capacity(int layer) const noexcept { return layer == 0 ? 2 * params_.m : params_.m; }
  int sample_level(std::uint64_t ordinal) const;

  std::uint32_t greedy_descend(std::span<const float> q, std::uint32_t ep, int layer) const;
  std::vector<Candidate> search_layer(std::span<const float> q, std::uint32_t ep, std::size_t ef, int layer,
                                      std::vector<std::uint32_t>& visited, std::uint32_t& epoch) const;
  std::vector<std::uint32_t> select_neighbors(const std::vector<Candidate>& sorted, std::size_t m) const;
  void insert(std::uint32_t id, std::vector<std::uint32_t>& visited, std::uint32_t& epoch);

  std::vector<SearchHit> exact_query(std::span<const float> q, std::size_t k) const;
  std::vector<SearchHit> to_hits(std::vector<Candidate> cands, std::size_t k) const;

  IndexKind kind_ = IndexKind::exact;
  HnswParams params_;
  VectorSet vectors_;
  // links_[node][layer] -> neighbour ids
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;
  std::uint32_t entry_ = 0;
  int max_level_ = -1;
};

}  // namespace pubrank
