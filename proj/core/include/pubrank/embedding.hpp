#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pubrank {

class EmbedClient;

/// Unit-norm float vector.
using EmbeddingVector = std::vector<float>;

struct EmbeddingProviderInfo {
  std::string name;
  std::size_t dimension = 1024;
  std::size_t max_tokens = 512;
};

/// Prefix of `text` holding at most `max_tokens` whitespace-delimited tokens.
/// Original spacing inside the kept prefix is preserved; trailing whitespace is not.
std::string truncate_text(std::string_view text, std::size_t max_tokens);

/// Deterministic stand-in for a bi-encoder. The text is lowercased and
/// whitespace-normalized, hashed to 64 bits, mixed with the seed, expanded by a
/// counter-based generator into approximately normal components and
/// L2-normalized. Pure integer arithmetic up to the final normalization, so
/// vectors are identical across platforms.
EmbeddingVector mock_embed(std::string_view text, std::size_t dimension, std::uint64_t seed);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual const EmbeddingProviderInfo& info() const = 0;
  /// Embeds already-truncated texts. `first_index` is the position of texts[0]
  /// in the caller's batch, used for error context.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts, std::size_t first_index) const = 0;
};

class MockEmbeddingProvider final : public EmbeddingProvider {
 public:
  MockEmbeddingProvider(std::size_t dimension, std::uint64_t seed, std::size_t max_tokens = 512);
  const EmbeddingProviderInfo& info() const override { return info_; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts, std::size_t first_index) const override;

 private:
  EmbeddingProviderInfo info_;
  std::uint64_t seed_;
};

/// Backed by the `/embed` endpoint. Tokenization and truncation to the model's
/// real limit happen service-side; whitespace truncation here is a coarse bound.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(const EmbedClient& client, std::size_t dimension, std::size_t max_tokens = 512,
                          std::size_t request_batch = 32);
  const EmbeddingProviderInfo& info() const override { return info_; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts, std::size_t first_index) const override;

 private:
  const EmbedClient* client_;
  EmbeddingProviderInfo info_;
  std::size_t request_batch_;
};

/// Truncates every text to the provider's token limit, embeds, and checks the
/// vector invariants (dimension, finiteness, unit norm within 1e-5).
std::vector<EmbeddingVector> embed_batch(const EmbeddingProvider& provider, std::span<const std::string> texts);

/// Scales `v` to unit length in place; returns the original norm.
double l2_normalize(std::span<float> v);

double dot(std::span<const float> a, std::span<const float> b) noexcept;

/// Row-major matrix of unit vectors with their pmids. On disk:
///   "PRV1" | u32 dimension | u64 count | count*dimension f32 | count * (u32 len, utf-8 pmid)
/// all little-endian.
struct VectorSet {
  std::uint32_t dimension = 0;
  std::vector<float> values;
  std::vector<std::string> pmids;

  std::size_t size() const noexcept { return pmids.size(); }
  std::span<const float> row(std::size_t i) const noexcept {
    return {values.data() + i * dimension, dimension};
  }
  void append(std::string pmid, std::span<const float> v);
};

void write_vector_file(const std::filesystem::path& path, const VectorSet& set);
/// Throws CorruptionError when the payload does not match the header.
VectorSet read_vector_file(const std::filesystem::path& path);

}  // namespace pubrank
