#include "pubrank/embedding.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include "binary_io.hpp"
#include "pubrank/clients.hpp"
#include "pubrank/errors.hpp"
#include "pubrank/text.hpp"

namespace pubrank {

namespace {

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_vector(const EmbeddingVector& v, std::size_t dimension, std::size_t index) {
  if (v.size() != dimension) {
    throw ProtocolError("embedding " + std::to_string(index) + " has dimension " + std::to_string(v.size()) +
                        ", expected " + std::to_string(dimension));
  }
  double sq = 0.0;
  for (float x : v) {
    if (!std::isfinite(x)) throw ProtocolError("embedding " + std::to_string(index) + " has a non-finite component");
    sq += static_cast<double>(x) * x;
  }
  if (std::abs(std::sqrt(sq) - 1.0) > 1e-5) {
    throw ProtocolError("embedding " + std::to_string(index) + " is not unit norm");
  }
}

}  // namespace

std::string truncate_text(std::string_view text, std::size_t max_tokens) {
  if (max_tokens == 0) throw UsageError("max_tokens must be at least 1");
  auto tokens = text::split_whitespace(text);
  if (tokens.empty()) return {};
  auto keep = std::min(max_tokens, tokens.size());
  const auto& last = tokens[keep - 1];
  auto begin = static_cast<std::size_t>(tokens.front().data() - text.data());
  auto end = static_cast<std::size_t>(last.data() - text.data()) + last.size();
  return std::string(text.substr(begin, end - begin));
}

EmbeddingVector mock_embed(std::string_view text, std::size_t dimension, std::uint64_t seed) {
  if (dimension < 8) throw UsageError("mock embedding dimension must be at least 8");
  auto normalized = text::collapse_whitespace(text::ascii_lower(text));
  std::uint64_t key = splitmix64(fnv1a64(normalized) ^ splitmix64(seed));

  // Irwin-Hall with four 16-bit uniforms: mean 2*65535, variance 4*(65536^2-1)/12.
  constexpr double kMean = 2.0 * 65535.0;
  const double kStd = std::sqrt(4.0 * (65536.0 * 65536.0 - 1.0) / 12.0);
  std::vector<double> raw(dimension);
  double sq = 0.0;
  for (std::size_t i = 0; i < dimension; ++i) {
    std::uint64_t r = splitmix64(key + (static_cast<std::uint64_t>(i) + 1) * 0x9e3779b97f4a7c15ULL);
    std::uint64_t sum = (r & 0xFFFF) + ((r >> 16) & 0xFFFF) + ((r >> 32) & 0xFFFF) + ((r >> 48) & 0xFFFF);
    raw[i] = (static_cast<double>(sum) - kMean) / kStd;
    sq += raw[i] * raw[i];
  }
  double norm = std::sqrt(sq);
  EmbeddingVector out(dimension);
  for (std::size_t i = 0; i < dimension; ++i) out[i] = static_cast<float>(raw[i] / norm);
  return out;
}

MockEmbeddingProvider::MockEmbeddingProvider(std::size_t dimension, std::uint64_t seed, std::size_t max_tokens)
    : info_{"mock", dimension, max_tokens}, seed_(seed) {
  if (dimension < 8) throw UsageError("mock embedding dimension must be at least 8");
  if (max_tokens == 0) throw UsageError("max_tokens must be positive");
}

std::vector<EmbeddingVector> MockEmbeddingProvider::embed(std::span<const std::string> texts, std::size_t) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(mock_embed(t, info_.dimension, seed_));
  return out;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(const EmbedClient& client, std::size_t dimension,
                                                 std::size_t max_tokens, std::size_t request_batch)
    : client_(&client), info_{"remote", dimension, max_tokens}, request_batch_(request_batch) {
  if (dimension == 0 || max_tokens == 0 || request_batch == 0) {
    throw UsageError("remote embedding provider needs positive dimension, max_tokens and batch size");
  }
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed(std::span<const std::string> texts,
                                                            std::size_t first_index) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); i += request_batch_) {
    auto n = std::min(request_batch_, texts.size() - i);
    auto part = client_->embed(texts.subspan(i, n), first_index + i);
    if (!part.empty() && part.front().size() != info_.dimension) {
      throw ProtocolError("remote embedder returned dimension " + std::to_string(part.front().size()) +
                          ", configured " + std::to_string(info_.dimension));
    }
    for (auto& v : part) out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> embed_batch(const EmbeddingProvider& provider, std::span<const std::string> texts) {
  if (texts.empty()) throw UsageError("embed_batch needs at least one text");
  const auto& info = provider.info();
  std::vector<std::string> truncated;
  truncated.reserve(texts.size());
  for (const auto& t : texts) truncated.push_back(truncate_text(t, info.max_tokens));
  auto vectors = provider.embed(truncated, 0);
  if (vectors.size() != texts.size()) {
    throw ProtocolError("provider returned " + std::to_string(vectors.size()) + " vectors for " +
                        std::to_string(texts.size()) + " texts");
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) check_vector(vectors[i], info.dimension, i);
  return vectors;
}

double l2_normalize(std::span<float> v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  double norm = std::sqrt(sq);
  if (norm > 0.0) {
    for (auto& x : v) x = static_cast<float>(x / norm);
  }
  return norm;
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

void VectorSet::append(std::string pmid, std::span<const float> v) {
  if (v.size() != dimension) {
    throw DataError("vector for pmid " + pmid + " has dimension " + std::to_string(v.size()) + ", expected " +
                    std::to_string(dimension));
  }
  values.insert(values.end(), v.begin(), v.end());
  pmids.push_back(std::move(pmid));
}

void write_vector_file(const std::filesystem::path& path, const VectorSet& set) {
  if (set.values.size() != set.size() * set.dimension) throw DataError("vector set rows do not match dimension");
  detail::ByteWriter w;
  w.put_bytes("PRV1");
  w.put(set.dimension);
  w.put(static_cast<std::uint64_t>(set.size()));
  for (float x : set.values) w.put(x);
  for (const auto& p : set.pmids) w.put_string(p);
  detail::write_whole_file(path.string(), w.buffer());
}

VectorSet read_vector_file(const std::filesystem::path& path) {
  auto bytes = detail::read_whole_file(path.string());
  detail::ByteReader r(bytes);
  if (bytes.size() < 4 || r.get_bytes(4) != "PRV1") throw CorruptionError(path.string() + ": not a PRV1 vector file");
  VectorSet set;
  set.dimension = r.get<std::uint32_t>();
  auto count = r.get<std::uint64_t>();
  if (set.dimension == 0 && count > 0) throw CorruptionError(path.string() + ": zero dimension with rows");
  // Header vs payload consistency: the float block alone must fit in what is left.
  if (set.dimension != 0 && count > r.remaining() / (4ULL * set.dimension)) {
    throw CorruptionError(path.string() + ": header declares " + std::to_string(count) + " rows of dimension " +
                          std::to_string(set.dimension) + " but the payload is shorter");
  }
  set.values.resize(count * set.dimension);
  for (auto& x : set.values) x = r.get<float>();
  set.pmids.reserve(count);
  std::unordered_set<std::string> seen;
  for (std::uint64_t i = 0; i < count; ++i) {
    auto pmid = r.get_string();
    if (!seen.insert(pmid).second) throw DataError(path.string() + ": duplicate pmid " + pmid);
    set.pmids.push_back(std::move(pmid));
  }
  if (r.remaining() != 0) throw CorruptionError(path.string() + ": trailing bytes after pmid table");
  return set;
}

}  // namespace pubrank
