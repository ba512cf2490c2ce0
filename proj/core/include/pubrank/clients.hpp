#pragma once

// Wire-protocol clients for the three model capabilities (embedding, pairwise
// relevance scoring, chat completion) and the record/replay fixture store that
// lets every pipeline stage run offline.
//
// Protocol, JSON over HTTP POST:
//   /embed  {"texts": [...]}                              -> {"dimension": d, "embeddings": [[...], ...]}
//   /score  {"query": q, "docs": [{"id": .., "text": ..}]} -> {"scores": [...]}
//   /chat   {"messages": [{"role": .., "content": ..}]}    -> {"content": "..."}

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pubrank {

enum class Endpoint { embed, score, chat };
std::string_view endpoint_path(Endpoint e) noexcept;

struct Reply {
  int status = 0;
  std::string body;
};

/// Anything that can answer a protocol request. Transport failures throw a
/// retryable UpstreamError; HTTP-level failures come back as a non-2xx Reply.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual Reply post(Endpoint endpoint, const std::string& body) = 0;
};

struct ServiceUrls {
  std::string embed;
  std::string score;
  std::string chat;
  std::string bearer_token;  // sent as "Authorization: Bearer <token>" when set

  /// PUBRANK_EMBED_URL, PUBRANK_SCORE_URL, PUBRANK_CHAT_URL, PUBRANK_BEARER_TOKEN.
  static ServiceUrls from_env();
  const std::string& url_for(Endpoint e) const noexcept;
};

/// Real network channel over HTTP(S).
class HttpChannel final : public Channel {
 public:
  explicit HttpChannel(ServiceUrls urls, std::chrono::milliseconds timeout = std::chrono::seconds(120));
  Reply post(Endpoint endpoint, const std::string& body) override;

 private:
  ServiceUrls urls_;
  std::chrono::milliseconds timeout_;
};

enum class FixtureMode { record, replay, passthrough };
FixtureMode parse_fixture_mode(std::string_view text);
std::string_view to_string(FixtureMode mode) noexcept;

/// Canonical form of a JSON request body: parsed and re-serialized with sorted
/// keys and no insignificant whitespace.
std::string canonicalize_json(std::string_view body);

/// Stable request digest: sha256 over endpoint path and canonical body.
std::string request_digest(Endpoint endpoint, std::string_view body);

/// Digest-keyed store of recorded replies, one JSON file per exchange.
/// In replay mode no upstream exists, so network I/O is impossible; a missing
/// fixture is a non-retryable UpstreamError.
class FixtureStore final : public Channel {
 public:
  FixtureStore(std::filesystem::path dir, FixtureMode mode, std::shared_ptr<Channel> upstream = nullptr);

  Reply post(Endpoint endpoint, const std::string& body) override;

  FixtureMode mode() const noexcept { return mode_; }
  const std::filesystem::path& directory() const noexcept { return dir_; }
  /// Digests touched so far, sorted.
  std::vector<std::string> digests_used() const;

 private:
  std::filesystem::path file_for(Endpoint endpoint, const std::string& digest) const;

  std::filesystem::path dir_;
  FixtureMode mode_;
  std::shared_ptr<Channel> upstream_;
  mutable std::mutex mu_;
  std::map<std::string, Reply> cache_;
  std::set<std::string> used_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
  /// Injected for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Shared plumbing: in-flight bound and retry loop around a Channel.
class ServiceClient {
 public:
  ServiceClient(std::shared_ptr<Channel> channel, RetryPolicy retry = {}, std::ptrdiff_t max_in_flight = 8);

  /// Sends with retries on transport errors and non-2xx replies. `context` is
  /// prefixed to error messages.
  std::string call(Endpoint endpoint, const std::string& body, const std::string& context) const;

 private:
  std::shared_ptr<Channel> channel_;
  RetryPolicy retry_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

class EmbedClient {
 public:
  /// `expected_dimension` of 0 accepts whatever the service declares.
  explicit EmbedClient(std::shared_ptr<ServiceClient> service, std::size_t expected_dimension = 0)
      : service_(std::move(service)), expected_dimension_(expected_dimension) {}

  /// Vectors whose norm is within 1e-3 of 1 are re-normalized; anything further
  /// off is a protocol error. `first_index` only labels errors with the batch range.
  std::vector<std::vector<float>> embed(std::span<const std::string> texts, std::size_t first_index = 0) const;

 private:
  std::shared_ptr<ServiceClient> service_;
  std::size_t expected_dimension_;
};

struct ScoredDoc {
  std::string pmid;
  double score = 0.0;
};

class ScoreClient {
 public:
  explicit ScoreClient(std::shared_ptr<ServiceClient> service) : service_(std::move(service)) {}

  /// docs are (pmid, text). Scores come back aligned by position and clamped
  /// to [0, 1]; values outside by more than 1e-6 are a protocol error.
  std::vector<ScoredDoc> score_pairs(const std::string& query,
                                     std::span<const std::pair<std::string, std::string>> docs) const;

 private:
  std::shared_ptr<ServiceClient> service_;
};

enum class Role { system, user, assistant };
std::string_view to_string(Role role) noexcept;

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// JSON array of {"role", "content"} objects.
std::string messages_to_json(std::span<const ChatMessage> messages, int indent = -1);

class ChatClient {
 public:
  explicit ChatClient(std::shared_ptr<ServiceClient> service) : service_(std::move(service)) {}

  /// Last message must be from the user; user/assistant contents must be non-empty.
  std::string chat(std::span<const ChatMessage> messages) const;

 private:
  std::shared_ptr<ServiceClient> service_;
};

/// Wiring of the three clients over one channel stack, configured from the
/// PUBRANK_* environment (fixtures directory and mode included).
struct ModelClients {
  std::shared_ptr<FixtureStore> fixtures;  // null when fixtures are not in use
  std::shared_ptr<EmbedClient> embed;
  std::shared_ptr<ScoreClient> score;
  std::shared_ptr<ChatClient> chat;
};

struct ClientOptions {
  ServiceUrls urls;
  std::optional<std::filesystem::path> fixtures_dir;
  FixtureMode fixture_mode = FixtureMode::passthrough;
  RetryPolicy retry;
  std::ptrdiff_t max_in_flight = 8;
  std::size_t embed_dimension = 0;

  /// Reads PUBRANK_FIXTURES_DIR / PUBRANK_FIXTURE_MODE on top of the URL variables.
  static ClientOptions from_env();
};

/// `network` is the channel used when not replaying; null means a real HttpChannel.
ModelClients make_clients(const ClientOptions& options, std::shared_ptr<Channel> network = nullptr);

}  // namespace pubrank
