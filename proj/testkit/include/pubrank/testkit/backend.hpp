#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pubrank/clients.hpp"
#include "pubrank/dataset.hpp"
#include "pubrank/testkit/synthetic.hpp"

namespace pubrank::testkit {

/// Channel driven by a callback; counts calls per endpoint.
class ScriptedChannel final : public Channel {
 public:
  using Handler = std::function<Reply(Endpoint, const std::string&)>;
  explicit ScriptedChannel(Handler handler) : handler_(std::move(handler)) {}

  Reply post(Endpoint endpoint, const std::string& body) override;
  std::size_t calls(Endpoint endpoint) const;
  std::size_t total_calls() const;

 private:
  Handler handler_;
  std::atomic<std::size_t> counts_[3]{};
};

enum class ChatBehaviour { good, partial, garbage };

/// In-process stand-in for the model sidecar over a synthetic World.
///   /embed  bag-of-words embeddings
///   /score  gold-aware relevance plus deterministic noise, in [0, 1]
///   /chat   listwise orderings that put gold candidates first
class SimulatedBackend final : public Channel {
 public:
  SimulatedBackend(const World& world, std::size_t dimension, std::uint64_t seed = 99);

  Reply post(Endpoint endpoint, const std::string& body) override;

  /// Per-question override of the chat behaviour (default good).
  void set_chat_behaviour(const std::string& question_id, ChatBehaviour behaviour);

 private:
  Reply embed(const std::string& body) const;
  Reply score(const std::string& body) const;
  Reply chat(const std::string& body) const;

  std::size_t dimension_;
  std::uint64_t seed_;
  std::unordered_map<std::string, const Question*> question_by_body_;
  std::unordered_map<std::string, std::string> pmid_by_title_;
  std::unordered_map<std::string, std::size_t> topic_by_pmid_;
  std::unordered_map<std::string, std::size_t> topic_by_question_;
  std::map<std::string, ChatBehaviour> behaviour_;
  mutable std::mutex mu_;
  const World* world_;
};

}  // namespace pubrank::testkit
