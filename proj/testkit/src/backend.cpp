#include "pubrank/testkit/backend.hpp"

#include <algorithm>

#include <json.hpp>

#include "pubrank/errors.hpp"

namespace pubrank::testkit {

using nlohmann::json;

Reply ScriptedChannel::post(Endpoint endpoint, const std::string& body) {
  ++counts_[static_cast<int>(endpoint)];
  return handler_(endpoint, body);
}

std::size_t ScriptedChannel::calls(Endpoint endpoint) const { return counts_[static_cast<int>(endpoint)].load(); }

std::size_t ScriptedChannel::total_calls() const { return counts_[0] + counts_[1] + counts_[2]; }

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic value in [0, 1) from the inputs.
double unit_hash(std::uint64_t seed, std::string_view a, std::string_view b) {
  auto h = fnv1a(b, fnv1a(a, fnv1a(std::to_string(seed))));
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Reply bad_request(const std::string& what) { return {400, json{{"error", what}}.dump()}; }

}  // namespace

SimulatedBackend::SimulatedBackend(const World& world, std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed), world_(&world) {
  for (std::size_t i = 0; i < world.documents.size(); ++i) {
    const auto& d = world.documents[i];
    pmid_by_title_.emplace(d.title, d.pmid);
    topic_by_pmid_.emplace(d.pmid, world.topic_of[i]);
  }
  for (std::size_t t = 0; t < world.questions.size(); ++t) {
    question_by_body_.emplace(world.questions[t].body, &world.questions[t]);
    topic_by_question_.emplace(world.questions[t].id, t);
  }
}

void SimulatedBackend::set_chat_behaviour(const std::string& question_id, ChatBehaviour behaviour) {
  std::lock_guard lock(mu_);
  behaviour_[question_id] = behaviour;
}

Reply SimulatedBackend::post(Endpoint endpoint, const std::string& body) {
  try {
    switch (endpoint) {
      case Endpoint::embed: return embed(body);
      case Endpoint::score: return score(body);
      case Endpoint::chat: return chat(body);
    }
  } catch (const json::exception& e) {
    return bad_request(e.what());
  }
  return bad_request("unknown endpoint");
}

Reply SimulatedBackend::embed(const std::string& body) const {
  auto req = json::parse(body);
  json out{{"dimension", dimension_}, {"embeddings", json::array()}};
  for (const auto& t : req.at("texts")) {
    out["embeddings"].push_back(bag_of_words_embed(t.get<std::string>(), dimension_, seed_));
  }
  return {200, out.dump()};
}

Reply SimulatedBackend::score(const std::string& body) const {
  auto req = json::parse(body);
  auto query = req.at("query").get<std::string>();
  auto qit = question_by_body_.find(query);
  const Question* q = qit == question_by_body_.end() ? nullptr : qit->second;
  json scores = json::array();
  for (const auto& d : req.at("docs")) {
    auto id = d.at("id").get<std::string>();
    double base = 0.12;
    if (q != nullptr) {
      auto topic = topic_by_question_.at(q->id);
      auto dt = topic_by_pmid_.find(id);
      if (q->gold_documents.count(id) != 0) base = 0.72;
      else if (dt != topic_by_pmid_.end() && dt->second == topic) base = 0.42;
    }
    double s = base + (unit_hash(seed_, query, id) - 0.5) * 0.5;
    scores.push_back(std::clamp(s, 0.0, 1.0));
  }
  return {200, json{{"scores", scores}}.dump()};
}

Reply SimulatedBackend::chat(const std::string& body) const {
  auto req = json::parse(body);
  const auto& messages = req.at("messages");
  if (messages.empty()) return bad_request("no messages");
  auto user = messages.back().at("content").get<std::string>();

  // "Question: <body>\n\nCandidate documents:\n[1] <title> — ..."
  auto qpos = user.find("Question: ");
  auto qend = user.find('\n', qpos);
  if (qpos == std::string::npos || qend == std::string::npos) return {200, json{{"content", "No question found."}}.dump()};
  auto body_text = user.substr(qpos + 10, qend - qpos - 10);
  auto qit = question_by_body_.find(body_text);
  if (qit == question_by_body_.end()) return {200, json{{"content", "Unknown question."}}.dump()};
  const Question& q = *qit->second;

  std::vector<std::pair<std::size_t, std::string>> candidates;  // ordinal, pmid
  std::size_t pos = user.find("\n[", qend);
  while (pos != std::string::npos) {
    auto close = user.find("] ", pos);
    auto sep = user.find(" \xE2\x80\x94 ", close);
    if (close == std::string::npos || sep == std::string::npos) break;
    auto ordinal = static_cast<std::size_t>(std::stoul(user.substr(pos + 2, close - pos - 2)));
    auto title = user.substr(close + 2, sep - close - 2);
    auto it = pmid_by_title_.find(title);
    candidates.emplace_back(ordinal, it == pmid_by_title_.end() ? std::string() : it->second);
    pos = user.find("\n[", sep);
  }

  std::size_t want = candidates.size();
  if (auto p = user.find("Output exactly the "); p != std::string::npos) {
    want = static_cast<std::size_t>(std::stoul(user.substr(p + 19)));
  }

  ChatBehaviour behaviour = ChatBehaviour::good;
  {
    std::lock_guard lock(mu_);
    if (auto b = behaviour_.find(q.id); b != behaviour_.end()) behaviour = b->second;
  }
  if (behaviour == ChatBehaviour::garbage) {
    return {200, json{{"content", "I am unable to rank these documents reliably."}}.dump()};
  }

  auto topic = topic_by_question_.at(q.id);
  auto tier = [&](const std::string& pmid) {
    if (q.gold_documents.count(pmid) != 0) return 0;
    auto dt = topic_by_pmid_.find(pmid);
    return dt != topic_by_pmid_.end() && dt->second == topic ? 1 : 2;
  };
  auto ranked = candidates;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](const auto& a, const auto& b) { return tier(a.second) < tier(b.second); });

  std::string content = "[";
  std::size_t emitted = 0;
  auto limit = behaviour == ChatBehaviour::partial ? std::min<std::size_t>(4, want) : want;
  for (const auto& [ordinal, pmid] : ranked) {
    if (emitted == limit) break;
    if (emitted > 0) content += ", ";
    content += std::to_string(ordinal);
    ++emitted;
  }
  if (behaviour == ChatBehaviour::partial) {
    // Out-of-range, zero and repeated ordinals the parser must discard.
    content += ", " + std::to_string(candidates.size() + 7) + ", 0";
    if (!ranked.empty()) content += ", " + std::to_string(ranked.front().first);
  }
  content += "]";
  return {200, json{{"content", content}}.dump()};
}

}  // namespace pubrank::testkit
