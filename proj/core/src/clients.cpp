#include <httplib.h>

#include "pubrank/clients.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "pubrank/errors.hpp"
#include "pubrank/text.hpp"

namespace pubrank {

using nlohmann::json;

std::string_view endpoint_path(Endpoint e) noexcept {
  switch (e) {
    case Endpoint::embed: return "/embed";
    case Endpoint::score: return "/score";
    case Endpoint::chat: return "/chat";
  }
  return "/embed";
}

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v == nullptr ? std::string() : std::string(v);
}

bool is_2xx(int status) { return status >= 200 && status < 300; }

json parse_body(std::string_view body, const std::string& context) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(context + ": malformed response body: " + e.what());
  }
}

}  // namespace

ServiceUrls ServiceUrls::from_env() {
  return ServiceUrls{env_or_empty("PUBRANK_EMBED_URL"), env_or_empty("PUBRANK_SCORE_URL"),
                     env_or_empty("PUBRANK_CHAT_URL"), env_or_empty("PUBRANK_BEARER_TOKEN")};
}

const std::string& ServiceUrls::url_for(Endpoint e) const noexcept {
  switch (e) {
    case Endpoint::embed: return embed;
    case Endpoint::score: return score;
    case Endpoint::chat: return chat;
  }
  return embed;
}

HttpChannel::HttpChannel(ServiceUrls urls, std::chrono::milliseconds timeout)
    : urls_(std::move(urls)), timeout_(timeout) {}

Reply HttpChannel::post(Endpoint endpoint, const std::string& body) {
  const auto& base = urls_.url_for(endpoint);
  if (base.empty()) {
    throw UsageError("no service URL configured for " + std::string(endpoint_path(endpoint)));
  }
  auto scheme_end = base.find("://");
  auto path_start = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  std::string host = path_start == std::string::npos ? base : base.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client cli(host);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_).count();
  cli.set_connection_timeout(10, 0);
  cli.set_read_timeout(static_cast<time_t>(secs), 0);
  cli.set_write_timeout(static_cast<time_t>(secs), 0);
  httplib::Headers headers;
  if (!urls_.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + urls_.bearer_token);

  auto result = cli.Post(prefix + std::string(endpoint_path(endpoint)), headers, body, "application/json");
  if (!result) {
    throw UpstreamError(std::string(endpoint_path(endpoint)) + ": transport failure (" +
                            httplib::to_string(result.error()) + ")",
                        true);
  }
  return Reply{result->status, result->body};
}

FixtureMode parse_fixture_mode(std::string_view text) {
  if (text == "record") return FixtureMode::record;
  if (text == "replay") return FixtureMode::replay;
  if (text == "passthrough" || text.empty()) return FixtureMode::passthrough;
  throw UsageError("unknown fixture mode '" + std::string(text) + "' (record|replay|passthrough)");
}

std::string_view to_string(FixtureMode mode) noexcept {
  switch (mode) {
    case FixtureMode::record: return "record";
    case FixtureMode::replay: return "replay";
    case FixtureMode::passthrough: return "passthrough";
  }
  return "passthrough";
}

std::string canonicalize_json(std::string_view body) {
  try {
    return json::parse(body).dump();
  } catch (const json::exception& e) {
    throw UsageError(std::string("request body is not valid JSON: ") + e.what());
  }
}

std::string request_digest(Endpoint endpoint, std::string_view body) {
  std::string material(endpoint_path(endpoint));
  material.push_back('\n');
  material += canonicalize_json(body);
  return text::sha256_hex(material);
}

FixtureStore::FixtureStore(std::filesystem::path dir, FixtureMode mode, std::shared_ptr<Channel> upstream)
    : dir_(std::move(dir)), mode_(mode), upstream_(std::move(upstream)) {
  if (mode_ == FixtureMode::replay) {
    upstream_.reset();
  } else if (!upstream_) {
    throw UsageError("fixture mode " + std::string(to_string(mode_)) + " needs an upstream channel");
  }
  if (mode_ == FixtureMode::record) std::filesystem::create_directories(dir_);
}

std::filesystem::path FixtureStore::file_for(Endpoint endpoint, const std::string& digest) const {
  return dir_ / (std::string(endpoint_path(endpoint).substr(1)) + "-" + digest + ".json");
}

Reply FixtureStore::post(Endpoint endpoint, const std::string& body) {
  if (mode_ == FixtureMode::passthrough) return upstream_->post(endpoint, body);

  auto digest = request_digest(endpoint, body);
  {
    std::lock_guard lock(mu_);
    used_.insert(digest);
    if (auto it = cache_.find(digest); it != cache_.end()) return it->second;
  }
  auto path = file_for(endpoint, digest);

  if (mode_ == FixtureMode::replay) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw UpstreamError("no recorded fixture for " + std::string(endpoint_path(endpoint)) + " request " + digest +
                              " in " + dir_.string(),
                          false);
    }
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw UpstreamError("corrupt fixture " + path.string() + ": " + e.what(), false);
    }
    Reply reply{j.at("status").get<int>(), j.at("body").get<std::string>()};
    std::lock_guard lock(mu_);
    cache_.emplace(digest, reply);
    return reply;
  }

  // record
  Reply reply = upstream_->post(endpoint, body);
  if (!is_2xx(reply.status)) return reply;
  json entry{{"endpoint", std::string(endpoint_path(endpoint))},
             {"request", json::parse(body)},
             {"status", reply.status},
             {"body", reply.body}};
  std::lock_guard lock(mu_);
  if (cache_.emplace(digest, reply).second) {
    std::ofstream out(path, std::ios::binary);
    out << entry.dump(1) << '\n';
    if (!out) throw DataError("cannot write fixture " + path.string());
  }
  return reply;
}

std::vector<std::string> FixtureStore::digests_used() const {
  std::lock_guard lock(mu_);
  return {used_.begin(), used_.end()};
}

ServiceClient::ServiceClient(std::shared_ptr<Channel> channel, RetryPolicy retry, std::ptrdiff_t max_in_flight)
    : channel_(std::move(channel)),
      retry_(std::move(retry)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(max_in_flight < 1 ? 1 : max_in_flight)) {
  if (!channel_) throw UsageError("service client needs a channel");
  if (retry_.attempts < 1) retry_.attempts = 1;
  if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string ServiceClient::call(Endpoint endpoint, const std::string& body, const std::string& context) const {
  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<>* s;
    ~Release() { s->release(); }
  } release{in_flight_.get()};

  auto backoff = retry_.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.attempts; ++attempt) {
    try {
      Reply reply = channel_->post(endpoint, body);
      if (is_2xx(reply.status)) return reply.body;
      last_error = "HTTP " + std::to_string(reply.status);
      if (!reply.body.empty()) last_error += ": " + reply.body.substr(0, 200);
    } catch (const UpstreamError& e) {
      if (!e.retryable()) throw UpstreamError(context + ": " + e.what(), false);
      last_error = e.what();
    }
    if (attempt < retry_.attempts) {
      retry_.sleep(backoff);
      backoff = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(backoff.count()) * retry_.multiplier));
    }
  }
  throw UpstreamError(context + ": giving up after " + std::to_string(retry_.attempts) + " attempts: " + last_error,
                      true);
}

std::vector<std::vector<float>> EmbedClient::embed(std::span<const std::string> texts, std::size_t first_index) const {
  if (texts.empty()) return {};
  std::string context = "/embed texts [" + std::to_string(first_index) + ", " +
                        std::to_string(first_index + texts.size()) + ")";
  json req{{"texts", json::array()}};
  for (const auto& t : texts) req["texts"].push_back(t);
  auto j = parse_body(service_->call(Endpoint::embed, req.dump(), context), context);

  if (!j.is_object() || !j.contains("dimension") || !j.contains("embeddings") || !j["dimension"].is_number_unsigned() ||
      !j["embeddings"].is_array()) {
    throw ProtocolError(context + ": response needs 'dimension' and 'embeddings'");
  }
  auto dim = j["dimension"].get<std::size_t>();
  if (dim == 0) throw ProtocolError(context + ": declared dimension is 0");
  if (expected_dimension_ != 0 && dim != expected_dimension_) {
    throw ProtocolError(context + ": service dimension " + std::to_string(dim) + " != configured " +
                        std::to_string(expected_dimension_));
  }
  const auto& rows = j["embeddings"];
  if (rows.size() != texts.size()) {
    throw ProtocolError(context + ": got " + std::to_string(rows.size()) + " embeddings for " +
                        std::to_string(texts.size()) + " texts");
  }
  std::vector<std::vector<float>> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.size() != dim) {
      throw ProtocolError(context + ": embedding " + std::to_string(i) + " does not have the declared dimension");
    }
    std::vector<float> v;
    v.reserve(dim);
    double sq = 0.0;
    for (const auto& x : row) {
      if (!x.is_number()) throw ProtocolError(context + ": non-numeric embedding component");
      double d = x.get<double>();
      if (!std::isfinite(d)) throw ProtocolError(context + ": non-finite embedding component");
      sq += d * d;
      v.push_back(static_cast<float>(d));
    }
    double norm = std::sqrt(sq);
    if (std::abs(norm - 1.0) > 1e-3) {
      throw ProtocolError(context + ": embedding " + std::to_string(i) + " has norm " + std::to_string(norm));
    }
    for (auto& x : v) x = static_cast<float>(x / norm);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<ScoredDoc> ScoreClient::score_pairs(const std::string& query,
                                                std::span<const std::pair<std::string, std::string>> docs) const {
  if (docs.empty()) throw UsageError("score_pairs needs at least one document");
  std::unordered_set<std::string_view> seen;
  for (const auto& [pmid, text] : docs) {
    if (!seen.insert(pmid).second) throw UsageError("score_pairs: duplicate pmid " + pmid + " in request");
  }
  json req{{"query", query}, {"docs", json::array()}};
  for (const auto& [pmid, text] : docs) req["docs"].push_back({{"id", pmid}, {"text", text}});
  std::string context = "/score (" + std::to_string(docs.size()) + " docs)";
  auto j = parse_body(service_->call(Endpoint::score, req.dump(), context), context);

  if (!j.is_object() || !j.contains("scores") || !j["scores"].is_array()) {
    throw ProtocolError(context + ": response needs 'scores'");
  }
  const auto& scores = j["scores"];
  if (scores.size() != docs.size()) {
    throw ProtocolError(context + ": got " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(docs.size()) + " docs");
  }
  std::vector<ScoredDoc> out;
  out.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!scores[i].is_number()) throw ProtocolError(context + ": non-numeric score");
    double s = scores[i].get<double>();
    if (!std::isfinite(s) || s < -1e-6 || s > 1.0 + 1e-6) {
      throw ProtocolError(context + ": score " + std::to_string(s) + " outside [0, 1]");
    }
    out.push_back({docs[i].first, std::clamp(s, 0.0, 1.0)});
  }
  return out;
}

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::string messages_to_json(std::span<const ChatMessage> messages, int indent) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& m : messages) arr.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  return arr.dump(indent);
}

std::string ChatClient::chat(std::span<const ChatMessage> messages) const {
  if (messages.empty() || messages.back().role != Role::user) {
    throw UsageError("chat: the last message must have role user");
  }
  for (const auto& m : messages) {
    if (m.role != Role::system && m.content.empty()) throw UsageError("chat: empty user/assistant message");
  }
  json req{{"messages", json::array()}};
  for (const auto& m : messages) req["messages"].push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  std::string context = "/chat";
  auto j = parse_body(service_->call(Endpoint::chat, req.dump(), context), context);
  if (!j.is_object() || !j.contains("content") || !j["content"].is_string()) {
    throw ProtocolError(context + ": response needs string 'content'");
  }
  auto content = j["content"].get<std::string>();
  if (content.empty()) throw ProtocolError(context + ": empty content");
  return content;
}

ClientOptions ClientOptions::from_env() {
  ClientOptions o;
  o.urls = ServiceUrls::from_env();
  auto dir = env_or_empty("PUBRANK_FIXTURES_DIR");
  if (!dir.empty()) o.fixtures_dir = dir;
  auto mode = env_or_empty("PUBRANK_FIXTURE_MODE");
  o.fixture_mode = mode.empty() ? (o.fixtures_dir ? FixtureMode::replay : FixtureMode::passthrough)
                                : parse_fixture_mode(mode);
  return o;
}

ModelClients make_clients(const ClientOptions& options, std::shared_ptr<Channel> network) {
  ModelClients out;
  std::shared_ptr<Channel> channel;
  bool use_fixtures = options.fixture_mode != FixtureMode::passthrough;
  if (use_fixtures && !options.fixtures_dir) {
    throw UsageError("fixture mode " + std::string(to_string(options.fixture_mode)) + " needs PUBRANK_FIXTURES_DIR");
  }
  if (options.fixture_mode == FixtureMode::replay) {
    out.fixtures = std::make_shared<FixtureStore>(*options.fixtures_dir, FixtureMode::replay);
    channel = out.fixtures;
  } else {
    if (!network) network = std::make_shared<HttpChannel>(options.urls);
    if (options.fixture_mode == FixtureMode::record) {
      out.fixtures = std::make_shared<FixtureStore>(*options.fixtures_dir, FixtureMode::record, network);
      channel = out.fixtures;
    } else {
      channel = network;
    }
  }
  auto service = std::make_shared<ServiceClient>(channel, options.retry, options.max_in_flight);
  out.embed = std::make_shared<EmbedClient>(service, options.embed_dimension);
  out.score = std::make_shared<ScoreClient>(service);
  out.chat = std::make_shared<ChatClient>(service);
  return out;
}

}  // namespace pubrank
