#include "pubrank/rerank.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "pubrank/errors.hpp"
#include "pubrank/text.hpp"

namespace pubrank::rerank {

RankedRun pointwise_rerank(const Question& question, const RankedRun& candidates, const DocumentStore& docs,
                           const ScoreClient& scorer, const PointwiseOptions& options) {
  if (candidates.items.empty()) throw UsageError("question " + question.id + ": no candidates to re-rank");
  if (options.k == 0 || options.batch_size == 0) throw UsageError("pointwise k and batch size must be positive");
  require_unique_pmids(candidates);

  std::vector<RunItem> scored;
  scored.reserve(candidates.items.size());
  try {
    for (std::size_t i = 0; i < candidates.items.size(); i += options.batch_size) {
      auto n = std::min(options.batch_size, candidates.items.size() - i);
      std::vector<std::pair<std::string, std::string>> batch;
      batch.reserve(n);
      for (std::size_t j = i; j < i + n; ++j) {
        const auto& pmid = candidates.items[j].pmid;
        batch.emplace_back(pmid, document_text(docs.at(pmid)));
      }
      for (auto& s : scorer.score_pairs(question.body, batch)) scored.push_back({std::move(s.pmid), s.score});
    }
  } catch (const UpstreamError& e) {
    throw UpstreamError("question " + question.id + ": scoring failed: " + e.what(), e.retryable());
  }
  sort_by_score(scored);
  if (scored.size() > options.k) scored.resize(options.k);
  return RankedRun{question.id, Stage::crossencoder, std::move(scored)};
}

namespace {

constexpr std::string_view kListwiseSystem =
    "You are a biomedical literature search assistant. You rank PubMed abstracts by how well they help answer a "
    "question.";

}  // namespace

std::vector<ChatMessage> build_listwise_prompt(const Question& question, const RankedRun& top,
                                               const DocumentStore& docs, const ListwiseOptions& options) {
  if (top.items.empty()) throw UsageError("question " + question.id + ": listwise prompt needs candidates");
  if (top.items.size() > 30) throw UsageError("question " + question.id + ": listwise prompt takes at most 30 candidates");
  if (options.want == 0) throw UsageError("listwise prompt must ask for at least one candidate");

  auto n = top.items.size();
  auto ask = std::min(options.want, n);
  std::string user = "Question: " + question.body + "\n\nCandidate documents:\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& doc = docs.at(top.items[i].pmid);
    std::string entry = doc.title + " — " + doc.abstract;
    if (text::utf8_length(entry) > options.doc_char_budget) {
      entry = std::string(text::utf8_prefix(entry, options.doc_char_budget));
    }
    user += "[" + std::to_string(i + 1) + "] " + entry + "\n";
  }
  user += "\nRank the candidates by relevance to the question. Output exactly the " + std::to_string(ask) +
          " most relevant candidate numbers, most relevant first, as a bracketed comma-separated list such as [" +
          (n >= 2 ? "2, 1" : "1") + "] and nothing else.";
  return {ChatMessage{Role::system, std::string(kListwiseSystem)}, ChatMessage{Role::user, std::move(user)}};
}

std::vector<std::size_t> parse_listwise_response(std::string_view raw, std::size_t candidate_count,
                                                 std::size_t want) {
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };

  for (std::size_t open = raw.find('['); open != std::string_view::npos; open = raw.find('[', open + 1)) {
    std::vector<std::size_t> numbers;
    std::size_t i = open + 1;
    bool ok = false;
    while (true) {
      while (i < raw.size() && is_ws(raw[i])) ++i;
      if (i >= raw.size() || !is_digit(raw[i])) break;
      std::size_t value = 0;
      bool overflow = false;
      while (i < raw.size() && is_digit(raw[i])) {
        if (value > 1'000'000) overflow = true;
        value = value * 10 + static_cast<std::size_t>(raw[i] - '0');
        ++i;
      }
      numbers.push_back(overflow ? 0 : value);
      while (i < raw.size() && is_ws(raw[i])) ++i;
      if (i < raw.size() && raw[i] == ',') {
        ++i;
        continue;
      }
      if (i < raw.size() && raw[i] == ']') ok = true;
      break;
    }
    if (!ok) continue;

    std::vector<std::size_t> out;
    std::unordered_set<std::size_t> seen;
    for (auto v : numbers) {
      if (out.size() >= want) break;
      if (v < 1 || v > candidate_count) continue;
      if (!seen.insert(v).second) continue;
      out.push_back(v);
    }
    return out;
  }
  return {};
}

std::string ListwiseExchange::to_json() const {
  nlohmann::ordered_json j;
  j["question_id"] = question_id;
  j["prompt"] = nlohmann::ordered_json::parse(messages_to_json(prompt));
  j["raw_response"] = raw_response;
  j["parsed_order"] = parsed_order;
  j["fallback_fill"] = fallback_fill;
  return j.dump(2);
}

ListwiseResult llm_rerank(const Question& question, const RankedRun& top, const DocumentStore& docs,
                          const ChatClient& chat, std::size_t k, const ListwiseOptions& options) {
  if (k == 0) throw UsageError("llm_rerank k must be at least 1");
  require_unique_pmids(top);
  ListwiseOptions opts = options;
  opts.want = k;

  ListwiseResult result;
  result.exchange.question_id = question.id;
  result.exchange.prompt = build_listwise_prompt(question, top, docs, opts);
  try {
    result.exchange.raw_response = chat.chat(result.exchange.prompt);
  } catch (const UpstreamError& e) {
    throw UpstreamError("question " + question.id + ": listwise re-rank failed: " + e.what(), e.retryable());
  }
  result.exchange.parsed_order = parse_listwise_response(result.exchange.raw_response, top.items.size(), k);

  auto target = std::min(k, top.items.size());
  std::vector<std::string> chosen;
  std::unordered_set<std::string> taken;
  for (auto ordinal : result.exchange.parsed_order) {
    const auto& pmid = top.items[ordinal - 1].pmid;
    if (taken.insert(pmid).second) chosen.push_back(pmid);
  }
  for (const auto& item : top.items) {
    if (chosen.size() >= target) break;
    if (taken.insert(item.pmid).second) {
      chosen.push_back(item.pmid);
      ++result.exchange.fallback_fill;
    }
  }
  result.run.question_id = question.id;
  result.run.stage = Stage::llm;
  for (std::size_t r = 0; r < chosen.size(); ++r) {
    result.run.items.push_back({chosen[r], static_cast<double>(k - r)});
  }
  return result;
}

void write_audit(const std::filesystem::path& dir, const ListwiseExchange& exchange) {
  std::filesystem::create_directories(dir);
  auto path = dir / (exchange.question_id + ".json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write audit file " + path.string());
  out << exchange.to_json() << '\n';
}

}  // namespace pubrank::rerank
