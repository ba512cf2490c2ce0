#include "pubrank/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "binary_io.hpp"
#include "pubrank/errors.hpp"

namespace pubrank {

using nlohmann::json;

std::string_view to_string(QuestionType t) noexcept {
  switch (t) {
    case QuestionType::yesno: return "yesno";
    case QuestionType::factoid: return "factoid";
    case QuestionType::list: return "list";
    case QuestionType::summary: return "summary";
  }
  return "summary";
}

QuestionType parse_question_type(std::string_view text) {
  if (text == "yesno") return QuestionType::yesno;
  if (text == "factoid") return QuestionType::factoid;
  if (text == "list") return QuestionType::list;
  if (text == "summary") return QuestionType::summary;
  throw DataError("unknown question type '" + std::string(text) + "'");
}

bool Question::has_exact_answer() const noexcept {
  switch (type) {
    case QuestionType::yesno: return yes.has_value();
    case QuestionType::factoid:
    case QuestionType::list: return !answer_groups.empty();
    case QuestionType::summary: return false;
  }
  return false;
}

metrics::GoldSet Question::gold_set() const {
  metrics::GoldSet g;
  g.question_id = id;
  g.relevant.insert(gold_documents.begin(), gold_documents.end());
  return g;
}

std::string pmid_from_url(std::string_view url) {
  while (!url.empty() && url.back() == '/') url.remove_suffix(1);
  auto slash = url.rfind('/');
  if (slash == std::string_view::npos) return {};
  auto tail = url.substr(slash + 1);
  auto head = url.substr(0, slash);
  constexpr std::string_view kSegment = "/pubmed";
  if (head.size() < kSegment.size() || head.substr(head.size() - kSegment.size()) != kSegment) return {};
  if (!is_valid_pmid(tail)) return {};
  return std::string(tail);
}

namespace {

std::vector<std::string> string_list(const json& j, const std::string& where) {
  std::vector<std::string> out;
  if (j.is_string()) {
    out.push_back(j.get<std::string>());
  } else if (j.is_array()) {
    for (const auto& x : j) {
      if (!x.is_string()) throw DataError(where + ": expected strings");
      out.push_back(x.get<std::string>());
    }
  } else {
    throw DataError(where + ": expected a string or an array of strings");
  }
  return out;
}

AnswerGroups parse_groups(const json& j, QuestionType type, const std::string& where) {
  AnswerGroups groups;
  if (j.is_string()) {
    groups.push_back({j.get<std::string>()});
    return groups;
  }
  if (!j.is_array()) throw DataError(where + ": exact_answer must be a string or array");
  bool nested = std::any_of(j.begin(), j.end(), [](const json& x) { return x.is_array(); });
  if (nested) {
    for (const auto& g : j) groups.push_back(string_list(g, where));
  } else if (type == QuestionType::factoid) {
    // Flat factoid answers are one answer listed with its synonyms.
    groups.push_back(string_list(j, where));
  } else {
    for (const auto& x : j) groups.push_back(string_list(x, where));
  }
  std::erase_if(groups, [](const std::vector<std::string>& g) { return g.empty(); });
  return groups;
}

}  // namespace

std::vector<Question> parse_bioasq(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("BioASQ file is not valid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("questions") || !root["questions"].is_array()) {
    throw DataError("BioASQ file needs a top-level 'questions' array");
  }
  std::vector<Question> out;
  std::vector<std::string> bad_urls;
  for (const auto& jq : root["questions"]) {
    Question q;
    try {
      q.id = jq.at("id").get<std::string>();
      q.body = jq.at("body").get<std::string>();
      q.type = parse_question_type(jq.at("type").get<std::string>());
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed question entry: ") + e.what());
    }
    const std::string where = "question " + q.id;
    if (jq.contains("documents")) {
      for (const auto& url : string_list(jq["documents"], where + " documents")) {
        auto pmid = pmid_from_url(url);
        if (pmid.empty()) {
          bad_urls.push_back(q.id + ": " + url);
        } else {
          q.gold_documents.insert(pmid);
        }
      }
    }
    if (jq.contains("snippets") && jq["snippets"].is_array()) {
      for (const auto& js : jq["snippets"]) {
        if (!js.is_object() || !js.contains("text") || !js["text"].is_string()) {
          throw DataError(where + ": snippet without text");
        }
        std::string url = js.value("document", "");
        auto pmid = pmid_from_url(url);
        if (pmid.empty()) bad_urls.push_back(q.id + " (snippet): " + url);
        q.gold_snippets.push_back({pmid, js["text"].get<std::string>()});
      }
    }
    if (jq.contains("ideal_answer")) {
      auto ideal = string_list(jq["ideal_answer"], where + " ideal_answer");
      if (!ideal.empty()) q.ideal_answer = ideal.front();
    }
    if (jq.contains("exact_answer") && !jq["exact_answer"].is_null()) {
      const auto& ea = jq["exact_answer"];
      switch (q.type) {
        case QuestionType::yesno: {
          auto v = ea.is_array() && !ea.empty() ? ea.front() : ea;
          if (!v.is_string()) throw DataError(where + ": yes/no exact_answer must be a string");
          std::string s = v.get<std::string>();
          std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
          if (s == "yes") q.yes = true;
          else if (s == "no") q.yes = false;
          else throw DataError(where + ": yes/no exact_answer '" + s + "'");
          break;
        }
        case QuestionType::factoid:
        case QuestionType::list:
          q.answer_groups = parse_groups(ea, q.type, where + " exact_answer");
          break;
        case QuestionType::summary:
          break;
      }
    }
    out.push_back(std::move(q));
  }
  if (!bad_urls.empty()) {
    std::string msg = "non-PubMed document URLs:";
    for (const auto& b : bad_urls) msg += "\n  " + b;
    throw DataError(msg);
  }
  return out;
}

std::vector<Question> load_bioasq(const std::filesystem::path& path) {
  try {
    return parse_bioasq(detail::read_whole_file(path.string()));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string dump_bioasq(const std::vector<Question>& questions) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& q : questions) {
    nlohmann::ordered_json jq;
    jq["id"] = q.id;
    jq["type"] = std::string(to_string(q.type));
    jq["body"] = q.body;
    jq["documents"] = nlohmann::ordered_json::array();
    std::vector<std::string> docs(q.gold_documents.begin(), q.gold_documents.end());
    std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return pmid_less(a, b); });
    for (const auto& d : docs) jq["documents"].push_back("http://www.ncbi.nlm.nih.gov/pubmed/" + d);
    jq["snippets"] = nlohmann::ordered_json::array();
    for (const auto& s : q.gold_snippets) {
      jq["snippets"].push_back({{"document", "http://www.ncbi.nlm.nih.gov/pubmed/" + s.pmid}, {"text", s.text}});
    }
    if (q.type == QuestionType::yesno && q.yes) jq["exact_answer"] = *q.yes ? "yes" : "no";
    if ((q.type == QuestionType::factoid || q.type == QuestionType::list) && !q.answer_groups.empty()) {
      jq["exact_answer"] = q.answer_groups;
    }
    jq["ideal_answer"] = nlohmann::ordered_json::array({q.ideal_answer});
    arr.push_back(std::move(jq));
  }
  nlohmann::ordered_json root{{"questions", std::move(arr)}};
  return root.dump(2) + "\n";
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    // Unbiased draw in [0, i) by rejection.
    std::uint64_t bound = i;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(r % bound)]);
  }
  return idx;
}

Split stratified_split(const std::vector<Question>& questions, const SplitRatios& ratios, std::uint64_t seed) {
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  if (std::any_of(r.begin(), r.end(), [](double x) { return x < 0.0; }) ||
      std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw UsageError("split ratios must be non-negative and sum to 1");
  }
  Split out;
  std::array<std::vector<Question>*, 3> dest{&out.train, &out.val, &out.test};
  std::array<double, 3> cum_target{};
  std::array<std::size_t, 3> cum_assigned{};

  for (std::size_t t = 0; t < kQuestionTypes.size(); ++t) {
    auto type = kQuestionTypes[t];
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < questions.size(); ++i) {
      if (questions[i].type == type) members.push_back(i);
    }
    auto n = members.size();
    if (n == 0) continue;
    if (n < 3) {
      out.warnings.push_back(std::to_string(n) + " " + std::string(to_string(type)) +
                             " question(s): too few to split, all assigned to train");
      for (auto i : members) out.train.push_back(questions[i]);
      cum_assigned[0] += n;
      for (std::size_t s = 0; s < 3; ++s) cum_target[s] += static_cast<double>(n) * r[s];
      continue;
    }

    std::array<std::size_t, 3> counts{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      double target = static_cast<double>(n) * r[s];
      cum_target[s] += target;
      counts[s] = static_cast<std::size_t>(std::floor(target + 1e-9));
      frac[s] = target - static_cast<double>(counts[s]);
      assigned += counts[s];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::array<double, 3> deficit{};
    for (std::size_t s = 0; s < 3; ++s) deficit[s] = cum_target[s] - static_cast<double>(cum_assigned[s] + counts[s]);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (std::abs(frac[a] - frac[b]) > 1e-9) return frac[a] > frac[b];
      if (std::abs(deficit[a] - deficit[b]) > 1e-9) return deficit[a] > deficit[b];
      return a < b;
    });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];

    auto perm = seeded_permutation(n, seed ^ (0x9e3779b97f4a7c15ULL * (t + 1)));
    std::array<std::vector<std::size_t>, 3> picked;
    std::size_t at = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t c = 0; c < counts[s]; ++c) picked[s].push_back(members[perm[at++]]);
      std::sort(picked[s].begin(), picked[s].end());
      cum_assigned[s] += counts[s];
    }
    for (std::size_t s = 0; s < 3; ++s) {
      for (auto i : picked[s]) dest[s]->push_back(questions[i]);
    }
  }
  return out;
}

std::vector<TrainingPair> mine_hard_negatives(const Question& question, const RankedRun& retrieved,
                                              std::size_t depth) {
  std::vector<TrainingPair> pairs;
  if (question.gold_documents.empty()) return pairs;
  for (const auto& pmid : question.gold_documents) {
    pairs.push_back({question.id, pmid, question.body, {}, 1});
  }
  auto n = std::min(depth, retrieved.items.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pmid = retrieved.items[i].pmid;
    if (question.gold_documents.count(pmid) == 0) pairs.push_back({question.id, pmid, question.body, {}, 0});
  }
  std::sort(pairs.begin(), pairs.end(), [](const TrainingPair& a, const TrainingPair& b) {
    if (a.label != b.label) return a.label > b.label;
    return pmid_less(a.pmid, b.pmid);
  });
  pairs.erase(std::unique(pairs.begin(), pairs.end(),
                          [](const TrainingPair& a, const TrainingPair& b) { return a.pmid == b.pmid; }),
              pairs.end());
  return pairs;
}

std::vector<Question> filter_recent(const std::vector<Question>& questions, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) throw UsageError("cutoff fraction must be in (0, 1]");
  auto n = questions.size();
  auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  keep = std::min(keep, n);
  return {questions.end() - static_cast<std::ptrdiff_t>(keep), questions.end()};
}

std::vector<Question> sample_fewshot(const std::vector<Question>& pool, QuestionType type, std::size_t n,
                                     std::uint64_t seed) {
  if (n == 0) throw UsageError("few-shot sample size must be at least 1");
  std::vector<const Question*> candidates;
  for (const auto& q : pool) {
    if (q.type == type) candidates.push_back(&q);
  }
  if (candidates.size() < n) {
    throw UsageError("few-shot pool has " + std::to_string(candidates.size()) + " " + std::string(to_string(type)) +
                     " question(s), " + std::to_string(n) + " requested");
  }
  auto perm = seeded_permutation(candidates.size(), seed);
  std::vector<Question> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(*candidates[perm[i]]);
  return out;
}

std::string format_pairs_tsv(const std::vector<TrainingPair>& pairs) {
  auto clean = [](std::string s) {
    for (auto& c : s) {
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return s;
  };
  std::string out;
  for (const auto& p : pairs) {
    out += clean(p.question_id) + '\t' + p.pmid + '\t' + std::to_string(p.label) + '\t' + clean(p.question_text) +
           '\t' + clean(p.doc_text) + '\n';
  }
  return out;
}

}  // namespace pubrank
