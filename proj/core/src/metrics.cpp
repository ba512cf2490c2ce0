#include "pubrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "pubrank/errors.hpp"
#include "pubrank/text.hpp"

namespace pubrank::metrics {

namespace {

double ratio(double num, double den) noexcept { return den == 0.0 ? 0.0 : num / den; }

double harmonic(double p, double r) noexcept { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

void require_gold(const GoldSet& gold) {
  if (gold.relevant.empty()) throw UsageError("question " + gold.question_id + " has no golden documents");
}

bool matches_any(const std::string& normalized, const std::vector<std::string>& group) {
  return std::find(group.begin(), group.end(), normalized) != group.end();
}

}  // namespace

double recall_at_n(const RankedRun& run, const GoldSet& gold, std::size_t n) {
  require_gold(gold);
  std::size_t hit = 0;
  std::unordered_set<std::string_view> counted;
  auto top = std::min(n, run.items.size());
  for (std::size_t i = 0; i < top; ++i) {
    const auto& pmid = run.items[i].pmid;
    if (gold.relevant.count(pmid) != 0 && counted.insert(pmid).second) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(gold.relevant.size());
}

double average_precision_at10(const RankedRun& run, const GoldSet& gold) {
  require_gold(gold);
  require_unique_pmids(run);
  auto len = std::min<std::size_t>(10, run.items.size());
  double sum = 0.0;
  std::size_t relevant_so_far = 0;
  for (std::size_t r = 1; r <= len; ++r) {
    if (gold.relevant.count(run.items[r - 1].pmid) == 0) continue;
    ++relevant_so_far;
    sum += static_cast<double>(relevant_so_far) / static_cast<double>(r);
  }
  auto denom = std::min<std::size_t>(gold.relevant.size(), 10);
  return sum / static_cast<double>(denom);
}

double map_at10(std::span<const RankedRun> runs, const std::map<std::string, GoldSet>& golds) {
  std::vector<std::string> missing;
  std::unordered_set<std::string_view> run_ids;
  for (const auto& run : runs) {
    run_ids.insert(run.question_id);
    if (golds.count(run.question_id) == 0) missing.push_back(run.question_id);
  }
  for (const auto& [id, gold] : golds) {
    if (run_ids.count(id) == 0) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw UsageError("runs and gold disagree on question ids: " + list);
  }
  std::vector<double> aps;
  aps.reserve(runs.size());
  for (const auto& run : runs) aps.push_back(average_precision_at10(run, golds.at(run.question_id)));
  return stable_mean(aps);
}

FactoidGold make_factoid_gold(const std::vector<std::vector<std::string>>& raw_groups) {
  FactoidGold gold;
  for (const auto& group : raw_groups) {
    std::vector<std::string> normalized;
    for (const auto& syn : group) {
      auto n = text::normalize_answer(syn);
      if (!n.empty() && !matches_any(n, normalized)) normalized.push_back(std::move(n));
    }
    if (!normalized.empty()) gold.synonym_groups.push_back(std::move(normalized));
  }
  return gold;
}

double reciprocal_rank(std::span<const std::string> predicted, const FactoidGold& gold) {
  for (std::size_t r = 0; r < predicted.size(); ++r) {
    auto p = text::normalize_answer(predicted[r]);
    for (const auto& group : gold.synonym_groups) {
      if (matches_any(p, group)) return 1.0 / static_cast<double>(r + 1);
    }
  }
  return 0.0;
}

YesNoScores macro_f1_yesno(std::span<const std::optional<YesNo>> predicted, std::span<const YesNo> gold) {
  if (predicted.size() != gold.size()) throw UsageError("yes/no predictions and gold differ in length");
  auto f1_for = [&](YesNo positive) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      bool pred_pos = predicted[i].has_value() && *predicted[i] == positive;
      bool gold_pos = gold[i] == positive;
      if (pred_pos && gold_pos) ++tp;
      else if (pred_pos) ++fp;
      else if (gold_pos) ++fn;
    }
    double p = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
    double r = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
    return harmonic(p, r);
  };
  YesNoScores s;
  s.f1_yes = f1_for(YesNo::yes);
  s.f1_no = f1_for(YesNo::no);
  s.macro_f1 = (s.f1_yes + s.f1_no) / 2.0;
  return s;
}

PrfScore list_f1(std::span<const std::string> predicted, const FactoidGold& gold) {
  std::vector<bool> claimed(gold.synonym_groups.size(), false);
  std::size_t tp = 0;
  for (const auto& raw : predicted) {
    auto p = text::normalize_answer(raw);
    for (std::size_t g = 0; g < gold.synonym_groups.size(); ++g) {
      if (!claimed[g] && matches_any(p, gold.synonym_groups[g])) {
        claimed[g] = true;
        ++tp;
        break;
      }
    }
  }
  PrfScore s;
  s.precision = ratio(static_cast<double>(tp), static_cast<double>(predicted.size()));
  s.recall = ratio(static_cast<double>(tp), static_cast<double>(gold.synonym_groups.size()));
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

std::vector<std::string> rouge_tokenize(std::string_view input) {
  std::vector<std::string> tokens;
  for (auto raw : text::split_whitespace(input)) {
    std::string tok;
    for (char c : raw) {
      auto u = static_cast<unsigned char>(c);
      if (u >= 0x80 || std::isalnum(u) != 0 || c == '-') {
        tok.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
      }
    }
    auto b = tok.find_first_not_of('-');
    if (b == std::string::npos) continue;
    auto e = tok.find_last_not_of('-');
    tokens.push_back(tok.substr(b, e - b + 1));
  }
  return tokens;
}

namespace {

using UnitKey = std::pair<std::uint32_t, std::uint32_t>;
constexpr std::uint32_t kUnigram = 0xFFFFFFFFu;

struct PairHash {
  std::size_t operator()(const UnitKey& k) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(k.first) << 32) | k.second);
  }
};

using UnitCounts = std::unordered_map<UnitKey, std::size_t, PairHash>;

struct Vocabulary {
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::uint32_t> encode(std::span<const std::string> tokens) {
    std::vector<std::uint32_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
      auto [it, fresh] = ids.emplace(t, static_cast<std::uint32_t>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  }
};

// max_gap = 1 yields plain bigrams.
UnitCounts count_units(const std::vector<std::uint32_t>& ids, std::size_t max_gap, bool unigrams) {
  UnitCounts counts;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (unigrams) ++counts[{ids[i], kUnigram}];
    for (std::size_t j = i + 1; j < ids.size() && j - i <= max_gap; ++j) ++counts[{ids[i], ids[j]}];
  }
  return counts;
}

std::size_t total(const UnitCounts& c) {
  std::size_t t = 0;
  for (const auto& [k, v] : c) t += v;
  return t;
}

RougeScore score_units(const UnitCounts& cand, const UnitCounts& ref) {
  std::size_t overlap = 0;
  for (const auto& [unit, n] : cand) {
    if (auto it = ref.find(unit); it != ref.end()) overlap += std::min(n, it->second);
  }
  RougeScore s;
  s.recall = ratio(static_cast<double>(overlap), static_cast<double>(total(ref)));
  s.precision = ratio(static_cast<double>(overlap), static_cast<double>(total(cand)));
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

RougeScore rouge_units(std::span<const std::string> candidate, std::span<const std::string> reference,
                       std::size_t max_gap, bool unigrams) {
  Vocabulary vocab;
  auto c = vocab.encode(candidate);
  auto r = vocab.encode(reference);
  return score_units(count_units(c, max_gap, unigrams), count_units(r, max_gap, unigrams));
}

}  // namespace

RougeScore rouge_2_tokens(std::span<const std::string> candidate, std::span<const std::string> reference) {
  return rouge_units(candidate, reference, 1, false);
}

RougeScore rouge_su4_tokens(std::span<const std::string> candidate, std::span<const std::string> reference) {
  return rouge_units(candidate, reference, 4, true);
}

RougeScore rouge_2(std::string_view candidate, std::string_view reference) {
  auto c = rouge_tokenize(candidate);
  auto r = rouge_tokenize(reference);
  return rouge_2_tokens(c, r);
}

RougeScore rouge_su4(std::string_view candidate, std::string_view reference) {
  auto c = rouge_tokenize(candidate);
  auto r = rouge_tokenize(reference);
  return rouge_su4_tokens(c, r);
}

double stable_sum(std::span<const double> values) noexcept {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

double stable_mean(std::span<const double> values) noexcept {
  if (values.empty()) return 0.0;
  return stable_sum(values) / static_cast<double>(values.size());
}

}  // namespace pubrank::metrics
