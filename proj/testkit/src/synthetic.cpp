#include "pubrank/testkit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "pubrank/metrics.hpp"
#include "pubrank/text.hpp"

namespace pubrank::testkit {

namespace {

constexpr const char* kOnsets[] = {"b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                   "br", "cl", "dr", "gr", "pl", "st", "tr", "ph", "th"};
constexpr const char* kNuclei[] = {"a", "e", "i", "o", "u", "ae", "io", "ou", "y"};
constexpr const char* kCodas[] = {"", "", "", "n", "r", "s", "l", "x", "m", "t"};

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words{
      "the",      "of",        "and",      "in",      "patients", "with",   "was",       "were",
      "study",    "results",   "we",       "for",     "to",       "a",      "clinical",  "effect",
      "analysis", "increased", "reduced",  "cohort",  "observed", "levels", "treatment", "risk",
      "response", "associated", "compared", "group",  "data",     "model",  "expression", "significant"};
  return words;
}

template <typename T, std::size_t N>
const T& pick(std::mt19937_64& rng, const T (&arr)[N]) {
  return arr[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string hex_id(std::mt19937_64& rng) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id(24, '0');
  for (auto& c : id) c = kHex[uniform(rng, 0, 15)];
  return id;
}

}  // namespace

std::string pseudo_word(std::mt19937_64& rng) {
  std::string w;
  auto syllables = uniform(rng, 2, 4);
  for (std::size_t i = 0; i < syllables; ++i) {
    w += pick(rng, kOnsets);
    w += pick(rng, kNuclei);
  }
  w += pick(rng, kCodas);
  return w;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string render_article(const XmlRecord& r) {
  std::string x = "<PubmedArticle>\n  <MedlineCitation Status=\"MEDLINE\" Owner=\"NLM\">\n";
  switch (r.flaw) {
    case RecordFlaw::missing_pmid: break;
    case RecordFlaw::bad_pmid: x += "    <PMID Version=\"1\">" + r.pmid + "x7</PMID>\n"; break;
    default: x += "    <PMID Version=\"1\">" + r.pmid + "</PMID>\n";
  }
  x += "    <DateCompleted><Year>2021</Year><Month>03</Month><Day>14</Day></DateCompleted>\n";
  x += "    <Article PubModel=\"Print\">\n";
  x += "      <Journal><Title>Journal of Synthetic Medicine</Title></Journal>\n";
  if (r.flaw == RecordFlaw::broken_xml) {
    x += "      <ArticleTitle>" + xml_escape(r.title) + "</Article>\n";
  } else {
    x += "      <ArticleTitle>" + xml_escape(r.title) + "</ArticleTitle>\n";
  }
  if (r.flaw != RecordFlaw::no_abstract) {
    x += "      <Abstract>\n";
    static constexpr const char* kLabels[] = {"BACKGROUND", "METHODS", "RESULTS", "CONCLUSIONS"};
    for (std::size_t i = 0; i < r.abstract_sections.size(); ++i) {
      x += "        <AbstractText Label=\"" + std::string(kLabels[i % 4]) + "\">" +
           xml_escape(r.abstract_sections[i]) + "</AbstractText>\n";
    }
    x += "      </Abstract>\n";
  }
  x += "      <AuthorList><Author><LastName>Doe</LastName><ForeName>J</ForeName></Author></AuthorList>\n";
  x += "    </Article>\n";
  // A nested PMID that must not be mistaken for the record's own.
  x += "    <CommentsCorrectionsList><CommentsCorrections RefType=\"Cites\"><PMID Version=\"1\">1</PMID>"
       "</CommentsCorrections></CommentsCorrectionsList>\n";
  x += "  </MedlineCitation>\n";
  x += "  <PubmedData><ArticleIdList><ArticleId IdType=\"pubmed\">" + r.pmid +
       "</ArticleId></ArticleIdList></PubmedData>\n";
  x += "</PubmedArticle>\n";
  return x;
}

std::string render_article_set(const std::vector<XmlRecord>& records) {
  std::string x = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<PubmedArticleSet>\n";
  for (const auto& r : records) x += render_article(r);
  x += "</PubmedArticleSet>\n";
  return x;
}

IngestFixture make_ingest_fixture(std::uint64_t seed, std::size_t total, std::size_t no_abstract,
                                  std::size_t duplicates, std::size_t malformed) {
  std::mt19937_64 rng(seed);
  auto sentence = [&](std::size_t words) {
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
      if (!s.empty()) s += ' ';
      s += uniform(rng, 0, 2) == 0 ? filler_words()[uniform(rng, 0, filler_words().size() - 1)] : pseudo_word(rng);
    }
    return s + ".";
  };
  auto make_valid = [&](const std::string& pmid, std::size_t serial) {
    XmlRecord r;
    r.pmid = pmid;
    r.title = capitalize(sentence(uniform(rng, 4, 9)));
    if (serial % 7 == 0) r.title += " IL-6 & TNF-\xCE\xB1 <p < 0.05>";
    if (serial % 97 == 0) r.title.clear();
    auto sections = uniform(rng, 1, 4);
    for (std::size_t i = 0; i < sections; ++i) r.abstract_sections.push_back(sentence(uniform(rng, 8, 30)));
    return r;
  };

  std::size_t unique_valid = total - no_abstract - duplicates - malformed;
  std::vector<XmlRecord> records;
  std::uint64_t next_pmid = 30000000;
  std::vector<std::string> valid_pmids;
  for (std::size_t i = 0; i < unique_valid; ++i) {
    next_pmid += uniform(rng, 1, 4000);
    valid_pmids.push_back(std::to_string(next_pmid));
    records.push_back(make_valid(valid_pmids.back(), records.size()));
  }
  for (std::size_t i = 0; i < no_abstract; ++i) {
    next_pmid += uniform(rng, 1, 4000);
    auto r = make_valid(std::to_string(next_pmid), records.size());
    r.flaw = RecordFlaw::no_abstract;
    records.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < malformed; ++i) {
    next_pmid += uniform(rng, 1, 4000);
    auto r = make_valid(std::to_string(next_pmid), records.size());
    static constexpr RecordFlaw kFlaws[] = {RecordFlaw::broken_xml, RecordFlaw::bad_pmid, RecordFlaw::missing_pmid};
    r.flaw = kFlaws[i % 3];
    records.push_back(std::move(r));
  }
  std::shuffle(records.begin(), records.end(), rng);
  // Duplicates reuse distinct earlier pmids; inserted after their original.
  std::vector<std::string> pool = valid_pmids;
  std::shuffle(pool.begin(), pool.end(), rng);
  for (std::size_t i = 0; i < duplicates; ++i) {
    const auto& pmid = pool[i];
    auto original = std::find_if(records.begin(), records.end(), [&](const XmlRecord& r) { return r.pmid == pmid; });
    auto first_after = static_cast<std::size_t>(original - records.begin()) + 1;
    auto at = uniform(rng, first_after, records.size());
    records.insert(records.begin() + static_cast<std::ptrdiff_t>(at), make_valid(pmid, records.size() + 1));
  }

  IngestFixture fx;
  fx.records = records;
  fx.xml = render_article_set(records);
  std::map<std::string, std::pair<std::size_t, Document>> last;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    ++fx.expected.records_seen;
    if (r.flaw == RecordFlaw::broken_xml || r.flaw == RecordFlaw::bad_pmid || r.flaw == RecordFlaw::missing_pmid) {
      ++fx.expected.dropped_malformed;
      continue;
    }
    if (r.flaw == RecordFlaw::no_abstract) {
      ++fx.expected.dropped_no_abstract;
      continue;
    }
    std::string abstract;
    for (const auto& s : r.abstract_sections) abstract += (abstract.empty() ? "" : " ") + s;
    Document d{r.pmid, text::collapse_whitespace(r.title), text::collapse_whitespace(abstract)};
    auto [it, inserted] = last.try_emplace(r.pmid, i, d);
    if (!inserted) {
      ++fx.expected.dropped_duplicate;
      it->second = {i, d};
    }
  }
  std::vector<std::pair<std::size_t, Document>> ordered;
  for (auto& [pmid, v] : last) ordered.push_back(v);
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [pos, d] : ordered) {
    if (d.title.empty()) ++fx.expected.empty_title;
    fx.survivors.push_back(std::move(d));
  }
  fx.expected.kept = fx.survivors.size();
  return fx;
}

World make_world(const WorldOptions& o) {
  std::mt19937_64 rng(o.seed);
  World w;
  std::set<std::string> used(filler_words().begin(), filler_words().end());
  for (std::size_t t = 0; t < o.topics; ++t) {
    std::vector<std::string> words;
    while (words.size() < o.words_per_topic) {
      auto cand = pseudo_word(rng);
      if (used.insert(cand).second) words.push_back(cand);
    }
    w.topic_words.push_back(std::move(words));
  }

  auto topic_sentence = [&](std::size_t t, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      if (!s.empty()) s += ' ';
      if (uniform(rng, 0, 99) < 55) {
        s += w.topic_words[t][uniform(rng, 0, w.topic_words[t].size() - 1)];
      } else {
        s += filler_words()[uniform(rng, 0, filler_words().size() - 1)];
      }
    }
    return capitalize(s) + ".";
  };

  std::uint64_t pmid = 20000000;
  std::vector<std::size_t> order(o.topics * o.docs_per_topic);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i % o.topics;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t serial = 0; serial < order.size(); ++serial) {
    auto t = order[serial];
    pmid += uniform(rng, 1, 500);
    Document d;
    d.pmid = std::to_string(pmid);
    d.title = capitalize(w.topic_words[t][uniform(rng, 0, 3)]) + " and " +
              w.topic_words[t][uniform(rng, 4, 7)] + " in cohort " + std::to_string(serial + 1);
    d.abstract = topic_sentence(t, 12) + " " + topic_sentence(t, 14) + " " + topic_sentence(t, 10);
    w.documents.push_back(std::move(d));
    w.topic_of.push_back(t);
  }

  for (std::size_t t = 0; t < o.topics; ++t) {
    const auto& tw = w.topic_words[t];
    Question q;
    q.id = hex_id(rng);
    q.type = kQuestionTypes[t % 4];
    switch (q.type) {
      case QuestionType::yesno: q.body = "Is " + tw[0] + " associated with " + tw[1] + " " + tw[2] + "?"; break;
      case QuestionType::factoid: q.body = "What is the role of " + tw[0] + " in " + tw[1] + " " + tw[2] + "?"; break;
      case QuestionType::list: q.body = "Which " + tw[0] + " factors are linked to " + tw[1] + " " + tw[2] + "?"; break;
      case QuestionType::summary: q.body = "Describe the function of " + tw[0] + " in " + tw[1] + " " + tw[2] + "."; break;
    }
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < w.documents.size(); ++i) {
      if (w.topic_of[i] == t) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    auto n_gold = std::min(o.gold_per_question, members.size());
    for (std::size_t g = 0; g < n_gold; ++g) {
      const auto& d = w.documents[members[g]];
      q.gold_documents.insert(d.pmid);
      if (g < 3) q.gold_snippets.push_back({d.pmid, d.abstract.substr(0, d.abstract.find('.') + 1)});
    }
    switch (q.type) {
      case QuestionType::yesno: q.yes = (t / 4) % 2 == 0; break;
      case QuestionType::factoid: q.answer_groups = {{tw[8], tw[8] + "-1"}, {tw[9]}}; break;
      case QuestionType::list: q.answer_groups = {{tw[8]}, {tw[9], tw[9] + " protein"}, {tw[10]}}; break;
      case QuestionType::summary: break;
    }
    q.ideal_answer = capitalize(tw[0]) + " regulates " + tw[1] + " " + tw[2] + " through " + tw[8] + " and " +
                     tw[9] + " in most " + tw[3] + " cohorts.";
    w.questions.push_back(std::move(q));
  }
  return w;
}

EmbeddingVector bag_of_words_embed(std::string_view text, std::size_t dimension, std::uint64_t seed) {
  auto tokens = metrics::rouge_tokenize(text);
  if (tokens.empty()) return mock_embed(text, dimension, seed);
  std::vector<double> acc(dimension, 0.0);
  for (const auto& tok : tokens) {
    auto v = mock_embed(tok, dimension, seed);
    for (std::size_t i = 0; i < dimension; ++i) acc[i] += v[i];
  }
  EmbeddingVector out(dimension);
  for (std::size_t i = 0; i < dimension; ++i) out[i] = static_cast<float>(acc[i]);
  l2_normalize(out);
  return out;
}

std::vector<Question> make_questions(std::size_t per_type, std::uint64_t seed) {
  WorldOptions o;
  o.topics = per_type * 4;
  o.docs_per_topic = 8;
  o.gold_per_question = 5;
  o.seed = seed;
  return make_world(o).questions;
}

}  // namespace pubrank::testkit
