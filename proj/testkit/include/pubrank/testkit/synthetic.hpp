#pragma once

// Deterministic synthetic data: PubMed-style XML, topic-structured corpora and
// BioASQ-shaped questions. Everything is a pure function of its seed.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pubrank/corpus.hpp"
#include "pubrank/dataset.hpp"
#include "pubrank/embedding.hpp"

namespace pubrank::testkit {

/// Pronounceable lowercase pseudo-word of 2..4 syllables.
std::string pseudo_word(std::mt19937_64& rng);

std::string xml_escape(std::string_view s);

enum class RecordFlaw { none, no_abstract, broken_xml, bad_pmid, missing_pmid };

struct XmlRecord {
  std::string pmid;
  std::string title;
  std::vector<std::string> abstract_sections;
  RecordFlaw flaw = RecordFlaw::none;
};

/// One <PubmedArticle> element, shaped like a MEDLINE baseline record.
std::string render_article(const XmlRecord& record);
/// Wraps records in <?xml ...?><PubmedArticleSet>.
std::string render_article_set(const std::vector<XmlRecord>& records);

struct IngestFixture {
  std::vector<XmlRecord> records;     // in stream order
  std::string xml;                    // render_article_set(records)
  std::vector<Document> survivors;    // expected output, by position of last occurrence
  IngestReport expected;
};

/// `total` records, of which `no_abstract` lack an abstract, `duplicates` repeat
/// an earlier valid pmid with new content and `malformed` are broken in assorted
/// ways. Survivors and report come from a direct simulation of the stream.
IngestFixture make_ingest_fixture(std::uint64_t seed, std::size_t total = 1000, std::size_t no_abstract = 50,
                                  std::size_t duplicates = 30, std::size_t malformed = 10);

/// A small topic-structured world: documents drawn from topic vocabularies and
/// one question per topic whose gold documents are a subset of that topic.
struct World {
  std::vector<Document> documents;
  std::vector<std::size_t> topic_of;  // parallel to documents
  std::vector<std::vector<std::string>> topic_words;
  std::vector<Question> questions;
};

struct WorldOptions {
  std::size_t topics = 20;
  std::size_t docs_per_topic = 25;
  std::size_t gold_per_question = 6;
  std::size_t words_per_topic = 14;
  std::uint64_t seed = 2025;
};

World make_world(const WorldOptions& options = {});

/// Bag-of-words random projection: sum of mock embeddings of each token,
/// L2-normalized. Texts that share words land close together.
EmbeddingVector bag_of_words_embed(std::string_view text, std::size_t dimension, std::uint64_t seed);

/// Random BioASQ-shaped questions with `per_type` of each type, gold documents,
/// snippets, exact and ideal answers filled in.
std::vector<Question> make_questions(std::size_t per_type, std::uint64_t seed);

}  // namespace pubrank::testkit
