#include <sstream>

#include <gtest/gtest.h>
#include <zlib.h>

#include "pubrank/corpus.hpp"
#include "pubrank/errors.hpp"
#include "pubrank/files.hpp"
#include "pubrank/testkit/e2e.hpp"
#include "pubrank/testkit/synthetic.hpp"

using namespace pubrank;
using testkit::RecordFlaw;
using testkit::XmlRecord;

namespace {

XmlRecord rec(std::string pmid, std::string title, std::vector<std::string> abstract,
              RecordFlaw flaw = RecordFlaw::none) {
  return {std::move(pmid), std::move(title), std::move(abstract), flaw};
}

Ingestor ingest(const std::string& xml) {
  Ingestor ing;
  ing.feed(xml);
  ing.end_of_stream();
  return ing;
}

}  // namespace

TEST(ParseArticle, JoinsSectionsAndCollapsesWhitespace) {
  auto r = parse_pubmed_article(testkit::render_article(rec("123", "A  title\n here", {"First  part.", "Second\tpart."})));
  ASSERT_EQ(r.status, ParsedRecord::Status::ok);
  EXPECT_EQ(r.doc.pmid, "123");
  EXPECT_EQ(r.doc.title, "A title here");
  EXPECT_EQ(r.doc.abstract, "First part. Second part.");
}

TEST(ParseArticle, DecodesEntitiesAndIgnoresNestedPmids) {
  auto r = parse_pubmed_article(testkit::render_article(rec("77", "IL-6 & TNF-\xCE\xB1 <p < 0.05>", {"x"})));
  ASSERT_EQ(r.status, ParsedRecord::Status::ok);
  EXPECT_EQ(r.doc.pmid, "77");
  EXPECT_EQ(r.doc.title, "IL-6 & TNF-\xCE\xB1 <p < 0.05>");
}

TEST(ParseArticle, Flaws) {
  EXPECT_EQ(parse_pubmed_article(testkit::render_article(rec("1", "t", {""}))).status,
            ParsedRecord::Status::no_abstract);
  EXPECT_EQ(parse_pubmed_article(testkit::render_article(rec("1", "t", {}, RecordFlaw::no_abstract))).status,
            ParsedRecord::Status::no_abstract);
  EXPECT_EQ(parse_pubmed_article(testkit::render_article(rec("1", "t", {"a"}, RecordFlaw::broken_xml))).status,
            ParsedRecord::Status::malformed);
  EXPECT_EQ(parse_pubmed_article(testkit::render_article(rec("1", "t", {"a"}, RecordFlaw::bad_pmid))).status,
            ParsedRecord::Status::malformed);
  EXPECT_EQ(parse_pubmed_article(testkit::render_article(rec("1", "t", {"a"}, RecordFlaw::missing_pmid))).status,
            ParsedRecord::Status::malformed);
}

TEST(Ingestor, DuplicateIsLastWins) {
  auto ing = ingest(testkit::render_article_set({rec("123", "first", {"a"}), rec("5", "other", {"b"}),
                                                 rec("123", "second", {"c"})}));
  EXPECT_EQ(ing.report().kept, 2u);
  EXPECT_EQ(ing.report().dropped_duplicate, 1u);
  auto docs = ing.documents();
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].pmid, "5");
  EXPECT_EQ(docs[1].title, "second");
}

TEST(Ingestor, MalformedRecordDoesNotStopTheStream) {
  auto ing = ingest(testkit::render_article_set(
      {rec("1", "t", {"a"}, RecordFlaw::broken_xml), rec("2", "t", {"b"}), rec("3", "", {"c"})}));
  EXPECT_EQ(ing.report().dropped_malformed, 1u);
  EXPECT_EQ(ing.report().kept, 2u);
  EXPECT_EQ(ing.report().empty_title, 1u);
  EXPECT_TRUE(ing.report().reconciles());
}

TEST(Ingestor, DanglingRecordIsMalformed) {
  auto xml = testkit::render_article_set({rec("1", "t", {"a"})});
  xml += "<PubmedArticle><MedlineCitation><PMID>9</PMID>";
  auto ing = ingest(xml);
  EXPECT_EQ(ing.report().records_seen, 2u);
  EXPECT_EQ(ing.report().dropped_malformed, 1u);
}

TEST(Ingestor, ChunkBoundariesDoNotMatter) {
  auto fx = testkit::make_ingest_fixture(3, 200, 10, 6, 4);
  auto whole = ingest(fx.xml);
  for (std::size_t chunk : {1u, 7u, 64u, 4093u}) {
    Ingestor ing;
    for (std::size_t i = 0; i < fx.xml.size(); i += chunk) ing.feed(std::string_view(fx.xml).substr(i, chunk));
    ing.end_of_stream();
    EXPECT_EQ(ing.documents(), whole.documents()) << "chunk " << chunk;
    EXPECT_EQ(ing.report().kept, whole.report().kept);
  }
  EXPECT_EQ(whole.documents(), fx.survivors);
}

TEST(Ingestor, GzipAndPlainInputsAgree) {
  testkit::TempDir tmp;
  auto fx = testkit::make_ingest_fixture(4, 120, 5, 5, 5);
  auto plain = tmp.path() / "a.xml";
  auto gz = tmp.path() / "a.xml.gz";
  write_file(plain, fx.xml);
  gzFile f = gzopen(gz.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  gzwrite(f, fx.xml.data(), static_cast<unsigned>(fx.xml.size()));
  gzclose(f);
  Ingestor a, b;
  a.add_file(plain);
  b.add_file(gz);
  EXPECT_EQ(a.documents(), b.documents());
  EXPECT_EQ(a.documents(), fx.survivors);
  EXPECT_THROW(a.add_file(tmp.path() / "missing.xml"), DataError);
}

TEST(Ingestor, IdempotentOutput) {
  auto fx = testkit::make_ingest_fixture(5, 150, 5, 5, 5);
  std::ostringstream first, second;
  ingest(fx.xml).write(first);
  ingest(fx.xml).write(second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(IngestFiles, DirectoryOrderIsByName) {
  testkit::TempDir tmp;
  write_file(tmp.path() / "b.xml", testkit::render_article_set({rec("1", "from b", {"x"})}));
  write_file(tmp.path() / "a.xml", testkit::render_article_set({rec("1", "from a", {"x"})}));
  write_file(tmp.path() / "notes.txt", "ignored");
  auto report = ingest_files({tmp.path()}, tmp.path() / "corpus.jsonl");
  EXPECT_EQ(report.kept, 1u);
  EXPECT_EQ(report.dropped_duplicate, 1u);
  auto docs = read_corpus(tmp.path() / "corpus.jsonl");
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].title, "from b");
}

TEST(CorpusReader, Examples) {
  std::istringstream three(corpus_line({"1", "a", "x"}) + "\n" + corpus_line({"2", "", "y"}) + "\n" +
                           corpus_line({"3", "c", "z"}) + "\n");
  auto docs = read_corpus(three);
  ASSERT_EQ(docs.size(), 3u);
  EXPECT_EQ(docs[1].pmid, "2");

  std::istringstream empty("");
  EXPECT_TRUE(read_corpus(empty).empty());

  std::istringstream bad(corpus_line({"1", "a", "x"}) + "\n" + R"({"pmid": "2", "title": "t", "abstract": ""})" + "\n");
  try {
    read_corpus(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(CorpusReader, RejectsDuplicatesAndBadPmids) {
  std::istringstream dup(corpus_line({"1", "a", "x"}) + "\n" + corpus_line({"1", "b", "y"}) + "\n");
  EXPECT_THROW(read_corpus(dup), DataError);
  std::istringstream pm(R"({"pmid": "1a", "title": "t", "abstract": "x"})" "\n");
  EXPECT_THROW(read_corpus(pm), DataError);
}

TEST(Document, Text) {
  EXPECT_EQ(document_text({"1", "Title", "Abstract"}), "Title Abstract");
  EXPECT_EQ(document_text({"1", "", "Abstract"}), "Abstract");
}
