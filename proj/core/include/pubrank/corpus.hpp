#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pubrank {

/// One PubMed record: the indexing unit.
struct Document {
  std::string pmid;
  std::string title;
  std::string abstract;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Text handed to the embedder and the scorers: `title + " " + abstract`, or the
/// abstract alone when the title is empty.
std::string document_text(const Document& doc);

struct IngestReport {
  std::size_t records_seen = 0;
  std::size_t kept = 0;
  std::size_t dropped_no_abstract = 0;
  std::size_t dropped_duplicate = 0;
  std::size_t dropped_malformed = 0;
  std::size_t empty_title = 0;  // kept records with an empty title

  bool reconciles() const noexcept {
    return records_seen == kept + dropped_no_abstract + dropped_duplicate + dropped_malformed;
  }
  std::string to_json() const;
};

/// Outcome of parsing a single `<PubmedArticle>` element.
struct ParsedRecord {
  enum class Status { ok, no_abstract, malformed };
  Status status = Status::malformed;
  Document doc;
};

/// Parses one `<PubmedArticle>...</PubmedArticle>` fragment. Multiple
/// `AbstractText` sections are joined with a single space; whitespace runs
/// collapse to one space.
ParsedRecord parse_pubmed_article(std::string_view xml);

/// Streaming ingestion of PubMed baseline XML. Records are cut out of the byte
/// stream one `PubmedArticle` at a time so a corrupt record never poisons its
/// neighbours. Duplicate pmids resolve last-wins in feed order.
class Ingestor {
 public:
  /// Feeds raw bytes; may be called with arbitrary chunk boundaries.
  void feed(std::string_view bytes);
  /// Flushes a dangling unterminated record (counted as malformed).
  void end_of_stream();

  void add_stream(std::istream& in);
  /// Plain or gzip-compressed XML file. Throws DataError when unreadable.
  void add_file(const std::filesystem::path& path);

  const IngestReport& report() const noexcept { return report_; }

  /// Surviving documents in order of their last occurrence.
  std::vector<Document> documents() const;

  /// Writes the canonical line-delimited corpus. Throws DataError on sink failure.
  void write(std::ostream& sink) const;

 private:
  void take_record(std::string_view xml);
  void take_malformed();

  std::string buffer_;
  std::vector<std::optional<Document>> slots_;
  std::unordered_map<std::string, std::size_t> latest_;
  IngestReport report_;
};

/// Expands directories into their `*.xml` / `*.xml.gz` files, sorted by name.
/// Plain files are kept in the order given.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs);

/// Convenience wrapper: ingest every input and write the corpus file.
IngestReport ingest_files(const std::vector<std::filesystem::path>& inputs,
                          const std::filesystem::path& corpus_out);

/// Canonical corpus line: {"pmid": ..., "title": ..., "abstract": ...}.
std::string corpus_line(const Document& doc);

/// Validating reader for the canonical corpus format. Each line must satisfy the
/// Document invariants; violations throw DataError naming line and pmid.
class CorpusReader {
 public:
  explicit CorpusReader(std::istream& in) : in_(&in) {}
  explicit CorpusReader(const std::filesystem::path& path);

  std::optional<Document> next();
  std::size_t line_number() const noexcept { return line_no_; }

 private:
  std::ifstream owned_;
  std::istream* in_;
  std::size_t line_no_ = 0;
  std::unordered_map<std::string, std::size_t> seen_;
};

std::vector<Document> read_corpus(const std::filesystem::path& path);
std::vector<Document> read_corpus(std::istream& in);

/// pmid-keyed lookup over a loaded corpus.
class DocumentStore {
 public:
  DocumentStore() = default;
  explicit DocumentStore(std::vector<Document> docs);
  static DocumentStore load(const std::filesystem::path& corpus);

  const Document* find(std::string_view pmid) const;
  /// Throws DataError if the pmid is unknown.
  const Document& at(std::string_view pmid) const;
  std::size_t size() const noexcept { return docs_.size(); }
  const std::vector<Document>& documents() const noexcept { return docs_; }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_pmid_;
};

}  // namespace pubrank
