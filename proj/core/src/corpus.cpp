#include "pubrank/corpus.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>

#include <expat.h>
#include <zlib.h>

#include <json.hpp>

#include "pubrank/errors.hpp"
#include "pubrank/run.hpp"
#include "pubrank/text.hpp"

namespace pubrank {

std::string document_text(const Document& doc) {
  if (doc.title.empty()) return doc.abstract;
  return doc.title + " " + doc.abstract;
}

std::string IngestReport::to_json() const {
  nlohmann::ordered_json j{{"records_seen", records_seen},
                           {"kept", kept},
                           {"dropped_no_abstract", dropped_no_abstract},
                           {"dropped_duplicate", dropped_duplicate},
                           {"dropped_malformed", dropped_malformed},
                           {"empty_title", empty_title}};
  return j.dump();
}

namespace {

// Element-path tracking state for one record.
struct ArticleParse {
  std::vector<std::string> path;
  // Depth at which an active capture started; 0 when not capturing.
  std::size_t capture_depth = 0;
  std::string* capture = nullptr;

  bool have_pmid = false;
  std::string pmid;
  bool have_title = false;
  std::string title;
  std::vector<std::string> abstract_sections;
  std::string scratch;

  bool parent_is(std::string_view name) const {
    return path.size() >= 2 && path[path.size() - 2] == name;
  }
  bool under(std::string_view name) const {
    return std::find(path.begin(), path.end(), name) != path.end();
  }
};

void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char**) {
  auto& st = *static_cast<ArticleParse*>(user);
  st.path.emplace_back(name);
  if (st.capture != nullptr) return;

  std::string_view el = name;
  if (el == "PMID" && st.parent_is("MedlineCitation") && !st.have_pmid) {
    st.scratch.clear();
    st.capture = &st.scratch;
    st.capture_depth = st.path.size();
  } else if (el == "ArticleTitle" && st.parent_is("Article") && !st.have_title) {
    st.capture = &st.title;
    st.capture_depth = st.path.size();
  } else if (el == "AbstractText" && st.parent_is("Abstract") && st.under("Article")) {
    st.abstract_sections.emplace_back();
    st.capture = &st.abstract_sections.back();
    st.capture_depth = st.path.size();
  }
}

void XMLCALL on_end(void* user, const XML_Char* name) {
  auto& st = *static_cast<ArticleParse*>(user);
  if (st.capture != nullptr && st.path.size() == st.capture_depth) {
    std::string_view el = name;
    if (el == "PMID") {
      st.pmid = text::trim(st.scratch);
      st.have_pmid = true;
    } else if (el == "ArticleTitle") {
      st.have_title = true;
    }
    st.capture = nullptr;
    st.capture_depth = 0;
  }
  st.path.pop_back();
}

void XMLCALL on_text(void* user, const XML_Char* s, int len) {
  auto& st = *static_cast<ArticleParse*>(user);
  if (st.capture != nullptr) st.capture->append(s, static_cast<std::size_t>(len));
}

struct ExpatParser {
  XML_Parser p;
  ExpatParser() : p(XML_ParserCreate("UTF-8")) {}
  ~ExpatParser() { XML_ParserFree(p); }
  ExpatParser(const ExpatParser&) = delete;
  ExpatParser& operator=(const ExpatParser&) = delete;
};

constexpr std::string_view kOpenTag = "<PubmedArticle";
constexpr std::string_view kCloseTag = "</PubmedArticle>";

// Next `<PubmedArticle` start tag (not `<PubmedArticleSet`) at or after `from`.
// Returns npos when none is found; `partial` reports a possible tag cut off by
// the end of the buffer.
std::size_t find_open(std::string_view buf, std::size_t from, bool& partial) {
  partial = false;
  while (true) {
    auto at = buf.find(kOpenTag, from);
    if (at == std::string_view::npos) return at;
    auto after = at + kOpenTag.size();
    if (after >= buf.size()) {
      partial = true;
      return std::string_view::npos;
    }
    char c = buf[after];
    if (c == '>' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '/') return at;
    from = at + 1;
  }
}

}  // namespace

ParsedRecord parse_pubmed_article(std::string_view xml) {
  ParsedRecord out;
  ArticleParse st;
  ExpatParser parser;
  XML_SetUserData(parser.p, &st);
  XML_SetElementHandler(parser.p, on_start, on_end);
  XML_SetCharacterDataHandler(parser.p, on_text);
  if (XML_Parse(parser.p, xml.data(), static_cast<int>(xml.size()), XML_TRUE) == XML_STATUS_ERROR) {
    return out;
  }
  if (!st.have_pmid || !is_valid_pmid(st.pmid)) return out;

  out.doc.pmid = st.pmid;
  out.doc.title = text::collapse_whitespace(st.title);
  std::string abstract;
  for (const auto& section : st.abstract_sections) {
    auto cleaned = text::collapse_whitespace(section);
    if (cleaned.empty()) continue;
    if (!abstract.empty()) abstract.push_back(' ');
    abstract += cleaned;
  }
  out.doc.abstract = std::move(abstract);
  out.status = out.doc.abstract.empty() ? ParsedRecord::Status::no_abstract : ParsedRecord::Status::ok;
  return out;
}

void Ingestor::feed(std::string_view bytes) {
  buffer_.append(bytes);
  std::string_view buf = buffer_;
  std::size_t consumed = 0;
  while (true) {
    bool partial = false;
    auto start = find_open(buf, consumed, partial);
    if (start == std::string_view::npos) {
      // Keep just enough tail to recognise a start tag split across chunks.
      auto keep = partial ? buf.size() - buf.rfind(kOpenTag) : std::min(buf.size(), kOpenTag.size());
      consumed = std::max(consumed, buf.size() - keep);
      break;
    }
    auto close = buf.find(kCloseTag, start);
    bool next_partial = false;
    auto next = find_open(buf, start + 1, next_partial);
    if (next != std::string_view::npos && (close == std::string_view::npos || next < close)) {
      take_malformed();
      consumed = next;
      continue;
    }
    if (close == std::string_view::npos) {
      consumed = start;
      break;
    }
    auto end = close + kCloseTag.size();
    take_record(buf.substr(start, end - start));
    consumed = end;
  }
  buffer_.erase(0, consumed);
}

void Ingestor::end_of_stream() {
  bool partial = false;
  if (find_open(buffer_, 0, partial) != std::string::npos || partial) take_malformed();
  buffer_.clear();
}

void Ingestor::add_stream(std::istream& in) {
  std::array<char, 1 << 16> chunk{};
  while (in) {
    in.read(chunk.data(), chunk.size());
    auto got = in.gcount();
    if (got > 0) feed(std::string_view(chunk.data(), static_cast<std::size_t>(got)));
  }
  if (in.bad()) throw DataError("I/O error while reading XML input stream");
  end_of_stream();
}

void Ingestor::add_file(const std::filesystem::path& path) {
  gzFile gz = gzopen(path.string().c_str(), "rb");
  if (gz == nullptr) throw DataError("cannot open XML input: " + path.string());
  std::array<char, 1 << 16> chunk{};
  while (true) {
    int got = gzread(gz, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (got < 0) {
      int errnum = 0;
      std::string msg = gzerror(gz, &errnum);
      gzclose(gz);
      throw DataError("I/O error reading " + path.string() + ": " + msg);
    }
    if (got == 0) break;
    feed(std::string_view(chunk.data(), static_cast<std::size_t>(got)));
  }
  gzclose(gz);
  end_of_stream();
}

void Ingestor::take_malformed() {
  ++report_.records_seen;
  ++report_.dropped_malformed;
}

void Ingestor::take_record(std::string_view xml) {
  ++report_.records_seen;
  auto parsed = parse_pubmed_article(xml);
  switch (parsed.status) {
    case ParsedRecord::Status::malformed:
      ++report_.dropped_malformed;
      return;
    case ParsedRecord::Status::no_abstract:
      ++report_.dropped_no_abstract;
      return;
    case ParsedRecord::Status::ok:
      break;
  }
  auto it = latest_.find(parsed.doc.pmid);
  if (it != latest_.end()) {
    auto& old = slots_[it->second];
    if (old->title.empty()) --report_.empty_title;
    old.reset();
    ++report_.dropped_duplicate;
    --report_.kept;
  }
  if (parsed.doc.title.empty()) ++report_.empty_title;
  ++report_.kept;
  latest_[parsed.doc.pmid] = slots_.size();
  slots_.emplace_back(std::move(parsed.doc));
}

std::vector<Document> Ingestor::documents() const {
  std::vector<Document> out;
  out.reserve(report_.kept);
  for (const auto& slot : slots_) {
    if (slot) out.push_back(*slot);
  }
  return out;
}

void Ingestor::write(std::ostream& sink) const {
  for (const auto& slot : slots_) {
    if (slot) sink << corpus_line(*slot) << '\n';
  }
  sink.flush();
  if (!sink) throw DataError("failed writing corpus output");
}

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs) {
  namespace fs = std::filesystem;
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    std::error_code ec;
    if (fs::is_directory(in, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        auto ends_with = [&](std::string_view suffix) {
          return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
        };
        if (ends_with(".xml") || ends_with(".xml.gz")) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(in, ec)) {
      out.push_back(in);
    } else {
      throw DataError("input does not exist: " + in.string());
    }
  }
  return out;
}

IngestReport ingest_files(const std::vector<std::filesystem::path>& inputs,
                          const std::filesystem::path& corpus_out) {
  Ingestor ingestor;
  for (const auto& file : expand_inputs(inputs)) ingestor.add_file(file);
  std::ofstream out(corpus_out, std::ios::binary);
  if (!out) throw DataError("cannot open corpus output: " + corpus_out.string());
  ingestor.write(out);
  return ingestor.report();
}

std::string corpus_line(const Document& doc) {
  nlohmann::ordered_json j{{"pmid", doc.pmid}, {"title", doc.title}, {"abstract", doc.abstract}};
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

CorpusReader::CorpusReader(const std::filesystem::path& path) : owned_(path, std::ios::binary), in_(&owned_) {
  if (!owned_) throw DataError("cannot open corpus file: " + path.string());
}

std::optional<Document> CorpusReader::next() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = [&](const std::string& pmid) {
      return "corpus line " + std::to_string(line_no_) + (pmid.empty() ? "" : " (pmid " + pmid + ")") + ": ";
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where("") + "invalid JSON: " + e.what());
    }
    if (!j.is_object() || j.size() != 3 || !j.contains("pmid") || !j.contains("title") || !j.contains("abstract")) {
      throw DataError(where("") + "expected exactly the keys pmid, title, abstract");
    }
    if (!j["pmid"].is_string() || !j["title"].is_string() || !j["abstract"].is_string()) {
      throw DataError(where("") + "fields must be strings");
    }
    Document doc{j["pmid"].get<std::string>(), j["title"].get<std::string>(), j["abstract"].get<std::string>()};
    if (!is_valid_pmid(doc.pmid)) throw DataError(where(doc.pmid) + "pmid must be decimal digits");
    if (text::trim(doc.abstract).empty()) throw DataError(where(doc.pmid) + "empty abstract");
    auto [it, fresh] = seen_.emplace(doc.pmid, line_no_);
    if (!fresh) {
      throw DataError(where(doc.pmid) + "duplicate pmid, first seen on line " + std::to_string(it->second));
    }
    return doc;
  }
  if (in_->bad()) throw DataError("I/O error reading corpus");
  return std::nullopt;
}

std::vector<Document> read_corpus(std::istream& in) {
  CorpusReader reader(in);
  std::vector<Document> docs;
  while (auto doc = reader.next()) docs.push_back(std::move(*doc));
  return docs;
}

std::vector<Document> read_corpus(const std::filesystem::path& path) {
  CorpusReader reader(path);
  std::vector<Document> docs;
  while (auto doc = reader.next()) docs.push_back(std::move(*doc));
  return docs;
}

DocumentStore::DocumentStore(std::vector<Document> docs) : docs_(std::move(docs)) {
  by_pmid_.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (!by_pmid_.emplace(docs_[i].pmid, i).second) {
      throw DataError("duplicate pmid in document store: " + docs_[i].pmid);
    }
  }
}

DocumentStore DocumentStore::load(const std::filesystem::path& corpus) {
  return DocumentStore(read_corpus(corpus));
}

const Document* DocumentStore::find(std::string_view pmid) const {
  auto it = by_pmid_.find(std::string(pmid));
  return it == by_pmid_.end() ? nullptr : &docs_[it->second];
}

const Document& DocumentStore::at(std::string_view pmid) const {
  const auto* doc = find(pmid);
  if (doc == nullptr) throw DataError("pmid " + std::string(pmid) + " not found in corpus");
  return *doc;
}

}  // namespace pubrank
