#include "pubrank/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "binary_io.hpp"
#include "pubrank/errors.hpp"
#include "pubrank/text.hpp"

namespace pubrank::prompts {

// Generated at configure time from assets/templates.
const std::vector<std::pair<std::string_view, std::string_view>>& builtin_template_files();

std::string_view to_string(AnswerKind kind) noexcept { return kind == AnswerKind::exact ? "exact" : "ideal"; }

AnswerKind parse_answer_kind(std::string_view text) {
  if (text == "exact") return AnswerKind::exact;
  if (text == "ideal") return AnswerKind::ideal;
  throw UsageError("unknown answer kind '" + std::string(text) + "' (exact|ideal)");
}

void PromptSpec::validate() const {
  if (style < 1 || style > 3) throw UsageError("prompt style must be 1, 2 or 3");
  if (qtype == QuestionType::summary && answer_kind == AnswerKind::exact) {
    throw UsageError("summary questions have no exact answer");
  }
}

namespace {

std::string block_key(QuestionType qtype, AnswerKind kind, int tpl) {
  return "aft" + std::to_string(tpl) + "/" + std::string(to_string(qtype)) + "_" + std::string(to_string(kind)) +
         ".txt";
}

std::string strip_trailing_ws(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

}  // namespace

TemplateSet TemplateSet::from_files(std::string_view manifest, const std::map<std::string, std::string>& files) {
  TemplateSet set;
  std::istringstream in{std::string(manifest)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("pubrank-templates ", 0) != 0) {
    throw DataError("template manifest: missing 'pubrank-templates <version>' header");
  }
  set.version_ = line.substr(std::string("pubrank-templates ").size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto sep = line.find("  ");
    if (sep == std::string::npos) throw DataError("template manifest: malformed line '" + line + "'");
    auto digest = line.substr(0, sep);
    auto name = line.substr(sep + 2);
    auto it = files.find(name);
    if (it == files.end()) throw DataError("template manifest lists missing file " + name);
    if (text::sha256_hex(it->second) != digest) throw DataError("template " + name + " does not match its checksum");
    set.blocks_[name] = strip_trailing_ws(it->second);
  }
  for (auto tpl : {1, 2}) {
    for (auto qt : kQuestionTypes) {
      for (auto kind : {AnswerKind::exact, AnswerKind::ideal}) {
        if (qt == QuestionType::summary && kind == AnswerKind::exact) continue;
        if (set.blocks_.count(block_key(qt, kind, tpl)) == 0) {
          throw DataError("template set lacks " + block_key(qt, kind, tpl));
        }
      }
    }
  }
  return set;
}

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = [] {
    std::string manifest;
    std::map<std::string, std::string> files;
    for (const auto& [name, content] : builtin_template_files()) {
      if (name == "MANIFEST") {
        manifest = std::string(content);
      } else {
        files.emplace(std::string(name), std::string(content));
      }
    }
    return from_files(manifest, files);
  }();
  return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
  auto manifest = detail::read_whole_file((dir / "MANIFEST").string());
  std::map<std::string, std::string> files;
  std::istringstream in(manifest);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    auto sep = line.find("  ");
    if (sep == std::string::npos) continue;
    auto name = line.substr(sep + 2);
    files.emplace(name, detail::read_whole_file((dir / name).string()));
  }
  return from_files(manifest, files);
}

const std::string& TemplateSet::block(QuestionType qtype, AnswerKind kind, int formatting_template) const {
  if (qtype == QuestionType::summary && kind == AnswerKind::exact) {
    throw UsageError("summary questions have no exact answer");
  }
  if (formatting_template != 1 && formatting_template != 2) throw UsageError("formatting template must be 1 or 2");
  return blocks_.at(block_key(qtype, kind, formatting_template));
}

std::string formatting_block(QuestionType qtype, AnswerKind kind, int formatting_template,
                             const TemplateSet& templates) {
  return templates.block(qtype, kind, formatting_template);
}

QuestionType type_of(const ExactAnswer& answer) noexcept {
  switch (answer.index()) {
    case 0: return QuestionType::yesno;
    case 1: return QuestionType::factoid;
    default: return QuestionType::list;
  }
}

namespace {

const std::vector<std::string>& entries_of(const ExactAnswer& answer) {
  if (const auto* f = std::get_if<FactoidAnswer>(&answer)) return f->entities;
  return std::get<ListAnswer>(answer).items;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

}  // namespace

std::string render_exact_text(const ExactAnswer& answer) {
  if (const auto* yn = std::get_if<YesNoAnswer>(&answer)) return yn->yes ? "yes" : "no";
  return join(entries_of(answer), "\n");
}

std::string render_exact_inline(const ExactAnswer& answer) {
  if (const auto* yn = std::get_if<YesNoAnswer>(&answer)) return yn->yes ? "yes" : "no";
  return join(entries_of(answer), ", ");
}

ExactAnswer gold_exact_answer(const Question& q) {
  if (!q.has_exact_answer()) throw UsageError("question " + q.id + " has no gold exact answer");
  if (q.type == QuestionType::yesno) return YesNoAnswer{*q.yes};
  std::vector<std::string> firsts;
  for (const auto& group : q.answer_groups) firsts.push_back(group.front());
  if (q.type == QuestionType::factoid) {
    if (firsts.size() > kMaxFactoidEntities) firsts.resize(kMaxFactoidEntities);
    return FactoidAnswer{std::move(firsts)};
  }
  return ListAnswer{std::move(firsts)};
}

namespace {

bool is_punct_or_space(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && (std::ispunct(u) != 0 || std::isspace(u) != 0);
}

// Strips a leading list marker: "1.", "2)", "-", "*", "•".
std::string_view strip_marker(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])) != 0) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')') && (i + 1 == s.size() || s[i + 1] == ' ' || s[i + 1] == '\t')) {
    return s.substr(i + 1);
  }
  if (!s.empty() && (s.front() == '-' || s.front() == '*')) return s.substr(1);
  constexpr std::string_view kBullet = "\xE2\x80\xA2";
  if (s.substr(0, kBullet.size()) == kBullet) return s.substr(kBullet.size());
  return s;
}

}  // namespace

ExactAnswer parse_exact_answer(std::string_view raw, QuestionType qtype) {
  if (text::trim(raw).empty()) throw AnswerParseError("empty answer");
  switch (qtype) {
    case QuestionType::yesno: {
      auto lower = text::ascii_lower(text::trim(raw));
      std::size_t b = 0;
      std::size_t e = lower.size();
      while (b < e && is_punct_or_space(lower[b])) ++b;
      while (e > b && is_punct_or_space(lower[e - 1])) --e;
      std::string_view core(lower.data() + b, e - b);
      if (core == "yes") return YesNoAnswer{true};
      if (core == "no") return YesNoAnswer{false};
      if (core.rfind("yes,", 0) == 0) return YesNoAnswer{true};
      if (core.rfind("no,", 0) == 0) return YesNoAnswer{false};
      throw AnswerParseError("yes/no answer not recognised: '" + std::string(raw.substr(0, 80)) + "'");
    }
    case QuestionType::factoid:
    case QuestionType::list: {
      std::vector<std::string_view> lines;
      std::string_view rest = raw;
      while (!rest.empty()) {
        auto nl = rest.find('\n');
        auto line = rest.substr(0, nl);
        if (!text::trim(line).empty()) lines.push_back(line);
        if (nl == std::string_view::npos) break;
        rest.remove_prefix(nl + 1);
      }
      std::vector<std::string_view> parts;
      if (lines.size() == 1) {
        std::string_view line = lines.front();
        while (true) {
          auto comma = line.find(',');
          parts.push_back(line.substr(0, comma));
          if (comma == std::string_view::npos) break;
          line.remove_prefix(comma + 1);
        }
      } else {
        parts = lines;
      }
      std::vector<std::string> entries;
      for (auto part : parts) {
        auto n = text::normalize_answer(strip_marker(part));
        if (n.empty()) continue;
        if (qtype == QuestionType::list && text::utf8_length(n) > kMaxListItemChars) {
          n = text::normalize_answer(text::utf8_prefix(n, kMaxListItemChars));
        }
        if (std::find(entries.begin(), entries.end(), n) != entries.end()) continue;
        entries.push_back(std::move(n));
      }
      if (entries.empty()) throw AnswerParseError("no entities found in answer");
      if (qtype == QuestionType::factoid) {
        if (entries.size() > kMaxFactoidEntities) entries.resize(kMaxFactoidEntities);
        return FactoidAnswer{std::move(entries)};
      }
      return ListAnswer{std::move(entries)};
    }
    case QuestionType::summary:
      break;
  }
  throw UsageError("summary questions have no exact answer to parse");
}

std::string join_snippets(std::span<const std::string> snippets, std::size_t budget) {
  std::string out;
  std::size_t used = 0;
  for (const auto& s : snippets) {
    auto len = text::utf8_length(s);
    auto extra = len + (out.empty() ? 0 : 1);
    if (used + extra > budget) {
      if (out.empty()) out = std::string(text::utf8_prefix(s, budget));
      break;
    }
    if (!out.empty()) out.push_back('\n');
    out += s;
    used += extra;
  }
  return out;
}

namespace {

std::string query_text(const std::string& passage, const std::string& body, const std::optional<std::string>& hint,
                       const std::string& block) {
  std::string q = "Passage: " + passage + "\nQuestion: " + body;
  if (hint) q += " (Hint: short answer is " + *hint + ")";
  q += "\n" + block;
  return q;
}

bool wants_hint(const PromptSpec& spec) {
  return spec.query_template() == 2 && spec.answer_kind == AnswerKind::ideal && spec.qtype != QuestionType::summary;
}

std::string example_answer(const Question& ex, const PromptSpec& spec) {
  if (spec.answer_kind == AnswerKind::ideal) {
    if (ex.ideal_answer.empty()) throw UsageError("few-shot question " + ex.id + " has no ideal answer");
    return ex.ideal_answer;
  }
  auto gold = gold_exact_answer(ex);
  if (auto* list = std::get_if<ListAnswer>(&gold); list && spec.query_template() == 1) {
    // Template 1 shows a single correct item per list example.
    list->items.resize(1);
  }
  return render_exact_text(gold);
}

}  // namespace

std::vector<ChatMessage> build_prompt(const Question& question, std::span<const std::string> snippets,
                                      const PromptSpec& spec, std::span<const Question> fewshot,
                                      const std::optional<ExactAnswer>& hint, const TemplateSet& templates) {
  spec.validate();
  if (question.type != spec.qtype) throw UsageError("question " + question.id + " type does not match prompt spec");
  if (snippets.empty()) throw UsageError("question " + question.id + ": prompt needs at least one snippet");
  if (fewshot.size() != spec.n_shots) {
    throw UsageError("prompt spec asks for " + std::to_string(spec.n_shots) + " shots, got " +
                     std::to_string(fewshot.size()));
  }
  const auto& block = templates.block(spec.qtype, spec.answer_kind, spec.formatting_template());

  std::vector<ChatMessage> messages;
  messages.reserve(2 * fewshot.size() + 2);
  messages.push_back({Role::system, std::string(kSystemPreamble)});
  for (const auto& ex : fewshot) {
    if (ex.type != spec.qtype) throw UsageError("few-shot question " + ex.id + " has a different type");
    std::vector<std::string> ex_snippets;
    for (const auto& s : ex.gold_snippets) ex_snippets.push_back(s.text);
    if (ex_snippets.empty()) throw UsageError("few-shot question " + ex.id + " has no snippets");
    std::optional<std::string> ex_hint;
    if (wants_hint(spec)) ex_hint = render_exact_inline(gold_exact_answer(ex));
    messages.push_back(
        {Role::user, query_text(join_snippets(ex_snippets, spec.snippet_char_budget), ex.body, ex_hint, block)});
    messages.push_back({Role::assistant, example_answer(ex, spec)});
  }
  std::optional<std::string> final_hint;
  if (wants_hint(spec)) {
    if (!hint) {
      throw UsageError("question " + question.id + ": style " + std::to_string(spec.style) +
                       " ideal prompt needs the system-generated exact answer as a hint");
    }
    if (type_of(*hint) != spec.qtype) throw UsageError("question " + question.id + ": hint type mismatch");
    final_hint = render_exact_inline(*hint);
  }
  messages.push_back(
      {Role::user, query_text(join_snippets(snippets, spec.snippet_char_budget), question.body, final_hint, block)});
  return messages;
}

std::string render_answers_file(const std::vector<Question>& questions, const std::vector<AnswerRecord>& answers) {
  std::unordered_map<std::string, const Question*> by_id;
  for (const auto& q : questions) by_id.emplace(q.id, &q);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& a : answers) {
    auto it = by_id.find(a.id);
    if (it == by_id.end()) throw UsageError("answer for unknown question id " + a.id);
    const auto& q = *it->second;
    nlohmann::ordered_json entry;
    entry["id"] = a.id;
    if (a.exact) {
      if (q.type == QuestionType::summary) throw UsageError("question " + a.id + ": summary questions take no exact answer");
      if (type_of(*a.exact) != q.type) throw UsageError("question " + a.id + ": exact answer shape does not match type");
      if (const auto* yn = std::get_if<YesNoAnswer>(&*a.exact)) {
        entry["exact_answer"] = yn->yes ? "yes" : "no";
      } else {
        auto nested = nlohmann::ordered_json::array();
        for (const auto& e : entries_of(*a.exact)) nested.push_back(nlohmann::ordered_json::array({e}));
        entry["exact_answer"] = std::move(nested);
      }
    }
    if (a.ideal) entry["ideal_answer"] = *a.ideal;
    arr.push_back(std::move(entry));
  }
  nlohmann::ordered_json root{{"questions", std::move(arr)}};
  return root.dump(2) + "\n";
}

std::vector<AnswerRecord> parse_answers_file(std::string_view json_text, const std::vector<Question>& questions) {
  std::unordered_map<std::string, const Question*> by_id;
  for (const auto& q : questions) by_id.emplace(q.id, &q);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("answers file is not valid JSON: ") + e.what());
  }
  if (!root.contains("questions") || !root["questions"].is_array()) {
    throw DataError("answers file needs a 'questions' array");
  }
  std::vector<AnswerRecord> out;
  for (const auto& j : root["questions"]) {
    AnswerRecord rec;
    rec.id = j.at("id").get<std::string>();
    auto it = by_id.find(rec.id);
    if (it == by_id.end()) throw DataError("answers file: unknown question id " + rec.id);
    auto type = it->second->type;
    if (j.contains("exact_answer") && !j["exact_answer"].is_null() && type != QuestionType::summary) {
      const auto& ea = j["exact_answer"];
      if (type == QuestionType::yesno) {
        if (!ea.is_string()) throw DataError("question " + rec.id + ": yes/no exact_answer must be a string");
        try {
          rec.exact = parse_exact_answer(ea.get<std::string>(), type);
        } catch (const AnswerParseError&) {
          rec.exact.reset();
        }
      } else {
        if (!ea.is_array()) throw DataError("question " + rec.id + ": exact_answer must be a list");
        std::vector<std::string> entries;
        for (const auto& e : ea) {
          if (e.is_array() && !e.empty() && e.front().is_string()) entries.push_back(e.front().get<std::string>());
          else if (e.is_string()) entries.push_back(e.get<std::string>());
        }
        if (type == QuestionType::factoid) rec.exact = FactoidAnswer{entries};
        else rec.exact = ListAnswer{entries};
      }
    }
    if (j.contains("ideal_answer")) {
      const auto& ia = j["ideal_answer"];
      if (ia.is_string()) rec.ideal = ia.get<std::string>();
      else if (ia.is_array() && !ia.empty() && ia.front().is_string()) rec.ideal = ia.front().get<std::string>();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace pubrank::prompts
