#include "pubrank/run.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "pubrank/errors.hpp"

namespace pubrank {

bool is_valid_pmid(std::string_view pmid) noexcept {
  if (pmid.empty()) return false;
  return std::all_of(pmid.begin(), pmid.end(), [](char c) { return c >= '0' && c <= '9'; });
}

namespace {

std::string_view strip_leading_zeros(std::string_view s) noexcept {
  std::size_t i = 0;
  while (i + 1 < s.size() && s[i] == '0') ++i;
  return s.substr(i);
}

}  // namespace

bool pmid_less(std::string_view a, std::string_view b) noexcept {
  auto na = strip_leading_zeros(a);
  auto nb = strip_leading_zeros(b);
  if (na.size() != nb.size()) return na.size() < nb.size();
  if (na != nb) return na < nb;
  return a < b;
}

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::retrieval: return "retrieval";
    case Stage::crossencoder: return "crossencoder";
    case Stage::llm: return "llm";
    case Stage::fused: return "fused";
  }
  return "retrieval";
}

Stage parse_stage(std::string_view text) {
  if (text == "retrieval") return Stage::retrieval;
  if (text == "crossencoder" || text == "cross") return Stage::crossencoder;
  if (text == "llm") return Stage::llm;
  if (text == "fused") return Stage::fused;
  throw DataError("unknown run stage '" + std::string(text) + "'");
}

std::vector<std::string> RankedRun::pmids() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.pmid);
  return out;
}

bool ranks_before(const RunItem& a, const RunItem& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return pmid_less(a.pmid, b.pmid);
}

void sort_by_score(std::vector<RunItem>& items) {
  std::sort(items.begin(), items.end(), ranks_before);
}

void require_unique_pmids(const RankedRun& run) {
  std::unordered_set<std::string_view> seen;
  for (const auto& item : run.items) {
    if (!seen.insert(item.pmid).second) {
      throw DataError("question " + run.question_id + ": duplicate pmid " + item.pmid + " in run");
    }
  }
}

RankedRun truncated(const RankedRun& run, std::size_t k) {
  RankedRun out{run.question_id, run.stage, {}};
  auto n = std::min(k, run.items.size());
  out.items.assign(run.items.begin(), run.items.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

void write_run(std::ostream& out, const RankedRun& run) {
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& item : run.items) {
    items.push_back({{"pmid", item.pmid}, {"score", item.score}});
  }
  nlohmann::ordered_json line{
      {"question_id", run.question_id}, {"stage", std::string(to_string(run.stage))}, {"items", std::move(items)}};
  out << line.dump() << '\n';
}

void write_runs(std::ostream& out, const std::vector<RankedRun>& runs) {
  for (const auto& run : runs) write_run(out, run);
}

void write_runs_file(const std::string& path, const std::vector<RankedRun>& runs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open run file for writing: " + path);
  write_runs(out, runs);
  if (!out) throw DataError("failed writing run file: " + path);
}

std::vector<RankedRun> read_runs(std::istream& in) {
  std::vector<RankedRun> runs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      RankedRun run;
      run.question_id = j.at("question_id").get<std::string>();
      run.stage = parse_stage(j.at("stage").get<std::string>());
      for (const auto& item : j.at("items")) {
        RunItem ri{item.at("pmid").get<std::string>(), item.at("score").get<double>()};
        if (!is_valid_pmid(ri.pmid)) throw DataError("pmid '" + ri.pmid + "' is not numeric");
        run.items.push_back(std::move(ri));
      }
      require_unique_pmids(run);
      runs.push_back(std::move(run));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("run file line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("run file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return runs;
}

std::vector<RankedRun> read_runs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open run file: " + path);
  return read_runs(in);
}

}  // namespace pubrank
