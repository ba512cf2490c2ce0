#include "pubrank/pipeline.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pubrank/corpus.hpp"
#include "pubrank/dataset.hpp"
#include "pubrank/embedding.hpp"
#include "pubrank/errors.hpp"
#include "pubrank/files.hpp"
#include "pubrank/index.hpp"
#include "pubrank/metrics.hpp"
#include "pubrank/parallel.hpp"
#include "pubrank/rerank.hpp"
#include "pubrank/text.hpp"

namespace pubrank::pipeline {

namespace {

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw UsageError("config key " + key + ": expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double d = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    throw UsageError("config key " + key + ": expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("config key " + key + ": expected true or false, got '" + value + "'");
}

// Re-raises the in-flight exception with a "<stage>: " prefix, keeping its class.
[[noreturn]] void rethrow_with(const std::string& prefix) {
  try {
    throw;
  } catch (const ProtocolError& e) {
    throw ProtocolError(prefix + e.what());
  } catch (const UpstreamError& e) {
    throw UpstreamError(prefix + e.what(), e.retryable());
  } catch (const CorruptionError& e) {
    throw CorruptionError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const UsageError& e) {
    throw UsageError(prefix + e.what());
  } catch (const std::exception& e) {
    throw DataError(prefix + e.what());
  }
}

std::string format_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "corpus") corpus = value;
  else if (key == "index") index = value;
  else if (key == "questions") questions = value;
  else if (key == "out") out = value;
  else if (key == "provider") {
    if (value != "mock" && value != "remote") throw UsageError("config key provider: expected mock or remote");
    provider = value;
  } else if (key == "seed") seed = parse_u64(key, value);
  else if (key == "max_tokens") max_tokens = parse_u64(key, value);
  else if (key == "ef_search") ef_search = parse_u64(key, value);
  else if (key == "retrieve_k") retrieve_k = parse_u64(key, value);
  else if (key == "cross_k") cross_k = parse_u64(key, value);
  else if (key == "final_k") final_k = parse_u64(key, value);
  else if (key == "score_batch") score_batch = parse_u64(key, value);
  else if (key == "fusion.mode") fusion.mode = fusion::parse_mode(value);
  else if (key == "fusion.ka") fusion.k_a = parse_u64(key, value);
  else if (key == "fusion.w1") fusion.w1 = parse_double(key, value);
  else if (key == "fusion.w2") fusion.w2 = parse_double(key, value);
  else if (key == "fixtures") fixtures = value;
  else if (key == "fixture_mode") fixture_mode = parse_fixture_mode(value);
  else if (key == "jobs") jobs = parse_u64(key, value);
  else if (key == "audit") audit = parse_bool(key, value);
  else throw UsageError("unknown config key '" + key + "'");
}

void PipelineConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto key = std::string(text::trim(trimmed.substr(0, eq)));
    auto value = std::string(text::trim(trimmed.substr(eq + 1)));
    try {
      set(key, value);
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void PipelineConfig::validate() const {
  if (corpus.empty()) throw UsageError("pipeline config needs 'corpus'");
  if (index.empty()) throw UsageError("pipeline config needs 'index'");
  if (questions.empty()) throw UsageError("pipeline config needs 'questions'");
  if (out.empty()) throw UsageError("pipeline config needs 'out'");
  if (final_k == 0 || cross_k == 0 || retrieve_k == 0) throw UsageError("k values must be at least 1");
  if (!(retrieve_k >= cross_k && cross_k >= final_k)) {
    throw UsageError("k values must satisfy retrieve_k >= cross_k >= final_k");
  }
  if (cross_k > 30) throw UsageError("cross_k feeds the listwise prompt and may be at most 30");
  if (score_batch == 0) throw UsageError("score_batch must be at least 1");
  if (jobs == 0) throw UsageError("jobs must be at least 1");
  auto f = fusion;
  f.k_total = final_k;
  f.validate();
}

std::string PipelineConfig::canonical() const {
  std::map<std::string, std::string> kv{
      {"corpus", corpus.generic_string()},
      {"index", index.generic_string()},
      {"questions", questions.generic_string()},
      {"provider", provider},
      {"seed", std::to_string(seed)},
      {"max_tokens", std::to_string(max_tokens)},
      {"ef_search", std::to_string(ef_search)},
      {"retrieve_k", std::to_string(retrieve_k)},
      {"cross_k", std::to_string(cross_k)},
      {"final_k", std::to_string(final_k)},
      {"score_batch", std::to_string(score_batch)},
      {"fusion.mode", std::string(fusion::to_string(fusion.mode))},
      {"fusion.ka", std::to_string(fusion.k_a)},
      {"fusion.w1", format_double(fusion.w1)},
      {"fusion.w2", format_double(fusion.w2)},
      {"fixtures", fixtures ? fixtures->generic_string() : ""},
      {"fixture_mode", fixture_mode ? std::string(to_string(*fixture_mode)) : ""},
      {"audit", audit ? "true" : "false"},
  };
  std::string out_text;
  for (const auto& [k, v] : kv) out_text += k + " = " + v + "\n";
  return out_text;
}

PipelineResult run_pipeline(const PipelineConfig& config, std::shared_ptr<Channel> network) {
  config.validate();
  if (!std::filesystem::exists(config.index)) throw DataError("index file not found: " + config.index.string());
  if (!std::filesystem::exists(config.corpus)) throw DataError("corpus file not found: " + config.corpus.string());
  if (!std::filesystem::exists(config.questions)) {
    throw DataError("questions file not found: " + config.questions.string());
  }

  auto index = VectorIndex::load(config.index);
  auto docs = DocumentStore::load(config.corpus);
  auto questions = load_bioasq(config.questions);
  if (questions.empty()) throw DataError(config.questions.string() + " holds no questions");

  ClientOptions copts = ClientOptions::from_env();
  if (config.fixtures) {
    copts.fixtures_dir = config.fixtures;
    copts.fixture_mode = config.fixture_mode.value_or(FixtureMode::replay);
  } else if (config.fixture_mode) {
    copts.fixture_mode = *config.fixture_mode;
  }
  copts.embed_dimension = index.dimension();
  auto clients = make_clients(copts, std::move(network));

  std::unique_ptr<EmbeddingProvider> provider;
  if (config.provider == "mock") {
    provider = std::make_unique<MockEmbeddingProvider>(index.dimension(), config.seed, config.max_tokens);
  } else {
    provider = std::make_unique<RemoteEmbeddingProvider>(*clients.embed, index.dimension(), config.max_tokens);
  }

  const auto n = questions.size();
  std::vector<RankedRun> retrieval(n), cross30(n), cross10(n), llm10(n), fused(n);
  std::vector<rerank::ListwiseExchange> exchanges(n);
  std::optional<std::size_t> ef;
  if (config.ef_search > 0) ef = config.ef_search;

  auto stage = [&](const char* name, auto&& body) {
    parallel_for(n, config.jobs, [&](std::size_t i) {
      try {
        body(i);
      } catch (...) {
        rethrow_with(std::string("stage ") + name + ": question " + questions[i].id + ": ");
      }
    });
  };

  stage("retrieve", [&](std::size_t i) {
    const auto& q = questions[i];
    std::vector<std::string> text{q.body};
    auto qv = embed_batch(*provider, text).front();
    RankedRun run{q.id, Stage::retrieval, {}};
    for (auto& hit : index.query(qv, config.retrieve_k, ef)) run.items.push_back({std::move(hit.pmid), hit.score});
    retrieval[i] = std::move(run);
  });

  stage("cross-rerank", [&](std::size_t i) {
    cross30[i] = rerank::pointwise_rerank(questions[i], retrieval[i], docs, *clients.score,
                                          {config.cross_k, config.score_batch});
    cross10[i] = truncated(cross30[i], config.final_k);
  });

  stage("llm-rerank", [&](std::size_t i) {
    auto result = rerank::llm_rerank(questions[i], cross30[i], docs, *clients.chat, config.final_k);
    llm10[i] = std::move(result.run);
    exchanges[i] = std::move(result.exchange);
  });

  auto fcfg = config.fusion;
  fcfg.k_total = config.final_k;
  fcfg.rank_points_k = config.final_k;
  stage("fuse", [&](std::size_t i) { fused[i] = fusion::fuse(cross10[i], llm10[i], fcfg); });

  PipelineResult result;
  result.runs = {{"retrieval.jsonl", std::move(retrieval)},
                 {"cross30.jsonl", std::move(cross30)},
                 {"cross10.jsonl", std::move(cross10)},
                 {"llm10.jsonl", std::move(llm10)},
                 {"fused.jsonl", std::move(fused)}};

  std::filesystem::create_directories(config.out);
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  for (const auto& name : kStageFiles) {
    auto path = config.out / name;
    write_runs_file(path.string(), result.runs.at(name));
    outputs[name] = file_sha256(path);
  }

  bool any_gold = false;
  for (const auto& q : questions) any_gold = any_gold || !q.gold_documents.empty();
  nlohmann::ordered_json stage_maps = nlohmann::ordered_json::object();
  if (any_gold) {
    for (const auto& name : kStageFiles) {
      auto report = eval::evaluate_phase_a(result.runs.at(name), questions);
      result.stage_map10[name] = report.map10;
      stage_maps[name] = report.map10;
      if (name == "fused.jsonl") result.report = std::move(report);
    }
    auto report_path = config.out / "report.json";
    write_file(report_path, result.report->to_json());
    outputs["report.json"] = file_sha256(report_path);
  }

  if (config.audit) {
    auto dir = config.out / "audit";
    for (const auto& ex : exchanges) rerank::write_audit(dir, ex);
    nlohmann::ordered_json audit_hashes = nlohmann::ordered_json::object();
    for (const auto& ex : exchanges) {
      audit_hashes[ex.question_id] = file_sha256(dir / (ex.question_id + ".json"));
    }
    outputs["audit"] = std::move(audit_hashes);
  }

  std::size_t fallback_total = 0;
  for (const auto& ex : exchanges) fallback_total += ex.fallback_fill;

  nlohmann::ordered_json manifest;
  manifest["format"] = "pubrank-manifest 1";
  manifest["config_hash"] = text::sha256_hex(config.canonical());
  manifest["config"] = config.canonical();
  manifest["seeds"] = {{"embedding", config.seed}};
  manifest["index"] = {{"kind", std::string(to_string(index.kind()))},
                       {"dimension", index.dimension()},
                       {"size", index.size()},
                       {"sha256", file_sha256(config.index)}};
  manifest["questions"] = n;
  nlohmann::ordered_json fixtures;
  fixtures["mode"] = std::string(to_string(copts.fixture_mode));
  fixtures["digests"] = clients.fixtures ? clients.fixtures->digests_used() : std::vector<std::string>{};
  manifest["fixtures"] = std::move(fixtures);
  manifest["listwise_fallback_fill"] = fallback_total;
  if (any_gold) manifest["map@10"] = std::move(stage_maps);
  manifest["outputs"] = std::move(outputs);

  result.manifest = config.out / "manifest.json";
  write_file(result.manifest, manifest.dump(2) + "\n");
  return result;
}

}  // namespace pubrank::pipeline
