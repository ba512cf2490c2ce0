// pubrank: every pipeline stage as a subcommand.
//
// Exit codes: 0 success, 1 usage or config error, 2 data error, 3 model service error.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pubrank/clients.hpp"
#include "pubrank/corpus.hpp"
#include "pubrank/dataset.hpp"
#include "pubrank/embedding.hpp"
#include "pubrank/errors.hpp"
#include "pubrank/eval.hpp"
#include "pubrank/files.hpp"
#include "pubrank/fusion.hpp"
#include "pubrank/index.hpp"
#include "pubrank/parallel.hpp"
#include "pubrank/pipeline.hpp"
#include "pubrank/prompts.hpp"
#include "pubrank/rerank.hpp"
#include "pubrank/run.hpp"

namespace fs = std::filesystem;
using namespace pubrank;

namespace {

void warn(const std::string& msg) { std::cerr << "pubrank: warning: " << msg << '\n'; }

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& kind, std::size_t dim, std::uint64_t seed,
                                                 std::size_t max_tokens, ModelClients& clients) {
  if (kind == "mock") return std::make_unique<MockEmbeddingProvider>(dim, seed, max_tokens);
  if (kind == "remote") {
    auto options = ClientOptions::from_env();
    options.embed_dimension = dim;
    clients = make_clients(options);
    return std::make_unique<RemoteEmbeddingProvider>(*clients.embed, dim, max_tokens);
  }
  throw UsageError("provider must be mock or remote, got '" + kind + "'");
}

std::unordered_map<std::string, const Question*> by_id(const std::vector<Question>& qs) {
  std::unordered_map<std::string, const Question*> out;
  for (const auto& q : qs) out.emplace(q.id, &q);
  return out;
}

const Question& find_question(const std::unordered_map<std::string, const Question*>& index, const std::string& id) {
  auto it = index.find(id);
  if (it == index.end()) throw DataError("question " + id + " is not in the questions file");
  return *it->second;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string out;
};

void run_ingest(const IngestArgs& a) {
  std::vector<fs::path> inputs(a.inputs.begin(), a.inputs.end());
  auto report = ingest_files(inputs, a.out);
  std::cout << report.to_json() << '\n';
  if (report.empty_title > 0) warn(std::to_string(report.empty_title) + " kept records have an empty title");
}

// ---------------------------------------------------------------- embed

struct EmbedArgs {
  std::string corpus, provider = "mock", out;
  std::size_t dim = 1024, max_tokens = 512;
  std::uint64_t seed = 42;
};

void run_embed(const EmbedArgs& a) {
  auto docs = read_corpus(a.corpus);
  ModelClients clients;
  auto provider = make_provider(a.provider, a.dim, a.seed, a.max_tokens, clients);
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(document_text(d));
  VectorSet set;
  set.dimension = static_cast<std::uint32_t>(a.dim);
  if (!texts.empty()) {
    auto vectors = embed_batch(*provider, texts);
    for (std::size_t i = 0; i < docs.size(); ++i) set.append(docs[i].pmid, vectors[i]);
  }
  write_vector_file(a.out, set);
  std::cerr << "embedded " << set.size() << " documents (dimension " << a.dim << ")\n";
}

// ---------------------------------------------------------------- index / search

struct IndexArgs {
  std::string vectors, kind = "hnsw", out;
  HnswParams params;
};

void run_index_build(const IndexArgs& a) {
  auto index = VectorIndex::build(read_vector_file(a.vectors), parse_index_kind(a.kind), a.params);
  index.save(a.out);
  std::cerr << "indexed " << index.size() << " vectors (" << to_string(index.kind()) << ")\n";
}

void run_index_check(const std::string& path) {
  auto index = VectorIndex::load(path);
  auto problems = index.validate();
  for (const auto& p : problems) std::cerr << p << '\n';
  if (!problems.empty()) throw DataError(path + ": " + std::to_string(problems.size()) + " structural problems");
  std::cout << "ok: " << index.size() << " vectors, dimension " << index.dimension() << ", "
            << to_string(index.kind()) << '\n';
}

struct SearchArgs {
  std::string index, questions, provider = "mock", out;
  std::size_t k = 1000, ef = 0, max_tokens = 512, jobs = 1;
  std::uint64_t seed = 42;
};

void run_search(const SearchArgs& a) {
  if (!fs::exists(a.index)) throw DataError("index file not found: " + a.index);
  auto index = VectorIndex::load(a.index);
  auto questions = load_bioasq(a.questions);
  ModelClients clients;
  auto provider = make_provider(a.provider, index.dimension(), a.seed, a.max_tokens, clients);
  std::optional<std::size_t> ef;
  if (a.ef > 0) ef = a.ef;
  std::vector<RankedRun> runs(questions.size());
  parallel_for(questions.size(), a.jobs, [&](std::size_t i) {
    std::vector<std::string> text{questions[i].body};
    auto qv = embed_batch(*provider, text).front();
    runs[i] = {questions[i].id, Stage::retrieval, {}};
    for (auto& hit : index.query(qv, a.k, ef)) runs[i].items.push_back({std::move(hit.pmid), hit.score});
  });
  write_runs_file(a.out, runs);
}

// ---------------------------------------------------------------- rerank

struct RerankArgs {
  std::string stage, in, questions, corpus, out, audit;
  std::size_t k = 10, batch = 64, jobs = 1;
};

void run_rerank(const RerankArgs& a) {
  auto runs = read_runs_file(a.in);
  auto questions = load_bioasq(a.questions);
  auto qindex = by_id(questions);
  auto docs = DocumentStore::load(a.corpus);
  auto clients = make_clients(ClientOptions::from_env());
  std::vector<RankedRun> out(runs.size());
  std::vector<rerank::ListwiseExchange> exchanges(runs.size());
  if (a.stage == "cross") {
    parallel_for(runs.size(), a.jobs, [&](std::size_t i) {
      out[i] = rerank::pointwise_rerank(find_question(qindex, runs[i].question_id), runs[i], docs, *clients.score,
                                        {a.k, a.batch});
    });
  } else if (a.stage == "llm") {
    parallel_for(runs.size(), a.jobs, [&](std::size_t i) {
      const auto& q = find_question(qindex, runs[i].question_id);
      if (runs[i].items.size() > 30) {
        throw UsageError("question " + q.id + ": llm stage takes at most 30 candidates; run --stage cross --k 30 first");
      }
      auto r = rerank::llm_rerank(q, runs[i], docs, *clients.chat, a.k);
      out[i] = std::move(r.run);
      exchanges[i] = std::move(r.exchange);
    });
    if (!a.audit.empty()) {
      for (const auto& ex : exchanges) rerank::write_audit(a.audit, ex);
    }
    std::size_t fills = 0;
    for (const auto& ex : exchanges) fills += ex.fallback_fill;
    if (fills > 0) warn(std::to_string(fills) + " listwise slots were filled from the input order");
  } else {
    throw UsageError("--stage must be cross or llm");
  }
  write_runs_file(a.out, out);
}

// ---------------------------------------------------------------- fuse / gridsearch

struct FuseArgs {
  std::string a, b, out, mode = "weighted";
  fusion::FusionConfig config;
};

std::map<std::string, RankedRun> keyed(const std::vector<RankedRun>& runs, const std::string& label) {
  std::map<std::string, RankedRun> out;
  for (const auto& r : runs) {
    if (!out.emplace(r.question_id, r).second) throw DataError(label + ": question " + r.question_id + " appears twice");
  }
  return out;
}

void run_fuse(FuseArgs a) {
  a.config.mode = fusion::parse_mode(a.mode);
  a.config.rank_points_k = a.config.k_total;
  auto runs_a = read_runs_file(a.a);
  auto mb = keyed(read_runs_file(a.b), a.b);
  std::vector<RankedRun> out;
  for (const auto& ra : runs_a) {
    auto it = mb.find(ra.question_id);
    if (it == mb.end()) throw UsageError("question " + ra.question_id + " is missing from " + a.b);
    out.push_back(fusion::fuse(ra, it->second, a.config));
    mb.erase(it);
  }
  if (!mb.empty()) throw UsageError("question " + mb.begin()->first + " is missing from " + a.a);
  write_runs_file(a.out, out);
}

struct GridArgs {
  std::string a, b, gold, out;
  int max_weight = 10;
};

void run_gridsearch(const GridArgs& a) {
  auto questions = load_bioasq(a.gold);
  std::map<std::string, metrics::GoldSet> gold;
  for (const auto& q : questions) gold.emplace(q.id, q.gold_set());
  auto result = fusion::grid_search_weights(read_runs_file(a.a), read_runs_file(a.b), gold,
                                            fusion::integer_grid(a.max_weight));
  write_file(a.out, fusion::format_grid_table(result));
  std::cout << "best w1=" << result.best.w1 << " w2=" << result.best.w2 << " map@10=" << result.best_map << '\n';
}

// ---------------------------------------------------------------- dataset

struct SplitArgs {
  std::string in, ratios = "0.8,0.1,0.1", out_dir = ".";
  std::uint64_t seed = 7;
};

void run_split(const SplitArgs& a) {
  std::vector<double> r;
  std::stringstream ss(a.ratios);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      r.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw UsageError("--ratios: '" + part + "' is not a number");
    }
  }
  if (r.size() != 3) throw UsageError("--ratios needs three comma-separated values");
  auto split = stratified_split(load_bioasq(a.in), {r[0], r[1], r[2]}, a.seed);
  for (const auto& w : split.warnings) warn(w);
  fs::create_directories(a.out_dir);
  write_file(fs::path(a.out_dir) / "train.json", dump_bioasq(split.train));
  write_file(fs::path(a.out_dir) / "val.json", dump_bioasq(split.val));
  write_file(fs::path(a.out_dir) / "test.json", dump_bioasq(split.test));
  std::cout << "train " << split.train.size() << ", val " << split.val.size() << ", test " << split.test.size()
            << '\n';
}

struct MineArgs {
  std::string split, run, corpus, out;
  std::size_t depth = 1000;
};

void run_mine(const MineArgs& a) {
  auto questions = load_bioasq(a.split);
  auto runs = keyed(read_runs_file(a.run), a.run);
  std::optional<DocumentStore> docs;
  if (!a.corpus.empty()) docs = DocumentStore::load(a.corpus);
  std::vector<TrainingPair> pairs;
  for (const auto& q : questions) {
    auto it = runs.find(q.id);
    if (it == runs.end()) {
      warn("question " + q.id + " has no retrieval run; skipped");
      continue;
    }
    if (q.gold_documents.empty()) {
      warn("question " + q.id + " has no gold documents; skipped");
      continue;
    }
    for (auto& p : mine_hard_negatives(q, it->second, a.depth)) {
      if (docs) {
        if (const auto* d = docs->find(p.pmid)) p.doc_text = document_text(*d);
      }
      pairs.push_back(std::move(p));
    }
  }
  write_file(a.out, format_pairs_tsv(pairs));
  std::cout << pairs.size() << " pairs\n";
}

// ---------------------------------------------------------------- prompt / answers

std::map<std::string, prompts::ExactAnswer> read_hints(const std::string& path, const std::vector<Question>& qs) {
  std::map<std::string, prompts::ExactAnswer> out;
  if (path.empty()) return out;
  for (auto& rec : prompts::parse_answers_file(read_file(path), qs)) {
    if (rec.exact) out.emplace(rec.id, std::move(*rec.exact));
  }
  return out;
}

struct PromptArgs {
  std::string questions, pool, question_id, kind = "exact", hints, out;
  int style = 1;
  std::size_t shots = 0;
  std::uint64_t seed = 7;
  std::string templates;
};

void run_prompt_build(const PromptArgs& a) {
  auto questions = load_bioasq(a.questions);
  const auto& q = find_question(by_id(questions), a.question_id);
  std::vector<Question> pool = a.pool.empty() ? questions : load_bioasq(a.pool);
  std::erase_if(pool, [&](const Question& p) { return p.id == q.id; });

  prompts::PromptSpec spec;
  spec.style = a.style;
  spec.n_shots = a.shots;
  spec.qtype = q.type;
  spec.answer_kind = prompts::parse_answer_kind(a.kind);
  spec.validate();
  std::vector<Question> fewshot;
  if (a.shots > 0) fewshot = sample_fewshot(pool, q.type, a.shots, a.seed);

  std::optional<prompts::ExactAnswer> hint;
  auto hints = read_hints(a.hints, questions);
  if (auto it = hints.find(q.id); it != hints.end()) hint = it->second;

  std::vector<std::string> snippets;
  for (const auto& s : q.gold_snippets) snippets.push_back(s.text);
  std::optional<prompts::TemplateSet> loaded;
  if (!a.templates.empty()) loaded = prompts::TemplateSet::load(a.templates);
  const auto& templates = loaded ? *loaded : prompts::TemplateSet::builtin();
  auto messages = prompts::build_prompt(q, snippets, spec, fewshot, hint, templates);
  write_file(a.out, messages_to_json(messages, 2) + "\n");
}

struct AnswersArgs {
  std::string raw, gold, out;
};

// Raw model outputs live in <dir>/<question id>.exact.txt and <question id>.ideal.txt.
void run_answers_parse(const AnswersArgs& a) {
  auto questions = load_bioasq(a.gold);
  std::vector<prompts::AnswerRecord> records;
  std::size_t failures = 0;
  for (const auto& q : questions) {
    prompts::AnswerRecord rec;
    rec.id = q.id;
    auto exact_path = fs::path(a.raw) / (q.id + ".exact.txt");
    auto ideal_path = fs::path(a.raw) / (q.id + ".ideal.txt");
    bool any = false;
    if (q.type != QuestionType::summary && fs::exists(exact_path)) {
      any = true;
      try {
        rec.exact = prompts::parse_exact_answer(read_file(exact_path), q.type);
      } catch (const prompts::AnswerParseError& e) {
        ++failures;
        warn("question " + q.id + ": " + e.what());
      }
    }
    if (fs::exists(ideal_path)) {
      any = true;
      rec.ideal = read_file(ideal_path);
      while (!rec.ideal->empty() && (rec.ideal->back() == '\n' || rec.ideal->back() == '\r')) rec.ideal->pop_back();
    }
    if (any) records.push_back(std::move(rec));
  }
  write_file(a.out, prompts::render_answers_file(questions, records));
  std::cout << records.size() << " answered, " << failures << " unparseable exact answers\n";
}

// ---------------------------------------------------------------- eval

void run_eval_a(const std::string& run, const std::string& gold, const std::string& report_path) {
  auto report = eval::evaluate_phase_a(read_runs_file(run), load_bioasq(gold));
  for (const auto& w : report.warnings) warn(w);
  write_file(report_path, report.to_json());
  std::cout << "map@10 " << report.map10 << " over " << report.evaluated << " questions\n";
}

void run_eval_b(const std::string& answers, const std::string& gold, const std::string& report_path) {
  auto questions = load_bioasq(gold);
  auto report = eval::evaluate_phase_b(prompts::parse_answers_file(read_file(answers), questions), questions);
  for (const auto& w : report.warnings) warn(w);
  write_file(report_path, report.to_json());
  std::cout << "maF1 " << report.yesno.macro_f1 << ", MRR " << report.mrr << ", list F1 " << report.list_f1
            << ", ROUGE-2 F1 " << report.rouge2.f1 << ", ROUGE-SU4 F1 " << report.rouge_su4.f1 << '\n';
}

// ---------------------------------------------------------------- pipeline

struct PipelineArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::map<std::string, std::string> flags;
};

void run_pipeline_cmd(const PipelineArgs& a) {
  pipeline::PipelineConfig cfg;
  if (!a.config.empty()) cfg.load_file(a.config);
  for (const auto& [k, v] : a.flags) cfg.set(k, v);
  for (const auto& kv : a.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  auto result = pipeline::run_pipeline(cfg);
  if (result.report) {
    for (const auto& w : result.report->warnings) warn(w);
    for (const auto& [stage, map] : result.stage_map10) std::cout << stage << "\tmap@10\t" << map << '\n';
  }
  std::cout << "manifest " << result.manifest.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pubrank: biomedical retrieval, re-ranking and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pubrank 0.3.0");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse PubMed XML into a line-delimited corpus");
  c_ingest->add_option("--in", ingest.inputs, "XML or XML.gz files, or directories")->required();
  c_ingest->add_option("--out", ingest.out, "Corpus file")->required();

  EmbedArgs embed;
  auto* c_embed = app.add_subcommand("embed", "Embed every corpus document");
  c_embed->add_option("--corpus", embed.corpus)->required();
  c_embed->add_option("--provider", embed.provider)->check(CLI::IsMember({"mock", "remote"}));
  c_embed->add_option("--dim", embed.dim);
  c_embed->add_option("--seed", embed.seed);
  c_embed->add_option("--max-tokens", embed.max_tokens);
  c_embed->add_option("--out", embed.out)->required();

  IndexArgs index;
  std::string check_path;
  auto* c_index = app.add_subcommand("index", "Build or check a vector index");
  c_index->require_subcommand(1);
  auto* c_index_build = c_index->add_subcommand("build", "Build an index from a vectors file");
  c_index_build->add_option("--vectors", index.vectors)->required();
  c_index_build->add_option("--kind", index.kind)->check(CLI::IsMember({"exact", "hnsw"}));
  c_index_build->add_option("--m", index.params.m);
  c_index_build->add_option("--efc", index.params.ef_construction);
  c_index_build->add_option("--efs", index.params.ef_search);
  c_index_build->add_option("--seed", index.params.seed);
  c_index_build->add_option("--out", index.out)->required();
  auto* c_index_check = c_index->add_subcommand("check", "Verify an index file and its graph");
  c_index_check->add_option("--index", check_path)->required();

  SearchArgs search;
  auto* c_search = app.add_subcommand("search", "Retrieve top-k documents per question");
  c_search->add_option("--index", search.index)->required();
  c_search->add_option("--questions", search.questions)->required();
  c_search->add_option("--provider", search.provider)->check(CLI::IsMember({"mock", "remote"}));
  c_search->add_option("--seed", search.seed);
  c_search->add_option("--k", search.k);
  c_search->add_option("--ef", search.ef);
  c_search->add_option("--jobs", search.jobs);
  c_search->add_option("--out", search.out)->required();

  RerankArgs rr;
  auto* c_rerank = app.add_subcommand("rerank", "Pointwise (cross) or listwise (llm) re-ranking");
  c_rerank->add_option("--stage", rr.stage)->required()->check(CLI::IsMember({"cross", "llm"}));
  c_rerank->add_option("--in", rr.in)->required();
  c_rerank->add_option("--questions", rr.questions)->required();
  c_rerank->add_option("--corpus", rr.corpus)->required();
  c_rerank->add_option("--k", rr.k);
  c_rerank->add_option("--batch", rr.batch);
  c_rerank->add_option("--jobs", rr.jobs);
  c_rerank->add_option("--audit", rr.audit, "Directory for listwise prompt/response logs");
  c_rerank->add_option("--out", rr.out)->required();

  FuseArgs fuse;
  auto* c_fuse = app.add_subcommand("fuse", "Fuse two run files");
  c_fuse->add_option("--a", fuse.a)->required();
  c_fuse->add_option("--b", fuse.b)->required();
  c_fuse->add_option("--mode", fuse.mode)->check(CLI::IsMember({"nominate", "weighted"}));
  c_fuse->add_option("--ka", fuse.config.k_a);
  c_fuse->add_option("--w1", fuse.config.w1);
  c_fuse->add_option("--w2", fuse.config.w2);
  c_fuse->add_option("--k", fuse.config.k_total);
  c_fuse->add_option("--out", fuse.out)->required();

  GridArgs grid;
  auto* c_grid = app.add_subcommand("gridsearch", "Search integer fusion weights on a validation set");
  c_grid->add_option("--a", grid.a)->required();
  c_grid->add_option("--b", grid.b)->required();
  c_grid->add_option("--gold", grid.gold)->required();
  c_grid->add_option("--max-weight", grid.max_weight);
  c_grid->add_option("--out", grid.out)->required();

  SplitArgs split;
  MineArgs mine;
  auto* c_dataset = app.add_subcommand("dataset", "Dataset splits and training pairs");
  c_dataset->require_subcommand(1);
  auto* c_split = c_dataset->add_subcommand("split", "Stratified train/val/test split");
  c_split->add_option("--in", split.in)->required();
  c_split->add_option("--ratios", split.ratios);
  c_split->add_option("--seed", split.seed);
  c_split->add_option("--out-dir", split.out_dir);
  auto* c_mine = c_dataset->add_subcommand("mine-negatives", "Gold positives plus retrieved hard negatives");
  c_mine->add_option("--split", mine.split, "BioASQ JSON of the split")->required();
  c_mine->add_option("--run", mine.run)->required();
  c_mine->add_option("--corpus", mine.corpus, "Fills doc_text when given");
  c_mine->add_option("--depth", mine.depth);
  c_mine->add_option("--out", mine.out)->required();

  PromptArgs prompt;
  auto* c_prompt = app.add_subcommand("prompt", "Phase B prompts");
  c_prompt->require_subcommand(1);
  auto* c_prompt_build = c_prompt->add_subcommand("build", "Build the chat messages for one question");
  c_prompt_build->add_option("--questions", prompt.questions)->required();
  c_prompt_build->add_option("--question-id", prompt.question_id)->required();
  c_prompt_build->add_option("--pool", prompt.pool, "Few-shot pool (defaults to --questions)");
  c_prompt_build->add_option("--style", prompt.style)->check(CLI::Range(1, 3));
  c_prompt_build->add_option("--shots", prompt.shots);
  c_prompt_build->add_option("--kind", prompt.kind)->check(CLI::IsMember({"exact", "ideal"}));
  c_prompt_build->add_option("--answers-hint", prompt.hints, "Answers file with system exact answers");
  c_prompt_build->add_option("--seed", prompt.seed);
  c_prompt_build->add_option("--templates", prompt.templates, "Template directory overriding the built-in set");
  c_prompt_build->add_option("--out", prompt.out)->required();

  AnswersArgs answers;
  auto* c_answers = app.add_subcommand("answers", "Model answer handling");
  c_answers->require_subcommand(1);
  auto* c_answers_parse = c_answers->add_subcommand("parse", "Parse raw model outputs into an answers file");
  c_answers_parse->add_option("--raw", answers.raw)->required();
  c_answers_parse->add_option("--gold", answers.gold)->required();
  c_answers_parse->add_option("--out", answers.out)->required();

  std::string ev_run, ev_answers, ev_gold, ev_report;
  auto* c_eval = app.add_subcommand("eval", "Phase A and Phase B evaluation");
  c_eval->require_subcommand(1);
  auto* c_eval_a = c_eval->add_subcommand("phase-a", "MAP@10 and recall of a run file");
  c_eval_a->add_option("--run", ev_run)->required();
  c_eval_a->add_option("--gold", ev_gold)->required();
  c_eval_a->add_option("--report", ev_report)->required();
  auto* c_eval_b = c_eval->add_subcommand("phase-b", "Exact and ideal answer metrics");
  c_eval_b->add_option("--answers", ev_answers)->required();
  c_eval_b->add_option("--gold", ev_gold)->required();
  c_eval_b->add_option("--report", ev_report)->required();

  PipelineArgs pipe;
  std::string p_corpus, p_index, p_questions, p_out, p_provider, p_fixtures, p_mode, p_seed, p_jobs;
  auto* c_pipe = app.add_subcommand("pipeline", "Retrieve, re-rank, fuse and evaluate in one run");
  c_pipe->add_option("--config", pipe.config, "key = value config file");
  c_pipe->add_option("--corpus", p_corpus);
  c_pipe->add_option("--index", p_index);
  c_pipe->add_option("--questions", p_questions);
  c_pipe->add_option("--out", p_out);
  c_pipe->add_option("--provider", p_provider);
  c_pipe->add_option("--fixtures", p_fixtures);
  c_pipe->add_option("--fixture-mode", p_mode);
  c_pipe->add_option("--seed", p_seed);
  c_pipe->add_option("--jobs", p_jobs);
  c_pipe->add_option("--set", pipe.overrides, "Override any config key: --set fusion.w2=5");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_ingest) run_ingest(ingest);
    else if (*c_embed) run_embed(embed);
    else if (*c_index_build) run_index_build(index);
    else if (*c_index_check) run_index_check(check_path);
    else if (*c_search) run_search(search);
    else if (*c_rerank) run_rerank(rr);
    else if (*c_fuse) run_fuse(fuse);
    else if (*c_grid) run_gridsearch(grid);
    else if (*c_split) run_split(split);
    else if (*c_mine) run_mine(mine);
    else if (*c_prompt_build) run_prompt_build(prompt);
    else if (*c_answers_parse) run_answers_parse(answers);
    else if (*c_eval_a) run_eval_a(ev_run, ev_gold, ev_report);
    else if (*c_eval_b) run_eval_b(ev_answers, ev_gold, ev_report);
    else if (*c_pipe) {
      std::pair<const std::string*, const char*> flags[] = {
          {&p_corpus, "corpus"},     {&p_index, "index"},        {&p_questions, "questions"},
          {&p_out, "out"},           {&p_provider, "provider"},  {&p_fixtures, "fixtures"},
          {&p_mode, "fixture_mode"}, {&p_seed, "seed"},          {&p_jobs, "jobs"}};
      for (const auto& [value, key] : flags) {
        if (!value->empty()) pipe.flags[key] = *value;
      }
      run_pipeline_cmd(pipe);
    }
  } catch (const Error& e) {
    std::cerr << "pubrank: error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "pubrank: error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  }
  return 0;
}
