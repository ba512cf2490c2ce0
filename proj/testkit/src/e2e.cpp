#include "pubrank/testkit/e2e.hpp"

#include <cstdlib>
#include <fstream>
#include <memory>

#include "pubrank/clients.hpp"
#include "pubrank/embedding.hpp"
#include "pubrank/errors.hpp"
#include "pubrank/files.hpp"
#include "pubrank/index.hpp"
#include "pubrank/testkit/backend.hpp"

namespace pubrank::testkit {

TempDir::TempDir(std::string_view prefix) {
  auto pattern = (std::filesystem::temp_directory_path() / (std::string(prefix) + "-XXXXXX")).string();
  if (mkdtemp(pattern.data()) == nullptr) throw DataError("cannot create temporary directory " + pattern);
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

E2EFixture build_e2e_fixture(const std::filesystem::path& root, const E2EOptions& options) {
  E2EFixture fx;
  fx.root = root;
  fx.corpus = root / "corpus.jsonl";
  fx.questions = root / "questions.json";
  fx.index = root / "index.prix";
  fx.fixtures = root / "fixtures";
  fx.config = root / "pipeline.conf";
  std::filesystem::create_directories(fx.fixtures);

  auto world = make_world(options.world);
  {
    std::string lines;
    for (const auto& d : world.documents) lines += corpus_line(d) + "\n";
    write_file(fx.corpus, lines);
  }
  write_file(fx.questions, dump_bioasq(world.questions));

  auto backend = std::make_shared<SimulatedBackend>(world, options.dimension);
  std::size_t q = 0;
  for (std::size_t i = 0; i < options.partial_chat && q < world.questions.size(); ++i, ++q) {
    backend->set_chat_behaviour(world.questions[q].id, ChatBehaviour::partial);
  }
  for (std::size_t i = 0; i < options.garbage_chat && q < world.questions.size(); ++i, ++q) {
    backend->set_chat_behaviour(world.questions[q].id, ChatBehaviour::garbage);
  }

  // Document embeddings go through the remote provider so they are recorded too.
  auto store = std::make_shared<FixtureStore>(fx.fixtures, FixtureMode::record, backend);
  auto service = std::make_shared<ServiceClient>(store);
  EmbedClient embed_client(service, options.dimension);
  RemoteEmbeddingProvider provider(embed_client, options.dimension);
  std::vector<std::string> texts;
  for (const auto& d : world.documents) texts.push_back(document_text(d));
  auto vectors = embed_batch(provider, texts);
  VectorSet set;
  set.dimension = static_cast<std::uint32_t>(options.dimension);
  for (std::size_t i = 0; i < vectors.size(); ++i) set.append(world.documents[i].pmid, vectors[i]);
  auto index = VectorIndex::build(std::move(set), options.hnsw ? IndexKind::hnsw : IndexKind::exact);
  index.save(fx.index);

  pipeline::PipelineConfig rec;
  rec.corpus = fx.corpus;
  rec.index = fx.index;
  rec.questions = fx.questions;
  rec.out = root / "record-run";
  rec.provider = "remote";
  rec.retrieve_k = options.retrieve_k;
  rec.fixtures = fx.fixtures;
  rec.fixture_mode = FixtureMode::record;
  pipeline::run_pipeline(rec, backend);

  std::ofstream conf(fx.config);
  conf << "# Replays the recorded model exchanges for the synthetic fixture corpus.\n"
       << "corpus = " << fx.corpus.string() << "\n"
       << "index = " << fx.index.string() << "\n"
       << "questions = " << fx.questions.string() << "\n"
       << "out = " << (root / "run").string() << "\n"
       << "provider = remote\n"
       << "retrieve_k = " << options.retrieve_k << "\n"
       << "cross_k = 30\nfinal_k = 10\n"
       << "fusion.mode = weighted\nfusion.w1 = 1\nfusion.w2 = 7\n"
       << "fixtures = " << fx.fixtures.string() << "\n"
       << "fixture_mode = replay\n"
       << "audit = true\n";
  if (!conf) throw DataError("cannot write " + fx.config.string());
  return fx;
}

pipeline::PipelineConfig replay_config(const E2EFixture& fixture, const std::filesystem::path& out) {
  pipeline::PipelineConfig cfg;
  cfg.load_file(fixture.config);
  cfg.out = out;
  return cfg;
}

}  // namespace pubrank::testkit
