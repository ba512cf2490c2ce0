#pragma once

#include <filesystem>

#include "pubrank/pipeline.hpp"
#include "pubrank/testkit/synthetic.hpp"

namespace pubrank::testkit {

/// Creates a fresh unique directory under the system temp dir and removes it
/// on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view prefix = "pubrank");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

struct E2EFixture {
  std::filesystem::path root;
  std::filesystem::path corpus;     // corpus.jsonl
  std::filesystem::path questions;  // questions.json
  std::filesystem::path index;      // index.prix
  std::filesystem::path fixtures;   // recorded model exchanges
  std::filesystem::path config;     // pipeline.conf (replay, out = <root>/run)
};

struct E2EOptions {
  WorldOptions world{};
  std::size_t dimension = 64;
  std::size_t retrieve_k = 100;
  bool hnsw = true;
  /// Number of leading questions whose listwise reply is partial / garbage.
  std::size_t partial_chat = 2;
  std::size_t garbage_chat = 1;
};

/// Writes corpus, questions and an index under `root`, embedding documents
/// through the remote provider, then runs the pipeline once in record mode
/// against a SimulatedBackend so that every exchange lands in `fixtures`.
/// The written config replays those fixtures.
E2EFixture build_e2e_fixture(const std::filesystem::path& root, const E2EOptions& options = {});

/// Config for replaying `fixture` into `out`.
pipeline::PipelineConfig replay_config(const E2EFixture& fixture, const std::filesystem::path& out);

}  // namespace pubrank::testkit
