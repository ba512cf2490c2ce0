#pragma once

// End-to-end Phase A run: retrieve, pointwise re-rank to 30 and 10, listwise
// re-rank 30 -> 10, fuse, evaluate. Every stage's run file is written to the
// output directory along with manifest.json.
//
// Config file format: one `key = value` per line, `#` starts a comment, blank
// lines are ignored. Keys:
//
//   corpus          corpus JSONL                    (required)
//   index           index file                      (required)
//   questions       BioASQ JSON                     (required)
//   out             output directory                (required)
//   provider        mock | remote                   (mock)
//   seed            mock embedding seed             (42)
//   max_tokens      query truncation, tokens        (512)
//   ef_search       HNSW ef override, 0 = index's   (0)
//   retrieve_k      (1000)   cross_k (30)   final_k (10)
//   score_batch     documents per /score request    (64)
//   fusion.mode     nominate | weighted             (weighted)
//   fusion.ka       (6)   fusion.w1 (1)   fusion.w2 (7)
//   fixtures        fixture directory               (unset)
//   fixture_mode    record | replay | passthrough   (replay when fixtures is set)
//   jobs            questions in flight             (1)
//   audit           write listwise exchanges, true | false (false)

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pubrank/clients.hpp"
#include "pubrank/eval.hpp"
#include "pubrank/fusion.hpp"
#include "pubrank/run.hpp"

namespace pubrank::pipeline {

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path index;
  std::filesystem::path questions;
  std::filesystem::path out;
  std::string provider = "mock";
  std::uint64_t seed = 42;
  std::size_t max_tokens = 512;
  std::size_t ef_search = 0;
  std::size_t retrieve_k = 1000;
  std::size_t cross_k = 30;
  std::size_t final_k = 10;
  std::size_t score_batch = 64;
  fusion::FusionConfig fusion;
  std::optional<std::filesystem::path> fixtures;
  std::optional<FixtureMode> fixture_mode;
  std::size_t jobs = 1;
  bool audit = false;

  /// Sets one key from its text value; UsageError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Applies a config file on top of the current values.
  void load_file(const std::filesystem::path& path);
  /// Throws UsageError on missing required keys or k ordering violations.
  void validate() const;
  /// Stable `key = value` text of every setting that affects results (the
  /// output directory and job count are excluded).
  std::string canonical() const;
};

/// Stage run files in the order they are written.
inline const std::vector<std::string> kStageFiles{"retrieval.jsonl", "cross30.jsonl", "cross10.jsonl",
                                                  "llm10.jsonl", "fused.jsonl"};

struct PipelineResult {
  std::map<std::string, std::vector<RankedRun>> runs;  // keyed by stage file name
  std::optional<eval::PhaseAReport> report;             // fused run, when gold documents exist
  std::map<std::string, double> stage_map10;            // per stage file, when gold documents exist
  std::filesystem::path manifest;
};

/// `network` replaces the HTTP channel for non-replay modes (tests use it to
/// plug in a simulated backend).
PipelineResult run_pipeline(const PipelineConfig& config, std::shared_ptr<Channel> network = nullptr);

}  // namespace pubrank::pipeline
