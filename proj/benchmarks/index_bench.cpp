#include <random>

#include <benchmark/benchmark.h>

#include "pubrank/embedding.hpp"
#include "pubrank/index.hpp"

using namespace pubrank;

namespace {

// Clustered unit vectors, roughly how sentence embeddings of a topical corpus sit.
struct Cloud {
  VectorSet set;
  std::vector<std::vector<float>> queries;
};

Cloud make_cloud(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> unit(0.0, 1.0), noise(0.0, 0.12);
  std::vector<std::vector<float>> centers(32, std::vector<float>(dim));
  for (auto& c : centers) {
    for (auto& x : c) x = static_cast<float>(unit(rng));
    l2_normalize(c);
  }
  auto draw = [&] {
    const auto& c = centers[rng() % centers.size()];
    std::vector<float> v(dim);
    for (std::size_t j = 0; j < dim; ++j) v[j] = static_cast<float>(c[j] + noise(rng));
    l2_normalize(v);
    return v;
  };
  Cloud cloud;
  cloud.set.dimension = dim;
  for (std::size_t i = 0; i < n; ++i) cloud.set.append(std::to_string(100000 + i), draw());
  for (int i = 0; i < 64; ++i) cloud.queries.push_back(draw());
  return cloud;
}

const Cloud& cloud_10k() {
  static const Cloud c = make_cloud(10000, 64);
  return c;
}

void BM_HnswBuild(benchmark::State& state) {
  auto cloud = make_cloud(static_cast<std::size_t>(state.range(0)), 64);
  for (auto _ : state) {
    auto index = VectorIndex::build(cloud.set, IndexKind::hnsw);
    benchmark::DoNotOptimize(index.entry_point());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HnswBuild)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_ExactQuery(benchmark::State& state) {
  static const auto index = VectorIndex::build(cloud_10k().set, IndexKind::exact);
  std::size_t i = 0;
  for (auto _ : state) {
    auto hits = index.query(cloud_10k().queries[i++ % 64], 1000);
    benchmark::DoNotOptimize(hits.data());
  }
}
BENCHMARK(BM_ExactQuery)->Unit(benchmark::kMicrosecond);

void BM_HnswQuery(benchmark::State& state) {
  static const auto index = VectorIndex::build(cloud_10k().set, IndexKind::hnsw);
  auto ef = static_cast<std::size_t>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    auto hits = index.query(cloud_10k().queries[i++ % 64], 10, ef);
    benchmark::DoNotOptimize(hits.data());
  }
}
BENCHMARK(BM_HnswQuery)->Arg(32)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);

}  // namespace
