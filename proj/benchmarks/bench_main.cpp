/*
 * Copyright 2026 The corrcache Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include <vector>

#include "corrcache/estimators.hpp"
#include "corrcache/policies.hpp"
#include "corrcache/workload.hpp"

namespace {

using namespace corrcache;

SemiMarkovSpec iid_spec(std::int32_t n) {
  SemiMarkovSpec spec;
  spec.num_states = 1;
  spec.transition = {{1.0}};
  spec.sojourn = {ExponentialSojourn{1.0}};
  spec.popularity = {ZipfLaw{1.0, n}};
  spec.universe_size = n;
  return spec;
}

SemiMarkovSpec modulated_spec(std::int32_t n) {
  SemiMarkovSpec spec;
  spec.num_states = 3;
  spec.transition = {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
  spec.sojourn = {ExponentialSojourn{1.0}, ParetoSojourn{2.2, 5.0},
                  DeterministicSojourn{1.0}};
  spec.popularity = {ZipfLaw{1.0, n},
                     PermutedZipfLaw{1.0, n, {3, 1, 2}},
                     ZipfLaw{1.0, n}};
  spec.universe_size = n;
  return spec;
}

void BM_AliasSample(benchmark::State& state) {
  const auto spec = validate_spec(iid_spec(100'000));
  const AliasTable& table = spec.doc_sampler(1);
  SplitMix64 rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(table.sample(rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_AliasSample);

void BM_StreamGeneration(benchmark::State& state) {
  const auto spec = validate_spec(
      state.range(0) == 0 ? iid_spec(100'000) : modulated_spec(100'000));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    StreamCursor cursor(spec, StopRule::max_requests(100'000), seed++);
    std::uint64_t docs = 0;
    for (;;) {
      const auto item = cursor.advance();
      if (item == StreamCursor::Item::Finished) break;
      if (item == StreamCursor::Item::Request) {
        docs += static_cast<std::uint64_t>(cursor.event().doc);
      }
    }
    benchmark::DoNotOptimize(docs);
  }
  state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_StreamGeneration)->ArgName("modulated")->Arg(0)->Arg(1);

void BM_PolicyAccess(benchmark::State& state) {
  const auto kind = static_cast<PolicyKind>(state.range(0));
  const auto spec = validate_spec(iid_spec(100'000));
  std::vector<DocId> docs;
  docs.reserve(100'000);
  SplitMix64 rng(7);
  const AliasTable& table = spec.doc_sampler(1);
  for (int i = 0; i < 100'000; ++i) docs.push_back(table.sample(rng) + 1);

  PolicyContext context;
  context.popularity = spec.marginal_popularity();
  for (auto _ : state) {
    auto policy = make_policy(kind, 1000, context, 3);
    std::uint64_t misses = 0;
    for (DocId d : docs) misses += policy->access(d).hit ? 0 : 1;
    benchmark::DoNotOptimize(misses);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int>(docs.size()));
}
BENCHMARK(BM_PolicyAccess)
    ->ArgName("policy")
    ->Arg(static_cast<int>(PolicyKind::StaticTopX))
    ->Arg(static_cast<int>(PolicyKind::Lru))
    ->Arg(static_cast<int>(PolicyKind::Lfu))
    ->Arg(static_cast<int>(PolicyKind::Fifo))
    ->Arg(static_cast<int>(PolicyKind::RandomEvict));

void BM_PolicyRun(benchmark::State& state) {
  const auto spec = validate_spec(modulated_spec(10'000));
  PolicyContext context;
  context.popularity = spec.marginal_popularity();
  std::uint64_t seed = 1;
  for (auto _ : state) {
    auto policy = make_policy(PolicyKind::Lru, 500, context, seed);
    const auto report =
        run_policy(spec, *policy, StopRule::max_requests(50'000), seed++);
    benchmark::DoNotOptimize(report.total_misses);
  }
  state.SetItemsProcessed(state.iterations() * 50'000);
}
BENCHMARK(BM_PolicyRun);

void BM_Lemma1Probe(benchmark::State& state) {
  const auto spec = validate_spec(modulated_spec(2000));
  const std::vector<DocId> docs{10, 100, 1000};
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lemma1_probe(spec, docs, 10'000, seed++));
  }
}
BENCHMARK(BM_Lemma1Probe);

}  // namespace

BENCHMARK_MAIN();
