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

#ifndef CORRCACHE_EXPERIMENT_HPP
#define CORRCACHE_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "corrcache/estimators.hpp"
#include "corrcache/placement.hpp"
#include "corrcache/policies.hpp"
#include "corrcache/workload.hpp"

namespace corrcache {

// Retrieval-cost assignment: an explicit vector or the power rule
// f(i) = scale * i^(-exponent), always with a declared bound K.
struct CostRule {
  enum class Kind { Explicit, Power };
  Kind kind = Kind::Power;
  std::vector<double> values;  // Explicit
  double scale = 1.0;          // Power
  double exponent = 0.0;       // Power
  double bound = 1.0;          // K

  std::vector<double> materialize(std::int32_t universe) const;
};

// Document sizes: an explicit vector or draws from a finite value set
// with given frequencies, seeded by seed_tag (independent of run seeds).
struct SizeRule {
  enum class Kind { Explicit, FiniteSet };
  Kind kind = Kind::FiniteSet;
  std::vector<double> values;   // Explicit: per-doc; FiniteSet: the value set
  std::vector<double> weights;  // FiniteSet frequencies
  std::uint64_t seed_tag = 0;

  std::vector<double> materialize(std::int32_t universe) const;
};

struct PolicySpec {
  PolicyKind kind = PolicyKind::Lru;
  std::optional<std::vector<DocId>> given_set;  // StaticGivenSet only
};

struct ExperimentConfig {
  std::string id = "experiment";
  SemiMarkovSpec spec;
  std::vector<PolicySpec> policies;
  std::vector<std::int64_t> cache_sizes;
  StopRule stop = StopRule::max_requests(100'000);
  std::vector<std::uint64_t> seeds;
  double warmup_fraction = 0.0;
  std::vector<DocId> probes;             // lemma1 subcommand
  std::uint64_t lemma1_cycles = 100'000;
  std::optional<CostRule> costs;
  std::optional<SizeRule> sizes;
  std::optional<double> placement_budget;  // defaults to each cache size
  std::uint64_t request_cap = kDefaultRequestCap;
};

// Throws Error(Errc::ConfigParse) on malformed JSON and
// Error(Errc::ConfigInvalid) naming the offending field otherwise.
ExperimentConfig parse_config_text(const std::string& text);
// Adds Error(Errc::IoFailure) when the file cannot be read.
ExperimentConfig load_config(const std::string& path);

struct RunSettings {
  std::string out_dir = ".";
  int workers = 1;
  std::vector<std::uint64_t> seed_override;
  std::string config_path;  // recorded in the manifest
};

// Subcommand bodies. Result files are byte-identical across re-runs with
// the same config and seeds; only the manifest carries a timestamp.
void run_validate(const ExperimentConfig& config, std::ostream& log);
void run_simulate(const ExperimentConfig& config, const RunSettings& settings,
                  std::ostream& log);
void run_curve(const ExperimentConfig& config, const RunSettings& settings,
               std::ostream& log);
void run_lemma1(const ExperimentConfig& config, const RunSettings& settings,
                std::ostream& log);
void run_placement(const ExperimentConfig& config, const RunSettings& settings,
                   std::ostream& log);
void run_export_trace(const ExperimentConfig& config,
                      const RunSettings& settings, std::ostream& log);

// Hex spec hash as recorded in result rows and the manifest.
std::string spec_hash_hex(const ValidatedSpec& spec);

}  // namespace corrcache

#endif  // CORRCACHE_EXPERIMENT_HPP
