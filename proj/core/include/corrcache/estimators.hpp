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

#ifndef CORRCACHE_ESTIMATORS_HPP
#define CORRCACHE_ESTIMATORS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "corrcache/policies.hpp"
#include "corrcache/workload.hpp"

namespace corrcache {

// exp(Euler-Mascheroni constant): the asymptotic LRU-to-optimal fault
// ratio under generalized Zipf popularity; emitted with ratio curves as
// the reference constant.
inline constexpr double kEulerGammaExp = 1.781072417990198;

enum class EstimatorMethod { TimeAverage, Regenerative };

struct FaultEstimate {
  double point = 0.0;
  double stderr_value = 0.0;
  // Requests (time average) or completed cycles (regenerative).
  std::uint64_t samples = 0;
  EstimatorMethod method = EstimatorMethod::Regenerative;
};

/**
 * Streaming non-overlapping batch means. Batch sizes double whenever the
 * slot array fills, so the number of full batches stays in [20, 40) once
 * enough samples arrived, without storing the sample path.
 */
class BatchMeans {
 public:
  static constexpr std::size_t kMinBatches = 20;

  void add(double x);
  std::uint64_t count() const { return count_; }
  double point() const;              // mean over all samples
  std::size_t full_batches() const { return sums_.size(); }
  double stderr_of_mean() const;     // sd(batch means)/sqrt(B), full batches

 private:
  std::vector<double> sums_;      // completed batches, each over size_ samples
  std::uint64_t size_ = 1;        // current batch size
  double partial_ = 0.0;
  std::uint64_t partial_count_ = 0;
  double total_ = 0.0;
  std::uint64_t count_ = 0;
};

struct RunOptions {
  // Fraction of the stream discarded before time-average accumulation
  // (regenerative tallies always start at the time-0 regeneration).
  // Counted in requests: n*w for MaxRequests, t*w for MaxTime, 0 for
  // MaxCycles. Must lie in [0, 0.5].
  double warmup_fraction = 0.0;
  // Per-document miss weights f (indexed by doc-1); empty means f == 1,
  // which makes every estimate a plain fault probability.
  std::span<const double> cost{};
  std::uint64_t request_cap = kDefaultRequestCap;
};

/**
 * Everything measured while driving one policy over one stream: totals,
 * per-cycle tallies for the regenerative estimator, post-warmup batch
 * means for the time-average estimator, and the per-cycle fault
 * lower-bound audit (misses in a cycle can never undercut the number of
 * distinct requests absent from the cache at the cycle start).
 */
struct PolicyRunReport {
  std::uint64_t total_requests = 0;
  std::uint64_t total_misses = 0;
  double total_weighted_misses = 0.0;
  double elapsed = 0.0;

  std::vector<std::uint64_t> cycle_requests;
  std::vector<std::uint64_t> cycle_misses;
  std::vector<double> cycle_weighted_misses;
  std::vector<double> cycle_lengths;

  std::uint64_t audited_cycles = 0;
  std::uint64_t bound_violations = 0;

  BatchMeans post_warmup;         // per-request miss weights after warmup
  std::uint64_t warmup_requests = 0;
};

PolicyRunReport run_policy(const ValidatedSpec& spec, CachePolicy& policy,
                           StopRule stop, std::uint64_t seed,
                           const RunOptions& options = {});

// Misses per request after warm-up; batch-means standard error.
// Errors: StreamTooShort (fewer than 20 batches of 100 requests).
FaultEstimate time_average_fault(const PolicyRunReport& report);

// Regenerative ratio estimator over completed cycles with delta-method
// standard errors. Errors: TooFewCycles (< 30 cycles).
FaultEstimate regenerative_fault(const PolicyRunReport& report);

// Cost objective: identical machinery, weights were applied by the run.
FaultEstimate cost_average(const PolicyRunReport& report,
                           EstimatorMethod method);

// ---------------------------------------------------------------------------

struct Lemma1Probe {
  DocId doc = 0;
  double hit_prob = 0.0;         // fraction of cycles requesting the doc
  double hit_prob_stderr = 0.0;
  double ratio = 0.0;            // hit_prob / (q_doc * mean cycle length)
  double ratio_stderr = 0.0;
  double product_form = 0.0;     // mean of 1 - prod_r (1-q^{(r)})^{N_r}
  double identity_z = 0.0;       // paired z-score of hit - product_form
  double mean_cycle_length = 0.0;
};

// Probes the regenerative first-request identity over `num_cycles`
// cycles (at least 10^4; otherwise TooFewCycles).
std::vector<Lemma1Probe> lemma1_probe(const ValidatedSpec& spec,
                                      std::span<const DocId> docs,
                                      std::uint64_t num_cycles,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------

struct RatioPoint {
  std::int64_t x = 0;
  double ratio = 0.0;       // policy estimate / exact static tail
  double ci_low = 0.0;      // 95% band from the policy stderr
  double ci_high = 0.0;
  double policy_point = 0.0;
  double policy_stderr = 0.0;
  double static_exact = 0.0;
  std::uint64_t cycles = 0;
};

struct RatioCurve {
  PolicyKind policy = PolicyKind::Lru;
  double reference_constant = kEulerGammaExp;
  std::vector<RatioPoint> points;
};

// Simulates the policy at each cache size and divides by the exact
// static tail sum. Grid must be strictly increasing with
// max(x) <= universe/10.
RatioCurve ratio_curve(const ValidatedSpec& spec, PolicyKind policy,
                       std::span<const std::int64_t> xs, StopRule stop,
                       std::uint64_t seed);

}  // namespace corrcache

#endif  // CORRCACHE_ESTIMATORS_HPP
