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

#ifndef CORRCACHE_WORKLOAD_HPP
#define CORRCACHE_WORKLOAD_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "corrcache/errors.hpp"
#include "corrcache/rng.hpp"

namespace corrcache {

// Documents and modulating states are 1-based throughout the public API.
using DocId = std::int32_t;
using StateId = std::int32_t;

// ---------------------------------------------------------------------------
// Sojourn laws: how long the modulating process stays in one state.
// All three have finite strictly positive mean (Pareto requires shape > 1).

struct ExponentialSojourn {
  double mean;
};
struct DeterministicSojourn {
  double value;
};
struct ParetoSojourn {
  double shape;  // > 1 so the mean exists
  double scale;  // > 0, left endpoint of the support
};

using SojournLaw =
    std::variant<ExponentialSojourn, DeterministicSojourn, ParetoSojourn>;

double sojourn_mean(const SojournLaw& law);
double sample_sojourn(const SojournLaw& law, SplitMix64& rng);
// Throws Error(Errc::BadSojournParameters) if the mean is not finite/positive.
void check_sojourn(const SojournLaw& law);

// ---------------------------------------------------------------------------
// Popularity laws: per-state document request distributions over 1..N.

struct ZipfLaw {
  double alpha;           // > 0
  std::int32_t universe;  // N >= 1; weights i^-alpha renormalized over 1..N
};
struct ExplicitLaw {
  std::vector<double> weights;  // nonnegative, positive total
};
// Zipf weights with the first permutation.size() ranks permuted; entry k
// (1-based) receives the weight of rank permutation[k-1]. Gives modulated
// popularity with an unchanged tail and controlled marginal.
struct PermutedZipfLaw {
  double alpha;
  std::int32_t universe;
  std::vector<std::int32_t> permutation;  // 1-based permutation of 1..K
};

using PopularityLaw = std::variant<ZipfLaw, ExplicitLaw, PermutedZipfLaw>;

// Normalized weight vector of length `universe`; throws
// Error(Errc::PopularityLengthMismatch) when the law's own universe
// disagrees with the requested one, Error(Errc::ConfigInvalid) for bad
// parameters (alpha <= 0, negative weights, bad permutation).
std::vector<double> popularity_weights(const PopularityLaw& law,
                                       std::int32_t universe);

// ---------------------------------------------------------------------------

struct SemiMarkovSpec {
  std::int32_t num_states = 0;                    // M >= 1
  std::vector<std::vector<double>> transition;    // M x M row-stochastic
  std::vector<SojournLaw> sojourn;                // per state
  std::vector<PopularityLaw> popularity;          // per state, common universe
  std::int32_t universe_size = 0;                 // N >= 1
};

/**
 * Immutable validated wrapper around a SemiMarkovSpec. Construction checks
 * every structural invariant (stochastic rows, irreducibility, sojourn
 * parameters, popularity lengths, positive marginal) and caches the derived
 * quantities every consumer needs: the embedded stationary vector, the
 * time-stationary vector, the marginal popularity and its sorting
 * permutation, and one alias sampler per state. Safe to share across
 * threads.
 */
class ValidatedSpec {
 public:
  const SemiMarkovSpec& spec() const { return spec_; }
  std::int32_t num_states() const { return spec_.num_states; }
  std::int32_t universe_size() const { return spec_.universe_size; }

  // Stationary vector nu of the embedded jump chain: nu P = nu.
  std::span<const double> embedded_stationary() const { return nu_; }
  // Time-stationary occupancy pi_r proportional to nu_r * mean sojourn.
  std::span<const double> time_stationary() const { return pi_; }
  // Marginal popularity q_i = sum_r pi_r q_i^{(r)}, indexed by doc-1.
  std::span<const double> marginal_popularity() const { return marginal_; }
  // Document ids sorted by non-increasing marginal popularity, ties broken
  // by lowest id; popularity_order()[0] is the most popular document.
  std::span<const DocId> popularity_order() const { return order_; }

  // Exact fault probability of the static top-x placement: the total
  // marginal popularity outside the x most popular documents.
  double static_tail(std::int64_t x) const;

  double sojourn_mean_of(StateId state) const {
    return sojourn_means_[static_cast<std::size_t>(state - 1)];
  }
  std::span<const double> state_weights(StateId state) const {
    return state_weights_[static_cast<std::size_t>(state - 1)];
  }
  const AliasTable& doc_sampler(StateId state) const {
    return samplers_[static_cast<std::size_t>(state - 1)];
  }

  // FNV-1a of the canonical text; stable across runs and platforms.
  std::uint64_t hash() const { return hash_; }
  std::string canonical_text() const;

 private:
  friend ValidatedSpec validate_spec(const SemiMarkovSpec& spec);
  ValidatedSpec() = default;

  SemiMarkovSpec spec_;
  std::vector<double> nu_;
  std::vector<double> pi_;
  std::vector<double> marginal_;
  std::vector<DocId> order_;
  std::vector<double> sojourn_means_;
  std::vector<std::vector<double>> state_weights_;
  std::vector<AliasTable> samplers_;
  std::vector<double> tail_from_rank_;  // tail_from_rank_[x] = sum beyond top-x
  std::uint64_t hash_ = 0;
};

// Errors: NonStochasticMatrix, NotIrreducible, BadSojournParameters,
// PopularityLengthMismatch, ZeroMarginalPopularity, SingularSolve.
ValidatedSpec validate_spec(const SemiMarkovSpec& spec);

// ---------------------------------------------------------------------------
// Stream generation.

struct StopRule {
  enum class Kind { MaxRequests, MaxTime, MaxCycles };
  Kind kind = Kind::MaxRequests;
  std::uint64_t count = 0;  // MaxRequests / MaxCycles
  double time = 0.0;        // MaxTime

  static StopRule max_requests(std::uint64_t n) {
    return {Kind::MaxRequests, n, 0.0};
  }
  static StopRule max_time(double t) { return {Kind::MaxTime, 0, t}; }
  static StopRule max_cycles(std::uint64_t k) {
    return {Kind::MaxCycles, k, 0.0};
  }
};

struct RequestEvent {
  double time = 0.0;            // Poisson arrival instant
  DocId doc = 0;                // requested document, 1..N
  StateId state = 0;            // modulating state at the instant, 1..M
  std::int64_t cycle_index = 0; // regenerative cycle containing the event
};

struct CycleStats {
  std::int64_t cycle_index = 0;
  double start = 0.0;
  double end = 0.0;
  std::vector<std::uint64_t> per_state_counts;  // requests seen per state
  std::uint64_t total_count = 0;
  std::vector<DocId> distinct_docs;             // unique, first-seen order
  std::vector<double> per_state_time;           // occupancy within the cycle
};

// Guard against MaxCycles runs that never regenerate (possible only for
// broken specs; validated specs regenerate a.s. but the cap keeps a bound).
inline constexpr std::uint64_t kDefaultRequestCap = 1'000'000'000ULL;

/**
 * Incremental generator of one request stream. Streams start at a
 * regeneration instant: the modulating process enters state 1 at time 0
 * with a fresh sojourn, and cycle 0 is a full cycle.
 *
 * advance() steps the simulation and reports what it produced:
 *   Request  - event() holds the next request, in time order;
 *   CycleEnd - cycle() holds the stats of the cycle that just closed
 *              (emitted after the cycle's last request and before any
 *              request of the next cycle; the buffer is reused);
 *   Finished - the stop rule is satisfied; a trailing partial cycle is
 *              never emitted.
 *
 * Identical (spec, stop, seed) produce bit-identical streams.
 */
class StreamCursor {
 public:
  enum class Item { Request, CycleEnd, Finished };

  StreamCursor(const ValidatedSpec& spec, StopRule stop, std::uint64_t seed,
               std::uint64_t request_cap = kDefaultRequestCap);

  Item advance();  // throws Error(Errc::CycleCapExceeded) past the cap

  const RequestEvent& event() const { return event_; }
  const CycleStats& cycle() const { return cycle_; }

  std::uint64_t requests_emitted() const { return requests_emitted_; }
  std::uint64_t cycles_completed() const { return cycles_completed_; }
  double elapsed() const { return clock_; }

 private:
  void open_cycle(double at);
  void close_cycle(double at);
  StateId sample_next_state();

  const ValidatedSpec* spec_;
  StopRule stop_;
  std::uint64_t request_cap_;

  SplitMix64 arrivals_;
  SplitMix64 sojourns_;
  SplitMix64 transitions_;
  SplitMix64 docs_;

  std::int32_t state_ = 0;  // 0-based current state
  double clock_ = 0.0;
  double next_arrival_ = 0.0;
  double next_jump_ = 0.0;
  double segment_start_ = 0.0;
  bool finished_ = false;
  bool pending_open_ = false;   // reset cycle buffer on the next advance()
  double pending_open_at_ = 0.0;

  RequestEvent event_;
  CycleStats cycle_;
  std::vector<std::int64_t> last_seen_cycle_;  // per doc, for distinct sets

  std::uint64_t requests_emitted_ = 0;
  std::uint64_t cycles_completed_ = 0;
};

// Materialized stream for small runs and tests.
struct CollectedStream {
  std::vector<RequestEvent> events;
  std::vector<CycleStats> cycles;
};
CollectedStream collect_stream(const ValidatedSpec& spec, StopRule stop,
                               std::uint64_t seed);

// Trace export: tab-delimited, header row, LF line endings, times with
// 9 decimal digits. One record per request.
void write_trace(std::ostream& out, const ValidatedSpec& spec, StopRule stop,
                 std::uint64_t seed);

}  // namespace corrcache

#endif  // CORRCACHE_WORKLOAD_HPP
