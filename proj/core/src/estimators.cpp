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

#include "corrcache/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "corrcache/errors.hpp"

namespace corrcache {

void BatchMeans::add(double x) {
  total_ += x;
  ++count_;
  partial_ += x;
  if (++partial_count_ < size_) return;
  sums_.push_back(partial_);
  partial_ = 0.0;
  partial_count_ = 0;
  if (sums_.size() == 2 * kMinBatches) {
    for (std::size_t i = 0; i < kMinBatches; ++i) {
      sums_[i] = sums_[2 * i] + sums_[2 * i + 1];
    }
    sums_.resize(kMinBatches);
    size_ *= 2;
  }
}

double BatchMeans::point() const {
  return count_ == 0 ? 0.0 : total_ / static_cast<double>(count_);
}

double BatchMeans::stderr_of_mean() const {
  const std::size_t b = sums_.size();
  if (b < 2) return 0.0;
  const double denom = static_cast<double>(size_);
  double mean = 0.0;
  for (double s : sums_) mean += s / denom;
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double s : sums_) {
    const double d = s / denom - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(b - 1);
  return std::sqrt(var / static_cast<double>(b));
}

namespace {

std::uint64_t warmup_request_count(StopRule stop, double warmup_fraction) {
  switch (stop.kind) {
    case StopRule::Kind::MaxRequests:
      return static_cast<std::uint64_t>(
          static_cast<double>(stop.count) * warmup_fraction);
    case StopRule::Kind::MaxTime:
      // unit arrival rate: requests track time
      return static_cast<std::uint64_t>(stop.time * warmup_fraction);
    case StopRule::Kind::MaxCycles:
      return 0;  // stream starts at a regeneration; no transient
  }
  return 0;
}

}  // namespace

PolicyRunReport run_policy(const ValidatedSpec& spec, CachePolicy& policy,
                           StopRule stop, std::uint64_t seed,
                           const RunOptions& options) {
  if (options.warmup_fraction < 0.0 || options.warmup_fraction > 0.5) {
    throw Error(Errc::ConfigInvalid, "warmup_fraction must be in [0, 0.5]");
  }
  if (!options.cost.empty() &&
      options.cost.size() !=
          static_cast<std::size_t>(spec.universe_size())) {
    throw Error(Errc::ConfigInvalid, "cost vector length mismatch");
  }

  PolicyRunReport report;
  report.warmup_requests = warmup_request_count(stop, options.warmup_fraction);

  const auto n_docs = static_cast<std::size_t>(spec.universe_size());
  std::vector<std::int64_t> seen_cycle(n_docs, -1);
  std::vector<std::int64_t> evicted_cycle(n_docs, -1);

  std::uint64_t cycle_requests = 0;
  std::uint64_t cycle_misses = 0;
  double cycle_weighted = 0.0;
  std::uint64_t cycle_lower_bound = 0;

  StreamCursor cursor(spec, stop, seed, options.request_cap);
  for (;;) {
    const auto item = cursor.advance();
    if (item == StreamCursor::Item::Finished) break;

    if (item == StreamCursor::Item::Request) {
      const RequestEvent& e = cursor.event();
      const auto doc_idx = static_cast<std::size_t>(e.doc - 1);

      const bool present_before = policy.contains(e.doc);
      // First request of this doc within the cycle: it contributes to the
      // lower bound unless the doc sat in the cache when the cycle began.
      // Eviction since the cycle start is the only way membership can
      // change before a doc's first in-cycle request.
      if (seen_cycle[doc_idx] != e.cycle_index) {
        seen_cycle[doc_idx] = e.cycle_index;
        const bool in_at_cycle_start =
            present_before || evicted_cycle[doc_idx] == e.cycle_index;
        if (!in_at_cycle_start) ++cycle_lower_bound;
      }

      const AccessOutcome outcome = policy.access(e.doc);
      if (outcome.hit != present_before ||
          static_cast<std::int64_t>(policy.resident_count()) >
              policy.capacity()) {
        throw std::logic_error("cache policy violated its contract");
      }
      if (outcome.evicted) {
        evicted_cycle[static_cast<std::size_t>(*outcome.evicted - 1)] =
            e.cycle_index;
      }

      const double weight =
          options.cost.empty() ? 1.0 : options.cost[doc_idx];
      ++report.total_requests;
      ++cycle_requests;
      if (!outcome.hit) {
        ++report.total_misses;
        ++cycle_misses;
        cycle_weighted += weight;
        report.total_weighted_misses += weight;
      }
      if (report.total_requests > report.warmup_requests) {
        report.post_warmup.add(outcome.hit ? 0.0 : weight);
      }
      continue;
    }

    // CycleEnd
    const CycleStats& stats = cursor.cycle();
    report.cycle_requests.push_back(cycle_requests);
    report.cycle_misses.push_back(cycle_misses);
    report.cycle_weighted_misses.push_back(cycle_weighted);
    report.cycle_lengths.push_back(stats.end - stats.start);
    ++report.audited_cycles;
    if (cycle_misses < cycle_lower_bound) ++report.bound_violations;
    cycle_requests = 0;
    cycle_misses = 0;
    cycle_weighted = 0.0;
    cycle_lower_bound = 0;
  }
  report.elapsed = cursor.elapsed();
  return report;
}

FaultEstimate time_average_fault(const PolicyRunReport& report) {
  const std::uint64_t n = report.post_warmup.count();
  if (n < BatchMeans::kMinBatches * 100) {
    throw Error(Errc::StreamTooShort,
                "need at least " +
                    std::to_string(BatchMeans::kMinBatches * 100) +
                    " post-warmup requests, have " + std::to_string(n));
  }
  FaultEstimate est;
  est.method = EstimatorMethod::TimeAverage;
  est.point = report.post_warmup.point();
  est.stderr_value = report.post_warmup.stderr_of_mean();
  est.samples = n;
  return est;
}

FaultEstimate regenerative_fault(const PolicyRunReport& report) {
  const std::size_t n = report.cycle_requests.size();
  if (n < 30) {
    throw Error(Errc::TooFewCycles, "need at least 30 completed cycles, have " +
                                        std::to_string(n));
  }
  double sum_y = 0.0;
  double sum_a = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sum_y += report.cycle_weighted_misses[j];
    sum_a += static_cast<double>(report.cycle_requests[j]);
  }
  FaultEstimate est;
  est.method = EstimatorMethod::Regenerative;
  est.samples = n;
  if (sum_a == 0.0) return est;  // degenerate: no requests at all
  const double r = sum_y / sum_a;
  const double mean_a = sum_a / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = report.cycle_weighted_misses[j] -
                     r * static_cast<double>(report.cycle_requests[j]);
    ss += d * d;
  }
  const double var = ss / static_cast<double>(n - 1);
  est.point = r;
  est.stderr_value =
      std::sqrt(var / static_cast<double>(n)) / mean_a;
  return est;
}

FaultEstimate cost_average(const PolicyRunReport& report,
                           EstimatorMethod method) {
  return method == EstimatorMethod::TimeAverage ? time_average_fault(report)
                                                : regenerative_fault(report);
}

std::vector<Lemma1Probe> lemma1_probe(const ValidatedSpec& spec,
                                      std::span<const DocId> docs,
                                      std::uint64_t num_cycles,
                                      std::uint64_t seed) {
  if (num_cycles < 10'000) {
    throw Error(Errc::TooFewCycles,
                "lemma probe needs at least 10000 cycles");
  }
  const std::int32_t n_docs = spec.universe_size();
  for (DocId d : docs) {
    if (d < 1 || d > n_docs) {
      throw Error(Errc::ConfigInvalid, "probe document out of range");
    }
  }
  const std::size_t k = docs.size();
  const std::int32_t m = spec.num_states();

  // log(1 - q_i^{(r)}) per probe and state, for the product form.
  std::vector<std::vector<double>> log_miss(k,
                                            std::vector<double>(
                                                static_cast<std::size_t>(m)));
  for (std::size_t p = 0; p < k; ++p) {
    for (std::int32_t r = 0; r < m; ++r) {
      const double q =
          spec.state_weights(r + 1)[static_cast<std::size_t>(docs[p] - 1)];
      log_miss[p][static_cast<std::size_t>(r)] = std::log1p(-q);
    }
  }
  std::vector<std::int32_t> probe_index(static_cast<std::size_t>(n_docs) + 1,
                                        -1);
  for (std::size_t p = 0; p < k; ++p) {
    probe_index[static_cast<std::size_t>(docs[p])] =
        static_cast<std::int32_t>(p);
  }

  struct Moments {
    double h = 0.0;    // sum of per-cycle hit indicators
    double g = 0.0;    // sum of product-form values
    double gg = 0.0;
    double hg = 0.0;
    double hl = 0.0;   // sum of hit * cycle length
  };
  std::vector<Moments> acc(k);
  std::vector<double> g_cycle(k);
  double sum_len = 0.0;
  double sum_len2 = 0.0;

  StreamCursor cursor(spec, StopRule::max_cycles(num_cycles), seed);
  for (;;) {
    const auto item = cursor.advance();
    if (item == StreamCursor::Item::Finished) break;
    if (item != StreamCursor::Item::CycleEnd) continue;

    const CycleStats& stats = cursor.cycle();
    const double len = stats.end - stats.start;
    sum_len += len;
    sum_len2 += len * len;

    for (std::size_t p = 0; p < k; ++p) {
      double log_prod = 0.0;
      for (std::int32_t r = 0; r < m; ++r) {
        const auto nr = stats.per_state_counts[static_cast<std::size_t>(r)];
        if (nr > 0) {
          log_prod += static_cast<double>(nr) *
                      log_miss[p][static_cast<std::size_t>(r)];
        }
      }
      g_cycle[p] = 1.0 - std::exp(log_prod);
      acc[p].g += g_cycle[p];
      acc[p].gg += g_cycle[p] * g_cycle[p];
    }
    // hit indicator is 0/1, so the cross moment only gains on hit cycles
    for (DocId d : stats.distinct_docs) {
      const std::int32_t p = probe_index[static_cast<std::size_t>(d)];
      if (p >= 0) {
        acc[static_cast<std::size_t>(p)].h += 1.0;
        acc[static_cast<std::size_t>(p)].hl += len;
        acc[static_cast<std::size_t>(p)].hg +=
            g_cycle[static_cast<std::size_t>(p)];
      }
    }
  }

  const auto n = static_cast<double>(num_cycles);
  const double mean_len = sum_len / n;

  std::vector<Lemma1Probe> out(k);
  for (std::size_t p = 0; p < k; ++p) {
    Lemma1Probe& probe = out[p];
    probe.doc = docs[p];
    probe.mean_cycle_length = mean_len;
    const double q = spec.marginal_popularity()[
        static_cast<std::size_t>(docs[p] - 1)];
    const double ph = acc[p].h / n;
    probe.hit_prob = ph;
    probe.hit_prob_stderr =
        std::sqrt(std::max(0.0, ph * (1.0 - ph)) / (n - 1.0));

    // ratio via the regenerative delta method: R = sum_h / (q * sum_len)
    const double r = acc[p].h / (q * sum_len);
    probe.ratio = r;
    const double ss =
        acc[p].h - 2.0 * r * q * acc[p].hl + r * r * q * q * sum_len2;
    probe.ratio_stderr = std::sqrt(std::max(0.0, ss / (n - 1.0)) / n) /
                         (q * mean_len);

    probe.product_form = acc[p].g / n;
    const double mean_d = ph - probe.product_form;
    const double ss_d =
        acc[p].h - 2.0 * acc[p].hg + acc[p].gg - n * mean_d * mean_d;
    const double se_d = std::sqrt(std::max(0.0, ss_d / (n - 1.0)) / n);
    probe.identity_z = se_d > 0.0 ? mean_d / se_d : 0.0;
  }
  return out;
}

RatioCurve ratio_curve(const ValidatedSpec& spec, PolicyKind policy,
                       std::span<const std::int64_t> xs, StopRule stop,
                       std::uint64_t seed) {
  if (xs.empty()) {
    throw Error(Errc::ConfigInvalid, "empty cache size grid");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] <= xs[i - 1]) {
      throw Error(Errc::ConfigInvalid, "cache size grid must increase");
    }
  }
  if (xs.back() > spec.universe_size() / 10) {
    throw Error(Errc::ConfigInvalid,
                "largest cache size exceeds universe/10");
  }

  RatioCurve curve;
  curve.policy = policy;
  curve.reference_constant = kEulerGammaExp;
  for (std::int64_t x : xs) {
    PolicyContext context;
    context.popularity = spec.marginal_popularity();
    auto cache = make_policy(policy, x, context, seed);
    const PolicyRunReport report = run_policy(spec, *cache, stop, seed);
    const FaultEstimate est = regenerative_fault(report);

    RatioPoint point;
    point.x = x;
    point.policy_point = est.point;
    point.policy_stderr = est.stderr_value;
    point.static_exact = spec.static_tail(x);
    point.cycles = est.samples;
    point.ratio = est.point / point.static_exact;
    point.ci_low = (est.point - 1.96 * est.stderr_value) / point.static_exact;
    point.ci_high = (est.point + 1.96 * est.stderr_value) / point.static_exact;
    curve.points.push_back(point);
  }
  return curve;
}

}  // namespace corrcache
