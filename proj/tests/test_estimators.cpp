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

#include <cmath>
#include <vector>

#include "corrcache/placement.hpp"
#include "doctest.h"

using namespace corrcache;

namespace {

SemiMarkovSpec iid_zipf(double alpha, std::int32_t n) {
  SemiMarkovSpec spec;
  spec.num_states = 1;
  spec.transition = {{1.0}};
  spec.sojourn = {ExponentialSojourn{1.0}};
  spec.popularity = {ZipfLaw{alpha, n}};
  spec.universe_size = n;
  return spec;
}

SemiMarkovSpec modulated(std::int32_t n) {
  SemiMarkovSpec spec;
  spec.num_states = 2;
  spec.transition = {{0.0, 1.0}, {1.0, 0.0}};
  spec.sojourn = {ExponentialSojourn{1.0}, ExponentialSojourn{4.0}};
  spec.popularity = {ZipfLaw{1.0, n},
                     PermutedZipfLaw{1.0, n, {5, 4, 3, 2, 1}}};
  spec.universe_size = n;
  return spec;
}

PolicyRunReport run(const ValidatedSpec& spec, PolicyKind kind,
                    std::int64_t x, StopRule stop, std::uint64_t seed,
                    const RunOptions& options = {}) {
  PolicyContext context;
  context.popularity = spec.marginal_popularity();
  auto policy = make_policy(kind, x, context, seed);
  return run_policy(spec, *policy, stop, seed, options);
}

// Simpson quadrature of fn over [a, b].
template <typename F>
double simpson(F fn, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double sum = fn(a) + fn(b);
  for (int i = 1; i < intervals; ++i) {
    sum += fn(a + i * h) * (i % 2 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("batch means basics") {
  BatchMeans bm;
  for (int i = 0; i < 10000; ++i) bm.add(i % 2 == 0 ? 1.0 : 0.0);
  CHECK(bm.point() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bm.count() == 10000);
  CHECK(bm.full_batches() >= 20);
  CHECK(bm.full_batches() < 40);
  CHECK(bm.stderr_of_mean() >= 0.0);
}

TEST_CASE("static estimates match the exact tail sum") {
  const auto spec = validate_spec(iid_zipf(0.9, 1000));
  const std::int64_t x = 50;
  const auto report =
      run(spec, PolicyKind::StaticTopX, x, StopRule::max_requests(200'000), 11);
  const double exact = spec.static_tail(x);

  const FaultEstimate reg = regenerative_fault(report);
  CHECK(reg.stderr_value > 0.0);
  CHECK(std::abs(reg.point - exact) < 3.0 * reg.stderr_value);

  const FaultEstimate ta = time_average_fault(report);
  CHECK(ta.stderr_value > 0.0);
  CHECK(std::abs(ta.point - exact) < 3.0 * ta.stderr_value);
}

TEST_CASE("degenerate cache sizes give exact endpoints") {
  const auto spec = validate_spec(iid_zipf(1.0, 50));
  SUBCASE("full cache never misses") {
    const auto report = run(spec, PolicyKind::StaticTopX, 50,
                            StopRule::max_requests(50'000), 3);
    CHECK(regenerative_fault(report).point == 0.0);
    CHECK(time_average_fault(report).point == 0.0);
  }
  SUBCASE("zero capacity always misses") {
    const auto report =
        run(spec, PolicyKind::Lru, 0, StopRule::max_requests(50'000), 3);
    CHECK(regenerative_fault(report).point == 1.0);
    CHECK(time_average_fault(report).point == 1.0);
  }
}

TEST_CASE("unit costs reproduce the fault estimate bit for bit") {
  const auto spec = validate_spec(iid_zipf(1.0, 200));
  const std::vector<double> ones(200, 1.0);
  RunOptions unit_cost;
  unit_cost.cost = ones;
  const auto fault = run(spec, PolicyKind::Lru, 20,
                         StopRule::max_requests(60'000), 9);
  const auto cost = run(spec, PolicyKind::Lru, 20,
                        StopRule::max_requests(60'000), 9, unit_cost);

  const FaultEstimate a = regenerative_fault(fault);
  const FaultEstimate b = cost_average(cost, EstimatorMethod::Regenerative);
  CHECK(a.point == b.point);
  CHECK(a.stderr_value == b.stderr_value);
  const FaultEstimate c = time_average_fault(fault);
  const FaultEstimate d = cost_average(cost, EstimatorMethod::TimeAverage);
  CHECK(c.point == d.point);
  CHECK(c.stderr_value == d.stderr_value);
}

TEST_CASE("cost estimates match the exact weighted tail") {
  const auto spec = validate_spec(iid_zipf(0.8, 100));
  std::vector<double> f(100);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = 2.0 * std::pow(static_cast<double>(i + 1), -0.3);
  }
  PlacementProblem problem;
  problem.q.assign(spec.marginal_popularity().begin(),
                   spec.marginal_popularity().end());
  problem.cost = f;
  problem.cost_bound = 2.0;
  problem.budget = 10.0;
  const PlacementResult s = cost_weighted_set(problem);

  PolicyContext context;
  context.given_set = s.chosen;
  auto policy = make_policy(PolicyKind::StaticGivenSet, 10, context, 0);
  RunOptions options;
  options.cost = f;
  const auto report = run_policy(spec, *policy,
                                 StopRule::max_requests(200'000), 5, options);
  const FaultEstimate est = cost_average(report, EstimatorMethod::Regenerative);
  CHECK(std::abs(est.point - s.predicted_objective) < 3.0 * est.stderr_value);
}

TEST_CASE("regenerative and time-average estimators agree") {
  const auto spec = validate_spec(modulated(2000));
  RunOptions options;
  options.warmup_fraction = 0.1;
  const auto report = run(spec, PolicyKind::Lru, 50,
                          StopRule::max_requests(300'000), 23, options);
  const FaultEstimate reg = regenerative_fault(report);
  const FaultEstimate ta = time_average_fault(report);
  const double joint = std::sqrt(reg.stderr_value * reg.stderr_value +
                                 ta.stderr_value * ta.stderr_value);
  CHECK(std::abs(reg.point - ta.point) < 3.0 * joint);
}

TEST_CASE("estimator sample-size guards") {
  const auto spec = validate_spec(iid_zipf(1.0, 50));
  const auto tiny = run(spec, PolicyKind::Lru, 5,
                        StopRule::max_requests(500), 1);
  try {
    time_average_fault(tiny);
    FAIL("expected StreamTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::StreamTooShort);
  }
  const auto few_cycles = run(spec, PolicyKind::Lru, 5,
                              StopRule::max_cycles(10), 1);
  try {
    regenerative_fault(few_cycles);
    FAIL("expected TooFewCycles");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooFewCycles);
  }
}

TEST_CASE("per-cycle fault lower bound holds for every policy") {
  const auto spec = validate_spec(modulated(500));
  for (PolicyKind kind :
       {PolicyKind::StaticTopX, PolicyKind::Lru, PolicyKind::Lfu,
        PolicyKind::Fifo, PolicyKind::RandomEvict}) {
    CAPTURE(policy_name(kind));
    const auto report =
        run(spec, kind, 25, StopRule::max_requests(100'000), 31);
    CHECK(report.audited_cycles == report.cycle_requests.size());
    CHECK(report.audited_cycles > 100);
    CHECK(report.bound_violations == 0);
  }
}

TEST_CASE("lemma probe matches the quadrature oracle for poisson cycles") {
  // single state, Exp(1) sojourn: cycle length L ~ Exp(1), requests
  // N | L ~ Poisson(L), so P[doc in cycle] = int (1 - e^{-q l}) e^{-l} dl.
  const auto spec = validate_spec(iid_zipf(1.2, 100));
  const std::vector<DocId> docs{5, 50};
  const auto probes = lemma1_probe(spec, docs, 40'000, 77);
  REQUIRE(probes.size() == 2);
  for (const auto& p : probes) {
    const double q =
        spec.marginal_popularity()[static_cast<std::size_t>(p.doc - 1)];
    const double oracle = simpson(
        [q](double l) { return (1.0 - std::exp(-q * l)) * std::exp(-l); },
        0.0, 60.0, 6000);
    // the integral has the closed form q/(1+q); confirm the oracle first
    CHECK(oracle == doctest::Approx(q / (1.0 + q)).epsilon(1e-6));
    CHECK(std::abs(p.hit_prob - oracle) < 3.0 * p.hit_prob_stderr);
    CHECK(std::abs(p.identity_z) < 3.5);
    CHECK(p.ratio > 0.0);
    CHECK(p.ratio < 1.05);
  }
}

TEST_CASE("lemma probe ratio drifts toward one down the tail") {
  const auto spec = validate_spec(iid_zipf(1.2, 2000));
  const std::vector<DocId> docs{10, 1000};
  const auto probes = lemma1_probe(spec, docs, 60'000, 5);
  // |ratio - 1| shrinks as popularity does; probe 1000 is far out the tail
  CHECK(std::abs(probes[1].ratio - 1.0) <
        std::abs(probes[0].ratio - 1.0) + 3.0 * probes[1].ratio_stderr);
}

TEST_CASE("lemma probe ratio near one at the far tail edge") {
  // longest-index document: popularity is tiny, so the first-request
  // probability is essentially q * E[cycle]; mean-10 cycles keep the
  // per-cycle hit count high enough to resolve the ratio
  SemiMarkovSpec raw = iid_zipf(1.2, 100);
  raw.sojourn = {ExponentialSojourn{10.0}};
  const auto spec = validate_spec(raw);
  const std::vector<DocId> docs{100};
  const auto probes = lemma1_probe(spec, docs, 100'000, 29);
  CHECK(probes[0].ratio > 0.9);
  CHECK(probes[0].ratio < 1.1);
}

TEST_CASE("no policy beats the cost-weighted static placement") {
  const auto spec = validate_spec(iid_zipf(1.0, 400));
  std::vector<double> f(400);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = 1.5 * std::pow(static_cast<double>(i + 1), -0.2);
  }
  PlacementProblem problem;
  problem.q.assign(spec.marginal_popularity().begin(),
                   spec.marginal_popularity().end());
  problem.cost = f;
  problem.cost_bound = 1.5;
  problem.budget = 20.0;
  const PlacementResult s = cost_weighted_set(problem);

  RunOptions options;
  options.cost = f;
  for (PolicyKind kind : {PolicyKind::Lru, PolicyKind::Lfu, PolicyKind::Fifo,
                          PolicyKind::RandomEvict}) {
    CAPTURE(policy_name(kind));
    const auto report =
        run(spec, kind, 20, StopRule::max_requests(200'000), 41, options);
    const FaultEstimate est =
        cost_average(report, EstimatorMethod::Regenerative);
    CHECK(est.point >= s.predicted_objective - 3.0 * est.stderr_value);
  }
}

TEST_CASE("lemma probe rejects tiny cycle counts and bad docs") {
  const auto spec = validate_spec(iid_zipf(1.0, 100));
  const std::vector<DocId> docs{1};
  try {
    lemma1_probe(spec, docs, 100, 1);
    FAIL("expected TooFewCycles");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooFewCycles);
  }
  const std::vector<DocId> bad{500};
  CHECK_THROWS_AS(lemma1_probe(spec, bad, 20'000, 1), Error);
}

TEST_CASE("lemma probe identity holds under modulation") {
  const auto spec = validate_spec(modulated(500));
  const std::vector<DocId> docs{3, 40, 200};
  const auto probes = lemma1_probe(spec, docs, 30'000, 13);
  for (const auto& p : probes) {
    CAPTURE(p.doc);
    CHECK(std::abs(p.identity_z) < 3.5);
    CHECK(std::abs(p.hit_prob - p.product_form) <
          3.5 * (p.hit_prob_stderr + 1e-12));
  }
}

TEST_CASE("ratio curve of the static policy hugs one") {
  const auto spec = validate_spec(iid_zipf(1.0, 1000));
  const std::vector<std::int64_t> grid{10, 40, 100};
  const RatioCurve curve = ratio_curve(spec, PolicyKind::StaticTopX, grid,
                                       StopRule::max_requests(100'000), 3);
  CHECK(curve.reference_constant == doctest::Approx(1.781072418));
  REQUIRE(curve.points.size() == 3);
  for (const auto& p : curve.points) {
    CAPTURE(p.x);
    CHECK(std::abs(p.ratio - 1.0) <
          3.0 * p.policy_stderr / p.static_exact + 1e-12);
    CHECK(p.ci_low <= p.ratio);
    CHECK(p.ci_high >= p.ratio);
  }
}

TEST_CASE("ratio curve validates its grid") {
  const auto spec = validate_spec(iid_zipf(1.0, 1000));
  const std::vector<std::int64_t> decreasing{40, 10};
  CHECK_THROWS_AS(ratio_curve(spec, PolicyKind::Lru, decreasing,
                              StopRule::max_requests(1000), 1),
                  Error);
  const std::vector<std::int64_t> too_big{500};
  CHECK_THROWS_AS(ratio_curve(spec, PolicyKind::Lru, too_big,
                              StopRule::max_requests(1000), 1),
                  Error);
}

TEST_CASE("modulation with identical popularity laws is invisible") {
  // two-state process whose states share one popularity law: request
  // statistics coincide with the single-state law, so LRU performs the
  // same up to noise
  SemiMarkovSpec plain = iid_zipf(1.1, 1000);
  SemiMarkovSpec dressed = plain;
  dressed.num_states = 2;
  dressed.transition = {{0.0, 1.0}, {1.0, 0.0}};
  dressed.sojourn = {ExponentialSojourn{1.0}, ExponentialSojourn{5.0}};
  dressed.popularity = {ZipfLaw{1.1, 1000}, ZipfLaw{1.1, 1000}};

  const auto a = validate_spec(plain);
  const auto b = validate_spec(dressed);
  const auto ra =
      run(a, PolicyKind::Lru, 40, StopRule::max_requests(200'000), 19);
  const auto rb =
      run(b, PolicyKind::Lru, 40, StopRule::max_requests(200'000), 20);
  const FaultEstimate ea = regenerative_fault(ra);
  const FaultEstimate eb = regenerative_fault(rb);
  const double joint = std::sqrt(ea.stderr_value * ea.stderr_value +
                                 eb.stderr_value * eb.stderr_value);
  CHECK(std::abs(ea.point - eb.point) < 3.0 * joint);
}
