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

#include "corrcache/workload.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"

using namespace corrcache;

namespace {

SemiMarkovSpec single_state_zipf(double alpha, std::int32_t n) {
  SemiMarkovSpec spec;
  spec.num_states = 1;
  spec.transition = {{1.0}};
  spec.sojourn = {ExponentialSojourn{1.0}};
  spec.popularity = {ZipfLaw{alpha, n}};
  spec.universe_size = n;
  return spec;
}

SemiMarkovSpec two_state_alternating() {
  SemiMarkovSpec spec;
  spec.num_states = 2;
  spec.transition = {{0.0, 1.0}, {1.0, 0.0}};
  spec.sojourn = {ExponentialSojourn{1.0}, ExponentialSojourn{3.0}};
  spec.popularity = {ZipfLaw{1.0, 50}, ZipfLaw{1.0, 50}};
  spec.universe_size = 50;
  return spec;
}

// Independent oracle for the embedded stationary vector: power iteration.
std::vector<double> power_iteration(const std::vector<std::vector<double>>& p) {
  const std::size_t m = p.size();
  std::vector<double> v(m, 1.0 / static_cast<double>(m)), next(m);
  for (int iter = 0; iter < 20000; ++iter) {
    for (std::size_t j = 0; j < m; ++j) {
      next[j] = 0.0;
      for (std::size_t i = 0; i < m; ++i) next[j] += v[i] * p[i][j];
    }
    double total = 0.0;
    for (double x : next) total += x;
    for (double& x : next) x /= total;
    v = next;
  }
  return v;
}

}  // namespace

TEST_CASE("single state spec validates with trivial pi") {
  const auto v = validate_spec(single_state_zipf(1.0, 4));
  REQUIRE(v.num_states() == 1);
  CHECK(v.time_stationary()[0] == doctest::Approx(1.0));
  CHECK(v.embedded_stationary()[0] == doctest::Approx(1.0));
}

TEST_CASE("non-stochastic rows are rejected") {
  SemiMarkovSpec spec = two_state_alternating();
  spec.transition = {{0.5, 0.4}, {1.0, 0.0}};
  try {
    validate_spec(spec);
    FAIL("expected NonStochasticMatrix");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonStochasticMatrix);
  }
}

TEST_CASE("reducible chains are rejected") {
  SemiMarkovSpec spec = two_state_alternating();
  spec.transition = {{1.0, 0.0}, {0.5, 0.5}};
  try {
    validate_spec(spec);
    FAIL("expected NotIrreducible");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotIrreducible);
  }
}

TEST_CASE("bad sojourn parameters are rejected") {
  SemiMarkovSpec spec = single_state_zipf(1.0, 4);
  spec.sojourn = {ExponentialSojourn{-1.0}};
  CHECK_THROWS_AS(validate_spec(spec), Error);
  spec.sojourn = {ParetoSojourn{0.9, 1.0}};  // infinite mean
  try {
    validate_spec(spec);
    FAIL("expected BadSojournParameters");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BadSojournParameters);
  }
}

TEST_CASE("popularity length mismatch is rejected") {
  SemiMarkovSpec spec = single_state_zipf(1.0, 4);
  spec.popularity = {ZipfLaw{1.0, 5}};
  try {
    validate_spec(spec);
    FAIL("expected PopularityLengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::PopularityLengthMismatch);
  }
}

TEST_CASE("zero marginal popularity is rejected") {
  SemiMarkovSpec spec = two_state_alternating();
  spec.universe_size = 3;
  spec.popularity = {ExplicitLaw{{0.5, 0.5, 0.0}},
                     ExplicitLaw{{0.2, 0.8, 0.0}}};
  try {
    validate_spec(spec);
    FAIL("expected ZeroMarginalPopularity");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroMarginalPopularity);
  }
}

TEST_CASE("zero weight in one state is fine if the marginal is positive") {
  SemiMarkovSpec spec = two_state_alternating();
  spec.universe_size = 3;
  spec.popularity = {ExplicitLaw{{0.5, 0.5, 0.0}},
                     ExplicitLaw{{0.2, 0.3, 0.5}}};
  CHECK_NOTHROW(validate_spec(spec));
}

TEST_CASE("embedded stationary vectors") {
  SUBCASE("symmetric alternation") {
    const auto v = validate_spec(two_state_alternating());
    CHECK(v.embedded_stationary()[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v.embedded_stationary()[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("uniform rows") {
    SemiMarkovSpec spec = two_state_alternating();
    spec.transition = {{0.5, 0.5}, {0.5, 0.5}};
    const auto v = validate_spec(spec);
    CHECK(v.embedded_stationary()[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("asymmetric chain against hand solve and power iteration") {
    SemiMarkovSpec spec = two_state_alternating();
    spec.transition = {{0.9, 0.1}, {0.5, 0.5}};
    const auto v = validate_spec(spec);
    // balance: 0.1 nu1 = 0.5 nu2 -> nu = [5/6, 1/6]
    CHECK(v.embedded_stationary()[0] ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(v.embedded_stationary()[1] ==
          doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    const auto oracle = power_iteration(spec.transition);
    CHECK(v.embedded_stationary()[0] ==
          doctest::Approx(oracle[0]).epsilon(1e-9));
    const double r0 = v.embedded_stationary()[0] * 0.9 +
                      v.embedded_stationary()[1] * 0.5 -
                      v.embedded_stationary()[0];
    CHECK(std::abs(r0) < 1e-10);
  }
}

TEST_CASE("time stationary vectors") {
  SUBCASE("time-weighted alternation") {
    const auto v = validate_spec(two_state_alternating());  // means 1 and 3
    CHECK(v.time_stationary()[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(v.time_stationary()[1] == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("asymmetric chain with means 2 and 1") {
    SemiMarkovSpec spec = two_state_alternating();
    spec.transition = {{0.9, 0.1}, {0.5, 0.5}};
    spec.sojourn = {ExponentialSojourn{2.0}, ExponentialSojourn{1.0}};
    const auto v = validate_spec(spec);
    CHECK(v.time_stationary()[0] ==
          doctest::Approx(10.0 / 11.0).epsilon(1e-12));
    CHECK(v.time_stationary()[1] ==
          doctest::Approx(1.0 / 11.0).epsilon(1e-12));
  }
}

TEST_CASE("marginal popularity") {
  SUBCASE("zipf over four documents") {
    const auto v = validate_spec(single_state_zipf(1.0, 4));
    // harmonic normalization 25/12
    CHECK(v.marginal_popularity()[0] == doctest::Approx(0.48).epsilon(1e-12));
    CHECK(v.marginal_popularity()[1] == doctest::Approx(0.24).epsilon(1e-12));
    CHECK(v.marginal_popularity()[2] == doctest::Approx(0.16).epsilon(1e-12));
    CHECK(v.marginal_popularity()[3] == doctest::Approx(0.12).epsilon(1e-12));
    double total = 0.0;
    for (double q : v.marginal_popularity()) total += q;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("identical per-state laws reproduce the common law") {
    SemiMarkovSpec spec = two_state_alternating();
    spec.universe_size = 4;
    spec.popularity = {ZipfLaw{1.0, 4}, ZipfLaw{1.0, 4}};
    const auto v = validate_spec(spec);
    CHECK(v.marginal_popularity()[0] == doctest::Approx(0.48).epsilon(1e-12));
  }
  SUBCASE("epsilon mixture approaches pi") {
    const double eps = 1e-8;
    SemiMarkovSpec spec = two_state_alternating();  // pi = [0.25, 0.75]
    spec.universe_size = 2;
    spec.popularity = {ExplicitLaw{{1.0 - eps, eps}},
                       ExplicitLaw{{eps, 1.0 - eps}}};
    const auto v = validate_spec(spec);
    CHECK(v.marginal_popularity()[0] == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(v.marginal_popularity()[1] == doctest::Approx(0.75).epsilon(1e-6));
  }
  SUBCASE("sorting permutation breaks ties by lowest id") {
    SemiMarkovSpec spec = single_state_zipf(1.0, 4);
    spec.popularity = {ExplicitLaw{{0.2, 0.3, 0.2, 0.3}}};
    const auto v = validate_spec(spec);
    const auto order = v.popularity_order();
    CHECK(order[0] == 2);
    CHECK(order[1] == 4);
    CHECK(order[2] == 1);
    CHECK(order[3] == 3);
  }
}

TEST_CASE("static tail sums") {
  const auto v = validate_spec(single_state_zipf(1.0, 4));
  CHECK(v.static_tail(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.static_tail(2) == doctest::Approx(0.28).epsilon(1e-12));
  CHECK(v.static_tail(4) == 0.0);
}

TEST_CASE("permuted zipf reshuffles only the named ranks") {
  const std::vector<double> base = popularity_weights(ZipfLaw{1.0, 4}, 4);
  const std::vector<double> perm =
      popularity_weights(PermutedZipfLaw{1.0, 4, {3, 1, 2}}, 4);
  CHECK(perm[0] == doctest::Approx(base[2]));
  CHECK(perm[1] == doctest::Approx(base[0]));
  CHECK(perm[2] == doctest::Approx(base[1]));
  CHECK(perm[3] == doctest::Approx(base[3]));
  CHECK_THROWS_AS(popularity_weights(PermutedZipfLaw{1.0, 4, {2, 2, 1}}, 4),
                  Error);
}

TEST_CASE("identical seeds give bit-identical streams") {
  const auto v = validate_spec(two_state_alternating());
  const auto a = collect_stream(v, StopRule::max_requests(5000), 99);
  const auto b = collect_stream(v, StopRule::max_requests(5000), 99);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].time == b.events[i].time);
    CHECK(a.events[i].doc == b.events[i].doc);
    CHECK(a.events[i].state == b.events[i].state);
    CHECK(a.events[i].cycle_index == b.events[i].cycle_index);
  }
  std::ostringstream ta, tb;
  write_trace(ta, v, StopRule::max_requests(200), 7);
  write_trace(tb, v, StopRule::max_requests(200), 7);
  CHECK(ta.str() == tb.str());

  const auto c = collect_stream(v, StopRule::max_requests(5000), 100);
  CHECK(a.events[0].time != c.events[0].time);
}

TEST_CASE("stream events are well formed") {
  const auto v = validate_spec(two_state_alternating());
  const auto s = collect_stream(v, StopRule::max_requests(20000), 3);
  REQUIRE(s.events.size() == 20000);
  double last = -1.0;
  for (const auto& e : s.events) {
    CHECK(e.time > last);
    last = e.time;
    CHECK(e.doc >= 1);
    CHECK(e.doc <= 50);
    CHECK(e.state >= 1);
    CHECK(e.state <= 2);
    CHECK(e.cycle_index >= 0);
  }
  for (const auto& c : s.cycles) {
    std::uint64_t total = 0;
    for (auto n : c.per_state_counts) total += n;
    CHECK(total == c.total_count);
    CHECK(c.distinct_docs.size() <= c.total_count);
    double occupied = 0.0;
    for (double t : c.per_state_time) occupied += t;
    CHECK(std::abs(occupied - (c.end - c.start)) < 1e-9);
  }
}

TEST_CASE("poisson arrival counts over many seeds") {
  const auto v = validate_spec(single_state_zipf(1.0, 4));
  const double t = 100.0;
  const int seeds = 1000;
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) {
    StreamCursor cursor(v, StopRule::max_time(t),
                        static_cast<std::uint64_t>(s));
    while (cursor.advance() != StreamCursor::Item::Finished) {
    }
    total += static_cast<double>(cursor.requests_emitted());
  }
  const double mean = total / seeds;
  CHECK(std::abs(mean - t) < 3.0 * std::sqrt(t / seeds));
}

TEST_CASE("document marginals in a long single-state stream") {
  const auto v = validate_spec(single_state_zipf(1.0, 4));
  StreamCursor cursor(v, StopRule::max_requests(1'000'000), 17);
  std::uint64_t doc1 = 0;
  for (;;) {
    const auto item = cursor.advance();
    if (item == StreamCursor::Item::Finished) break;
    if (item == StreamCursor::Item::Request && cursor.event().doc == 1) {
      ++doc1;
    }
  }
  const double freq = static_cast<double>(doc1) / 1e6;
  const double se = std::sqrt(0.48 * 0.52 / 1e6);
  CHECK(std::abs(freq - 0.48) < 3.0 * se);
}

TEST_CASE("deterministic sojourns give exact cycle lengths") {
  SemiMarkovSpec spec = two_state_alternating();
  spec.sojourn = {DeterministicSojourn{1.0}, DeterministicSojourn{1.0}};
  const auto v = validate_spec(spec);
  const auto s = collect_stream(v, StopRule::max_cycles(50), 5);
  REQUIRE(s.cycles.size() == 50);
  for (const auto& c : s.cycles) {
    CHECK(c.end - c.start == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("occupancy fractions converge to pi") {
  const auto v = validate_spec(two_state_alternating());  // pi = [.25, .75]
  const auto s = collect_stream(v, StopRule::max_time(20000), 21);
  const std::size_t batches = 20;
  const std::size_t per = s.cycles.size() / batches;
  REQUIRE(per > 0);
  std::vector<double> fraction;
  for (std::size_t b = 0; b < batches; ++b) {
    double in_state1 = 0.0, span = 0.0;
    for (std::size_t j = b * per; j < (b + 1) * per; ++j) {
      in_state1 += s.cycles[j].per_state_time[0];
      span += s.cycles[j].end - s.cycles[j].start;
    }
    fraction.push_back(in_state1 / span);
  }
  double mean = 0.0;
  for (double f : fraction) mean += f;
  mean /= static_cast<double>(batches);
  double ss = 0.0;
  for (double f : fraction) ss += (f - mean) * (f - mean);
  const double se = std::sqrt(ss / (batches - 1) / batches);
  CHECK(std::abs(mean - 0.25) < 3.0 * se);
}

TEST_CASE("cycle counts behave like an iid renewal sequence") {
  const auto v = validate_spec(two_state_alternating());
  const auto s = collect_stream(v, StopRule::max_cycles(4000), 13);
  REQUIRE(s.cycles.size() == 4000);
  const auto n = static_cast<double>(s.cycles.size());

  // lag-1 autocorrelation of per-cycle totals
  double mean = 0.0;
  for (const auto& c : s.cycles) mean += static_cast<double>(c.total_count);
  mean /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < s.cycles.size(); ++j) {
    const double d = static_cast<double>(s.cycles[j].total_count) - mean;
    den += d * d;
    if (j + 1 < s.cycles.size()) {
      num += d * (static_cast<double>(s.cycles[j + 1].total_count) - mean);
    }
  }
  CHECK(std::abs(num / den) < 3.0 / std::sqrt(n));

  // mean requests per cycle equals mean cycle length (paired difference)
  double diff_mean = 0.0;
  for (const auto& c : s.cycles) {
    diff_mean += static_cast<double>(c.total_count) - (c.end - c.start);
  }
  diff_mean /= n;
  double diff_ss = 0.0;
  for (const auto& c : s.cycles) {
    const double d =
        static_cast<double>(c.total_count) - (c.end - c.start) - diff_mean;
    diff_ss += d * d;
  }
  const double se = std::sqrt(diff_ss / (n - 1) / n);
  CHECK(std::abs(diff_mean) < 3.0 * se);
}

TEST_CASE("stop rules terminate precisely") {
  const auto v = validate_spec(two_state_alternating());
  SUBCASE("max requests") {
    const auto s = collect_stream(v, StopRule::max_requests(777), 1);
    CHECK(s.events.size() == 777);
  }
  SUBCASE("max cycles") {
    const auto s = collect_stream(v, StopRule::max_cycles(33), 1);
    CHECK(s.cycles.size() == 33);
    for (const auto& e : s.events) CHECK(e.cycle_index < 33);
  }
  SUBCASE("max time excludes later events") {
    const auto s = collect_stream(v, StopRule::max_time(50.0), 1);
    for (const auto& e : s.events) CHECK(e.time <= 50.0);
    for (const auto& c : s.cycles) CHECK(c.end <= 50.0);
  }
}

TEST_CASE("request cap guards max-cycle runs") {
  SemiMarkovSpec spec = single_state_zipf(1.0, 4);
  spec.sojourn = {DeterministicSojourn{1000.0}};
  const auto v = validate_spec(spec);
  StreamCursor cursor(v, StopRule::max_cycles(5), 1, /*request_cap=*/10);
  CHECK_THROWS_AS(
      [&] {
        for (;;) {
          if (cursor.advance() == StreamCursor::Item::Finished) break;
        }
      }(),
      Error);
}

TEST_CASE("trace lines carry nine decimal digits") {
  const auto v = validate_spec(single_state_zipf(1.0, 4));
  std::ostringstream out;
  write_trace(out, v, StopRule::max_requests(3), 2);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "time\tdoc\tstate\tcycle_index");
  std::getline(lines, line);
  const auto tab = line.find('\t');
  const auto dot = line.find('.');
  REQUIRE(dot != std::string::npos);
  CHECK(tab - dot - 1 == 9);  // fractional digits before the first tab
}

TEST_CASE("spec hashes separate different specs") {
  const auto a = validate_spec(single_state_zipf(1.0, 4));
  const auto b = validate_spec(single_state_zipf(1.1, 4));
  const auto a2 = validate_spec(single_state_zipf(1.0, 4));
  CHECK(a.hash() == a2.hash());
  CHECK(a.hash() != b.hash());
}
