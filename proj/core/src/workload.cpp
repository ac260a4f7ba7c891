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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

namespace corrcache {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr double kStationaryResidualTolerance = 1e-10;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Solves nu P = nu, sum(nu) = 1 by Gaussian elimination with partial
// pivoting on (P^T - I) with the last equation replaced by sum = 1.
std::vector<double> solve_stationary(
    const std::vector<std::vector<double>>& p) {
  const std::size_t m = p.size();
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) a[i][j] = p[j][i];
    a[i][i] -= 1.0;
  }
  for (std::size_t j = 0; j < m; ++j) a[m - 1][j] = 1.0;
  a[m - 1][m] = 1.0;

  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) {
      throw Error(Errc::SingularSolve, "stationary system is singular");
    }
    std::swap(a[col], a[pivot]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double factor = a[r][col] / a[col][col];
      if (factor == 0.0) continue;
      for (std::size_t c = col; c <= m; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  std::vector<double> nu(m);
  for (std::size_t i = 0; i < m; ++i) nu[i] = a[i][m] / a[i][i];

  // Residual and positivity checks; failures here indicate numerical
  // trouble, not spec errors (irreducibility was already verified).
  double residual = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < m; ++i) dot += nu[i] * p[i][j];
    residual = std::max(residual, std::abs(dot - nu[j]));
  }
  if (residual > kStationaryResidualTolerance) {
    throw Error(Errc::SingularSolve,
                "stationary residual " + fmt_double(residual));
  }
  for (double v : nu) {
    if (!(v > 0.0)) {
      throw Error(Errc::SingularSolve, "non-positive stationary entry");
    }
  }
  return nu;
}

bool all_reachable_from(const std::vector<std::vector<double>>& p,
                        bool reverse) {
  const std::size_t m = p.size();
  std::vector<char> seen(m, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < m; ++v) {
      const double w = reverse ? p[v][u] : p[u][v];
      if (w > 0.0 && !seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

std::vector<double> zipf_weights(double alpha, std::int32_t universe) {
  if (!(alpha > 0.0) || universe < 1) {
    throw Error(Errc::ConfigInvalid, "Zipf requires alpha > 0, universe >= 1");
  }
  std::vector<double> w(static_cast<std::size_t>(universe));
  for (std::int32_t i = 0; i < universe; ++i) {
    w[static_cast<std::size_t>(i)] =
        std::pow(static_cast<double>(i + 1), -alpha);
  }
  return w;
}

void normalize(std::vector<double>& w) {
  // Smallest-first summation keeps the total accurate for long tails.
  double total = 0.0;
  for (auto it = w.rbegin(); it != w.rend(); ++it) total += *it;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(Errc::ConfigInvalid, "popularity weights have no mass");
  }
  for (double& v : w) v /= total;
}

}  // namespace

double sojourn_mean(const SojournLaw& law) {
  return std::visit(
      [](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ExponentialSojourn>) return l.mean;
        if constexpr (std::is_same_v<T, DeterministicSojourn>) return l.value;
        if constexpr (std::is_same_v<T, ParetoSojourn>) {
          return l.shape * l.scale / (l.shape - 1.0);
        }
      },
      law);
}

double sample_sojourn(const SojournLaw& law, SplitMix64& rng) {
  return std::visit(
      [&rng](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ExponentialSojourn>) {
          return rng.exponential(l.mean);
        }
        if constexpr (std::is_same_v<T, DeterministicSojourn>) return l.value;
        if constexpr (std::is_same_v<T, ParetoSojourn>) {
          return rng.pareto(l.shape, l.scale);
        }
      },
      law);
}

void check_sojourn(const SojournLaw& law) {
  const bool ok = std::visit(
      [](const auto& l) -> bool {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ExponentialSojourn>) {
          return std::isfinite(l.mean) && l.mean > 0.0;
        }
        if constexpr (std::is_same_v<T, DeterministicSojourn>) {
          return std::isfinite(l.value) && l.value > 0.0;
        }
        if constexpr (std::is_same_v<T, ParetoSojourn>) {
          return std::isfinite(l.shape) && std::isfinite(l.scale) &&
                 l.shape > 1.0 && l.scale > 0.0;
        }
      },
      law);
  if (!ok) {
    throw Error(Errc::BadSojournParameters,
                "sojourn law needs a finite, strictly positive mean");
  }
}

std::vector<double> popularity_weights(const PopularityLaw& law,
                                       std::int32_t universe) {
  std::vector<double> w = std::visit(
      [universe](const auto& l) -> std::vector<double> {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ZipfLaw>) {
          if (l.universe != universe) {
            throw Error(Errc::PopularityLengthMismatch,
                        "Zipf universe differs from spec universe");
          }
          return zipf_weights(l.alpha, l.universe);
        }
        if constexpr (std::is_same_v<T, ExplicitLaw>) {
          if (static_cast<std::int32_t>(l.weights.size()) != universe) {
            throw Error(Errc::PopularityLengthMismatch,
                        "explicit weight vector has wrong length");
          }
          for (double v : l.weights) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
              throw Error(Errc::ConfigInvalid, "negative popularity weight");
            }
          }
          return l.weights;
        }
        if constexpr (std::is_same_v<T, PermutedZipfLaw>) {
          if (l.universe != universe) {
            throw Error(Errc::PopularityLengthMismatch,
                        "permuted Zipf universe differs from spec universe");
          }
          std::vector<double> base = zipf_weights(l.alpha, l.universe);
          const std::size_t k = l.permutation.size();
          if (k > base.size()) {
            throw Error(Errc::ConfigInvalid, "permutation longer than universe");
          }
          std::vector<char> seen(k, 0);
          for (std::int32_t r : l.permutation) {
            if (r < 1 || static_cast<std::size_t>(r) > k ||
                seen[static_cast<std::size_t>(r - 1)]) {
              throw Error(Errc::ConfigInvalid,
                          "permutation is not a permutation of 1..K");
            }
            seen[static_cast<std::size_t>(r - 1)] = 1;
          }
          std::vector<double> out = base;
          for (std::size_t i = 0; i < k; ++i) {
            out[i] = base[static_cast<std::size_t>(l.permutation[i] - 1)];
          }
          return out;
        }
      },
      law);
  normalize(w);
  return w;
}

ValidatedSpec validate_spec(const SemiMarkovSpec& spec) {
  const std::int32_t m = spec.num_states;
  const std::int32_t n = spec.universe_size;
  if (m < 1) throw Error(Errc::ConfigInvalid, "num_states must be >= 1");
  if (n < 1) throw Error(Errc::ConfigInvalid, "universe_size must be >= 1");
  if (static_cast<std::int32_t>(spec.transition.size()) != m) {
    throw Error(Errc::NonStochasticMatrix, "transition matrix is not M x M");
  }
  for (const auto& row : spec.transition) {
    if (static_cast<std::int32_t>(row.size()) != m) {
      throw Error(Errc::NonStochasticMatrix, "transition matrix is not M x M");
    }
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(Errc::NonStochasticMatrix, "negative transition entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error(Errc::NonStochasticMatrix,
                  "row sums to " + fmt_double(sum));
    }
  }
  if (!all_reachable_from(spec.transition, false) ||
      !all_reachable_from(spec.transition, true)) {
    throw Error(Errc::NotIrreducible, "embedded chain is not irreducible");
  }
  if (static_cast<std::int32_t>(spec.sojourn.size()) != m) {
    throw Error(Errc::ConfigInvalid, "need one sojourn law per state");
  }
  for (const auto& law : spec.sojourn) check_sojourn(law);
  if (static_cast<std::int32_t>(spec.popularity.size()) != m) {
    throw Error(Errc::ConfigInvalid, "need one popularity law per state");
  }

  ValidatedSpec v;
  v.spec_ = spec;
  v.nu_ = solve_stationary(spec.transition);

  v.sojourn_means_.resize(static_cast<std::size_t>(m));
  double weighted = 0.0;
  for (std::int32_t r = 0; r < m; ++r) {
    v.sojourn_means_[static_cast<std::size_t>(r)] =
        sojourn_mean(spec.sojourn[static_cast<std::size_t>(r)]);
    weighted += v.nu_[static_cast<std::size_t>(r)] *
                v.sojourn_means_[static_cast<std::size_t>(r)];
  }
  v.pi_.resize(static_cast<std::size_t>(m));
  for (std::int32_t r = 0; r < m; ++r) {
    v.pi_[static_cast<std::size_t>(r)] =
        v.nu_[static_cast<std::size_t>(r)] *
        v.sojourn_means_[static_cast<std::size_t>(r)] / weighted;
  }

  v.state_weights_.reserve(static_cast<std::size_t>(m));
  for (std::int32_t r = 0; r < m; ++r) {
    v.state_weights_.push_back(
        popularity_weights(spec.popularity[static_cast<std::size_t>(r)], n));
  }

  v.marginal_.assign(static_cast<std::size_t>(n), 0.0);
  for (std::int32_t r = 0; r < m; ++r) {
    const double pr = v.pi_[static_cast<std::size_t>(r)];
    const auto& w = v.state_weights_[static_cast<std::size_t>(r)];
    for (std::int32_t i = 0; i < n; ++i) {
      v.marginal_[static_cast<std::size_t>(i)] +=
          pr * w[static_cast<std::size_t>(i)];
    }
  }
  normalize(v.marginal_);
  for (std::int32_t i = 0; i < n; ++i) {
    if (!(v.marginal_[static_cast<std::size_t>(i)] > 0.0)) {
      throw Error(Errc::ZeroMarginalPopularity,
                  "document " + std::to_string(i + 1) +
                      " has zero marginal popularity");
    }
  }

  v.order_.resize(static_cast<std::size_t>(n));
  std::iota(v.order_.begin(), v.order_.end(), DocId{1});
  std::stable_sort(v.order_.begin(), v.order_.end(),
                   [&](DocId a, DocId b) {
                     return v.marginal_[static_cast<std::size_t>(a - 1)] >
                            v.marginal_[static_cast<std::size_t>(b - 1)];
                   });

  v.tail_from_rank_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int32_t k = n - 1; k >= 0; --k) {
    v.tail_from_rank_[static_cast<std::size_t>(k)] =
        v.tail_from_rank_[static_cast<std::size_t>(k) + 1] +
        v.marginal_[static_cast<std::size_t>(
            v.order_[static_cast<std::size_t>(k)] - 1)];
  }

  v.samplers_.reserve(static_cast<std::size_t>(m));
  for (std::int32_t r = 0; r < m; ++r) {
    v.samplers_.emplace_back(
        std::span<const double>(v.state_weights_[static_cast<std::size_t>(r)]));
  }

  v.hash_ = fnv1a64(v.canonical_text());
  return v;
}

double ValidatedSpec::static_tail(std::int64_t x) const {
  if (x <= 0) return tail_from_rank_[0];
  if (x >= universe_size()) return 0.0;
  return tail_from_rank_[static_cast<std::size_t>(x)];
}

std::string ValidatedSpec::canonical_text() const {
  std::ostringstream out;
  out << "semi-markov-spec v1\n";
  out << "M " << spec_.num_states << "\nN " << spec_.universe_size << "\n";
  for (const auto& row : spec_.transition) {
    out << "P";
    for (double p : row) out << ' ' << fmt_double(p);
    out << "\n";
  }
  for (const auto& law : spec_.sojourn) {
    std::visit(
        [&out](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, ExponentialSojourn>) {
            out << "sojourn exp " << fmt_double(l.mean) << "\n";
          } else if constexpr (std::is_same_v<T, DeterministicSojourn>) {
            out << "sojourn det " << fmt_double(l.value) << "\n";
          } else {
            out << "sojourn pareto " << fmt_double(l.shape) << ' '
                << fmt_double(l.scale) << "\n";
          }
        },
        law);
  }
  for (const auto& law : spec_.popularity) {
    std::visit(
        [&out](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, ZipfLaw>) {
            out << "pop zipf " << fmt_double(l.alpha) << ' ' << l.universe
                << "\n";
          } else if constexpr (std::is_same_v<T, ExplicitLaw>) {
            out << "pop explicit";
            for (double w : l.weights) out << ' ' << fmt_double(w);
            out << "\n";
          } else {
            out << "pop pzipf " << fmt_double(l.alpha) << ' ' << l.universe;
            for (std::int32_t r : l.permutation) out << ' ' << r;
            out << "\n";
          }
        },
        law);
  }
  return out.str();
}

// ---------------------------------------------------------------------------

StreamCursor::StreamCursor(const ValidatedSpec& spec, StopRule stop,
                           std::uint64_t seed, std::uint64_t request_cap)
    : spec_(&spec),
      stop_(stop),
      request_cap_(request_cap),
      arrivals_(named_stream(seed, "arrivals")),
      sojourns_(named_stream(seed, "sojourns")),
      transitions_(named_stream(seed, "transitions")),
      docs_(named_stream(seed, "docs")) {
  // Streams begin at a regeneration: state 1 entered at time 0.
  last_seen_cycle_.assign(static_cast<std::size_t>(spec.universe_size()), -1);
  open_cycle(0.0);
  next_jump_ = sample_sojourn(spec.spec().sojourn[0], sojourns_);
  next_arrival_ = arrivals_.exponential(1.0);
}

void StreamCursor::open_cycle(double at) {
  cycle_.cycle_index = static_cast<std::int64_t>(cycles_completed_);
  cycle_.start = at;
  cycle_.end = 0.0;
  cycle_.per_state_counts.assign(
      static_cast<std::size_t>(spec_->num_states()), 0);
  cycle_.total_count = 0;
  cycle_.distinct_docs.clear();
  cycle_.per_state_time.assign(static_cast<std::size_t>(spec_->num_states()),
                               0.0);
  segment_start_ = at;
}

void StreamCursor::close_cycle(double at) {
  cycle_.end = at;
  ++cycles_completed_;
}

StateId StreamCursor::sample_next_state() {
  const auto& row = spec_->spec().transition[static_cast<std::size_t>(state_)];
  const double u = transitions_.next_unit();
  double cum = 0.0;
  std::int32_t last_positive = state_;
  for (std::int32_t j = 0; j < spec_->num_states(); ++j) {
    const double p = row[static_cast<std::size_t>(j)];
    if (p <= 0.0) continue;
    cum += p;
    last_positive = j;
    if (u < cum) return j;
  }
  return last_positive;  // guards against rounding at cum ~ 1
}

StreamCursor::Item StreamCursor::advance() {
  if (finished_) return Item::Finished;
  if (pending_open_) {
    open_cycle(pending_open_at_);
    pending_open_ = false;
  }
  for (;;) {
    if (stop_.kind == StopRule::Kind::MaxRequests &&
        requests_emitted_ >= stop_.count) {
      finished_ = true;
      return Item::Finished;
    }
    if (stop_.kind == StopRule::Kind::MaxCycles &&
        cycles_completed_ >= stop_.count) {
      finished_ = true;
      return Item::Finished;
    }

    const bool jump_first = next_jump_ <= next_arrival_;
    const double t = jump_first ? next_jump_ : next_arrival_;
    if (stop_.kind == StopRule::Kind::MaxTime && t > stop_.time) {
      finished_ = true;
      return Item::Finished;
    }

    if (jump_first) {
      const double at = next_jump_;
      cycle_.per_state_time[static_cast<std::size_t>(state_)] +=
          at - segment_start_;
      segment_start_ = at;
      clock_ = at;
      state_ = sample_next_state();
      next_jump_ =
          at + sample_sojourn(
                   spec_->spec().sojourn[static_cast<std::size_t>(state_)],
                   sojourns_);
      if (state_ == 0) {
        close_cycle(at);
        pending_open_ = true;
        pending_open_at_ = at;
        return Item::CycleEnd;
      }
      continue;  // interior jump, nothing to report
    }

    if (stop_.kind == StopRule::Kind::MaxCycles &&
        requests_emitted_ >= request_cap_) {
      throw Error(Errc::CycleCapExceeded,
                  "request cap " + std::to_string(request_cap_) +
                      " hit before cycle " + std::to_string(stop_.count));
    }
    clock_ = next_arrival_;
    const DocId doc =
        spec_->doc_sampler(static_cast<StateId>(state_ + 1)).sample(docs_) + 1;
    event_.time = next_arrival_;
    event_.doc = doc;
    event_.state = static_cast<StateId>(state_ + 1);
    event_.cycle_index = cycle_.cycle_index;
    ++cycle_.per_state_counts[static_cast<std::size_t>(state_)];
    ++cycle_.total_count;
    auto& stamp = last_seen_cycle_[static_cast<std::size_t>(doc - 1)];
    if (stamp != cycle_.cycle_index) {
      stamp = cycle_.cycle_index;
      cycle_.distinct_docs.push_back(doc);
    }
    ++requests_emitted_;
    next_arrival_ += arrivals_.exponential(1.0);
    return Item::Request;
  }
}

CollectedStream collect_stream(const ValidatedSpec& spec, StopRule stop,
                               std::uint64_t seed) {
  CollectedStream out;
  StreamCursor cursor(spec, stop, seed);
  for (;;) {
    switch (cursor.advance()) {
      case StreamCursor::Item::Request:
        out.events.push_back(cursor.event());
        break;
      case StreamCursor::Item::CycleEnd:
        out.cycles.push_back(cursor.cycle());
        break;
      case StreamCursor::Item::Finished:
        return out;
    }
  }
}

void write_trace(std::ostream& out, const ValidatedSpec& spec, StopRule stop,
                 std::uint64_t seed) {
  out << "time\tdoc\tstate\tcycle_index\n";
  StreamCursor cursor(spec, stop, seed);
  char buf[96];
  for (;;) {
    const auto item = cursor.advance();
    if (item == StreamCursor::Item::Finished) break;
    if (item != StreamCursor::Item::Request) continue;
    const RequestEvent& e = cursor.event();
    std::snprintf(buf, sizeof(buf), "%.9f\t%d\t%d\t%lld\n", e.time, e.doc,
                  e.state, static_cast<long long>(e.cycle_index));
    out << buf;
  }
}

}  // namespace corrcache
