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

#include "corrcache/placement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>

#include "corrcache/errors.hpp"

namespace corrcache {

namespace {

constexpr std::int32_t kExhaustiveLimit = 25;

void check_q(const PlacementProblem& p) {
  if (p.q.empty()) throw Error(Errc::ConfigInvalid, "empty popularity vector");
  double sum = 0.0;
  for (double v : p.q) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(Errc::ConfigInvalid, "popularity entries must be positive");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(Errc::ConfigInvalid, "popularity must sum to 1");
  }
}

void check_cost(const PlacementProblem& p) {
  if (p.cost.size() != p.q.size()) {
    throw Error(Errc::CostOutOfRange, "cost vector length mismatch");
  }
  if (!(p.cost_bound > 0.0) || !std::isfinite(p.cost_bound)) {
    throw Error(Errc::CostOutOfRange, "declared cost bound K must be finite");
  }
  for (double f : p.cost) {
    if (!(f > 0.0) || f > p.cost_bound) {
      throw Error(Errc::CostOutOfRange,
                  "costs must lie in (0, K] for the declared K");
    }
  }
}

void check_sizes(const PlacementProblem& p) {
  if (p.sizes.size() != p.q.size()) {
    throw Error(Errc::ConfigInvalid, "size vector length mismatch");
  }
  for (double s : p.sizes) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(Errc::ConfigInvalid, "sizes must be strictly positive");
    }
  }
}

std::int64_t integral_budget(const PlacementProblem& p) {
  const double rounded = std::nearbyint(p.budget);
  if (std::abs(p.budget - rounded) > 1e-9 || rounded < 0.0) {
    throw Error(Errc::ConfigInvalid,
                "budget must be a nonnegative document count");
  }
  const auto x = static_cast<std::int64_t>(rounded);
  if (x > static_cast<std::int64_t>(p.q.size())) {
    throw Error(Errc::BudgetExceedsUniverse,
                "budget exceeds the universe size");
  }
  return x;
}

// Ids 1..N ordered by non-increasing key, lowest id first on ties.
std::vector<DocId> order_by_key(const std::vector<double>& key) {
  std::vector<DocId> ids(key.size());
  std::iota(ids.begin(), ids.end(), DocId{1});
  std::stable_sort(ids.begin(), ids.end(), [&](DocId a, DocId b) {
    return key[static_cast<std::size_t>(a - 1)] >
           key[static_cast<std::size_t>(b - 1)];
  });
  return ids;
}

// Sum of `values` over documents NOT in `chosen` (chosen is ascending).
double complement_sum(const std::vector<double>& values,
                      const std::vector<DocId>& chosen) {
  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (k < chosen.size() &&
        chosen[k] == static_cast<DocId>(i + 1)) {
      ++k;
      continue;
    }
    sum += values[i];
  }
  return sum;
}

PlacementResult take_prefix(const std::vector<DocId>& order, std::int64_t x,
                            const std::vector<double>& objective_values) {
  PlacementResult result;
  result.chosen.assign(order.begin(),
                       order.begin() + static_cast<std::ptrdiff_t>(x));
  std::sort(result.chosen.begin(), result.chosen.end());
  result.used_budget = static_cast<double>(x);
  result.predicted_objective = complement_sum(objective_values, result.chosen);
  return result;
}

}  // namespace

PlacementResult top_x(const PlacementProblem& problem) {
  check_q(problem);
  if (!problem.cost.empty() || !problem.sizes.empty()) {
    throw Error(Errc::ConfigInvalid,
                "top_x applies to the unit-size, unit-cost problem");
  }
  const std::int64_t x = integral_budget(problem);
  return take_prefix(order_by_key(problem.q), x, problem.q);
}

PlacementResult cost_weighted_set(const PlacementProblem& problem) {
  check_q(problem);
  if (problem.cost.empty()) {
    throw Error(Errc::CostOutOfRange, "cost vector is required");
  }
  if (!problem.sizes.empty()) {
    throw Error(Errc::ConfigInvalid,
                "cost_weighted_set applies to unit-size documents");
  }
  check_cost(problem);
  const std::int64_t x = integral_budget(problem);

  std::vector<double> weighted(problem.q.size());
  for (std::size_t i = 0; i < problem.q.size(); ++i) {
    weighted[i] = problem.q[i] * problem.cost[i];
  }
  return take_prefix(order_by_key(weighted), x, weighted);
}

PlacementResult size_aware_prefix(const PlacementProblem& problem) {
  check_q(problem);
  if (problem.sizes.empty()) {
    throw Error(Errc::ConfigInvalid, "size vector is required");
  }
  if (!problem.cost.empty()) {
    throw Error(Errc::ConfigInvalid,
                "size_aware_prefix applies to unit-cost documents");
  }
  check_sizes(problem);
  if (!(problem.budget > 0.0)) {
    throw Error(Errc::ConfigInvalid, "size budget must be positive");
  }

  std::vector<double> density(problem.q.size());
  for (std::size_t i = 0; i < problem.q.size(); ++i) {
    density[i] = problem.q[i] / problem.sizes[i];
  }
  const std::vector<DocId> order = order_by_key(density);

  PlacementResult result;
  double used = 0.0;
  for (DocId doc : order) {
    const double s = problem.sizes[static_cast<std::size_t>(doc - 1)];
    if (used + s > problem.budget) {
      result.split_doc = doc;  // first item that fails; no back-filling
      break;
    }
    used += s;
    result.chosen.push_back(doc);
  }
  std::sort(result.chosen.begin(), result.chosen.end());
  result.used_budget = used;
  result.predicted_objective = complement_sum(problem.q, result.chosen);
  return result;
}

PlacementResult exact_knapsack(const PlacementProblem& problem) {
  check_q(problem);
  if (!problem.cost.empty()) check_cost(problem);
  if (!problem.sizes.empty()) check_sizes(problem);
  if (!(problem.budget >= 0.0) || !std::isfinite(problem.budget)) {
    throw Error(Errc::ConfigInvalid, "budget must be nonnegative");
  }

  const std::size_t n = problem.q.size();
  std::vector<double> value(n), weight(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    value[i] = problem.cost.empty() ? problem.q[i]
                                    : problem.q[i] * problem.cost[i];
  }
  if (!problem.sizes.empty()) weight = problem.sizes;

  std::uint32_t best_mask = 0;
  double best_value = -1.0;
  double best_weight = 0.0;

  if (n <= kExhaustiveLimit) {
    // Depth-first take/skip enumeration; suffix value sums for pruning.
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + value[i];

    // Prefer: larger value, then smaller weight, then the set whose
    // ascending id sequence is lexicographically smallest. Positive
    // values rule out subset ties, so the lowest differing id decides.
    const auto improves = [&](double v, double w, std::uint32_t mask) {
      if (best_value < 0.0) return true;  // first candidate
      if (v != best_value) return v > best_value;
      if (w != best_weight) return w < best_weight;
      const std::uint32_t diff = mask ^ best_mask;
      return diff != 0 && (mask & (diff & (~diff + 1u))) != 0;
    };

    std::uint32_t mask = 0;
    const std::function<void(std::size_t, double, double)> walk =
        [&](std::size_t i, double w, double v) {
          if (v + suffix[i] < best_value) return;
          if (i == n) {
            if (improves(v, w, mask)) {
              best_value = v;
              best_weight = w;
              best_mask = mask;
            }
            return;
          }
          if (w + weight[i] <= problem.budget) {
            mask |= (1u << i);
            walk(i + 1, w + weight[i], v + value[i]);
            mask &= ~(1u << i);
          }
          walk(i + 1, w, v);
        };
    walk(0, 0.0, 0.0);

    PlacementResult result;
    for (std::size_t i = 0; i < n; ++i) {
      if (best_mask & (1u << i)) {
        result.chosen.push_back(static_cast<DocId>(i + 1));
      }
    }
    result.used_budget = best_weight;
    result.predicted_objective = complement_sum(value, result.chosen);
    return result;
  }

  // Larger instances: dynamic program over integral sizes.
  const double budget_rounded = std::nearbyint(problem.budget);
  bool integral = std::abs(problem.budget - budget_rounded) <= 1e-9;
  std::vector<std::int64_t> w_int(n);
  for (std::size_t i = 0; i < n && integral; ++i) {
    const double r = std::nearbyint(weight[i]);
    integral = std::abs(weight[i] - r) <= 1e-9 && r >= 1.0;
    w_int[i] = static_cast<std::int64_t>(r);
  }
  const auto budget_int = static_cast<std::int64_t>(budget_rounded);
  constexpr std::int64_t kMaxDpCells = 50'000'000;
  if (!integral || budget_int < 0 ||
      static_cast<std::int64_t>(n) * (budget_int + 1) > kMaxDpCells) {
    throw Error(Errc::InstanceTooLarge,
                "exact solve needs N <= 25 or integral sizes with a "
                "modest table");
  }

  const auto cols = static_cast<std::size_t>(budget_int + 1);
  std::vector<double> dp(cols, 0.0);
  std::vector<std::vector<char>> take(n, std::vector<char>(cols, 0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto wi = static_cast<std::size_t>(w_int[i]);
    for (std::size_t b = cols; b-- > 0;) {
      if (b >= wi && dp[b - wi] + value[i] > dp[b]) {
        dp[b] = dp[b - wi] + value[i];
        take[i][b] = 1;
      }
    }
  }
  PlacementResult result;
  std::size_t b = cols - 1;
  for (std::size_t i = n; i-- > 0;) {
    if (take[i][b]) {
      result.chosen.push_back(static_cast<DocId>(i + 1));
      b -= static_cast<std::size_t>(w_int[i]);
      result.used_budget += weight[i];
    }
  }
  std::sort(result.chosen.begin(), result.chosen.end());
  result.predicted_objective = complement_sum(value, result.chosen);
  return result;
}

}  // namespace corrcache
