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

#ifndef CORRCACHE_PLACEMENT_HPP
#define CORRCACHE_PLACEMENT_HPP

#include <optional>
#include <vector>

#include "corrcache/workload.hpp"

namespace corrcache {

struct PlacementProblem {
  std::vector<double> q;  // popularity, sums to 1, strictly positive
  // Retrieval costs in (0, cost_bound]; empty means unit cost.
  std::vector<double> cost;
  double cost_bound = 0.0;  // declared K; required when cost is present
  // Document sizes, strictly positive, finitely many distinct values;
  // empty means unit size.
  std::vector<double> sizes;
  // Document count when sizes are absent, total size budget otherwise.
  double budget = 0.0;
};

struct PlacementResult {
  std::vector<DocId> chosen;  // ascending document ids
  // Mass (or cost mass) left outside the cache, recomputed exactly from
  // the inputs: sum over documents not chosen.
  double predicted_objective = 0.0;
  double used_budget = 0.0;
  // Size-aware prefix rule only: the first document, in density order,
  // that failed to fit.
  std::optional<DocId> split_doc;
};

// Largest marginal popularities, lowest-index tie-break.
// Errors: BudgetExceedsUniverse.
PlacementResult top_x(const PlacementProblem& problem);

// Largest q_i * f(i) products, same tie-break; objective is the missed
// cost mass. Errors: BudgetExceedsUniverse, CostOutOfRange.
PlacementResult cost_weighted_set(const PlacementProblem& problem);

// Non-increasing q_i/s_i order, greedy prefix until the first item that
// does not fit; no back-filling past that item.
PlacementResult size_aware_prefix(const PlacementProblem& problem);

// Exact optimum (oracle): maximize cached mass subject to the size
// budget, by exhaustive search (N <= 25) or dynamic programming over
// integral sizes. Errors: InstanceTooLarge.
PlacementResult exact_knapsack(const PlacementProblem& problem);

}  // namespace corrcache

#endif  // CORRCACHE_PLACEMENT_HPP
