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

#ifndef CORRCACHE_POLICIES_HPP
#define CORRCACHE_POLICIES_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "corrcache/workload.hpp"

namespace corrcache {

enum class PolicyKind {
  StaticTopX,
  StaticGivenSet,
  Lru,
  Lfu,
  Fifo,
  RandomEvict,
};

const char* policy_name(PolicyKind kind);
std::optional<PolicyKind> policy_from_name(std::string_view name);

struct AccessOutcome {
  bool hit = false;
  std::optional<DocId> evicted;  // set only when a resident was replaced
  bool inserted = false;
};

/**
 * One cache under one replacement rule. Decisions depend only on the
 * request history and past decisions (plus a private seeded stream for
 * RandomEvict), so replaying a recorded stream reproduces the same
 * outcome sequence. Hits never change the contents; adaptive policies
 * fill a cold cache before evicting; static policies never change at all.
 */
class CachePolicy {
 public:
  virtual ~CachePolicy() = default;

  virtual AccessOutcome access(DocId doc) = 0;

  PolicyKind kind() const { return kind_; }
  std::int64_t capacity() const { return capacity_; }
  std::size_t resident_count() const { return resident_count_; }

  bool contains(DocId doc) const {
    const auto i = static_cast<std::size_t>(doc - 1);
    return i < present_.size() && present_[i] != 0;
  }

  // Residents in ascending document order (snapshot; O(n log n)).
  std::vector<DocId> residents() const;

 protected:
  CachePolicy(PolicyKind kind, std::int64_t capacity)
      : kind_(kind), capacity_(capacity) {}

  void mark_present(DocId doc);
  void mark_absent(DocId doc);

 private:
  PolicyKind kind_;
  std::int64_t capacity_;
  std::vector<std::uint8_t> present_;  // grown on demand, indexed by doc-1
  std::size_t resident_count_ = 0;
};

struct PolicyContext {
  // Marginal popularity indexed by doc-1; required by StaticTopX.
  std::span<const double> popularity{};
  // Fixed contents; required by StaticGivenSet (may be empty if present).
  std::optional<std::vector<DocId>> given_set;
};

// Errors: MissingContext (StaticTopX without popularity, StaticGivenSet
// without a set), SetTooLarge (given set exceeds capacity).
std::unique_ptr<CachePolicy> make_policy(PolicyKind kind, std::int64_t capacity,
                                         const PolicyContext& context,
                                         std::uint64_t seed);

}  // namespace corrcache

#endif  // CORRCACHE_POLICIES_HPP
