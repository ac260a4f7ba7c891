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

#include "corrcache/policies.hpp"

#include <algorithm>
#include <deque>
#include <list>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>

#include "corrcache/errors.hpp"

namespace corrcache {

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::StaticTopX:
      return "static_top_x";
    case PolicyKind::StaticGivenSet:
      return "static_given_set";
    case PolicyKind::Lru:
      return "lru";
    case PolicyKind::Lfu:
      return "lfu";
    case PolicyKind::Fifo:
      return "fifo";
    case PolicyKind::RandomEvict:
      return "random_evict";
  }
  return "unknown";
}

std::optional<PolicyKind> policy_from_name(std::string_view name) {
  for (PolicyKind k :
       {PolicyKind::StaticTopX, PolicyKind::StaticGivenSet, PolicyKind::Lru,
        PolicyKind::Lfu, PolicyKind::Fifo, PolicyKind::RandomEvict}) {
    if (name == policy_name(k)) return k;
  }
  return std::nullopt;
}

void CachePolicy::mark_present(DocId doc) {
  const auto i = static_cast<std::size_t>(doc - 1);
  if (i >= present_.size()) present_.resize(i + 1, 0);
  if (!present_[i]) {
    present_[i] = 1;
    ++resident_count_;
  }
}

void CachePolicy::mark_absent(DocId doc) {
  const auto i = static_cast<std::size_t>(doc - 1);
  if (i < present_.size() && present_[i]) {
    present_[i] = 0;
    --resident_count_;
  }
}

std::vector<DocId> CachePolicy::residents() const {
  std::vector<DocId> out;
  out.reserve(resident_count_);
  for (std::size_t i = 0; i < present_.size(); ++i) {
    if (present_[i]) out.push_back(static_cast<DocId>(i + 1));
  }
  return out;
}

namespace {

class StaticPolicy final : public CachePolicy {
 public:
  StaticPolicy(PolicyKind kind, std::int64_t capacity,
               std::span<const DocId> contents)
      : CachePolicy(kind, capacity) {
    for (DocId d : contents) mark_present(d);
  }

  AccessOutcome access(DocId doc) override {
    // Replacement is optional; the static rule never exercises it.
    return AccessOutcome{contains(doc), std::nullopt, false};
  }
};

class LruPolicy final : public CachePolicy {
 public:
  explicit LruPolicy(std::int64_t capacity)
      : CachePolicy(PolicyKind::Lru, capacity) {}

  AccessOutcome access(DocId doc) override {
    if (auto it = where_.find(doc); it != where_.end()) {
      recency_.splice(recency_.begin(), recency_, it->second);
      return {true, std::nullopt, false};
    }
    AccessOutcome out{false, std::nullopt, false};
    if (capacity() == 0) return out;
    if (static_cast<std::int64_t>(resident_count()) == capacity()) {
      const DocId victim = recency_.back();
      recency_.pop_back();
      where_.erase(victim);
      mark_absent(victim);
      out.evicted = victim;
    }
    recency_.push_front(doc);
    where_[doc] = recency_.begin();
    mark_present(doc);
    out.inserted = true;
    return out;
  }

 private:
  std::list<DocId> recency_;  // front = most recently used
  std::unordered_map<DocId, std::list<DocId>::iterator> where_;
};

class FifoPolicy final : public CachePolicy {
 public:
  explicit FifoPolicy(std::int64_t capacity)
      : CachePolicy(PolicyKind::Fifo, capacity) {}

  AccessOutcome access(DocId doc) override {
    if (contains(doc)) return {true, std::nullopt, false};
    AccessOutcome out{false, std::nullopt, false};
    if (capacity() == 0) return out;
    if (static_cast<std::int64_t>(resident_count()) == capacity()) {
      const DocId victim = queue_.front();
      queue_.pop_front();
      mark_absent(victim);
      out.evicted = victim;
    }
    queue_.push_back(doc);
    mark_present(doc);
    out.inserted = true;
    return out;
  }

 private:
  std::deque<DocId> queue_;  // front = oldest insertion
};

// Global request counters over the full history; eviction removes the
// resident with the smallest counter, ties broken toward the least
// recently used.
class LfuPolicy final : public CachePolicy {
 public:
  explicit LfuPolicy(std::int64_t capacity)
      : CachePolicy(PolicyKind::Lfu, capacity) {}

  AccessOutcome access(DocId doc) override {
    ++seq_;
    const std::uint64_t count = ++count_of_[doc];
    if (contains(doc)) {
      auto it = key_of_.find(doc);
      heap_.erase(it->second);
      it->second = {count, seq_, doc};
      heap_.insert(it->second);
      return {true, std::nullopt, false};
    }
    AccessOutcome out{false, std::nullopt, false};
    if (capacity() == 0) return out;
    if (static_cast<std::int64_t>(resident_count()) == capacity()) {
      const auto victim_key = *heap_.begin();
      const DocId victim = std::get<2>(victim_key);
      heap_.erase(heap_.begin());
      key_of_.erase(victim);
      mark_absent(victim);
      out.evicted = victim;
    }
    const Key key{count, seq_, doc};
    heap_.insert(key);
    key_of_[doc] = key;
    mark_present(doc);
    out.inserted = true;
    return out;
  }

 private:
  using Key = std::tuple<std::uint64_t, std::uint64_t, DocId>;
  std::uint64_t seq_ = 0;
  std::unordered_map<DocId, std::uint64_t> count_of_;
  std::set<Key> heap_;  // (count, last-access seq, doc), residents only
  std::unordered_map<DocId, Key> key_of_;
};

class RandomEvictPolicy final : public CachePolicy {
 public:
  RandomEvictPolicy(std::int64_t capacity, std::uint64_t seed)
      : CachePolicy(PolicyKind::RandomEvict, capacity),
        rng_(named_stream(seed, "policy/random_evict")) {}

  AccessOutcome access(DocId doc) override {
    if (contains(doc)) return {true, std::nullopt, false};
    AccessOutcome out{false, std::nullopt, false};
    if (capacity() == 0) return out;
    if (static_cast<std::int64_t>(resident_count()) == capacity()) {
      const std::size_t k =
          static_cast<std::size_t>(rng_.below(slots_.size()));
      const DocId victim = slots_[k];
      slots_[k] = slots_.back();
      slot_of_[slots_[k]] = k;
      slots_.pop_back();
      slot_of_.erase(victim);
      mark_absent(victim);
      out.evicted = victim;
    }
    slot_of_[doc] = slots_.size();
    slots_.push_back(doc);
    mark_present(doc);
    out.inserted = true;
    return out;
  }

 private:
  SplitMix64 rng_;
  std::vector<DocId> slots_;
  std::unordered_map<DocId, std::size_t> slot_of_;
};

std::vector<DocId> top_by_popularity(std::span<const double> q,
                                     std::int64_t x) {
  std::vector<DocId> ids(q.size());
  std::iota(ids.begin(), ids.end(), DocId{1});
  std::stable_sort(ids.begin(), ids.end(), [&](DocId a, DocId b) {
    return q[static_cast<std::size_t>(a - 1)] >
           q[static_cast<std::size_t>(b - 1)];
  });
  ids.resize(static_cast<std::size_t>(
      std::min<std::int64_t>(x, static_cast<std::int64_t>(ids.size()))));
  return ids;
}

}  // namespace

std::unique_ptr<CachePolicy> make_policy(PolicyKind kind, std::int64_t capacity,
                                         const PolicyContext& context,
                                         std::uint64_t seed) {
  if (capacity < 0) {
    throw Error(Errc::ConfigInvalid, "cache capacity must be >= 0");
  }
  switch (kind) {
    case PolicyKind::StaticTopX: {
      if (context.popularity.empty()) {
        throw Error(Errc::MissingContext,
                    "static_top_x needs the popularity vector");
      }
      const auto contents = top_by_popularity(context.popularity, capacity);
      return std::make_unique<StaticPolicy>(kind, capacity, contents);
    }
    case PolicyKind::StaticGivenSet: {
      if (!context.given_set.has_value()) {
        throw Error(Errc::MissingContext,
                    "static_given_set needs an explicit document set");
      }
      if (static_cast<std::int64_t>(context.given_set->size()) > capacity) {
        throw Error(Errc::SetTooLarge,
                    "given set exceeds the cache capacity");
      }
      return std::make_unique<StaticPolicy>(kind, capacity,
                                            *context.given_set);
    }
    case PolicyKind::Lru:
      return std::make_unique<LruPolicy>(capacity);
    case PolicyKind::Lfu:
      return std::make_unique<LfuPolicy>(capacity);
    case PolicyKind::Fifo:
      return std::make_unique<FifoPolicy>(capacity);
    case PolicyKind::RandomEvict:
      return std::make_unique<RandomEvictPolicy>(capacity, seed);
  }
  throw Error(Errc::ConfigInvalid, "unknown policy kind");
}

}  // namespace corrcache
