/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cassert>
#include <ostream>
#include <vector>

#include "nvtraverse/core.hpp"
#include "nvtraverse/harris_list.hpp"

namespace nvt {

// Fixed-bucket hash table; each bucket is a sorted chain. findEntry picks the
// bucket head, everything after that is the list machinery. No resizing;
// bucket(k) = k mod bucket_count, keys are non-negative.
template <class Memory>
class HashTable {
 public:
  using Ctx = ThreadContext<Memory>;

  HashTable(Memory& mem, std::size_t bucket_count) : mem_(&mem) {
    assert(bucket_count > 0);
    buckets_.reserve(bucket_count);
    for (std::size_t i = 0; i < bucket_count; ++i) {
      auto [head, tail] = chain::make_empty(mem);
      (void)tail;
      buckets_.push_back(head);
    }
  }

  std::size_t bucket_count() const { return buckets_.size(); }
  Addr bucket_head(std::size_t i) const { return buckets_[i]; }
  std::size_t bucket_of(Key k) const {
    return static_cast<std::size_t>(k) % buckets_.size();
  }

  Addr find_entry(Ctx&, Key k) const { return buckets_[bucket_of(k)]; }

  TraverseResult traverse(Ctx& ctx, Addr entry, Key k) const {
    return chain::traverse(ctx, entry, k);
  }

  CriticalResult critical(Ctx& ctx, OpKind op, const TraverseResult& tr, Key k) {
    return chain::critical(ctx, op, tr, k);
  }

  void disconnect(Ctx& ctx) {
    for (Addr head : buckets_) chain::disconnect(ctx, head);
  }

  bool insert(Ctx& ctx, Key k) { return run_operation(ctx, *this, OpKind::insert, k); }
  bool remove(Ctx& ctx, Key k) { return run_operation(ctx, *this, OpKind::remove, k); }
  bool find(Ctx& ctx, Key k) { return run_operation(ctx, *this, OpKind::find, k); }

  void prefill(const std::vector<Key>& keys) {
    for (Key k : keys) chain::insert_quiesced(*mem_, buckets_[bucket_of(k)], k);
  }

  bool contains_quiesced(Key k) const {
    return chain::contains_quiesced(*mem_, buckets_[bucket_of(k)], k);
  }

  bool sorted_ok() const {
    for (Addr head : buckets_)
      if (!chain::sorted_chain_ok(*mem_, head)) return false;
    return true;
  }

  // A key may be reachable only through its own bucket.
  bool key_locality_ok() const {
    for (std::size_t b = 0; b < buckets_.size(); ++b) {
      for (Addr n : chain::chain_nodes(*mem_, buckets_[b])) {
        Key k = word_to_key(mem_->volatile_value(NodeLayout::key_word(n)));
        if (k == kKeyMin || k == kKeyMax) continue;
        if (bucket_of(k) != b) return false;
      }
    }
    return true;
  }

  void dump(std::ostream& os) const {
    for (std::size_t b = 0; b < buckets_.size(); ++b) {
      os << "bucket " << b << '\n';
      chain::dump(*mem_, buckets_[b], os);
    }
  }

 private:
  Memory* mem_;
  std::vector<Addr> buckets_;
};

}  // namespace nvt
