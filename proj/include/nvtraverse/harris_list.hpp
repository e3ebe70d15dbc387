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

#include <algorithm>
#include <ostream>
#include <vector>

#include "nvtraverse/core.hpp"
#include "nvtraverse/framework.hpp"
#include "nvtraverse/injector.hpp"
#include "nvtraverse/thread_context.hpp"

namespace nvt {

// Sorted lock-free chain with head/tail sentinels: the shared machinery of
// the list and of every hash-table bucket. Nodes come from the simulator
// arena and are never reused; unreachable nodes leak until teardown.
namespace chain {

using NL = NodeLayout;

template <class Memory>
Addr make_node(Memory& mem, Key k, Word value, Word next_raw, Addr orig_parent_loc) {
  Addr n = mem.alloc_node();
  mem.write(NL::key_word(n), key_to_word(k), 0);
  mem.write(NL::value_word(n), value, 0);
  mem.write(NL::next_word(n), next_raw, 0);
  mem.write(NL::orig_parent_word(n), orig_parent_loc, 0);
  return n;
}

// head -> tail, keys reserved outside the user range. Sentinels record their
// own next link as the original-parent location.
template <class Memory>
std::pair<Addr, Addr> make_empty(Memory& mem) {
  Addr tail = make_node(mem, kKeyMax, 0, MarkedLink::make(kNullAddr), 0);
  Addr head = make_node(mem, kKeyMin, 0, MarkedLink::make(tail), 0);
  mem.write(NL::orig_parent_word(tail), NL::next_word(head), 0);
  mem.write(NL::orig_parent_word(head), NL::next_word(head), 0);
  return {head, tail};
}

// Quiescent insert used for prefilling; bypasses instrumentation.
template <class Memory>
bool insert_quiesced(Memory& mem, Addr head, Key k, Word value = 0) {
  Addr left = head;
  while (true) {
    Word raw = mem.volatile_value(NL::next_word(left));
    Addr next = MarkedLink::address_of(raw);
    Key nk = word_to_key(mem.volatile_value(NL::key_word(next)));
    if (nk == k) return false;
    if (nk > k) {
      Addr n = make_node(mem, k, value, MarkedLink::make(next), NL::next_word(left));
      mem.write(NL::next_word(left), MarkedLink::make(n), 0);
      return true;
    }
    left = next;
  }
}

// Traversal per the persistent search: finds the last unmarked node with a
// key below k (left), the first node at/above k that was unmarked when
// reached (right), and the marked nodes in between. Restarts internally when
// right is marked at the recheck. Null links only appear in damaged
// post-crash images; the walk stops there and returns what it has.
template <class Ctx>
TraverseResult traverse(Ctx& ctx, Addr entry, Key k) {
  int want_parents = 1;
  if (ctx.policy().er_mode == EnsureReachableMode::current_parent_path)
    want_parents = std::max(1, ctx.policy().path_length);

  while (true) {
    TraverseResult tr;
    std::vector<std::pair<Addr, Addr>> reads;  // (node, field word)

    Addr left_parent = entry;
    Addr pred = entry;
    Addr curr = entry;
    tr.visited.push_back(curr);
    Word succ = ctx.read_shared(NL::next_word(curr));
    reads.emplace_back(curr, NL::next_word(curr));
    bool marked = MarkedLink::is_marked(succ);

    std::vector<Addr> nodes;
    bool truncated = false;
    while (true) {
      if (!marked) {
        Key ck = word_to_key(ctx.read_immutable(NL::key_word(curr)));
        if (ck >= k) break;
        nodes.clear();
        left_parent = pred;
        nodes.push_back(curr);
      } else {
        nodes.push_back(curr);
      }
      pred = curr;
      curr = MarkedLink::address_of(succ);
      if (curr == kNullAddr) {
        truncated = true;
        break;
      }
      tr.visited.push_back(curr);
      succ = ctx.read_shared(NL::next_word(curr));
      reads.emplace_back(curr, NL::next_word(curr));
      marked = MarkedLink::is_marked(succ);
    }

    if (truncated) {
      // damaged image: no right node; keep only left
      tr.returned_nodes.assign(1, nodes.empty() ? entry : nodes.front());
    } else {
      nodes.push_back(curr);  // right
      Word recheck = ctx.read_shared(NL::next_word(curr));
      reads.emplace_back(curr, NL::next_word(curr));
      if (MarkedLink::is_marked(recheck)) continue;
      tr.returned_nodes = std::move(nodes);
    }

    // current predecessors of the topmost returned node, nearest first
    Addr first = tr.returned_nodes.front();
    auto it = std::find(tr.visited.begin(), tr.visited.end(), first);
    for (int i = 0; i < want_parents; ++i) {
      if (it == tr.visited.begin()) {
        if (tr.parent_path.empty()) tr.parent_path.push_back(left_parent);
        break;
      }
      --it;
      tr.parent_path.push_back(*it);
    }

    for (const auto& [node, field] : reads) {
      if (std::find(tr.returned_nodes.begin(), tr.returned_nodes.end(), node) !=
          tr.returned_nodes.end())
        tr.read_fields.push_back(field);
    }
    return tr;
  }
}

// Single CAS that trims the marked nodes between left and right. True when
// left and right end up adjacent with right still unmarked.
template <class Ctx>
bool delete_marked_nodes(Ctx& ctx, const TraverseResult& tr) {
  if (tr.returned_nodes.size() <= 2) return true;
  Addr left = tr.returned_nodes.front();
  Addr right = tr.returned_nodes.back();
  Word expected = MarkedLink::make(tr.returned_nodes[1]);
  Word desired = MarkedLink::make(right);
  if (!ctx.cas_shared(NL::next_word(left), expected, desired)) return false;
  Word rn = ctx.read_shared(NL::next_word(right));
  return !MarkedLink::is_marked(rn);
}

template <class Ctx>
CriticalResult insert_critical(Ctx& ctx, const TraverseResult& tr, Key k) {
  if (tr.returned_nodes.size() < 2) return {false, false};
  if (!delete_marked_nodes(ctx, tr)) return {true, false};
  Addr left = tr.returned_nodes.front();
  Addr right = tr.returned_nodes.back();
  Key rk = word_to_key(ctx.read_immutable(NL::key_word(right)));  // no flush, immutable
  if (rk == k) return {false, false};
  Addr n = ctx.alloc_node();
  ctx.write_init(NL::key_word(n), key_to_word(k));
  ctx.write_init(NL::value_word(n), key_to_word(k));
  ctx.write_init(NL::next_word(n), MarkedLink::make(right));
  ctx.write_init(NL::orig_parent_word(n), NL::next_word(left));
  bool ok = ctx.cas_shared(NL::next_word(left), MarkedLink::make(right), MarkedLink::make(n));
  if (ok) return {false, true};
  return {true, false};
}

template <class Ctx>
CriticalResult delete_critical(Ctx& ctx, const TraverseResult& tr, Key k) {
  if (tr.returned_nodes.size() < 2) return {false, false};
  if (!delete_marked_nodes(ctx, tr)) return {true, false};
  Addr left = tr.returned_nodes.front();
  Addr right = tr.returned_nodes.back();
  Key rk = word_to_key(ctx.read_immutable(NL::key_word(right)));
  if (rk != k) return {false, false};
  Word rnext = ctx.read_shared(NL::next_word(right));
  if (!MarkedLink::is_marked(rnext)) {
    bool res = ctx.cas_shared(NL::next_word(right), rnext, MarkedLink::with_mark(rnext));
    if (res) {
      // physical removal; the result is irrelevant for the response
      ctx.cas_shared(NL::next_word(left), MarkedLink::make(right), rnext);
      return {false, true};
    }
  }
  return {true, false};
}

template <class Ctx>
CriticalResult find_critical(Ctx& ctx, const TraverseResult& tr, Key k) {
  if (tr.returned_nodes.size() < 2) return {false, false};
  Addr right = tr.returned_nodes.back();
  Key rk = word_to_key(ctx.read_immutable(NL::key_word(right)));  // no flush, immutable
  return {false, rk == k};
}

template <class Ctx>
CriticalResult critical(Ctx& ctx, OpKind op, const TraverseResult& tr, Key k) {
  switch (op) {
    case OpKind::insert: return insert_critical(ctx, tr, k);
    case OpKind::remove: return delete_critical(ctx, tr, k);
    case OpKind::find: return find_critical(ctx, tr, k);
  }
  return {false, false};
}

// Disconnects every reachable marked node: repeatedly swings the unmarked
// parent of a maximal marked run past it with one CAS, and issues no other
// modifying instruction. Quiescent runs leave no marked node reachable.
template <class Ctx>
void disconnect(Ctx& ctx, Addr head) {
  while (true) {
    Addr left = head;
    Word lnext = ctx.read_shared(NL::next_word(left));
    bool removed = false;
    while (true) {
      Addr curr = MarkedLink::address_of(lnext);
      if (curr == kNullAddr) break;
      Word cnext = ctx.read_shared(NL::next_word(curr));
      if (!MarkedLink::is_marked(cnext)) {
        left = curr;
        lnext = cnext;
        continue;
      }
      // maximal marked run starting at curr
      Addr after = MarkedLink::address_of(cnext);
      while (after != kNullAddr) {
        Word an = ctx.read_shared(NL::next_word(after));
        if (!MarkedLink::is_marked(an)) break;
        after = MarkedLink::address_of(an);
      }
      ctx.cas_shared(NL::next_word(left), MarkedLink::make(curr), MarkedLink::make(after));
      removed = true;
      break;  // rescan from the head
    }
    if (!removed) return;
  }
}

// --- quiescent helpers (direct volatile inspection, uncounted) -------------

template <class Memory>
std::vector<Addr> chain_nodes(Memory& mem, Addr head) {
  std::vector<Addr> out;
  Addr curr = head;
  while (curr != kNullAddr) {
    out.push_back(curr);
    if (out.size() > 1u << 22) break;  // damaged-image guard
    curr = MarkedLink::address_of(mem.volatile_value(NL::next_word(curr)));
  }
  return out;
}

template <class Memory>
bool node_marked(Memory& mem, Addr node) {
  return MarkedLink::is_marked(mem.volatile_value(NL::next_word(node)));
}

template <class Memory>
bool contains_quiesced(Memory& mem, Addr head, Key k) {
  for (Addr n : chain_nodes(mem, head)) {
    Key nk = word_to_key(mem.volatile_value(NL::key_word(n)));
    if (nk == k && !node_marked(mem, n)) return true;
    if (nk > k) break;
  }
  return false;
}

// Keys strictly increase along the chain (marked nodes included) and the
// walk ends at the tail sentinel.
template <class Memory>
bool sorted_chain_ok(Memory& mem, Addr head) {
  Addr curr = head;
  Key prev = kKeyMin;
  bool first = true;
  std::size_t steps = 0;
  while (true) {
    if (++steps > 1u << 22) return false;
    Key k = word_to_key(mem.volatile_value(NL::key_word(curr)));
    if (!first && k <= prev) return false;
    first = false;
    prev = k;
    Word next = mem.volatile_value(NL::next_word(curr));
    Addr nxt = MarkedLink::address_of(next);
    if (nxt == kNullAddr) return k == kKeyMax;
    curr = nxt;
  }
}

template <class Memory>
void dump(Memory& mem, Addr head, std::ostream& os) {
  for (Addr n : chain_nodes(mem, head)) {
    os << "node@" << n << ' ' << word_to_key(mem.volatile_value(NL::key_word(n))) << ' '
       << (node_marked(mem, n) ? 1 : 0) << ' '
       << MarkedLink::address_of(mem.volatile_value(NL::next_word(n))) << ' '
       << mem.volatile_value(NL::orig_parent_word(n)) << '\n';
  }
}

}  // namespace chain

// Harris's sorted linked list in traversal form.
template <class Memory>
class HarrisList {
 public:
  using Ctx = ThreadContext<Memory>;

  explicit HarrisList(Memory& mem) : mem_(&mem) {
    auto [head, tail] = chain::make_empty(mem);
    head_ = head;
    tail_ = tail;
  }

  Addr head() const { return head_; }
  Addr tail() const { return tail_; }

  Addr find_entry(Ctx&, Key) const { return head_; }

  TraverseResult traverse(Ctx& ctx, Addr entry, Key k) const {
    return chain::traverse(ctx, entry, k);
  }

  CriticalResult critical(Ctx& ctx, OpKind op, const TraverseResult& tr, Key k) {
    return chain::critical(ctx, op, tr, k);
  }

  void disconnect(Ctx& ctx) { chain::disconnect(ctx, head_); }

  bool insert(Ctx& ctx, Key k) { return run_operation(ctx, *this, OpKind::insert, k); }
  bool remove(Ctx& ctx, Key k) { return run_operation(ctx, *this, OpKind::remove, k); }
  bool find(Ctx& ctx, Key k) { return run_operation(ctx, *this, OpKind::find, k); }

  void prefill(const std::vector<Key>& keys) {
    for (Key k : keys) chain::insert_quiesced(*mem_, head_, k);
  }

  bool contains_quiesced(Key k) const { return chain::contains_quiesced(*mem_, head_, k); }
  bool sorted_ok() const { return chain::sorted_chain_ok(*mem_, head_); }
  void dump(std::ostream& os) const { chain::dump(*mem_, head_, os); }
  std::vector<Addr> nodes() const { return chain::chain_nodes(*mem_, head_); }

 private:
  Memory* mem_;
  Addr head_ = kNullAddr;
  Addr tail_ = kNullAddr;
};

// Single-threaded reference model: executes an operation sequence against a
// plain ordered set. Equivalence suites compare structure runs against this.
class SequentialOracle {
 public:
  bool apply(OpKind op, Key k) {
    switch (op) {
      case OpKind::insert: return keys_.insert(k).second;
      case OpKind::remove: return keys_.erase(k) > 0;
      case OpKind::find: return keys_.count(k) > 0;
    }
    return false;
  }

  const std::set<Key>& keys() const { return keys_; }

 private:
  std::set<Key> keys_;
};

}  // namespace nvt
