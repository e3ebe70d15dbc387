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
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "nvtraverse/core.hpp"
#include "nvtraverse/thread_context.hpp"
#include "nvtraverse/trace.hpp"

namespace nvt {

// What a traversal hands to the pre-critical persistence phases and to the
// critical method. returned_nodes is a suffix of visited, topmost node first.
struct TraverseResult {
  std::vector<Addr> returned_nodes;
  std::vector<Addr> parent_path;  // current predecessors of returned_nodes[0], nearest first
  std::vector<Addr> read_fields;  // mutable field words the walk read on returned nodes
  std::vector<Addr> visited;      // node visit order of the final walk

  Addr first() const { return returned_nodes.front(); }
  Addr left() const { return returned_nodes.front(); }
  Addr right() const { return returned_nodes.back(); }
};

struct CriticalResult {
  bool restart = false;
  bool value = false;
};

// Marks a node by setting the low bit of its next link. Returns true iff this
// call set the bit; after that no field of the node may change.
template <class Ctx>
bool mark_node(Ctx& ctx, Addr node) {
  while (true) {
    Word next = ctx.read_shared(NodeLayout::next_word(node));
    if (MarkedLink::is_marked(next)) return false;
    if (ctx.cas_shared(NodeLayout::next_word(node), next, MarkedLink::with_mark(next)))
      return true;
  }
}

// ---------------------------------------------------------------------------
// Contract validators. These run over controlled-mode traces with phase
// annotations and decide the runtime-checkable traversal contracts.
// ---------------------------------------------------------------------------

struct Violation {
  std::uint64_t seq = 0;
  ThreadId thread = 0;
  std::string what;
};

struct ContractReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// The traverse phase may not modify shared memory, and under any persistence
// policy the injector keeps it free of flushes and fences.
inline ContractReport check_traverse_purity(const std::vector<TraceEvent>& events) {
  ContractReport report;
  for (const auto& e : events) {
    if (!e.is_memory_event() || e.phase != Phase::traverse) continue;
    if (e.kind == EventKind::write || e.kind == EventKind::cas) {
      report.violations.push_back(
          {e.seq, e.thread, std::string(event_mnemonic(e.kind)) + " inside traverse"});
    } else if (e.kind == EventKind::flush || e.kind == EventKind::fence) {
      report.violations.push_back(
          {e.seq, e.thread, std::string(event_mnemonic(e.kind)) + " inside traverse"});
    }
  }
  return report;
}

// returned_nodes must equal the final entries of the visited sequence.
inline bool check_suffix_property(const TraverseResult& tr) {
  if (tr.returned_nodes.size() > tr.visited.size()) return false;
  return std::equal(tr.returned_nodes.begin(), tr.returned_nodes.end(),
                    tr.visited.end() - static_cast<std::ptrdiff_t>(tr.returned_nodes.size()));
}

// Once a CAS sets the mark bit on a node's next link, no later modifying
// instruction may target any field of that node.
inline ContractReport check_marked_immutability(const std::vector<TraceEvent>& events) {
  ContractReport report;
  std::map<Addr, std::uint64_t> marked_at;  // node base -> seq of marking event
  for (const auto& e : events) {
    if (!e.is_memory_event()) continue;
    bool modifying = e.kind == EventKind::write ||
                     (e.kind == EventKind::cas && e.result != 0);
    if (!modifying) continue;
    Addr node = NodeLayout::node_of_word(e.addr);
    auto it = marked_at.find(node);
    if (it != marked_at.end() && e.seq > it->second) {
      report.violations.push_back({e.seq, e.thread, "modification of a marked node"});
    }
    if (e.kind == EventKind::cas && e.addr == NodeLayout::next_word(node) &&
        !MarkedLink::is_marked(e.arg1) && MarkedLink::is_marked(e.arg2)) {
      marked_at.emplace(node, e.seq);
    }
  }
  return report;
}

// Every data access of an operation attempt must be reachable from the roots
// or from nodes the attempt itself allocated; the reachable set resets at
// every attempt. Flushes carry no data and are exempt.
inline ContractReport check_operation_data(const std::vector<TraceEvent>& events,
                                           const std::vector<Addr>& root_nodes,
                                           Addr first_node_addr) {
  ContractReport report;
  std::map<ThreadId, std::set<Addr>> known;
  auto reset = [&](ThreadId t) {
    auto& k = known[t];
    k.clear();
    k.insert(root_nodes.begin(), root_nodes.end());
  };
  for (const auto& e : events) {
    if (e.kind == EventKind::phase_begin && e.phase == Phase::entry) reset(e.thread);
    if (!e.is_memory_event()) continue;
    if (e.kind != EventKind::read && e.kind != EventKind::write && e.kind != EventKind::cas)
      continue;
    if (e.addr < first_node_addr) continue;  // structure roots, not node fields
    if (known.find(e.thread) == known.end()) reset(e.thread);
    auto& k = known[e.thread];
    Addr node = NodeLayout::node_of_word(e.addr);
    if (!k.count(node)) {
      if (e.kind == EventKind::write) {
        k.insert(node);  // initialization of a node this attempt allocated
      } else {
        report.violations.push_back({e.seq, e.thread, "access to a node not derived from the roots"});
        k.insert(node);
      }
    }
    bool link_word = e.addr == NodeLayout::next_word(node);
    if (link_word) {
      if (e.kind == EventKind::read) k.insert(MarkedLink::address_of(e.result));
      if (e.kind == EventKind::cas) {
        k.insert(MarkedLink::address_of(e.arg1));
        k.insert(MarkedLink::address_of(e.arg2));
      }
    }
  }
  return report;
}

}  // namespace nvt
