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
#include <stdexcept>
#include <vector>

#include "nvtraverse/core.hpp"
#include "nvtraverse/framework.hpp"
#include "nvtraverse/thread_context.hpp"

namespace nvt {

// Flushes the link that made the topmost returned node reachable: either the
// location stored in its original-parent field, or the next links of its last
// k current predecessors on the traversal path.
template <class Ctx>
void ensure_reachable(Ctx& ctx, const TraverseResult& tr) {
  const PersistencePolicy& p = ctx.policy();
  if (p.mutations.drop_ensure_reachable_flush) return;
  if (p.er_mode == EnsureReachableMode::original_parent_field) {
    Addr loc = static_cast<Addr>(
        ctx.read_immutable(NodeLayout::orig_parent_word(tr.first())));
    if (loc == kNullAddr)
      throw std::logic_error("ensure_reachable: node lacks an original-parent location");
    ctx.flush(loc);
  } else {
    for (Addr parent : tr.parent_path) ctx.flush(NodeLayout::next_word(parent));
  }
}

// Flushes every mutable field the traversal read on the returned nodes, then
// issues the single fence that also completes ensure_reachable's flush.
// Duplicate words within one call are flushed once.
template <class Ctx>
void make_persistent(Ctx& ctx, const TraverseResult& tr) {
  const PersistencePolicy& p = ctx.policy();
  std::vector<Addr> seen;
  for (Addr field : tr.read_fields) {
    if (std::find(seen.begin(), seen.end(), field) != seen.end()) continue;
    seen.push_back(field);
    ctx.flush(field);
  }
  if (!p.mutations.drop_make_persistent_fence) ctx.fence();
}

// Operation layout shared by every traversal structure: findEntry, traverse
// and critical run in order until critical stops asking for a restart. With
// the nvtraverse policy the two persistence phases slot in between traverse
// and critical, and every critical exit is fenced.
//
// Structure requirements:
//   Addr find_entry(Ctx&, Key) const
//   TraverseResult traverse(Ctx&, Addr entry, Key) const
//   CriticalResult critical(Ctx&, OpKind, const TraverseResult&, Key)
template <class Ctx, class Structure>
bool run_operation(Ctx& ctx, Structure& s, OpKind op, Key key) {
  while (true) {
    ctx.begin_phase(Phase::entry);
    Addr entry = s.find_entry(ctx, key);
    ctx.end_phase(Phase::entry);

    ctx.begin_phase(Phase::traverse);
    TraverseResult tr = s.traverse(ctx, entry, key);
    ctx.end_phase(Phase::traverse);

    if (ctx.policy().mode == PersistMode::nvtraverse) {
      ensure_reachable(ctx, tr);
      make_persistent(ctx, tr);
    }

    ctx.begin_phase(Phase::critical);
    CriticalResult r = s.critical(ctx, op, tr, key);
    ctx.exit_fence();
    ctx.end_phase(Phase::critical);
    if (!r.restart) return r.value;
  }
}

// Post-crash recovery: disconnect every marked node, then resume normal
// operations. May run with the same policy as the wrapped structure.
template <class Ctx, class Structure>
void run_recovery(Ctx& ctx, Structure& s) {
  ctx.begin_phase(Phase::recovery);
  s.disconnect(ctx);
  ctx.exit_fence();
  ctx.end_phase(Phase::recovery);
}

}  // namespace nvt
