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
#include <cstdint>
#include <vector>

#include "nvtraverse/core.hpp"

namespace nvt {

// Switches that individually disable one injected rule. Used by the necessity
// mutation suite; all false in normal operation.
struct MutationFlags {
  bool drop_ensure_reachable_flush = false;
  bool drop_make_persistent_fence = false;
  bool drop_flush_after_read = false;
  bool drop_fence_before_cas = false;

  bool any() const {
    return drop_ensure_reachable_flush || drop_make_persistent_fence ||
           drop_flush_after_read || drop_fence_before_cas;
  }
};

enum class EnsureReachableMode : std::uint8_t {
  original_parent_field,  // flush the location stored in n1's original-parent field
  current_parent_path,    // flush the next links of the last k predecessors of n1
};

struct PersistencePolicy {
  PersistMode mode = PersistMode::nvtraverse;
  EnsureReachableMode er_mode = EnsureReachableMode::original_parent_field;
  int path_length = 1;  // k for current_parent_path
  MutationFlags mutations;

  static PersistencePolicy none() { return {PersistMode::none}; }
  static PersistencePolicy izraelevitz() { return {PersistMode::izraelevitz}; }
  static PersistencePolicy nvtraverse() { return {PersistMode::nvtraverse}; }
};

// Thrown by a stepping context after it executes one live shared-memory
// instruction; the driver catches it and owns scheduling from there.
struct StepDone {};

// Per-thread instrumented access layer. Structure code performs all shared
// accesses through this class; the persistence rules of the selected policy
// are applied here, at the access layer, so wrapping a structure never
// touches its algorithm.
//
// Rules applied in the critical and recovery phases under nvtraverse:
//   - flush after every read of a shared mutable variable
//   - flush after every write/CAS (failed CAS included)
//   - fence before every shared write/CAS, skipped when the thread has
//     nothing unpersisted since its last fence and already fenced this phase
//   - fence before every phase exit, same skip condition
// Immutable reads need no flush. Node-initialization writes flush per write
// and rely on the single fence before the linking CAS.
//
// Under izraelevitz every shared access in every phase is followed by a
// flush of the accessed word and a fence. Under none nothing is injected.
//
// The context can record its access log and replay it: re-running the same
// operation consumes recorded results without touching memory, then executes
// exactly one live instruction and unwinds via StepDone. The explorer drives
// interleavings this way.
template <class Memory>
class ThreadContext {
 public:
  enum class EntryKind : std::uint8_t {
    read, write, cas, flush, fence, alloc, phase
  };

  struct LogEntry {
    EntryKind kind;
    Addr addr = 0;
    Word arg1 = 0;
    Word arg2 = 0;
    Word result = 0;
    Phase phase = Phase::idle;
  };

  ThreadContext(Memory& mem, ThreadId tid, PersistencePolicy policy = {})
      : mem_(&mem), tid_(tid), policy_(policy) {}

  Memory& memory() { return *mem_; }
  ThreadId thread_id() const { return tid_; }
  const PersistencePolicy& policy() const { return policy_; }
  void set_policy(const PersistencePolicy& p) { policy_ = p; }
  Phase phase() const { return phase_; }

  // --- stepping / replay control -----------------------------------------

  void enable_stepping() {
    stepping_ = true;
    reset_op();
  }
  void disable_stepping() { stepping_ = false; }
  bool stepping() const { return stepping_; }

  // Prepares re-execution of the current operation from its start.
  void rewind() {
    cursor_ = 0;
    run_one_more_ = false;
    phase_ = Phase::idle;
    reset_rule_state();
  }

  // The next non-replayed instruction executes live, then StepDone unwinds.
  void arm_one_step() { run_one_more_ = true; }

  void reset_op() {
    log_.clear();
    rewind();
  }

  const std::vector<LogEntry>& log() const { return log_; }
  void set_log(std::vector<LogEntry> log) { log_ = std::move(log); }

  void append_state_bytes(std::vector<std::uint8_t>& out) const {
    auto push64 = [&out](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    push64(log_.size());
    for (const auto& e : log_) {
      out.push_back(static_cast<std::uint8_t>(e.kind));
      out.push_back(static_cast<std::uint8_t>(e.phase));
      push64(e.addr);
      push64(e.arg1);
      push64(e.arg2);
      push64(e.result);
    }
  }

  // --- phases -------------------------------------------------------------

  void begin_phase(Phase p) {
    phase_ = p;
    if (p == Phase::critical || p == Phase::recovery) fences_in_phase_ = 0;
    gate_phase(p, /*begin=*/true);
  }

  void end_phase(Phase p) {
    gate_phase(p, /*begin=*/false);
    phase_ = Phase::idle;
  }

  // Fence before leaving a critical or recovery phase (return or restart).
  void exit_fence() {
    if (policy_.mode != PersistMode::nvtraverse) return;
    if (dirty() || fences_in_phase_ == 0) fence();
  }

  // --- instrumented accesses ----------------------------------------------

  Word read_shared(Addr a) {
    Word v = gate_read(a);
    reads_since_fence_++;
    if (policy_.mode == PersistMode::nvtraverse && in_persist_phase() &&
        !policy_.mutations.drop_flush_after_read) {
      flush(a);
    }
    after_access_izraelevitz(a);
    return v;
  }

  Word read_immutable(Addr a) {
    Word v = gate_read(a);
    after_access_izraelevitz(a);
    return v;
  }

  // Initialization write to a node not yet reachable by other threads.
  void write_init(Addr a, Word v) {
    gate_write(a, v);
    mods_since_fence_++;
    if (policy_.mode == PersistMode::nvtraverse) flush(a);
    after_access_izraelevitz(a);
  }

  void write_shared(Addr a, Word v) {
    fence_before_modify();
    gate_write(a, v);
    mods_since_fence_++;
    if (policy_.mode == PersistMode::nvtraverse && in_persist_phase()) flush(a);
    after_access_izraelevitz(a);
  }

  bool cas_shared(Addr a, Word expected, Word desired) {
    fence_before_modify();
    bool ok = gate_cas(a, expected, desired);
    mods_since_fence_++;
    if (policy_.mode == PersistMode::nvtraverse && in_persist_phase()) flush(a);
    after_access_izraelevitz(a);
    return ok;
  }

  // Unconditioned primitives; ensureReachable and makePersistent use these.
  void flush(Addr a) {
    gate_flush(a);
    flushes_since_fence_++;
  }

  void fence() {
    gate_fence();
    flushes_since_fence_ = 0;
    reads_since_fence_ = 0;
    mods_since_fence_ = 0;
    fences_in_phase_++;
  }

  Addr alloc_node() {
    if (cursor_ < log_.size()) {
      const LogEntry& e = log_[cursor_++];
      assert(e.kind == EntryKind::alloc);
      return static_cast<Addr>(e.result);
    }
    Addr node = mem_->alloc_node();
    log_record({EntryKind::alloc, 0, 0, 0, node, phase_});
    return node;
  }

 private:
  bool in_persist_phase() const {
    return phase_ == Phase::critical || phase_ == Phase::recovery;
  }

  bool dirty() const {
    return flushes_since_fence_ > 0 || reads_since_fence_ > 0 || mods_since_fence_ > 0;
  }

  void fence_before_modify() {
    if (policy_.mode != PersistMode::nvtraverse || !in_persist_phase()) return;
    if (policy_.mutations.drop_fence_before_cas) return;
    if (dirty() || fences_in_phase_ == 0) fence();
  }

  void after_access_izraelevitz(Addr a) {
    if (policy_.mode != PersistMode::izraelevitz) return;
    flush(a);
    fence();
  }

  void reset_rule_state() {
    flushes_since_fence_ = 0;
    reads_since_fence_ = 0;
    mods_since_fence_ = 0;
    fences_in_phase_ = 0;
  }

  // --- replay gate ----------------------------------------------------------

  void log_record(const LogEntry& e) {
    if (!stepping_) return;
    log_.push_back(e);
    cursor_ = log_.size();
  }

  void step_boundary() {
    if (!stepping_) return;
    if (run_one_more_) {
      run_one_more_ = false;
      throw StepDone{};
    }
  }

  Word gate_read(Addr a) {
    if (cursor_ < log_.size()) {
      const LogEntry& e = log_[cursor_++];
      assert(e.kind == EntryKind::read && e.addr == a);
      return e.result;
    }
    Word v = mem_->read(a, tid_);
    log_record({EntryKind::read, a, 0, 0, v, phase_});
    step_boundary();
    return v;
  }

  void gate_write(Addr a, Word v) {
    if (cursor_ < log_.size()) {
      const LogEntry& e = log_[cursor_++];
      assert(e.kind == EntryKind::write && e.addr == a);
      (void)e;
      return;
    }
    mem_->write(a, v, tid_);
    log_record({EntryKind::write, a, v, 0, 0, phase_});
    step_boundary();
  }

  bool gate_cas(Addr a, Word expected, Word desired) {
    if (cursor_ < log_.size()) {
      const LogEntry& e = log_[cursor_++];
      assert(e.kind == EntryKind::cas && e.addr == a);
      return e.result != 0;
    }
    bool ok = mem_->cas(a, expected, desired, tid_);
    log_record({EntryKind::cas, a, expected, desired, ok ? 1u : 0u, phase_});
    step_boundary();
    return ok;
  }

  void gate_flush(Addr a) {
    if (cursor_ < log_.size()) {
      const LogEntry& e = log_[cursor_++];
      assert(e.kind == EntryKind::flush && e.addr == a);
      (void)e;
      return;
    }
    mem_->flush(a, tid_);
    log_record({EntryKind::flush, a, 0, 0, 0, phase_});
    step_boundary();
  }

  void gate_fence() {
    if (cursor_ < log_.size()) {
      const LogEntry& e = log_[cursor_++];
      assert(e.kind == EntryKind::fence);
      (void)e;
      return;
    }
    mem_->fence(tid_);
    log_record({EntryKind::fence, 0, 0, 0, 0, phase_});
    step_boundary();
  }

  void gate_phase(Phase p, bool begin) {
    if (cursor_ < log_.size()) {
      const LogEntry& e = log_[cursor_++];
      assert(e.kind == EntryKind::phase);
      (void)e;
      return;
    }
    mem_->trace_phase(tid_, p, begin);
    log_record({EntryKind::phase, 0, begin ? 1u : 0u, 0, 0, p});
  }

  Memory* mem_;
  ThreadId tid_;
  PersistencePolicy policy_;
  Phase phase_ = Phase::idle;

  std::uint32_t flushes_since_fence_ = 0;
  std::uint32_t reads_since_fence_ = 0;
  std::uint32_t mods_since_fence_ = 0;
  std::uint32_t fences_in_phase_ = 0;

  bool stepping_ = false;
  bool run_one_more_ = false;
  std::vector<LogEntry> log_;
  std::size_t cursor_ = 0;
};

}  // namespace nvt
