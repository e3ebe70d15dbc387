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
#include <cstring>
#include <random>
#include <stdexcept>
#include <vector>

#include "nvtraverse/core.hpp"
#include "nvtraverse/counters.hpp"
#include "nvtraverse/trace.hpp"

namespace nvt {

enum class EvictionPolicy : std::uint8_t { none, random_p, adversarial };

// Two-level (volatile / persistent) memory for the controlled mode: a single
// driver thread issues every access, so no internal synchronization is used.
// Every access hits the volatile level; a value reaches the persistent level
// only through flush+fence, simulated eviction, or promotion at a crash.
//
// Persistence granularity is one 64-bit word by default; line_granularity
// widens a flush to the 8-word line containing the address.
class SimMemory {
 public:
  struct Config {
    std::uint32_t max_threads = 8;  // flush markers are a per-word bitmask
    bool line_granularity = false;  // flush covers the 8-word line
    EvictionPolicy eviction = EvictionPolicy::none;
    double eviction_probability = 0.0;  // for EvictionPolicy::random_p
    std::uint64_t eviction_seed = 1;
  };

  struct WordState {
    Word vol = 0;
    Word pst = 0;
    std::uint64_t flush_mask = 0;  // threads with an un-fenced flush covering vol
  };

  // Copyable execution state; the explorer snapshots and restores these.
  struct Snapshot {
    std::vector<WordState> words;
    std::vector<std::vector<Addr>> flush_lists;
    std::vector<Phase> phases;
    Addr alloc_top;
  };

  explicit SimMemory(Config cfg = {}) : cfg_(cfg) {
    assert(cfg_.max_threads <= 64);
    flush_lists_.resize(cfg_.max_threads);
    counters_.resize(cfg_.max_threads);
    phases_.resize(cfg_.max_threads, Phase::idle);
    words_.resize(16);  // word 0 stays reserved so kNullAddr never aliases data
    eviction_rng_.seed(cfg_.eviction_seed);
  }

  const Config& config() const { return cfg_; }
  void set_trace_sink(TraceSink* sink) { trace_ = sink; }

  Addr alloc_words(Addr count, Addr align = 1) {
    Addr base = (alloc_top_ + align - 1) / align * align;
    alloc_top_ = base + count;
    if (alloc_top_ > words_.size()) words_.resize(alloc_top_ * 2);
    return base;
  }

  Addr alloc_node() { return alloc_words(NodeLayout::kWordsPerNode, NodeLayout::kWordsPerNode); }

  // Phase annotation: tags subsequent events by this thread and emits a PH
  // trace line. The traversal-framework validators key off these.
  void trace_phase(ThreadId t, Phase p, bool begin) {
    phases_[t] = begin ? p : Phase::idle;
    emit({next_seq(), t, begin ? EventKind::phase_begin : EventKind::phase_end,
          0, 0, 0, 0, p});
  }

  Phase current_phase(ThreadId t) const { return phases_[t]; }

  Word read(Addr a, ThreadId t) {
    touch(a);
    Word v = words_[a].vol;
    counters_[t].reads++;
    emit({next_seq(), t, EventKind::read, a, 0, 0, v, phases_[t]});
    return v;
  }

  void write(Addr a, Word v, ThreadId t) {
    touch(a);
    store(a, v);
    counters_[t].writes++;
    emit({next_seq(), t, EventKind::write, a, v, 0, 0, phases_[t]});
    maybe_random_evict(a);
  }

  bool cas(Addr a, Word expected, Word desired, ThreadId t) {
    touch(a);
    bool ok = words_[a].vol == expected;
    if (ok) store(a, desired);  // a failed CAS is not a modifying instruction
    counters_[t].cas_attempts++;
    if (!ok) counters_[t].cas_failures++;
    emit({next_seq(), t, EventKind::cas, a, expected, desired, ok ? 1u : 0u, phases_[t]});
    if (ok) maybe_random_evict(a);
    return ok;
  }

  void flush(Addr a, ThreadId t) {
    touch(a);
    Addr first = a, last = a;
    if (cfg_.line_granularity) {
      first = a & ~Addr{7};
      last = first + 7;
      if (last >= words_.size()) words_.resize(last + 1);
    }
    for (Addr w = first; w <= last; ++w) {
      words_[w].flush_mask |= bit(t);
      flush_lists_[t].push_back(w);
    }
    counters_[t].flushes++;
    emit({next_seq(), t, EventKind::flush, a, 0, 0, 0, phases_[t]});
  }

  // Persists every word this thread flushed whose flushed value is still the
  // volatile value; a write after the flush invalidated the marker.
  void fence(ThreadId t) {
    for (Addr w : flush_lists_[t]) {
      if (words_[w].flush_mask & bit(t)) {
        words_[w].pst = words_[w].vol;
        words_[w].flush_mask &= ~bit(t);
      }
    }
    flush_lists_[t].clear();
    counters_[t].fences++;
    emit({next_seq(), t, EventKind::fence, 0, 0, 0, 0, phases_[t]});
  }

  // Implicit write-back of one word, as a cache eviction would do.
  void evict(Addr a, ThreadId t = 0) {
    if (cfg_.eviction == EvictionPolicy::none)
      throw std::logic_error("evict: eviction policy is none");
    touch(a);
    words_[a].pst = words_[a].vol;
    counters_[t].evictions++;
    emit({next_seq(), t, EventKind::evict, a, 0, 0, 0, phases_[t]});
  }

  bool is_pending(Addr a) const {
    return a < words_.size() && words_[a].vol != words_[a].pst;
  }

  std::vector<Addr> pending_words() const {
    std::vector<Addr> out;
    for (Addr a = 0; a < alloc_top_; ++a)
      if (words_[a].vol != words_[a].pst) out.push_back(a);
    return out;
  }

  // Drops volatile state. Bit i of `resolution` promotes pending_words()[i]
  // (the store reaches persistence); a zero bit keeps the persisted value.
  // Flushed-and-fenced stores are no longer pending, so they always survive.
  void crash(std::uint64_t resolution, ThreadId t = 0) {
    auto pending = pending_words();
    assert(pending.size() <= 64);
    for (std::size_t i = 0; i < pending.size(); ++i)
      if (resolution & (std::uint64_t{1} << i)) words_[pending[i]].pst = words_[pending[i]].vol;
    for (auto& w : words_) {
      w.vol = w.pst;
      w.flush_mask = 0;
    }
    for (auto& fl : flush_lists_) fl.clear();
    emit({next_seq(), t, EventKind::crash, 0, resolution, 0, 0});
  }

  // Marks the whole current volatile state persisted. Setup helper for
  // prefilled structures; equivalent to flushing and fencing every word.
  void persist_all() {
    for (auto& w : words_) {
      w.pst = w.vol;
      w.flush_mask = 0;
    }
    for (auto& fl : flush_lists_) fl.clear();
  }

  Word volatile_value(Addr a) const { return a < words_.size() ? words_[a].vol : 0; }
  Word persisted_value(Addr a) const { return a < words_.size() ? words_[a].pst : 0; }
  std::uint64_t flush_mask(Addr a) const { return a < words_.size() ? words_[a].flush_mask : 0; }
  Addr alloc_top() const { return alloc_top_; }

  const Counters& counters(ThreadId t) const { return counters_[t]; }
  Counters total_counters() const {
    Counters sum;
    for (const auto& c : counters_) sum += c;
    return sum;
  }
  void reset_counters() {
    for (auto& c : counters_) c = Counters{};
  }

  Snapshot snapshot() const { return Snapshot{words_, flush_lists_, phases_, alloc_top_}; }

  void restore(const Snapshot& s) {
    words_ = s.words;
    flush_lists_ = s.flush_lists;
    phases_ = s.phases;
    alloc_top_ = s.alloc_top;
  }

  // Canonical bytes of the persistence-relevant state, fed to the explorer's
  // visited-state hash. Counters and trace state are excluded.
  void append_state_bytes(std::vector<std::uint8_t>& out) const {
    auto push64 = [&out](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    push64(alloc_top_);
    for (Addr a = 0; a < alloc_top_; ++a) {
      push64(words_[a].vol);
      push64(words_[a].pst);
      push64(words_[a].flush_mask);
    }
  }

 private:
  static std::uint64_t bit(ThreadId t) { return std::uint64_t{1} << t; }

  void touch(Addr a) {
    if (a >= words_.size()) words_.resize(static_cast<std::size_t>(a) + 1);
    if (a >= alloc_top_) alloc_top_ = a + 1;
  }

  // A modifying instruction invalidates earlier flush markers: a flush of the
  // old value does not cover the new one.
  void store(Addr a, Word v) {
    words_[a].vol = v;
    words_[a].flush_mask = 0;
  }

  void maybe_random_evict(Addr a) {
    if (cfg_.eviction != EvictionPolicy::random_p) return;
    if (uniform_(eviction_rng_) < cfg_.eviction_probability) {
      words_[a].pst = words_[a].vol;
    }
  }

  std::uint64_t next_seq() { return seq_++; }

  void emit(const TraceEvent& e) {
    if (trace_) trace_->on_event(e);
  }

  Config cfg_;
  std::vector<WordState> words_;
  std::vector<std::vector<Addr>> flush_lists_;
  std::vector<Phase> phases_;
  std::vector<Counters> counters_;
  Addr alloc_top_ = 4;  // words 0..3 reserved; node addresses stay 4-aligned
  std::uint64_t seq_ = 0;
  TraceSink* trace_ = nullptr;
  std::mt19937_64 eviction_rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace nvt
