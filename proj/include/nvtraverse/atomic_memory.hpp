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

#include <atomic>
#include <cassert>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "nvtraverse/core.hpp"
#include "nvtraverse/counters.hpp"

namespace nvt {

// Two-level memory for the free-threading mode: every operation is atomic and
// safe for concurrent callers. Word storage grows in fixed chunks so readers
// never race a reallocation. Counters are per-thread and merged on demand.
//
// If a fence races a write to the same word, the persisted value lands on one
// side of the write, matching a write-back that completes before or after the
// overwrite. Counts are exact either way.
class AtomicMemory {
 public:
  struct Config {
    std::uint32_t max_threads = 64;
  };

  explicit AtomicMemory(Config cfg = {}) : cfg_(cfg) {
    assert(cfg_.max_threads <= 64);
    chunks_.resize(kMaxChunks);
    per_thread_.resize(cfg_.max_threads);
    grow_to(16);
    alloc_top_.store(4, std::memory_order_relaxed);
  }

  Addr alloc_words(Addr count, Addr align = 1) {
    std::lock_guard<std::mutex> lock(alloc_mutex_);
    Addr top = alloc_top_.load(std::memory_order_relaxed);
    Addr base = (top + align - 1) / align * align;
    grow_to(base + count);
    alloc_top_.store(base + count, std::memory_order_relaxed);
    return base;
  }

  Addr alloc_node() { return alloc_words(NodeLayout::kWordsPerNode, NodeLayout::kWordsPerNode); }

  void trace_phase(ThreadId, Phase, bool) {}  // no tracing in free-threading mode

  Word read(Addr a, ThreadId t) {
    per_thread_[t].counters.reads++;
    return slot(a).vol.load(std::memory_order_acquire);
  }

  void write(Addr a, Word v, ThreadId t) {
    auto& s = slot(a);
    s.vol.store(v, std::memory_order_release);
    s.flush_mask.store(0, std::memory_order_release);
    per_thread_[t].counters.writes++;
  }

  bool cas(Addr a, Word expected, Word desired, ThreadId t) {
    auto& s = slot(a);
    Word e = expected;
    bool ok = s.vol.compare_exchange_strong(e, desired, std::memory_order_acq_rel);
    if (ok) s.flush_mask.store(0, std::memory_order_release);
    per_thread_[t].counters.cas_attempts++;
    if (!ok) per_thread_[t].counters.cas_failures++;
    return ok;
  }

  void flush(Addr a, ThreadId t) {
    slot(a).flush_mask.fetch_or(bit(t), std::memory_order_acq_rel);
    per_thread_[t].flush_list.push_back(a);
    per_thread_[t].counters.flushes++;
  }

  void fence(ThreadId t) {
    auto& mine = per_thread_[t];
    for (Addr a : mine.flush_list) {
      auto& s = slot(a);
      if (s.flush_mask.load(std::memory_order_acquire) & bit(t)) {
        s.pst.store(s.vol.load(std::memory_order_acquire), std::memory_order_release);
        s.flush_mask.fetch_and(~bit(t), std::memory_order_acq_rel);
      }
    }
    mine.flush_list.clear();
    mine.counters.fences++;
  }

  // Quiescent-only: discards volatile state, keeping persisted values.
  // resolution bit i promotes the i-th pending word.
  void crash_quiesced(std::uint64_t resolution) {
    Addr top = alloc_top_.load(std::memory_order_seq_cst);
    std::size_t pending_index = 0;
    for (Addr a = 0; a < top; ++a) {
      auto& s = slot(a);
      Word v = s.vol.load(std::memory_order_relaxed);
      Word p = s.pst.load(std::memory_order_relaxed);
      if (v != p) {
        if (resolution & (std::uint64_t{1} << (pending_index & 63)))
          s.pst.store(v, std::memory_order_relaxed);
        pending_index++;
      }
      s.vol.store(s.pst.load(std::memory_order_relaxed), std::memory_order_relaxed);
      s.flush_mask.store(0, std::memory_order_relaxed);
    }
    for (auto& pt : per_thread_) pt.flush_list.clear();
  }

  void persist_all() {
    Addr top = alloc_top_.load(std::memory_order_seq_cst);
    for (Addr a = 0; a < top; ++a) {
      auto& s = slot(a);
      s.pst.store(s.vol.load(std::memory_order_relaxed), std::memory_order_relaxed);
      s.flush_mask.store(0, std::memory_order_relaxed);
    }
    for (auto& pt : per_thread_) pt.flush_list.clear();
  }

  Word volatile_value(Addr a) { return slot(a).vol.load(std::memory_order_acquire); }
  Word persisted_value(Addr a) { return slot(a).pst.load(std::memory_order_acquire); }
  Addr alloc_top() const { return alloc_top_.load(std::memory_order_acquire); }

  const Counters& counters(ThreadId t) const { return per_thread_[t].counters; }
  Counters total_counters() const {
    Counters sum;
    for (const auto& pt : per_thread_) sum += pt.counters;
    return sum;
  }
  void reset_counters() {
    for (auto& pt : per_thread_) pt.counters = Counters{};
  }

 private:
  static constexpr std::size_t kChunkWords = 1u << 16;
  static constexpr std::size_t kMaxChunks = 1u << 10;

  struct Slot {
    std::atomic<Word> vol{0};
    std::atomic<Word> pst{0};
    std::atomic<std::uint64_t> flush_mask{0};
  };

  struct alignas(64) PerThread {
    Counters counters;
    std::vector<Addr> flush_list;
  };

  static std::uint64_t bit(ThreadId t) { return std::uint64_t{1} << t; }

  Slot& slot(Addr a) {
    std::size_t chunk = a / kChunkWords;
    Slot* c = chunks_[chunk].load(std::memory_order_acquire);
    if (!c) {
      std::lock_guard<std::mutex> lock(alloc_mutex_);
      c = chunks_[chunk].load(std::memory_order_acquire);
      if (!c) {
        c = new Slot[kChunkWords];
        chunks_[chunk].store(c, std::memory_order_release);
        owned_.emplace_back(c);
      }
    }
    return c[a % kChunkWords];
  }

  void grow_to(Addr words) {
    for (std::size_t chunk = 0; chunk * kChunkWords < words; ++chunk) {
      if (!chunks_[chunk].load(std::memory_order_acquire)) {
        Slot* c = new Slot[kChunkWords];
        chunks_[chunk].store(c, std::memory_order_release);
        owned_.emplace_back(c);
      }
    }
  }

  Config cfg_;
  std::vector<std::atomic<Slot*>> chunks_;
  std::vector<std::unique_ptr<Slot[]>> owned_;
  std::vector<PerThread> per_thread_;
  std::atomic<Addr> alloc_top_{4};
  std::mutex alloc_mutex_;
};

}  // namespace nvt
