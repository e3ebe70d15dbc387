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

#include <cstdint>

namespace nvt {

// Per-thread instruction counters. Exact: one increment per simulator call.
struct Counters {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t cas_attempts = 0;
  std::uint64_t cas_failures = 0;
  std::uint64_t flushes = 0;
  std::uint64_t fences = 0;
  std::uint64_t evictions = 0;

  Counters& operator+=(const Counters& o) {
    reads += o.reads;
    writes += o.writes;
    cas_attempts += o.cas_attempts;
    cas_failures += o.cas_failures;
    flushes += o.flushes;
    fences += o.fences;
    evictions += o.evictions;
    return *this;
  }

  friend Counters operator-(Counters a, const Counters& b) {
    a.reads -= b.reads;
    a.writes -= b.writes;
    a.cas_attempts -= b.cas_attempts;
    a.cas_failures -= b.cas_failures;
    a.flushes -= b.flushes;
    a.fences -= b.fences;
    a.evictions -= b.evictions;
    return a;
  }

  friend bool operator==(const Counters&, const Counters&) = default;
};

}  // namespace nvt
