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
#include <ostream>
#include <string>
#include <vector>

#include "nvtraverse/core.hpp"

namespace nvt {

// One shared-memory or phase event. Written out tab-separated as
//   seq  thread  op  addr  arg1  arg2  result     op in {R,W,CAS,FL,FE,EV,CR}
// phase annotations use
//   PH  thread  {entry|traverse|critical|recovery}  {begin|end}
enum class EventKind : std::uint8_t {
  read,
  write,
  cas,
  flush,
  fence,
  evict,
  crash,
  phase_begin,
  phase_end,
};

inline const char* event_mnemonic(EventKind k) {
  switch (k) {
    case EventKind::read: return "R";
    case EventKind::write: return "W";
    case EventKind::cas: return "CAS";
    case EventKind::flush: return "FL";
    case EventKind::fence: return "FE";
    case EventKind::evict: return "EV";
    case EventKind::crash: return "CR";
    case EventKind::phase_begin:
    case EventKind::phase_end: return "PH";
  }
  return "?";
}

struct TraceEvent {
  std::uint64_t seq = 0;
  ThreadId thread = 0;
  EventKind kind = EventKind::read;
  Addr addr = 0;
  Word arg1 = 0;    // W: value, CAS: expected
  Word arg2 = 0;    // CAS: new value
  Word result = 0;  // R: value, CAS: 1 on success
  Phase phase = Phase::idle;

  bool is_memory_event() const {
    return kind != EventKind::phase_begin && kind != EventKind::phase_end;
  }
  bool is_modifying() const {
    return kind == EventKind::write ||
           (kind == EventKind::cas && result != 0);
  }
};

inline void format_event(std::ostream& os, const TraceEvent& e) {
  if (e.kind == EventKind::phase_begin || e.kind == EventKind::phase_end) {
    os << "PH\t" << e.thread << '\t' << phase_name(e.phase) << '\t'
       << (e.kind == EventKind::phase_begin ? "begin" : "end") << '\n';
    return;
  }
  os << e.seq << '\t' << e.thread << '\t' << event_mnemonic(e.kind) << '\t'
     << e.addr << '\t' << e.arg1 << '\t' << e.arg2 << '\t' << e.result << '\n';
}

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_event(const TraceEvent& e) = 0;
};

// Buffers events in memory; the contract validators consume this.
class VectorTraceSink : public TraceSink {
 public:
  void on_event(const TraceEvent& e) override { events_.push_back(e); }
  const std::vector<TraceEvent>& events() const { return events_; }
  void clear() { events_.clear(); }

 private:
  std::vector<TraceEvent> events_;
};

class StreamTraceSink : public TraceSink {
 public:
  explicit StreamTraceSink(std::ostream& os) : os_(os) {}
  void on_event(const TraceEvent& e) override { format_event(os_, e); }

 private:
  std::ostream& os_;
};

}  // namespace nvt
