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
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvtraverse/core.hpp"

namespace nvt {

// Invocation/response/crash record consumed by the linearizability checkers.
// Line format: seq thread {INV|RES|CRASH} op key [result]
struct HistoryEvent {
  enum class Kind : std::uint8_t { invoke, respond, crash };

  std::uint64_t seq = 0;
  ThreadId thread = 0;
  Kind kind = Kind::invoke;
  OpKind op = OpKind::find;
  Key key = 0;
  bool result = false;  // respond only
};

using History = std::vector<HistoryEvent>;

inline void write_history(std::ostream& os, const History& h) {
  for (const auto& e : h) {
    os << e.seq << ' ' << e.thread << ' ';
    switch (e.kind) {
      case HistoryEvent::Kind::invoke:
        os << "INV " << op_name(e.op) << ' ' << e.key;
        break;
      case HistoryEvent::Kind::respond:
        os << "RES " << op_name(e.op) << ' ' << e.key << ' ' << (e.result ? 1 : 0);
        break;
      case HistoryEvent::Kind::crash:
        os << "CRASH - 0";
        break;
    }
    os << '\n';
  }
}

inline OpKind parse_op_name(const std::string& s) {
  if (s == "insert") return OpKind::insert;
  if (s == "delete") return OpKind::remove;
  if (s == "find") return OpKind::find;
  throw std::invalid_argument("unknown op: " + s);
}

inline History read_history(std::istream& is) {
  History h;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    HistoryEvent e;
    std::string kind, op;
    ls >> e.seq >> e.thread >> kind;
    if (!ls) throw std::invalid_argument("malformed history line: " + line);
    if (kind == "CRASH") {
      e.kind = HistoryEvent::Kind::crash;
    } else {
      ls >> op >> e.key;
      if (!ls) throw std::invalid_argument("malformed history line: " + line);
      e.op = parse_op_name(op);
      if (kind == "INV") {
        e.kind = HistoryEvent::Kind::invoke;
      } else if (kind == "RES") {
        int r = 0;
        ls >> r;
        if (!ls) throw std::invalid_argument("malformed history line: " + line);
        e.kind = HistoryEvent::Kind::respond;
        e.result = r != 0;
      } else {
        throw std::invalid_argument("unknown event kind: " + kind);
      }
    }
    h.push_back(e);
  }
  return h;
}

}  // namespace nvt
