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
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "nvtraverse/core.hpp"
#include "nvtraverse/history.hpp"

namespace nvt {

// One operation reconstructed from a history. An operation without a
// response (in progress at a crash) is open: the search may linearize it
// with whatever result the model yields, or leave it out entirely.
struct OpRecord {
  ThreadId thread = 0;
  OpKind op = OpKind::find;
  Key key = 0;
  std::uint64_t inv_seq = 0;
  std::uint64_t res_seq = std::numeric_limits<std::uint64_t>::max();
  bool has_response = false;
  bool result = false;

  bool open() const { return !has_response; }
};

struct LinearizationResult {
  bool ok = false;
  std::vector<std::size_t> witness;  // linearization order over op indices
};

// Per thread, invocations and responses must alternate; responses must match
// the preceding invocation. Crash events end every open operation.
inline std::vector<OpRecord> ops_from_history(const History& h) {
  std::vector<OpRecord> ops;
  std::map<ThreadId, std::size_t> in_flight;  // thread -> index into ops
  for (const auto& e : h) {
    switch (e.kind) {
      case HistoryEvent::Kind::invoke: {
        if (in_flight.count(e.thread))
          throw std::invalid_argument("malformed history: nested invocation");
        OpRecord r;
        r.thread = e.thread;
        r.op = e.op;
        r.key = e.key;
        r.inv_seq = e.seq;
        in_flight[e.thread] = ops.size();
        ops.push_back(r);
        break;
      }
      case HistoryEvent::Kind::respond: {
        auto it = in_flight.find(e.thread);
        if (it == in_flight.end())
          throw std::invalid_argument("malformed history: response without invocation");
        OpRecord& r = ops[it->second];
        if (r.op != e.op || r.key != e.key)
          throw std::invalid_argument("malformed history: response does not match invocation");
        r.has_response = true;
        r.result = e.result;
        r.res_seq = e.seq;
        in_flight.erase(it);
        break;
      }
      case HistoryEvent::Kind::crash:
        in_flight.clear();  // open operations stay open for good
        break;
    }
  }
  return ops;
}

namespace detail {

struct SetModel {
  std::set<Key> keys;

  bool apply(OpKind op, Key k) {
    switch (op) {
      case OpKind::insert: return keys.insert(k).second;
      case OpKind::remove: return keys.erase(k) > 0;
      case OpKind::find: return keys.count(k) > 0;
    }
    return false;
  }

  std::string encode() const {
    std::string s;
    for (Key k : keys) {
      s += std::to_string(k);
      s += ',';
    }
    return s;
  }
};

// Depth-first search for a linearization consistent with real-time order and
// ordered-set semantics, memoized on (linearized-set, model-state).
class LinSearch {
 public:
  explicit LinSearch(std::vector<OpRecord> ops) : ops_(std::move(ops)) {
    if (ops_.size() > 63) throw std::invalid_argument("history too large for checker");
  }

  LinearizationResult run() {
    LinearizationResult out;
    out.ok = dfs(0, SetModel{}, out.witness);
    if (!out.ok) out.witness.clear();
    return out;
  }

 private:
  bool done(std::uint64_t mask) const {
    for (std::size_t i = 0; i < ops_.size(); ++i)
      if (!(mask & bit(i)) && !ops_[i].open()) return false;
    return true;  // remaining operations are open: they left no effect
  }

  bool dfs(std::uint64_t mask, const SetModel& model, std::vector<std::size_t>& witness) {
    if (done(mask)) return true;
    std::string key = std::to_string(mask) + '|' + model.encode();
    if (!visited_.insert(key).second) return false;

    // an operation may linearize only before any pending operation's response
    std::uint64_t min_res = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t i = 0; i < ops_.size(); ++i)
      if (!(mask & bit(i))) min_res = std::min(min_res, ops_[i].res_seq);

    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (mask & bit(i)) continue;
      const OpRecord& op = ops_[i];
      if (op.inv_seq > min_res) continue;
      SetModel next = model;
      bool r = next.apply(op.op, op.key);
      if (op.has_response && r != op.result) continue;
      witness.push_back(i);
      if (dfs(mask | bit(i), next, witness)) return true;
      witness.pop_back();
    }
    return false;
  }

  static std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

  std::vector<OpRecord> ops_;
  std::unordered_set<std::string> visited_;
};

}  // namespace detail

// Standard linearizability of a crash-free history against set semantics.
// Operations without a response are treated as possibly-not-taken-effect.
inline LinearizationResult check_linearizability(const History& h) {
  return detail::LinSearch(ops_from_history(h)).run();
}

// Durable linearizability: drop crash events; completed operations keep their
// effects, operations in progress at a crash either take effect completely or
// leave no effect. The history is durable iff some assignment linearizes.
inline LinearizationResult check_durable_linearizability(const History& h) {
  return detail::LinSearch(ops_from_history(h)).run();
}

}  // namespace nvt
