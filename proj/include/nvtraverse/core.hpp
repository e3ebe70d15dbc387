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
#include <limits>
#include <string>

namespace nvt {

using Word = std::uint64_t;
using Addr = std::uint32_t;   // word id inside a simulated memory
using ThreadId = std::uint32_t;
using Key = std::int64_t;

inline constexpr Addr kNullAddr = 0;
inline constexpr Key kKeyMin = std::numeric_limits<Key>::min();  // head sentinel
inline constexpr Key kKeyMax = std::numeric_limits<Key>::max();  // tail sentinel

inline Word key_to_word(Key k) { return static_cast<Word>(k); }
inline Key word_to_key(Word w) { return static_cast<Key>(w); }

// A link word packs a node address and a deletion mark in the lowest bit.
// Node base addresses are 4-word aligned, so the bit never aliases the address.
struct MarkedLink {
  Addr target = kNullAddr;
  bool mark = false;

  static MarkedLink unpack(Word w) {
    return MarkedLink{static_cast<Addr>(w >> 1), (w & 1u) != 0};
  }
  Word pack() const {
    return (static_cast<Word>(target) << 1) | (mark ? 1u : 0u);
  }
  static Word make(Addr target, bool mark = false) {
    return MarkedLink{target, mark}.pack();
  }
  static bool is_marked(Word w) { return (w & 1u) != 0; }
  static Addr address_of(Word w) { return static_cast<Addr>(w >> 1); }
  static Word with_mark(Word w) { return w | 1u; }
  static Word without_mark(Word w) { return w & ~Word{1}; }
};

// Node record layout: four consecutive words.
//   +0 key (immutable)  +1 value  +2 next link  +3 original-parent location
struct NodeLayout {
  static constexpr Addr kWordsPerNode = 4;
  static Addr key_word(Addr node) { return node + 0; }
  static Addr value_word(Addr node) { return node + 1; }
  static Addr next_word(Addr node) { return node + 2; }
  static Addr orig_parent_word(Addr node) { return node + 3; }
  static Addr node_of_word(Addr word) { return word & ~Addr{3}; }
};

enum class Phase : std::uint8_t { idle, entry, traverse, critical, recovery };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::idle: return "idle";
    case Phase::entry: return "entry";
    case Phase::traverse: return "traverse";
    case Phase::critical: return "critical";
    case Phase::recovery: return "recovery";
  }
  return "?";
}

enum class OpKind : std::uint8_t { insert, remove, find };

inline const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::insert: return "insert";
    case OpKind::remove: return "delete";
    case OpKind::find: return "find";
  }
  return "?";
}

enum class PersistMode : std::uint8_t { none, izraelevitz, nvtraverse };

inline const char* persist_mode_name(PersistMode m) {
  switch (m) {
    case PersistMode::none: return "none";
    case PersistMode::izraelevitz: return "izraelevitz";
    case PersistMode::nvtraverse: return "nvtraverse";
  }
  return "?";
}

}  // namespace nvt
