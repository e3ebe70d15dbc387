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

#include "nvtraverse/thread_context.hpp"

namespace nvt {

// Comparison baselines, selected per context policy.
//
//   none         pass-through; issues no flush or fence. Crash runs against
//                it are the negative control.
//   izraelevitz  flush + fence after every shared read/write/CAS, in every
//                phase. The known-correct, expensive transformation.
//
// Both recover with the same disconnect-based recovery as the main policy.
inline PersistencePolicy wrap_none() { return PersistencePolicy::none(); }
inline PersistencePolicy wrap_izraelevitz() { return PersistencePolicy::izraelevitz(); }
inline PersistencePolicy wrap_nvtraverse(
    EnsureReachableMode er = EnsureReachableMode::original_parent_field, int path_k = 1) {
  PersistencePolicy p = PersistencePolicy::nvtraverse();
  p.er_mode = er;
  p.path_length = path_k;
  return p;
}

inline PersistencePolicy policy_for(PersistMode mode) {
  switch (mode) {
    case PersistMode::none: return wrap_none();
    case PersistMode::izraelevitz: return wrap_izraelevitz();
    case PersistMode::nvtraverse: return wrap_nvtraverse();
  }
  return wrap_none();
}

}  // namespace nvt
