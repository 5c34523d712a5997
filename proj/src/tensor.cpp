// Copyright 2026 The Razor Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "razor/tensor.hpp"

#include <functional>
#include <numeric>

namespace razor {

std::size_t NumElements(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kWeight: return "weight";
    case Role::kActivation: return "activation";
    case Role::kQuery: return "query";
    case Role::kKey: return "key";
    case Role::kValue: return "value";
  }
  return "unknown";
}

bool ParseRole(std::string_view name, Role* role) {
  for (Role r : {Role::kWeight, Role::kActivation, Role::kQuery, Role::kKey,
                 Role::kValue}) {
    if (RoleName(r) == name) {
      *role = r;
      return true;
    }
  }
  return false;
}

}  // namespace razor
