/* Copyright 2026 The idnsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

namespace idn {

// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// Digest of a field list. Each field is length-prefixed before hashing so
// ("ab", "c") and ("a", "bc") never collide.
std::string canonical_digest(std::initializer_list<std::string_view> fields);

}  // namespace idn
