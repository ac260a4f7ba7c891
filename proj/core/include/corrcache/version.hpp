/*
 * Copyright 2026 The corrcache Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CORRCACHE_VERSION_HPP
#define CORRCACHE_VERSION_HPP

namespace corrcache {

inline constexpr const char* kVersion = "0.1.0";

// Identifier of the pseudo-random generator family recorded in every
// result manifest; changing the generator requires bumping this string.
inline constexpr const char* kRngAlgorithmId = "splitmix64-streams-v1";

}  // namespace corrcache

#endif  // CORRCACHE_VERSION_HPP
