/*
 * Copyright 2026 The hdseize authors
 *
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

#include <stdexcept>
#include <string>

namespace hdseize {

/// Invalid configuration or API contract violation: bad dimensions, unknown
/// approach names, empty inputs where non-empty is required, and so on.
/// The CLI maps this family to exit code 2.
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Problems with the data itself: malformed files, NaN samples, recordings
/// without enough eligible signal. The CLI maps this family to exit code 1.
class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hdseize
