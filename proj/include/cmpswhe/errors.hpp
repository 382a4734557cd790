/*
 * Copyright 2026 The cmpswhe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmpswhe {

/// Requested blind operation would exceed the modulus-group capacity
/// w * (a * max(P))^t < B_s.  The message names required vs. available B_s.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Ciphertext and key refer to different modulus groups.
class KeyMismatchError : public std::runtime_error {
public:
    explicit KeyMismatchError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed textual input (expressions, key files, ciphertext files, ...).
/// `position` is a character offset for expressions and a line number for
/// line-oriented files; 0 when not applicable.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at " + std::to_string(position) + ")"),
          position_(position) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what), position_(0) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

}  // namespace cmpswhe
