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

#include "cmpswhe/vision.hpp"

namespace cmpswhe::vision::synthetic {

/// Horizontal gradient covering all 256 levels (level = x * 256 / width).
Frame gradient(int width, int height);

/// Uniform value.
Frame constant(int width, int height, std::uint8_t value);

/// Smooth random low-frequency image (seeded value-noise).
Frame smooth_noise(int width, int height, std::uint64_t seed);

/// Square of `fg` on a `bg` background at the given position.
Frame with_square(const Frame& base, int x, int y, int size, std::uint8_t fg);

/// Bright-top / dark-bottom pattern at (x, y), the shape the toy cascade
/// detects.
Frame with_bright_top_pattern(const Frame& base, int x, int y, int w, int h);

/// A 1-stage cascade with one stump firing on bright-top/dark-bottom
/// windows of the given size.
Cascade toy_cascade(int window_w, int window_h);

/// Two-stage variant (adds a contrast stump) for early-exit coverage.
Cascade toy_cascade_two_stage(int window_w, int window_h);

}  // namespace cmpswhe::vision::synthetic
