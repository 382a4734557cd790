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

#include "cmpswhe/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "cmpswhe/rng.hpp"

namespace cmpswhe::vision::synthetic {

Frame gradient(int width, int height) {
    Frame f(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            f.at(x, y) = static_cast<std::uint8_t>((x * 256) / width);
    return f;
}

Frame constant(int width, int height, std::uint8_t value) {
    return Frame(width, height, value);
}

Frame smooth_noise(int width, int height, std::uint64_t seed) {
    // Coarse seeded lattice, bilinearly interpolated.
    SeededRandom rng(seed);
    const int cell = 8;
    int gw = width / cell + 2, gh = height / cell + 2;
    std::vector<int> lattice(std::size_t(gw) * gh);
    for (auto& v : lattice) v = static_cast<int>(rng.uniform_u64(256));
    Frame f(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            int gx = x / cell, gy = y / cell;
            double fx = double(x % cell) / cell, fy = double(y % cell) / cell;
            double v00 = lattice[std::size_t(gy) * gw + gx];
            double v10 = lattice[std::size_t(gy) * gw + gx + 1];
            double v01 = lattice[std::size_t(gy + 1) * gw + gx];
            double v11 = lattice[std::size_t(gy + 1) * gw + gx + 1];
            double v = v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) +
                       v01 * (1 - fx) * fy + v11 * fx * fy;
            f.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    }
    return f;
}

Frame with_square(const Frame& base, int x, int y, int size, std::uint8_t fg) {
    Frame f = base;
    for (int dy = 0; dy < size; ++dy)
        for (int dx = 0; dx < size; ++dx) {
            int px = x + dx, py = y + dy;
            if (px >= 0 && py >= 0 && px < f.width && py < f.height) f.at(px, py) = fg;
        }
    return f;
}

Frame with_bright_top_pattern(const Frame& base, int x, int y, int w, int h) {
    Frame f = base;
    for (int dy = 0; dy < h; ++dy)
        for (int dx = 0; dx < w; ++dx) {
            int px = x + dx, py = y + dy;
            if (px < 0 || py < 0 || px >= f.width || py >= f.height) continue;
            f.at(px, py) = dy < h / 2 ? 220 : 30;
        }
    return f;
}

Cascade toy_cascade(int window_w, int window_h) {
    // Bright top minus dark bottom: strongly positive on the pattern.
    Cascade c;
    c.window_w = window_w;
    c.window_h = window_h;
    Stump stump;
    stump.rects = {WeightedRect{0, 0, window_w, window_h / 2, 1},
                   WeightedRect{0, window_h / 2, window_w, window_h / 2, -1}};
    // Fires when top outshines bottom by > 100 per pixel on average.
    stump.threshold = Int(100) * window_w * (window_h / 2);
    stump.left_val = 0;
    stump.right_val = 1;
    Stage stage;
    stage.threshold = 0;  // pass iff the stump fired
    stage.stumps = {stump};
    c.stages = {stage};
    return c;
}

Cascade toy_cascade_two_stage(int window_w, int window_h) {
    Cascade c = toy_cascade(window_w, window_h);
    // Second stage: horizontal balance expressed as two one-sided stumps
    // that must both hold.
    Stump left_not_heavier;
    left_not_heavier.rects = {
        WeightedRect{0, 0, window_w / 2, window_h, -1},
        WeightedRect{window_w / 2, 0, window_w - window_w / 2, window_h, 1}};
    left_not_heavier.threshold = Int(-40) * window_w * window_h / 2;
    left_not_heavier.left_val = 0;
    left_not_heavier.right_val = 1;
    Stump right_not_heavier = left_not_heavier;
    for (auto& r : right_not_heavier.rects) r.weight = -r.weight;
    Stage balance;
    balance.threshold = 1;  // both stumps must fire
    balance.stumps = {left_not_heavier, right_not_heavier};
    c.stages.push_back(balance);
    return c;
}

}  // namespace cmpswhe::vision::synthetic
