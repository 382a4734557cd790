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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cmpswhe/keys.hpp"

namespace cmpswhe::bench {

/// One batch-size measurement of the frame-difference kernel (pack +
/// encrypt, blind subtract, decrypt + unpack).  Times are medians over the
/// configured runs, in milliseconds for the whole frame pair.
struct BenchRow {
    std::size_t batch_size = 1;
    double encrypt_ms = 0;
    double eval_ms = 0;
    double decrypt_ms = 0;
    double per_element_us = 0;  // (encrypt+eval+decrypt) / pixel, microseconds
};

struct BenchReport {
    std::size_t pixels = 0;
    int frame_size = 0;
    std::vector<BenchRow> rows;
};

/// Times the batched blind frame-difference kernel over a frame_size x
/// frame_size synthetic pair.  Methodology: one warmup run, then the median
/// of `runs` steady-state repetitions.  Results are checked against the
/// plaintext difference before timing is accepted.
BenchReport frame_diff_bench(std::span<const std::size_t> batch_sizes, int frame_size,
                             std::uint64_t seed, int runs = 5);

std::string to_csv(const BenchReport& report);
BenchReport parse_csv(std::istream& in);

}  // namespace cmpswhe::bench
