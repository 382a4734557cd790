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

#include <string>
#include <vector>

#include "cmpswhe/modmath.hpp"

namespace cmpswhe::errorlab {

/// One experiment configuration.  Overflow rows (the amplified magnitude
/// would wrap the modulus product) carry no result.
struct Row {
    std::string config;
    bool overflow = false;
    Int result;          // rounded blind result
    double error = 0;    // exact decrypt_raw error as a double
    double error_ratio = 0;
};

struct SweepReport {
    std::string sweep;  // "amp" | "depth" | "imbalance"
    std::vector<Row> rows;
    bool trend_ok = false;
};

/// Product 4000*2500 under amplification factors 10^7 down to 10^4 with one
/// noise draw per run: the error ratio shrinks as a grows (strictly, since
/// only a varies).  The 10^7 row overflows the five-prime group.
SweepReport amplification_sweep(std::uint64_t seed);

/// One multiplication chain 100 * 10 * 10 * ..., measured after every step:
/// each step appends a nonnegative noise term, so the error ratio grows with
/// the multiplication count.  The chain ends in an overflow row.
SweepReport depth_sweep(std::uint64_t seed);

/// Fixed product 10^7 split into increasingly unbalanced factor pairs: the
/// error grows with |X| + |Y|, so more imbalance means more error.
SweepReport imbalance_sweep(std::uint64_t seed);

std::string to_csv(const SweepReport& report);

}  // namespace cmpswhe::errorlab
