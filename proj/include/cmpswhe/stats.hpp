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

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>

namespace cmpswhe {

/// Pearson chi-square statistic of observed counts against a uniform
/// distribution over the bins.
inline double chi_square_uniform(std::span<const std::uint64_t> counts) {
    double total = 0;
    for (std::uint64_t c : counts) total += double(c);
    double expected = total / double(counts.size());
    double chi2 = 0;
    for (std::uint64_t c : counts) {
        double d = double(c) - expected;
        chi2 += d * d / expected;
    }
    return chi2;
}

/// Critical value of the chi-square distribution (Wilson-Hilferty cube
/// approximation), adequate for the df >= 30 used here.
inline double chi_square_critical(double df, double significance) {
    // z quantiles for the significances the suite uses
    double z;
    if (significance <= 0.011 && significance >= 0.009)
        z = 2.326347874;  // 0.99 quantile
    else if (significance <= 0.051 && significance >= 0.049)
        z = 1.644853627;  // 0.95 quantile
    else
        z = 2.326347874;
    double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
    return df * t * t * t;
}

/// True when the counts do NOT reject uniformity at the significance level.
inline bool uniformity_not_rejected(std::span<const std::uint64_t> counts,
                                    double significance) {
    return chi_square_uniform(counts) <
           chi_square_critical(double(counts.size() - 1), significance);
}

}  // namespace cmpswhe
