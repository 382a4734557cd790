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

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace cmpswhe {

/// Arbitrary-precision integer used for amplified values, modulus products
/// and CRT reconstruction.  Residue-matrix entries stay in uint64_t.
using Int = mpz_class;

inline Int pow_int(const Int& base, unsigned long exp) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
    return r;
}

inline Int int_pow2(unsigned long bits) {
    Int r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, bits);
    return r;
}

inline std::size_t bit_length(const Int& v) {
    if (v == 0) return 0;
    return mpz_sizeinbase(v.get_mpz_t(), 2);
}

/// Nonnegative remainder of v modulo m (floor division), m < 2^63.
inline std::uint64_t mod_u64(const Int& v, std::uint64_t m) {
    return mpz_fdiv_ui(v.get_mpz_t(), static_cast<unsigned long>(m));
}

/// floor(num / den), den > 0.
inline Int div_floor(const Int& num, const Int& den) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

/// Round num / den to the nearest integer (half away from zero rounds up),
/// den > 0.  Equals floor((2*num + den) / (2*den)).
inline Int div_nearest(const Int& num, const Int& den) {
    Int q;
    Int n2 = 2 * num + den;
    Int d2 = 2 * den;
    mpz_fdiv_q(q.get_mpz_t(), n2.get_mpz_t(), d2.get_mpz_t());
    return q;
}

inline std::string to_decimal(const Int& v) { return v.get_str(10); }

/// Parses a base-10 integer with optional leading '-'; throws std::invalid_argument
/// on any other character.
Int parse_decimal(const std::string& text);

}  // namespace cmpswhe
