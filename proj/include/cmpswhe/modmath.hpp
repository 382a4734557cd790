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

#include <cstdint>
#include <span>
#include <vector>

#include "cmpswhe/bigint.hpp"

namespace cmpswhe {

/// Deterministic Miller-Rabin with the witness set {2,3,...,37}, exact for
/// every 64-bit input.
bool is_prime_u64(std::uint64_t n);

/// (x * y) mod m with a 128-bit intermediate.
inline std::uint64_t mul_mod(std::uint64_t x, std::uint64_t y, std::uint64_t m) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * y) % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);

/// Multiplicative inverse of x modulo the prime m, in [1, m).
/// Throws std::domain_error when x == 0 (mod m).
std::uint64_t mod_inverse(std::uint64_t x, std::uint64_t m);

/// The `count` smallest primes >= 2^start_bits, in increasing order.
/// start_bits in [2, 62] so every modulus fits double-width machine
/// arithmetic.
std::vector<std::uint64_t> gen_prime_pool(unsigned start_bits, std::size_t count);

/// An ordered group of distinct primes with the cached product B_s and the
/// CRT weights B_i * (B_i^{-1} mod b_i).  Immutable after construction and
/// safe to share across threads.
class ModulusSet {
public:
    /// Validates that every modulus is prime and all are pairwise distinct.
    explicit ModulusSet(std::vector<std::uint64_t> moduli);

    const std::vector<std::uint64_t>& moduli() const { return moduli_; }
    std::size_t size() const { return moduli_.size(); }
    std::uint64_t modulus(std::size_t i) const { return moduli_[i]; }

    /// B_s = product of all moduli.
    const Int& product() const { return product_; }

    /// B_i * (B_i^{-1} mod b_i); satisfies weight_i mod b_i == 1 and
    /// weight_i mod b_j == 0 for j != i.
    const Int& crt_weight(std::size_t i) const { return crt_weights_[i]; }

    /// FNV-1a over the decimal modulus list; identifies the group in
    /// ciphertext headers.
    std::uint64_t fingerprint() const { return fingerprint_; }

private:
    std::vector<std::uint64_t> moduli_;
    Int product_;
    std::vector<Int> crt_weights_;
    std::uint64_t fingerprint_;
};

/// Unique x in [0, B_s) with x mod b_i == residues[i].
/// Throws std::invalid_argument when residues.size() != mset.size().
Int crt_reconstruct(std::span<const std::uint64_t> residues, const ModulusSet& mset);

/// Maps value in [0, B_s) onto the signed representative in (-B_s/2, B_s/2].
Int centered(const Int& value, const Int& modulus_product);

/// The capacity condition w * (a * max_p)^t < B_s, evaluated exactly.
bool capacity_check(const Int& amplification, const Int& max_p, unsigned order,
                    const Int& terms, const ModulusSet& mset);

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

}  // namespace cmpswhe
