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

#include "cmpswhe/modmath.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cmpswhe {

Int parse_decimal(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty integer literal");
    std::size_t start = text[0] == '-' ? 1 : 0;
    if (start == text.size()) throw std::invalid_argument("bare sign is not an integer");
    for (std::size_t i = start; i < text.size(); ++i) {
        if (text[i] < '0' || text[i] > '9')
            throw std::invalid_argument("invalid digit in integer: '" + text + "'");
    }
    return Int(text, 10);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    if (m == 1) return 0;
    std::uint64_t result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                            23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    std::uint64_t d = n - 1;
    unsigned r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    // Witness set exact for n < 3.3 * 10^24, so for all 64-bit n.
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                            23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned i = 1; i < r; ++i) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::uint64_t mod_inverse(std::uint64_t x, std::uint64_t m) {
    if (m < 2) throw std::invalid_argument("modulus must be >= 2");
    std::uint64_t a = x % m;
    if (a == 0) throw std::domain_error("value is 0 mod m, not invertible");
    // Extended Euclid on (a, m); m prime so the gcd is 1.
    __int128 t0 = 0, t1 = 1;
    std::uint64_t r0 = m, r1 = a;
    while (r1 != 0) {
        std::uint64_t q = r0 / r1;
        __int128 t2 = t0 - static_cast<__int128>(q) * t1;
        t0 = t1;
        t1 = t2;
        std::uint64_t r2 = r0 - q * r1;
        r0 = r1;
        r1 = r2;
    }
    if (r0 != 1) throw std::domain_error("value shares a factor with the modulus");
    __int128 inv = t0 % static_cast<__int128>(m);
    if (inv < 0) inv += m;
    return static_cast<std::uint64_t>(inv);
}

std::vector<std::uint64_t> gen_prime_pool(unsigned start_bits, std::size_t count) {
    if (count < 1) throw std::invalid_argument("prime pool needs count >= 1");
    if (start_bits < 2 || start_bits > 62)
        throw std::invalid_argument("pool start_bits must lie in [2, 62]");
    std::vector<std::uint64_t> pool;
    pool.reserve(count);
    std::uint64_t candidate = 1ull << start_bits;
    if (candidate % 2 == 0) ++candidate;
    while (pool.size() < count) {
        if (is_prime_u64(candidate)) pool.push_back(candidate);
        candidate += 2;
    }
    return pool;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

std::uint64_t moduli_fingerprint(const std::vector<std::uint64_t>& moduli) {
    std::string text;
    for (std::size_t i = 0; i < moduli.size(); ++i) {
        if (i) text += ',';
        text += std::to_string(moduli[i]);
    }
    return fnv1a64({reinterpret_cast<const unsigned char*>(text.data()), text.size()});
}

}  // namespace

ModulusSet::ModulusSet(std::vector<std::uint64_t> moduli) : moduli_(std::move(moduli)) {
    if (moduli_.empty()) throw std::invalid_argument("modulus group must be non-empty");
    for (std::uint64_t b : moduli_) {
        if (!is_prime_u64(b))
            throw std::invalid_argument("modulus " + std::to_string(b) + " is not prime");
    }
    std::vector<std::uint64_t> sorted = moduli_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("moduli must be pairwise distinct");

    product_ = 1;
    for (std::uint64_t b : moduli_) product_ *= Int(static_cast<unsigned long>(b));

    crt_weights_.reserve(moduli_.size());
    for (std::uint64_t b : moduli_) {
        Int partial = product_ / Int(static_cast<unsigned long>(b));  // B_i
        std::uint64_t inv = mod_inverse(mod_u64(partial, b), b);
        crt_weights_.push_back(partial * Int(static_cast<unsigned long>(inv)));
    }
    fingerprint_ = moduli_fingerprint(moduli_);
}

Int crt_reconstruct(std::span<const std::uint64_t> residues, const ModulusSet& mset) {
    if (residues.size() != mset.size())
        throw std::invalid_argument("residue count " + std::to_string(residues.size()) +
                                    " does not match modulus count " +
                                    std::to_string(mset.size()));
    Int acc = 0;
    for (std::size_t i = 0; i < residues.size(); ++i) {
        if (residues[i] >= mset.modulus(i))
            throw std::invalid_argument("residue out of range for modulus " +
                                        std::to_string(mset.modulus(i)));
        acc += mset.crt_weight(i) * Int(static_cast<unsigned long>(residues[i]));
    }
    Int r;
    mpz_fdiv_r(r.get_mpz_t(), acc.get_mpz_t(), mset.product().get_mpz_t());
    return r;
}

Int centered(const Int& value, const Int& modulus_product) {
    if (value < 0 || value >= modulus_product)
        throw std::invalid_argument("centered() input must lie in [0, B_s)");
    if (2 * value > modulus_product) return value - modulus_product;
    return value;
}

bool capacity_check(const Int& amplification, const Int& max_p, unsigned order,
                    const Int& terms, const ModulusSet& mset) {
    if (amplification <= 0 || max_p <= 0 || order < 1 || terms <= 0)
        throw std::invalid_argument("capacity_check arguments must be positive");
    Int lhs = terms * pow_int(amplification * max_p, order);
    return lhs < mset.product();
}

}  // namespace cmpswhe
