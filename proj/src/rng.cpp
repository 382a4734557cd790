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

#include "cmpswhe/rng.hpp"

#include <openssl/rand.h>

#include <cstring>
#include <stdexcept>
#include <vector>

namespace cmpswhe {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t RandomSource::uniform_u64(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform bound must be >= 1");
    if (bound == 1) return 0;
    // Rejection sampling on the smallest covering power of two.
    unsigned bits = 64 - __builtin_clzll(bound - 1);
    std::uint64_t mask = bits == 64 ? ~0ull : (1ull << bits) - 1;
    for (;;) {
        std::uint64_t v = next_u64() & mask;
        if (v < bound) return v;
    }
}

Int RandomSource::uniform_int(const Int& bound) {
    if (bound <= 0) throw std::invalid_argument("uniform bound must be >= 1");
    if (mpz_fits_ulong_p(bound.get_mpz_t())) {
        std::uint64_t b = mpz_get_ui(bound.get_mpz_t());
        return Int(static_cast<unsigned long>(uniform_u64(b)));
    }
    std::size_t bits = bit_length(bound - 1);
    std::size_t words = (bits + 63) / 64;
    unsigned top_bits = bits % 64 == 0 ? 64 : static_cast<unsigned>(bits % 64);
    std::uint64_t top_mask = top_bits == 64 ? ~0ull : (1ull << top_bits) - 1;
    std::vector<std::uint64_t> buf(words);
    for (;;) {
        for (auto& w : buf) w = next_u64();
        buf[words - 1] &= top_mask;
        Int v;
        mpz_import(v.get_mpz_t(), words, -1 /*least significant word first*/, 8, 0, 0,
                   buf.data());
        if (v < bound) return v;
    }
}

SystemRandom::SystemRandom() : pos_(sizeof(buf_)) {}

std::uint64_t SystemRandom::next_u64() {
    if (pos_ + 8 > sizeof(buf_)) {
        if (RAND_bytes(buf_, sizeof(buf_)) != 1)
            throw std::runtime_error("system entropy source failed");
        pos_ = 0;
    }
    std::uint64_t v;
    std::memcpy(&v, buf_ + pos_, 8);
    pos_ += 8;
    return v;
}

std::unique_ptr<RandomSource> SystemRandom::fork(std::uint64_t) {
    return std::make_unique<SystemRandom>();
}

SeededRandom::SeededRandom(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t SeededRandom::next_u64() {
    // xoshiro256**
    std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

std::unique_ptr<RandomSource> SeededRandom::fork(std::uint64_t stream) {
    std::uint64_t mix = seed_ ^ (0xa0761d6478bd642full * (stream + 1));
    std::uint64_t s = mix;
    return std::make_unique<SeededRandom>(splitmix64(s));
}

}  // namespace cmpswhe
