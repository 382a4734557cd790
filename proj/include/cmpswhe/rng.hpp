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
#include <memory>

#include "cmpswhe/bigint.hpp"

namespace cmpswhe {

/// Randomness source injected into encryption.
///
/// Contract: `fork(stream)` yields an independent stream so concurrent
/// workers never share state; a seeded source reproduces the same values
/// for the same (seed, stream, call sequence) regardless of worker count.
///
/// Draw order inside encrypt_private is part of this contract and is
/// relied on by tests that capture the noise values:
///   1. eta for the real datum, uniform in [0, eta_max)
///   2. per redundant slot j = 1..M-1: redundant plaintext R_j in [0, max_p],
///      then its eta_j in [0, eta_max)
class RandomSource {
public:
    virtual ~RandomSource() = default;

    virtual std::uint64_t next_u64() = 0;
    virtual std::unique_ptr<RandomSource> fork(std::uint64_t stream) = 0;

    /// Uniform value in [0, bound), bound >= 1, by rejection sampling.
    std::uint64_t uniform_u64(std::uint64_t bound);

    /// Uniform value in [0, bound), bound >= 1.  Virtual so tests can pin
    /// the exact noise values an encryption draws.
    virtual Int uniform_int(const Int& bound);
};

/// OS-entropy source (OpenSSL RAND_bytes, buffered).  Default for the CLI.
class SystemRandom final : public RandomSource {
public:
    SystemRandom();
    std::uint64_t next_u64() override;
    std::unique_ptr<RandomSource> fork(std::uint64_t stream) override;

private:
    unsigned char buf_[4096];
    std::size_t pos_;
};

/// Deterministic source (xoshiro256** seeded via splitmix64) for
/// reproducible tests and the --seed flag.  Not for production keys.
class SeededRandom final : public RandomSource {
public:
    explicit SeededRandom(std::uint64_t seed);
    std::uint64_t next_u64() override;
    std::unique_ptr<RandomSource> fork(std::uint64_t stream) override;

private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
};

}  // namespace cmpswhe
