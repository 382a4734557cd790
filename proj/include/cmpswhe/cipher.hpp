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
#include <iosfwd>
#include <vector>

#include "cmpswhe/keys.hpp"
#include "cmpswhe/rng.hpp"

namespace cmpswhe {

enum class Rounding { floor, nearest };

/// N x M residue matrix: row i belongs to modulus b_i, exactly one column
/// per row (the private template's slot) carries the true projection, the
/// others carry confusing redundancy.  `order` counts the amplification
/// factors embedded in the value; decryption divides by a^order.
///
/// Immutable value type; blind operations return fresh ciphertexts.
class Ciphertext {
public:
    Ciphertext(PublicKey key, std::vector<std::uint64_t> residues, std::uint32_t order,
               bool slot_uniform);

    const PublicKey& key() const { return key_; }
    std::size_t rows() const { return key_.modulus_count(); }   // N
    std::size_t slots() const { return key_.slots(); }          // M
    std::uint32_t order() const { return order_; }
    bool slot_uniform() const { return slot_uniform_; }
    std::uint64_t mset_id() const { return key_.fingerprint(); }

    std::uint64_t at(std::size_t row, std::size_t slot) const {
        return residues_[row * slots() + slot];
    }
    const std::vector<std::uint64_t>& residues() const { return residues_; }

private:
    PublicKey key_;
    std::vector<std::uint64_t> residues_;
    std::uint32_t order_;
    bool slot_uniform_;
};

/// Noise and amplification actually used by one encryption, for the error
/// lab and tests that need the exact P' = a*p + eta.
struct EncryptionTrace {
    Int amplified;  // a*p + eta
    Int eta;
};

/// Client-side encryption: amplify and randomize the datum, project it onto
/// every modulus, and hide the true projections among M-1 independently
/// amplified-and-randomized redundant data at the template's slots.
Ciphertext encrypt_private(const Int& plaintext, const PrivateKey& sk, RandomSource& rng,
                           EncryptionTrace* trace = nullptr);

/// Server-side encryption under the public key: no randomization (eta = 0)
/// and every slot of a row holds the same true projection, so the structure
/// matches client ciphertexts without needing the template.
Ciphertext encrypt_public(const Int& plaintext, const PublicKey& pk);

/// Extracts the true projections via the template, reconstructs the CRT
/// value, centers it, and divides by a^order with the chosen rounding.
Int decrypt(const Ciphertext& ct, const PrivateKey& sk, Rounding mode = Rounding::nearest);

/// Centered CRT value over a^order as an exact pair, no rounding; exposes
/// the additive error terms the blind operations accumulate.
struct RawValue {
    Int numerator;
    Int denominator;  // a^order
};
RawValue decrypt_raw(const Ciphertext& ct, const PrivateKey& sk);

/// Ciphertext files: one header line, then N rows of M space-separated
/// decimal residues.  Byte-exact roundtrip.
void write_ciphertext(std::ostream& out, const Ciphertext& ct);
Ciphertext read_ciphertext(std::istream& in, const PublicKey& key);

}  // namespace cmpswhe
