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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmpswhe/modmath.hpp"

namespace cmpswhe {

/// 128-bit user secret from which key material is derived.
struct UserKey {
    std::array<std::uint8_t, 16> bytes{};

    /// Parses exactly 32 hex characters.
    static UserKey from_hex(const std::string& hex);
};

/// Operating envelope a key is validated for: every blind computation must
/// stay within |plaintext| <= max_p, polynomial order <= max_order and
/// term count <= max_terms, so that w * (a * max_p)^t < B_s holds.
struct Envelope {
    Int max_p;
    unsigned max_order = 1;
    Int max_terms;
};

/// Parameters for key derivation.
struct KeyParams {
    std::size_t pool_size = 64;      // n, candidate primes
    std::size_t modulus_count = 20;  // N, selected moduli
    std::uint32_t slots = 64;        // M, projections per modulus (1 real + M-1 decoys)
    unsigned pool_start_bits = 61;
    Int amplification;  // a
    Int eta_max;        // exclusive bound on the additive noise
    Envelope envelope;

    /// n=64, N=20, M=64, 61-bit pool primes, a=2^100, eta_max=2^62,
    /// envelope max_p=2^24 / max_order=8 / max_terms=2^24.
    static KeyParams defaults();
};

/// Server-side key: amplification factor, modulus group, slot count, and the
/// validated envelope.  Cheap to copy (shared immutable state).
class PublicKey {
public:
    PublicKey(Int amplification, ModulusSet mset, std::uint32_t slots, Envelope envelope);

    const Int& amplification() const { return impl_->a; }
    const ModulusSet& mset() const { return impl_->mset; }
    std::uint32_t slots() const { return impl_->slots; }        // M
    std::size_t modulus_count() const { return impl_->mset.size(); }  // N
    const Envelope& envelope() const { return impl_->envelope; }
    std::uint64_t fingerprint() const { return impl_->mset.fingerprint(); }

    /// a mod b_i, cached for homogenization and public encryption.
    std::uint64_t amplification_mod(std::size_t i) const { return impl_->a_mod[i]; }

    bool same_group(const PublicKey& other) const;

private:
    struct Impl {
        Int a;
        ModulusSet mset;
        std::uint32_t slots;
        Envelope envelope;
        std::vector<std::uint64_t> a_mod;
    };
    std::shared_ptr<const Impl> impl_;
};

/// Client-side key: the public part plus the position template and the
/// noise bound.  Construction validates eta_max > max(b_i) and a > eta_max;
/// derive_keys() additionally enforces the a / eta_max >= 2^30 margin.
class PrivateKey {
public:
    PrivateKey(PublicKey pk, std::vector<std::uint32_t> position_template, Int eta_max,
               std::optional<std::uint64_t> derived_timestamp = std::nullopt);

    const PublicKey& public_key() const { return impl_->pk; }
    const std::vector<std::uint32_t>& position_template() const { return impl_->tmpl; }
    const Int& eta_max() const { return impl_->eta_max; }
    std::uint32_t slots() const { return impl_->pk.slots(); }  // M
    std::optional<std::uint64_t> derived_timestamp() const { return impl_->timestamp; }

    /// Copy with one template entry replaced (key-sensitivity experiments).
    PrivateKey with_template_entry(std::size_t i, std::uint32_t slot) const;
    /// Copy with one modulus replaced (key-sensitivity experiments).
    PrivateKey with_modulus(std::size_t i, std::uint64_t modulus) const;

private:
    struct Impl {
        PublicKey pk;
        std::vector<std::uint32_t> tmpl;
        Int eta_max;
        std::optional<std::uint64_t> timestamp;
    };
    std::shared_ptr<const Impl> impl_;
};

/// Deterministic key derivation: AES-128-ECB over the timestamp block yields
/// C_1, C_2, ... ; consecutive 6-bit chunks of C_1's stream select the
/// position template (mod M) and chunks of C_2's stream select distinct pool
/// primes (mod n, duplicates skipped).  The stream extends by re-encrypting
/// the previous block whenever more chunks are needed.
std::pair<PublicKey, PrivateKey> derive_keys(const UserKey& user_key,
                                             std::uint64_t timestamp,
                                             const KeyParams& params);

/// Key files: versioned line-oriented text, `name=decimal`, bit-exact.
void write_public_key(std::ostream& out, const PublicKey& pk);
void write_private_key(std::ostream& out, const PrivateKey& sk);
std::string serialize_public_key(const PublicKey& pk);
std::string serialize_private_key(const PrivateKey& sk);

PublicKey parse_public_key(std::istream& in);
PrivateKey parse_private_key(std::istream& in);

/// Loads either kind; exactly one of the results is set.
struct LoadedKey {
    std::optional<PublicKey> public_key;
    std::optional<PrivateKey> private_key;
};
LoadedKey parse_key_file(std::istream& in);

}  // namespace cmpswhe
