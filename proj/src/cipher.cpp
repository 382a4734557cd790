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

#include "cmpswhe/cipher.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cmpswhe/errors.hpp"

namespace cmpswhe {

namespace {

void check_envelope(const Int& plaintext, const PublicKey& pk) {
    Int magnitude = plaintext < 0 ? Int(-plaintext) : plaintext;
    if (magnitude > pk.envelope().max_p)
        throw CapacityError("plaintext magnitude " + to_decimal(magnitude) +
                            " exceeds the key envelope max_p " +
                            to_decimal(pk.envelope().max_p));
}

}  // namespace

Ciphertext::Ciphertext(PublicKey key, std::vector<std::uint64_t> residues,
                       std::uint32_t order, bool slot_uniform)
    : key_(std::move(key)),
      residues_(std::move(residues)),
      order_(order),
      slot_uniform_(slot_uniform) {
    if (residues_.size() != key_.modulus_count() * key_.slots())
        throw std::invalid_argument("residue matrix shape does not match the key");
    if (order_ < 1) throw std::invalid_argument("ciphertext order must be >= 1");
    for (std::size_t i = 0; i < key_.modulus_count(); ++i) {
        std::uint64_t b = key_.mset().modulus(i);
        for (std::size_t j = 0; j < key_.slots(); ++j) {
            if (at(i, j) >= b)
                throw std::invalid_argument("residue exceeds its modulus");
        }
    }
}

Ciphertext encrypt_private(const Int& plaintext, const PrivateKey& sk, RandomSource& rng,
                           EncryptionTrace* trace) {
    const PublicKey& pk = sk.public_key();
    check_envelope(plaintext, pk);
    const std::size_t n = pk.modulus_count();
    const std::size_t m = pk.slots();
    const auto& tmpl = sk.position_template();

    Int eta = rng.uniform_int(sk.eta_max());
    Int amplified = pk.amplification() * plaintext + eta;
    if (trace) {
        trace->amplified = amplified;
        trace->eta = eta;
    }

    // Redundant data are drawn from the plaintext range and processed exactly
    // like the real datum, so their residues are indistinguishable from it.
    std::vector<Int> redundant;
    redundant.reserve(m - 1);
    Int redundant_range = pk.envelope().max_p + 1;
    for (std::size_t j = 0; j + 1 < m; ++j) {
        Int r = rng.uniform_int(redundant_range);
        Int eta_j = rng.uniform_int(sk.eta_max());
        redundant.push_back(pk.amplification() * r + eta_j);
    }

    std::vector<std::uint64_t> residues(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t b = pk.mset().modulus(i);
        std::uint64_t real = mod_u64(amplified, b);
        std::size_t decoy = 0;
        for (std::size_t j = 0; j < m; ++j) {
            residues[i * m + j] =
                j == tmpl[i] ? real : mod_u64(redundant[decoy++], b);
        }
    }
    return Ciphertext(pk, std::move(residues), 1, false);
}

Ciphertext encrypt_public(const Int& plaintext, const PublicKey& pk) {
    check_envelope(plaintext, pk);
    const std::size_t n = pk.modulus_count();
    const std::size_t m = pk.slots();
    Int amplified = pk.amplification() * plaintext;

    std::vector<std::uint64_t> residues(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t v = mod_u64(amplified, pk.mset().modulus(i));
        for (std::size_t j = 0; j < m; ++j) residues[i * m + j] = v;
    }
    return Ciphertext(pk, std::move(residues), 1, true);
}

namespace {

Int centered_crt_value(const Ciphertext& ct, const PrivateKey& sk) {
    if (ct.key().fingerprint() != sk.public_key().fingerprint())
        throw KeyMismatchError("ciphertext belongs to a different modulus group");
    if (ct.order() > sk.public_key().envelope().max_order)
        throw CapacityError("ciphertext order " + std::to_string(ct.order()) +
                            " exceeds the envelope max_order " +
                            std::to_string(sk.public_key().envelope().max_order));
    const auto& tmpl = sk.position_template();
    std::vector<std::uint64_t> correct(ct.rows());
    for (std::size_t i = 0; i < ct.rows(); ++i) correct[i] = ct.at(i, tmpl[i]);
    Int value = crt_reconstruct(correct, sk.public_key().mset());
    return centered(value, sk.public_key().mset().product());
}

}  // namespace

Int decrypt(const Ciphertext& ct, const PrivateKey& sk, Rounding mode) {
    Int numerator = centered_crt_value(ct, sk);
    Int denominator = pow_int(sk.public_key().amplification(), ct.order());
    return mode == Rounding::floor ? div_floor(numerator, denominator)
                                   : div_nearest(numerator, denominator);
}

RawValue decrypt_raw(const Ciphertext& ct, const PrivateKey& sk) {
    RawValue rv;
    rv.numerator = centered_crt_value(ct, sk);
    rv.denominator = pow_int(sk.public_key().amplification(), ct.order());
    return rv;
}

// ---------------------------------------------------------------------------
// Ciphertext files
// ---------------------------------------------------------------------------

void write_ciphertext(std::ostream& out, const Ciphertext& ct) {
    out << "cmpswhe-ct v1 n=" << ct.rows() << " m=" << ct.slots()
        << " order=" << ct.order() << " mset=" << ct.mset_id()
        << " uniform=" << (ct.slot_uniform() ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < ct.rows(); ++i) {
        for (std::size_t j = 0; j < ct.slots(); ++j) {
            if (j) out << ' ';
            out << ct.at(i, j);
        }
        out << '\n';
    }
}

Ciphertext read_ciphertext(std::istream& in, const PublicKey& key) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError("empty ciphertext file", 1);
    std::istringstream hs(header);
    std::string magic, version;
    hs >> magic >> version;
    if (magic != "cmpswhe-ct" || version != "v1")
        throw ParseError("not a cmpswhe ciphertext file", 1);
    std::size_t n = 0, m = 0;
    std::uint32_t order = 0;
    std::uint64_t mset_id = 0;
    int uniform = -1;
    std::string field;
    while (hs >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw ParseError("malformed ciphertext header", 1);
        std::string name = field.substr(0, eq);
        std::string value = field.substr(eq + 1);
        if (name == "n") n = std::stoull(value);
        else if (name == "m") m = std::stoull(value);
        else if (name == "order") order = static_cast<std::uint32_t>(std::stoul(value));
        else if (name == "mset") mset_id = std::stoull(value);
        else if (name == "uniform") uniform = std::stoi(value);
        else throw ParseError("unknown ciphertext header field '" + name + "'", 1);
    }
    if (n == 0 || m == 0 || order == 0 || uniform < 0 || uniform > 1)
        throw ParseError("incomplete ciphertext header", 1);
    if (mset_id != key.fingerprint())
        throw KeyMismatchError("ciphertext modulus-group fingerprint does not match the key");
    if (n != key.modulus_count() || m != key.slots())
        throw ParseError("ciphertext dimensions do not match the key", 1);

    std::vector<std::uint64_t> residues;
    residues.reserve(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        std::string line;
        if (!std::getline(in, line)) throw ParseError("truncated ciphertext file", i + 2);
        std::istringstream ls(line);
        for (std::size_t j = 0; j < m; ++j) {
            std::uint64_t v;
            if (!(ls >> v)) throw ParseError("short residue row", i + 2);
            residues.push_back(v);
        }
        std::string extra;
        if (ls >> extra) throw ParseError("trailing data in residue row", i + 2);
    }
    Ciphertext ct(key, std::move(residues), order, uniform == 1);
    if (ct.slot_uniform()) {
        for (std::size_t i = 0; i < ct.rows(); ++i)
            for (std::size_t j = 1; j < ct.slots(); ++j)
                if (ct.at(i, j) != ct.at(i, 0))
                    throw ParseError("uniform flag set but rows are not constant", i + 2);
    }
    return ct;
}

}  // namespace cmpswhe
