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

#include "cmpswhe/keys.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cmpswhe/errors.hpp"

namespace cmpswhe {

namespace {

constexpr unsigned kChunkBits = 6;
constexpr std::size_t kMaxChainBlocks = 64;  // derivation gives up past this

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

using Block = std::array<std::uint8_t, 16>;

Block aes128_ecb_block(const UserKey& key, const Block& input) {
    Block out{};
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    if (!ctx) throw std::runtime_error("EVP context allocation failed");
    int len = 0;
    bool ok = EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.bytes.data(),
                                 nullptr) == 1 &&
              EVP_CIPHER_CTX_set_padding(ctx, 0) == 1 &&
              EVP_EncryptUpdate(ctx, out.data(), &len, input.data(),
                                static_cast<int>(input.size())) == 1 &&
              len == static_cast<int>(out.size());
    EVP_CIPHER_CTX_free(ctx);
    if (!ok) throw std::runtime_error("AES-128-ECB encryption failed");
    return out;
}

/// Stream of consecutive 6-bit chunks over the chained cipher blocks
/// C_1 = E(T), C_{k+1} = E(C_k).  Each 16-byte block yields 21 complete
/// chunks; the 2 leftover bits are discarded.
class ChunkStream {
public:
    ChunkStream(const UserKey& key, Block first_block)
        : key_(key), block_(std::move(first_block)) {}

    std::uint32_t next() {
        if (chunk_index_ >= 21) {
            if (++blocks_used_ >= kMaxChainBlocks)
                throw std::runtime_error("key derivation chunk stream exhausted");
            block_ = aes128_ecb_block(key_, block_);
            chunk_index_ = 0;
        }
        std::size_t bit = static_cast<std::size_t>(chunk_index_) * kChunkBits;
        std::uint32_t v = 0;
        for (unsigned i = 0; i < kChunkBits; ++i) {
            std::size_t b = bit + i;
            unsigned out_bit = (block_[b / 8] >> (7 - b % 8)) & 1u;
            v = (v << 1) | out_bit;
        }
        ++chunk_index_;
        return v;
    }

private:
    const UserKey& key_;
    Block block_;
    unsigned chunk_index_ = 0;
    std::size_t blocks_used_ = 1;
};

Block timestamp_block(std::uint64_t timestamp) {
    // Big-endian 64-bit seconds in bytes 0..7, zero padding in bytes 8..15.
    Block block{};
    for (int i = 0; i < 8; ++i)
        block[i] = static_cast<std::uint8_t>(timestamp >> (8 * (7 - i)));
    return block;
}

void validate_ratio(const Int& a, const Int& eta_max) {
    if (a < eta_max * int_pow2(30))
        throw std::invalid_argument(
            "amplification must exceed eta_max by at least 2^30 to keep "
            "accumulated noise below the rounding threshold");
}

}  // namespace

UserKey UserKey::from_hex(const std::string& hex) {
    if (hex.size() != 32)
        throw std::invalid_argument("user key must be exactly 32 hex characters");
    UserKey k;
    for (std::size_t i = 0; i < 16; ++i) {
        int hi = hex_nibble(hex[2 * i]);
        int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex in user key");
        k.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return k;
}

KeyParams KeyParams::defaults() {
    KeyParams p;
    p.pool_size = 64;
    p.modulus_count = 20;
    p.slots = 64;
    p.pool_start_bits = 61;
    p.amplification = int_pow2(100);
    p.eta_max = int_pow2(62);
    p.envelope = Envelope{int_pow2(24), 8, int_pow2(24)};
    return p;
}

PublicKey::PublicKey(Int amplification, ModulusSet mset, std::uint32_t slots,
                     Envelope envelope) {
    if (amplification <= 0) throw std::invalid_argument("amplification must be positive");
    if (slots < 2) throw std::invalid_argument("slot count M must be >= 2");
    if (envelope.max_p <= 0 || envelope.max_terms <= 0 || envelope.max_order < 1)
        throw std::invalid_argument("operating envelope must be positive");
    if (!capacity_check(amplification, envelope.max_p, envelope.max_order,
                        envelope.max_terms, mset))
        throw CapacityError("modulus group too small for the declared envelope: need w*(a*max_p)^t < " +
                            to_decimal(mset.product()));
    std::vector<std::uint64_t> a_mod;
    a_mod.reserve(mset.size());
    for (std::uint64_t b : mset.moduli()) a_mod.push_back(mod_u64(amplification, b));
    impl_ = std::make_shared<const Impl>(Impl{std::move(amplification), std::move(mset),
                                              slots, std::move(envelope), std::move(a_mod)});
}

bool PublicKey::same_group(const PublicKey& other) const {
    return fingerprint() == other.fingerprint() && slots() == other.slots() &&
           amplification() == other.amplification();
}

PrivateKey::PrivateKey(PublicKey pk, std::vector<std::uint32_t> position_template,
                       Int eta_max, std::optional<std::uint64_t> derived_timestamp) {
    if (position_template.size() != pk.modulus_count())
        throw std::invalid_argument("position template length must equal modulus count");
    for (std::uint32_t s : position_template) {
        if (s >= pk.slots())
            throw std::invalid_argument("template slot index out of range [0, M)");
    }
    std::uint64_t max_b = *std::max_element(pk.mset().moduli().begin(),
                                            pk.mset().moduli().end());
    if (eta_max <= Int(static_cast<unsigned long>(max_b)))
        throw std::invalid_argument("eta_max must exceed max(b_i) so residues cover the full range");
    if (eta_max >= pk.amplification())
        throw std::invalid_argument("eta_max must be smaller than the amplification factor");
    impl_ = std::make_shared<const Impl>(Impl{std::move(pk), std::move(position_template),
                                              std::move(eta_max), derived_timestamp});
}

PrivateKey PrivateKey::with_template_entry(std::size_t i, std::uint32_t slot) const {
    auto tmpl = impl_->tmpl;
    tmpl.at(i) = slot;
    return PrivateKey(impl_->pk, std::move(tmpl), impl_->eta_max, impl_->timestamp);
}

PrivateKey PrivateKey::with_modulus(std::size_t i, std::uint64_t modulus) const {
    auto moduli = impl_->pk.mset().moduli();
    moduli.at(i) = modulus;
    PublicKey pk(impl_->pk.amplification(), ModulusSet(std::move(moduli)),
                 impl_->pk.slots(), impl_->pk.envelope());
    return PrivateKey(std::move(pk), impl_->tmpl, impl_->eta_max, impl_->timestamp);
}

std::pair<PublicKey, PrivateKey> derive_keys(const UserKey& user_key,
                                             std::uint64_t timestamp,
                                             const KeyParams& params) {
    if (params.pool_size <= params.modulus_count)
        throw std::invalid_argument("pool size n must exceed modulus count N");
    if (params.modulus_count < 1) throw std::invalid_argument("modulus count N must be >= 1");
    if (params.slots < 2) throw std::invalid_argument("slot count M must be >= 2");
    // 6-bit chunks index at most 64 values; larger M or n would leave slots
    // or pool entries the derivation can never select.
    if (params.slots > 64)
        throw std::invalid_argument("slot count M cannot exceed 64 (6-bit chunk indices)");
    if (params.pool_size > 64)
        throw std::invalid_argument("pool size n cannot exceed 64 (6-bit chunk indices)");

    Block c1 = aes128_ecb_block(user_key, timestamp_block(timestamp));
    Block c2 = aes128_ecb_block(user_key, c1);

    // Position template from C1's chunk stream.
    ChunkStream template_stream(user_key, c1);
    std::vector<std::uint32_t> tmpl;
    tmpl.reserve(params.modulus_count);
    for (std::size_t i = 0; i < params.modulus_count; ++i)
        tmpl.push_back(template_stream.next() % params.slots);

    // Modulus selection from C2's chunk stream; duplicate indices advance to
    // the next chunk until N distinct pool members are collected.
    std::vector<std::uint64_t> pool = gen_prime_pool(params.pool_start_bits, params.pool_size);
    ChunkStream modulus_stream(user_key, c2);
    std::vector<std::uint64_t> moduli;
    std::vector<bool> taken(pool.size(), false);
    while (moduli.size() < params.modulus_count) {
        std::size_t idx = modulus_stream.next() % params.pool_size;
        if (taken[idx]) continue;
        taken[idx] = true;
        moduli.push_back(pool[idx]);
    }

    validate_ratio(params.amplification, params.eta_max);
    PublicKey pk(params.amplification, ModulusSet(std::move(moduli)), params.slots,
                 params.envelope);
    PrivateKey sk(pk, std::move(tmpl), params.eta_max, timestamp);
    return {std::move(pk), std::move(sk)};
}

// ---------------------------------------------------------------------------
// Key files
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kKeyMagic = "cmpswhe-key v1";

void write_common(std::ostream& out, const PublicKey& pk) {
    out << "a=" << to_decimal(pk.amplification()) << '\n';
    out << "slots=" << pk.slots() << '\n';
    const auto& moduli = pk.mset().moduli();
    out << "moduli=";
    for (std::size_t i = 0; i < moduli.size(); ++i) {
        if (i) out << ',';
        out << moduli[i];
    }
    out << '\n';
    out << "max_p=" << to_decimal(pk.envelope().max_p) << '\n';
    out << "max_order=" << pk.envelope().max_order << '\n';
    out << "max_terms=" << to_decimal(pk.envelope().max_terms) << '\n';
}

struct KeyFields {
    std::map<std::string, std::string> fields;
    std::string kind;
};

KeyFields read_fields(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kKeyMagic)
        throw ParseError("not a cmpswhe key file (bad magic line)", 1);
    KeyFields out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("key file line without '='", line_no);
        std::string name = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (!out.fields.emplace(name, value).second)
            throw ParseError("duplicate key file field '" + name + "'", line_no);
    }
    auto it = out.fields.find("kind");
    if (it == out.fields.end()) throw ParseError("key file missing 'kind' field");
    out.kind = it->second;
    return out;
}

const std::string& require(const KeyFields& kf, const std::string& name) {
    auto it = kf.fields.find(name);
    if (it == kf.fields.end()) throw ParseError("key file missing field '" + name + "'");
    return it->second;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        Int v = parse_decimal(item);
        if (v < 0 || !mpz_fits_ulong_p(v.get_mpz_t()))
            throw ParseError("list entry out of range: " + item);
        out.push_back(mpz_get_ui(v.get_mpz_t()));
    }
    if (out.empty()) throw ParseError("empty list field");
    return out;
}

PublicKey key_from_fields(const KeyFields& kf) {
    Int a = parse_decimal(require(kf, "a"));
    auto moduli = parse_u64_list(require(kf, "moduli"));
    Int slots = parse_decimal(require(kf, "slots"));
    Envelope env;
    env.max_p = parse_decimal(require(kf, "max_p"));
    env.max_order = static_cast<unsigned>(parse_decimal(require(kf, "max_order")).get_ui());
    env.max_terms = parse_decimal(require(kf, "max_terms"));
    // ModulusSet and PublicKey constructors re-validate primality, distinctness
    // and the envelope capacity, so a corrupted file fails here.
    return PublicKey(std::move(a), ModulusSet(std::move(moduli)),
                     static_cast<std::uint32_t>(slots.get_ui()), std::move(env));
}

}  // namespace

void write_public_key(std::ostream& out, const PublicKey& pk) {
    out << kKeyMagic << '\n';
    out << "kind=public\n";
    write_common(out, pk);
}

void write_private_key(std::ostream& out, const PrivateKey& sk) {
    out << kKeyMagic << '\n';
    out << "kind=private\n";
    write_common(out, sk.public_key());
    out << "eta_max=" << to_decimal(sk.eta_max()) << '\n';
    const auto& tmpl = sk.position_template();
    out << "template=";
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (i) out << ',';
        out << tmpl[i];
    }
    out << '\n';
    if (sk.derived_timestamp()) out << "timestamp=" << *sk.derived_timestamp() << '\n';
}

std::string serialize_public_key(const PublicKey& pk) {
    std::ostringstream ss;
    write_public_key(ss, pk);
    return ss.str();
}

std::string serialize_private_key(const PrivateKey& sk) {
    std::ostringstream ss;
    write_private_key(ss, sk);
    return ss.str();
}

PublicKey parse_public_key(std::istream& in) {
    KeyFields kf = read_fields(in);
    if (kf.kind != "public") throw ParseError("expected a public key file");
    if (kf.fields.count("template") || kf.fields.count("eta_max"))
        throw ParseError("public key file must not carry private fields");
    return key_from_fields(kf);
}

PrivateKey parse_private_key(std::istream& in) {
    KeyFields kf = read_fields(in);
    if (kf.kind != "private") throw ParseError("expected a private key file");
    PublicKey pk = key_from_fields(kf);
    Int eta_max = parse_decimal(require(kf, "eta_max"));
    auto tmpl_u64 = parse_u64_list(require(kf, "template"));
    std::vector<std::uint32_t> tmpl;
    tmpl.reserve(tmpl_u64.size());
    for (std::uint64_t v : tmpl_u64) tmpl.push_back(static_cast<std::uint32_t>(v));
    std::optional<std::uint64_t> ts;
    if (auto it = kf.fields.find("timestamp"); it != kf.fields.end())
        ts = static_cast<std::uint64_t>(parse_decimal(it->second).get_ui());
    return PrivateKey(std::move(pk), std::move(tmpl), std::move(eta_max), ts);
}

LoadedKey parse_key_file(std::istream& in) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    std::istringstream probe(text);
    KeyFields kf = read_fields(probe);
    LoadedKey out;
    std::istringstream again(text);
    if (kf.kind == "public")
        out.public_key = parse_public_key(again);
    else if (kf.kind == "private")
        out.private_key = parse_private_key(again);
    else
        throw ParseError("unknown key kind '" + kf.kind + "'");
    return out;
}

}  // namespace cmpswhe
