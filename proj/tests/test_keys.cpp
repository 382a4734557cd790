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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cmpswhe/errors.hpp"
#include "cmpswhe/keys.hpp"
#include "cmpswhe/rng.hpp"

using namespace cmpswhe;

namespace {

// Independent AES-128-ECB oracle for the derivation checks.
std::array<std::uint8_t, 16> aes_block(const std::array<std::uint8_t, 16>& key,
                                       const std::array<std::uint8_t, 16>& in) {
    std::array<std::uint8_t, 16> out{};
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    int len = 0;
    REQUIRE(EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr) == 1);
    REQUIRE(EVP_CIPHER_CTX_set_padding(ctx, 0) == 1);
    REQUIRE(EVP_EncryptUpdate(ctx, out.data(), &len, in.data(), 16) == 1);
    EVP_CIPHER_CTX_free(ctx);
    return out;
}

std::uint32_t six_bit_chunk(const std::array<std::uint8_t, 16>& block, unsigned index) {
    std::uint32_t v = 0;
    for (unsigned i = 0; i < 6; ++i) {
        unsigned bit = index * 6 + i;
        v = (v << 1) | ((block[bit / 8] >> (7 - bit % 8)) & 1u);
    }
    return v;
}

KeyParams small_params() {
    KeyParams p = KeyParams::defaults();
    p.pool_size = 16;
    p.modulus_count = 6;
    p.slots = 8;
    p.pool_start_bits = 20;
    p.amplification = int_pow2(64);
    p.eta_max = int_pow2(22);
    p.envelope = Envelope{Int(1) << 10, 1, Int(4)};
    return p;
}

}  // namespace

TEST_CASE("derivation is deterministic in (U, T, params)") {
    UserKey u = UserKey::from_hex("00112233445566778899aabbccddeeff");
    auto [pk1, sk1] = derive_keys(u, 1700000000, KeyParams::defaults());
    auto [pk2, sk2] = derive_keys(u, 1700000000, KeyParams::defaults());
    CHECK(serialize_public_key(pk1) == serialize_public_key(pk2));
    CHECK(serialize_private_key(sk1) == serialize_private_key(sk2));
}

TEST_CASE("template comes from the first 6-bit chunks of AES(U, T-block)") {
    UserKey zero{};
    KeyParams p = KeyParams::defaults();
    p.modulus_count = 4;
    p.pool_size = 64;
    p.envelope = Envelope{Int(1) << 10, 1, Int(4)};  // fits four 61-bit moduli
    auto [pk, sk] = derive_keys(zero, 0, p);

    // Oracle: AES-128-ECB of the all-zero block under the all-zero key.
    std::array<std::uint8_t, 16> c1 = aes_block(zero.bytes, {});
    // Known vector for that input.
    const std::array<std::uint8_t, 16> expected_c1 = {
        0x66, 0xe9, 0x4b, 0xd4, 0xef, 0x8a, 0x2c, 0x3b,
        0x88, 0x4c, 0xfa, 0x59, 0xca, 0x34, 0x2b, 0x2e};
    CHECK(c1 == expected_c1);

    for (unsigned i = 0; i < 4; ++i)
        CHECK(sk.position_template()[i] == six_bit_chunk(c1, i) % 64);

    // Modulus indices come from chunks of C2 = AES(C1) mod n, duplicates skipped.
    std::array<std::uint8_t, 16> c2 = aes_block(zero.bytes, c1);
    auto pool = gen_prime_pool(p.pool_start_bits, p.pool_size);
    std::vector<std::uint64_t> expected;
    std::set<std::size_t> used;
    for (unsigned i = 0; expected.size() < 4 && i < 21; ++i) {
        std::size_t idx = six_bit_chunk(c2, i) % 64;
        if (used.insert(idx).second) expected.push_back(pool[idx]);
    }
    CHECK(pk.mset().moduli() == expected);
}

TEST_CASE("single-bit user-key change scrambles the template") {
    SeededRandom rng(2024);
    int differing = 0;
    const int trials = 1000;
    KeyParams p = small_params();
    for (int t = 0; t < trials; ++t) {
        UserKey a;
        for (auto& b : a.bytes) b = static_cast<std::uint8_t>(rng.next_u64());
        UserKey b = a;
        unsigned bit = static_cast<unsigned>(rng.uniform_u64(128));
        b.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        std::uint64_t ts = rng.next_u64();
        auto [pka, ska] = derive_keys(a, ts, p);
        auto [pkb, skb] = derive_keys(b, ts, p);
        if (ska.position_template() != skb.position_template()) ++differing;
    }
    CHECK(differing >= 990);  // >= 99% of trials
}

TEST_CASE("derived moduli are distinct members of the declared pool") {
    auto pool = gen_prime_pool(61, 64);
    UserKey u = UserKey::from_hex("0123456789abcdef0123456789abcdef");
    auto [pk, sk] = derive_keys(u, 1234567, KeyParams::defaults());
    std::set<std::uint64_t> seen;
    for (std::uint64_t b : pk.mset().moduli()) {
        CHECK(std::find(pool.begin(), pool.end(), b) != pool.end());
        CHECK(seen.insert(b).second);
    }
    CHECK(seen.size() == 20);
}

TEST_CASE("template entries look uniform over [0, M)") {
    // Chi-square over 10,000 derivations with varying timestamps.
    KeyParams p = small_params();  // M = 8 keeps the derivation fast
    UserKey u = UserKey::from_hex("deadbeefdeadbeefdeadbeefdeadbeef");
    std::vector<std::uint64_t> counts(p.slots, 0);
    const int derivations = 10000;
    for (int t = 0; t < derivations; ++t) {
        auto [pk, sk] = derive_keys(u, static_cast<std::uint64_t>(t), p);
        for (std::uint32_t s : sk.position_template()) ++counts[s];
    }
    double expected = double(derivations) * p.modulus_count / p.slots;
    double chi2 = 0;
    for (std::uint64_t c : counts) {
        double d = double(c) - expected;
        chi2 += d * d / expected;
    }
    // Wilson-Hilferty critical value at significance 0.01, df = M - 1 = 7.
    double df = 7.0;
    double z = 2.326347874;
    double crit = df * std::pow(1.0 - 2.0 / (9 * df) + z * std::sqrt(2.0 / (9 * df)), 3.0);
    CHECK(chi2 < crit);
}

TEST_CASE("validation rejects parameter sets violating the scheme constraints") {
    UserKey u = UserKey::from_hex("00000000000000000000000000000001");

    SUBCASE("eta_max must exceed max(b_i)") {
        KeyParams p = small_params();
        p.eta_max = 100;  // far below the 20-bit moduli
        CHECK_THROWS_AS(derive_keys(u, 0, p), std::invalid_argument);
    }
    SUBCASE("a must exceed eta_max by the 2^30 margin") {
        KeyParams p = small_params();
        p.amplification = p.eta_max * 4;
        CHECK_THROWS_AS(derive_keys(u, 0, p), std::invalid_argument);
    }
    SUBCASE("envelope must satisfy the capacity inequality") {
        KeyParams p = small_params();
        p.envelope.max_order = 12;  // (2^64 * 2^10)^12 >> product of six 20-bit primes
        CHECK_THROWS_AS(derive_keys(u, 0, p), CapacityError);
    }
    SUBCASE("pool must be larger than the modulus count") {
        KeyParams p = small_params();
        p.pool_size = p.modulus_count;
        CHECK_THROWS_AS(derive_keys(u, 0, p), std::invalid_argument);
    }
    SUBCASE("template derivation chains blocks when N exceeds 21 chunks") {
        KeyParams p = small_params();
        p.pool_size = 40;
        p.modulus_count = 24;  // one AES block yields only 21 chunks
        p.envelope = Envelope{Int(1) << 10, 1, Int(4)};
        auto [pk1, sk1] = derive_keys(u, 5, p);
        auto [pk2, sk2] = derive_keys(u, 5, p);
        CHECK(sk1.position_template().size() == 24);
        CHECK(sk1.position_template() == sk2.position_template());
        CHECK(pk1.mset().moduli() == pk2.mset().moduli());
    }
    SUBCASE("6-bit chunk indices cap M and n at 64") {
        KeyParams p = small_params();
        p.slots = 65;
        CHECK_THROWS_AS(derive_keys(u, 0, p), std::invalid_argument);
        p = small_params();
        p.pool_size = 80;
        p.modulus_count = 70;
        CHECK_THROWS_AS(derive_keys(u, 0, p), std::invalid_argument);
    }
}

TEST_CASE("key files roundtrip byte-identically") {
    UserKey u = UserKey::from_hex("0123456789abcdef0123456789abcdef");
    auto [pk, sk] = derive_keys(u, 1699999999, KeyParams::defaults());

    std::string pub = serialize_public_key(pk);
    std::string priv = serialize_private_key(sk);

    std::istringstream pin(pub);
    PublicKey pk2 = parse_public_key(pin);
    CHECK(serialize_public_key(pk2) == pub);
    CHECK(pk2.same_group(pk));
    CHECK(pk2.envelope().max_order == pk.envelope().max_order);

    std::istringstream sin(priv);
    PrivateKey sk2 = parse_private_key(sin);
    CHECK(serialize_private_key(sk2) == priv);
    CHECK(sk2.position_template() == sk.position_template());
    CHECK(sk2.eta_max() == sk.eta_max());
    CHECK(sk2.derived_timestamp() == sk.derived_timestamp());
}

TEST_CASE("public key files never contain private fields") {
    UserKey u = UserKey::from_hex("0123456789abcdef0123456789abcdef");
    auto [pk, sk] = derive_keys(u, 42, KeyParams::defaults());
    std::string pub = serialize_public_key(pk);
    CHECK(pub.find("template") == std::string::npos);
    CHECK(pub.find("eta_max") == std::string::npos);
    CHECK(pub.find("kind=public") != std::string::npos);
    CHECK(serialize_private_key(sk).find("kind=private") != std::string::npos);
}

TEST_CASE("corrupting a modulus into a composite fails the parse") {
    UserKey u = UserKey::from_hex("0123456789abcdef0123456789abcdef");
    auto [pk, sk] = derive_keys(u, 42, KeyParams::defaults());
    std::string pub = serialize_public_key(pk);

    // Make the first modulus even (composite) by editing its last digit.
    auto pos = pub.find("moduli=");
    REQUIRE(pos != std::string::npos);
    auto comma = pub.find(',', pos);
    char& last_digit = pub[comma - 1];
    last_digit = last_digit == '0' ? '4' : '0';
    std::istringstream in(pub);
    CHECK_THROWS(parse_public_key(in));
}

TEST_CASE("malformed key streams are rejected") {
    std::istringstream bad_magic("not-a-key\nkind=public\n");
    CHECK_THROWS_AS(parse_public_key(bad_magic), ParseError);

    std::istringstream missing("cmpswhe-key v1\nkind=public\na=5\n");
    CHECK_THROWS_AS(parse_public_key(missing), ParseError);

    CHECK_THROWS_AS(UserKey::from_hex("xyz"), std::invalid_argument);
    CHECK_THROWS_AS(UserKey::from_hex("00112233445566778899aabbccddeegg"),
                    std::invalid_argument);
}
