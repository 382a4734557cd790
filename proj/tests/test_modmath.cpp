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

#include <algorithm>
#include <set>

#include "cmpswhe/modmath.hpp"
#include "cmpswhe/rng.hpp"

using namespace cmpswhe;

namespace {

// Independent oracle: find the inverse by scanning 1..m-1.
std::uint64_t inverse_by_scan(std::uint64_t x, std::uint64_t m) {
    for (std::uint64_t c = 1; c < m; ++c)
        if (mul_mod(x % m, c, m) == 1) return c;
    return 0;
}

// Independent oracle: trial-division primality.
bool prime_by_trial_division(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

}  // namespace

TEST_CASE("mod_inverse matches the exhaustive-scan oracle") {
    CHECK(inverse_by_scan(3, 7) == 5);  // oracle-derived expectation
    CHECK(mod_inverse(3, 7) == 5);
    CHECK(mod_inverse(1, 13) == 1);
    CHECK(mod_inverse(12, 13) == 12);

    for (std::uint64_t m : {5ull, 7ull, 11ull, 13ull, 101ull}) {
        for (std::uint64_t x = 1; x < m; ++x) {
            CHECK(mod_inverse(x, m) == inverse_by_scan(x, m));
        }
    }
}

TEST_CASE("mod_inverse rejects non-invertible input") {
    CHECK_THROWS_AS(mod_inverse(0, 7), std::domain_error);
    CHECK_THROWS_AS(mod_inverse(14, 7), std::domain_error);
}

TEST_CASE("mod_inverse then multiply yields 1 for random pairs") {
    SeededRandom rng(41);
    auto primes = gen_prime_pool(8, 50);
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t m = primes[rng.uniform_u64(primes.size())];
        std::uint64_t x = 1 + rng.uniform_u64(m - 1);
        CHECK(mul_mod(x, mod_inverse(x, m), m) == 1);
    }
}

TEST_CASE("crt_reconstruct on small projection triples") {
    ModulusSet axes({7, 11, 13});
    std::vector<std::uint64_t> residues{3, 9, 5};
    CHECK(crt_reconstruct(residues, axes) == 31);

    ModulusSet group({19, 29, 31});
    std::vector<std::uint64_t> sum_residues{9, 21, 30};
    CHECK(crt_reconstruct(sum_residues, group) == 4835);

    ModulusSet two({3, 5});
    std::vector<std::uint64_t> zeros{0, 0};
    CHECK(crt_reconstruct(zeros, two) == 0);
}

TEST_CASE("crt_reconstruct rejects dimension mismatch") {
    ModulusSet mset({7, 11, 13});
    std::vector<std::uint64_t> residues{3, 9};
    CHECK_THROWS_AS(crt_reconstruct(residues, mset), std::invalid_argument);
}

TEST_CASE("crt roundtrip: brute-force loop over every value") {
    for (auto moduli : {std::vector<std::uint64_t>{7, 11, 13},
                        std::vector<std::uint64_t>{19, 29, 31},
                        std::vector<std::uint64_t>{97, 101, 103}}) {
        ModulusSet mset(moduli);
        unsigned long total = mpz_get_ui(mset.product().get_mpz_t());
        for (unsigned long v = 0; v < total; ++v) {
            std::vector<std::uint64_t> residues;
            residues.reserve(moduli.size());
            for (std::uint64_t b : moduli) residues.push_back(v % b);
            Int back = crt_reconstruct(residues, mset);
            REQUIRE(mpz_get_ui(back.get_mpz_t()) == v);
        }
    }
}

TEST_CASE("crt weights satisfy the defining congruences") {
    ModulusSet mset({19, 29, 31});
    for (std::size_t i = 0; i < mset.size(); ++i) {
        for (std::size_t j = 0; j < mset.size(); ++j) {
            std::uint64_t r = mod_u64(mset.crt_weight(i), mset.modulus(j));
            CHECK(r == (i == j ? 1u : 0u));
        }
    }
}

TEST_CASE("modulus set validation") {
    CHECK_THROWS_AS(ModulusSet({7, 11, 12}), std::invalid_argument);  // composite
    CHECK_THROWS_AS(ModulusSet({7, 11, 7}), std::invalid_argument);   // duplicate
    CHECK_THROWS_AS(ModulusSet({}), std::invalid_argument);           // empty
}

TEST_CASE("centered maps onto the signed half-open range") {
    CHECK(centered(5, 17081) == 5);
    CHECK(centered(17080, 17081) == -1);
    CHECK(centered(8541, 17081) == -8540);  // 8541 > 17081/2
    CHECK(centered(8540, 17081) == 8540);   // still below half

    SUBCASE("bijection from [0, B_s) onto (-B_s/2, B_s/2]") {
        const long bs = 1001;
        std::set<long> seen;
        for (long v = 0; v < bs; ++v) {
            Int c = centered(v, bs);
            long cl = c.get_si();
            CHECK(2 * cl <= bs);
            CHECK(2 * cl > -bs);
            // congruence: c == v (mod bs)
            CHECK(((cl % bs) + bs) % bs == v);
            seen.insert(cl);
        }
        CHECK(seen.size() == static_cast<std::size_t>(bs));
    }
}

TEST_CASE("gen_prime_pool returns the smallest primes above the threshold") {
    CHECK(gen_prime_pool(8, 5) == std::vector<std::uint64_t>{257, 263, 269, 271, 277});
    CHECK(gen_prime_pool(8, 1) == std::vector<std::uint64_t>{257});
    CHECK(gen_prime_pool(2, 3) == std::vector<std::uint64_t>{5, 7, 11});

    SUBCASE("strictly increasing and prime by an independent test") {
        auto pool = gen_prime_pool(16, 64);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            CHECK(prime_by_trial_division(pool[i]));
            CHECK(pool[i] >= (1ull << 16));
            if (i) CHECK(pool[i] > pool[i - 1]);
        }
        // No prime between the threshold and the first element was skipped.
        for (std::uint64_t v = 1ull << 16; v < pool[0]; ++v)
            CHECK(!prime_by_trial_division(v));
    }

    SUBCASE("deterministic") { CHECK(gen_prime_pool(61, 8) == gen_prime_pool(61, 8)); }

    CHECK_THROWS_AS(gen_prime_pool(1, 3), std::invalid_argument);
    CHECK_THROWS_AS(gen_prime_pool(63, 3), std::invalid_argument);
    CHECK_THROWS_AS(gen_prime_pool(8, 0), std::invalid_argument);
}

TEST_CASE("is_prime_u64 agrees with trial division") {
    for (std::uint64_t n = 0; n < 2000; ++n)
        CHECK(is_prime_u64(n) == prime_by_trial_division(n));
    // 61-bit pool members
    CHECK(is_prime_u64(2305843009213693951ull));   // 2^61 - 1, Mersenne
    CHECK(!is_prime_u64(2305843009213693953ull));  // 2^61 + 1 = 3 * 768614336404564651
}

TEST_CASE("capacity_check evaluates w*(a*max_p)^t < B_s exactly") {
    ModulusSet mset({19, 29, 31});  // B_s = 17081
    CHECK(!capacity_check(100, 10, 2, 1, mset));  // 10^6 >= 17081
    CHECK(capacity_check(1, 1, 1, 1, mset));      // 1 < 17081
    CHECK(capacity_check(33, 255, 1, 2, mset));   // 2*8415 = 16830 < 17081
    CHECK(!capacity_check(33, 259, 1, 2, mset));  // 2*8547 = 17094 >= 17081
    CHECK_THROWS_AS(capacity_check(0, 1, 1, 1, mset), std::invalid_argument);
}

TEST_CASE("seeded randomness is reproducible and fork streams differ") {
    SeededRandom a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    SeededRandom base(7);
    auto s1 = base.fork(1);
    auto s2 = base.fork(2);
    auto s1_again = SeededRandom(7).fork(1);
    bool all_equal = true;
    for (int i = 0; i < 16; ++i) {
        std::uint64_t v1 = s1->next_u64();
        if (v1 != s1_again->next_u64()) all_equal = false;
        if (v1 == s2->next_u64() && i > 4) {
            // occasional collisions fine; streams must not be identical
        }
    }
    CHECK(all_equal);

    SUBCASE("uniform_int stays below the bound and covers big integers") {
        SeededRandom rng(11);
        Int bound = int_pow2(100);
        for (int i = 0; i < 200; ++i) {
            Int v = rng.uniform_int(bound);
            CHECK(v >= 0);
            CHECK(v < bound);
        }
        Int small = 17;
        std::set<unsigned long> seen;
        for (int i = 0; i < 500; ++i)
            seen.insert(mpz_get_ui(rng.uniform_int(small).get_mpz_t()));
        CHECK(seen.size() == 17);  // all values hit
    }
}
