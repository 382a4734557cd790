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

#include "cmpswhe/batch.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cmpswhe/errors.hpp"

namespace cmpswhe::batch {

Int PackingKey::product() const {
    Int p = 1;
    for (std::uint64_t b : lane_moduli) p *= Int(static_cast<unsigned long>(b));
    return p;
}

Int pack(std::span<const Int> values, const PackingKey& pkey) {
    if (values.size() != pkey.lanes())
        throw std::invalid_argument("value count does not match lane count");
    ModulusSet lanes(pkey.lane_moduli);
    std::vector<std::uint64_t> residues(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 0 || values[i] >= Int(static_cast<unsigned long>(pkey.lane_moduli[i])))
            throw std::invalid_argument("lane overflow: value " + to_decimal(values[i]) +
                                        " not in [0, " +
                                        std::to_string(pkey.lane_moduli[i]) + ")");
        residues[i] = mpz_get_ui(values[i].get_mpz_t());
    }
    return crt_reconstruct(residues, lanes);
}

std::vector<Int> unpack(const Int& x, const PackingKey& pkey) {
    // x may be negative: blind subtraction of packed operands can yield a
    // negative integer whose lane congruences are still the element-wise
    // results, so lanes reduce with the nonnegative (floor) remainder.
    std::vector<Int> out;
    out.reserve(pkey.lanes());
    for (std::uint64_t b : pkey.lane_moduli)
        out.emplace_back(static_cast<unsigned long>(mod_u64(x, b)));
    return out;
}

PlanResult plan_lanes(std::size_t k, const Int& lane_bound, const LaneEnvelope& env,
                      const PublicKey& pk) {
    if (k < 1) throw std::invalid_argument("lane count must be >= 1");
    if (lane_bound < 1) throw std::invalid_argument("lane bound must be >= 1");
    if (env.add_terms < 1 || env.max_order < 1)
        throw std::invalid_argument("lane envelope must be positive");

    PlanResult result;

    // Lane moduli: k smallest primes above 2 * lane_bound.
    Int threshold = 2 * lane_bound;
    if (!mpz_fits_ulong_p(threshold.get_mpz_t()) ||
        mpz_get_ui(threshold.get_mpz_t()) >= (1ull << 62))
        throw std::invalid_argument("lane bound too large for machine-word lane moduli");
    std::uint64_t candidate = mpz_get_ui(threshold.get_mpz_t()) + 1;
    std::vector<std::uint64_t> lanes;
    while (lanes.size() < k) {
        if (is_prime_u64(candidate)) lanes.push_back(candidate);
        ++candidate;
    }
    Int packed_max = 1;
    for (std::uint64_t b : lanes) packed_max *= Int(static_cast<unsigned long>(b));
    packed_max -= 1;

    const Int& a = pk.amplification();
    // Without a declared eta bound, the only guarantee a public key carries
    // is the validated margin eta_max <= a / 2^30.
    Int eta_bound = env.eta_bound > 0 ? env.eta_bound : a / int_pow2(30);
    unsigned t = env.max_order;
    const Int& w = env.add_terms;

    Int amplified = a * packed_max + eta_bound;
    Int magnitude = w * pow_int(amplified, t);          // capacity requirement
    Int noise_num = w * (pow_int(amplified, t) - pow_int(a * packed_max, t));
    Int rounding_limit = pow_int(a, t);                 // need 2*noise < a^t

    bool capacity_ok = magnitude < pk.mset().product();
    bool rounding_ok = 2 * noise_num < rounding_limit;
    bool envelope_ok = packed_max <= pk.envelope().max_p &&
                       t <= pk.envelope().max_order && w <= pk.envelope().max_terms;

    // How many moduli of this key's width the magnitude would need.
    std::size_t modulus_bits = bit_length(Int(static_cast<unsigned long>(
        pk.mset().modulus(0))));
    for (std::uint64_t b : pk.mset().moduli())
        modulus_bits = std::min(modulus_bits,
                                bit_length(Int(static_cast<unsigned long>(b))));
    std::size_t needed_bits = bit_length(magnitude) + 1;
    result.required_moduli = (needed_bits + modulus_bits - 1) / modulus_bits;

    std::ostringstream report;
    report << "lanes=" << k << " lane_bound=" << to_decimal(lane_bound)
           << " packed_max=" << to_decimal(packed_max) << " order=" << t
           << " terms=" << to_decimal(w) << " required_moduli="
           << result.required_moduli;
    if (!capacity_ok || !rounding_ok || !envelope_ok) report << "; infeasible:";
    if (!capacity_ok)
        report << " packed magnitude needs " << result.required_moduli
               << " moduli of " << modulus_bits << " bits but the key has "
               << pk.modulus_count() << ";";
    if (!rounding_ok) {
        // a must outgrow the noise by roughly t * packed_max^(t-1) * w.
        std::size_t margin_bits =
            bit_length(2 * w * Int(static_cast<unsigned long>(t)) *
                       pow_int(packed_max, t - 1)) + 1;
        report << " noise would exceed the rounding threshold at order " << t
               << "; the amplification/eta margin needs about " << margin_bits
               << " bits;";
    }
    if (!envelope_ok)
        report << " the key envelope does not admit the packed magnitude"
               << " (derive a key with max_p >= " << to_decimal(packed_max)
               << ", max_order >= " << t << ", max_terms >= " << to_decimal(w) << ");";
    if (capacity_ok && rounding_ok && envelope_ok) report << "; feasible";
    result.report = report.str();
    result.feasible = capacity_ok && rounding_ok && envelope_ok;
    if (result.feasible) result.key = PackingKey{std::move(lanes), lane_bound};
    return result;
}

namespace {
constexpr const char* kPackMagic = "cmpswhe-packing-key v1";
}

void write_packing_key(std::ostream& out, const PackingKey& pkey) {
    out << kPackMagic << '\n';
    out << "kind=packing\n";
    out << "lane_bound=" << to_decimal(pkey.lane_bound) << '\n';
    out << "lane_moduli=";
    for (std::size_t i = 0; i < pkey.lane_moduli.size(); ++i) {
        if (i) out << ',';
        out << pkey.lane_moduli[i];
    }
    out << '\n';
}

PackingKey parse_packing_key(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kPackMagic)
        throw ParseError("not a cmpswhe packing key file", 1);
    PackingKey key;
    bool have_bound = false, have_lanes = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("packing key line without '='", line_no);
        std::string name = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (name == "kind") {
            if (value != "packing") throw ParseError("wrong key kind", line_no);
        } else if (name == "lane_bound") {
            key.lane_bound = parse_decimal(value);
            have_bound = true;
        } else if (name == "lane_moduli") {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                Int v = parse_decimal(item);
                if (v < 2 || !mpz_fits_ulong_p(v.get_mpz_t()))
                    throw ParseError("bad lane modulus", line_no);
                key.lane_moduli.push_back(mpz_get_ui(v.get_mpz_t()));
            }
            have_lanes = true;
        } else {
            throw ParseError("unknown packing key field '" + name + "'", line_no);
        }
    }
    if (!have_bound || !have_lanes) throw ParseError("incomplete packing key file");
    for (std::uint64_t b : key.lane_moduli)
        if (!is_prime_u64(b)) throw ParseError("lane modulus is not prime");
    if (key.lane_bound < 1 ||
        key.lane_bound >= Int(static_cast<unsigned long>(
            *std::min_element(key.lane_moduli.begin(), key.lane_moduli.end()))))
        throw ParseError("lane bound must stay below the smallest lane modulus");
    return key;
}

}  // namespace cmpswhe::batch
