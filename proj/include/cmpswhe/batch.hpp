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

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmpswhe/keys.hpp"

namespace cmpswhe::batch {

/// Client-only lane moduli B_new used to combine many small values into one
/// large plaintext by CRT.  Never serialized into server-visible artifacts;
/// the ciphertext header carries only the main modulus-group fingerprint.
struct PackingKey {
    std::vector<std::uint64_t> lane_moduli;
    Int lane_bound;  // every lane intermediate must stay below min(lane_moduli)

    std::size_t lanes() const { return lane_moduli.size(); }
    Int product() const;
};

/// Combines k lane values into one integer X with X mod B_new_i = values[i].
/// Pre: 0 <= values[i] < lane_moduli[i]; violation raises lane-overflow.
Int pack(std::span<const Int> values, const PackingKey& pkey);

/// Lane i of x: x mod B_new_i (nonnegative remainder; x may be negative
/// after blind subtraction of packed operands).
std::vector<Int> unpack(const Int& x, const PackingKey& pkey);

/// What the packed values will go through, for feasibility planning.
struct LaneEnvelope {
    Int add_terms;           // w: additive terms accumulated blind
    unsigned max_order = 1;  // t: multiplicative order reached
    /// Noise bound the client's private key actually uses.  Zero means
    /// "derive from the public a/eta >= 2^30 validation margin", which is
    /// the only guarantee a public key carries; it is far too conservative
    /// for multiplication on packed values, so clients planning order >= 2
    /// should pass their eta_max here.
    Int eta_bound = 0;
};

struct PlanResult {
    std::optional<PackingKey> key;  // set when feasible
    std::string report;             // human-readable capacity report
    std::size_t required_moduli = 0;  // N needed at the key's modulus width
    bool feasible = false;
};

/// Chooses the k smallest primes above lane_bound * headroom (headroom 2, so
/// one subtraction cannot wrap a lane) and verifies the packed magnitude
/// fits the key: both the raw capacity w*(a*X_max)^t < B_s and the rounding
/// condition that accumulated noise stays below 1/2 after dividing by a^t.
/// The noise bound uses eta <= a / 2^30, the margin key validation enforces.
/// Signed lanes are not supported; offset-encode before packing and subtract
/// the offset after unpacking.
PlanResult plan_lanes(std::size_t k, const Int& lane_bound, const LaneEnvelope& env,
                      const PublicKey& pk);

/// Packing key file (private; same line-oriented text format as keys).
void write_packing_key(std::ostream& out, const PackingKey& pkey);
PackingKey parse_packing_key(std::istream& in);

}  // namespace cmpswhe::batch
