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

#include "cmpswhe/errorlab.hpp"

#include <sstream>

#include "cmpswhe/rng.hpp"

namespace cmpswhe::errorlab {

namespace {

// The lab measures the scheme's arithmetic itself (amplify, randomize,
// project, congruence multiply, CRT decrypt) on raw residue vectors, so it
// can step past the capacity rails the high-level ops enforce and report
// configurations that would overflow instead of refusing them.

struct LabCipher {
    std::vector<std::uint64_t> residues;
    unsigned order = 1;
};

LabCipher lab_encrypt(const Int& value, const Int& a, const Int& eta,
                      const ModulusSet& mset) {
    Int amplified = a * value + eta;
    LabCipher c;
    c.residues.reserve(mset.size());
    for (std::uint64_t b : mset.moduli()) c.residues.push_back(mod_u64(amplified, b));
    return c;
}

LabCipher lab_mul(const LabCipher& x, const LabCipher& y, const ModulusSet& mset) {
    LabCipher out;
    out.order = x.order + y.order;
    out.residues.reserve(mset.size());
    for (std::size_t i = 0; i < mset.size(); ++i)
        out.residues.push_back(mul_mod(x.residues[i], y.residues[i], mset.modulus(i)));
    return out;
}

struct LabDecryption {
    Int rounded;
    double error;
    double error_ratio;
};

LabDecryption lab_decrypt(const LabCipher& c, const Int& a, const Int& exact,
                          const ModulusSet& mset) {
    Int numerator = centered(crt_reconstruct(c.residues, mset), mset.product());
    Int denominator = pow_int(a, c.order);
    LabDecryption d;
    d.rounded = div_nearest(numerator, denominator);
    Int residue = numerator - exact * denominator;  // error * a^t, exact
    d.error = residue.get_d() / denominator.get_d();
    d.error_ratio = exact == 0 ? 0.0 : d.error / exact.get_d();
    return d;
}

/// Exact overflow predicate: the amplified magnitude must stay below B_s/2
/// so the centered interpretation cannot flip it.
bool would_overflow(const std::vector<Int>& factors, const Int& a, const Int& eta_max,
                    const ModulusSet& mset) {
    Int bound = 1;
    for (const Int& f : factors) bound *= a * f + eta_max;
    return 2 * bound >= mset.product();
}

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return v.size() >= 2;
}

}  // namespace

SweepReport amplification_sweep(std::uint64_t seed) {
    SweepReport report;
    report.sweep = "amp";
    ModulusSet mset(gen_prime_pool(13, 5));  // B_s ~ 3.7e19
    const Int x = 4000, y = 2500;
    const Int exact = x * y;
    const Int eta_max = 100;
    SeededRandom rng(seed);
    Int eta1 = rng.uniform_int(eta_max);
    Int eta2 = rng.uniform_int(eta_max);

    std::vector<double> ratios;
    for (long exp = 7; exp >= 4; --exp) {
        Int a = pow_int(Int(10), static_cast<unsigned long>(exp));
        Row row;
        row.config = "a=" + to_decimal(a);
        if (would_overflow({x, y}, a, eta_max, mset)) {
            row.overflow = true;
        } else {
            LabCipher cx = lab_encrypt(x, a, eta1, mset);
            LabCipher cy = lab_encrypt(y, a, eta2, mset);
            LabDecryption d = lab_decrypt(lab_mul(cx, cy, mset), a, exact, mset);
            row.result = d.rounded;
            row.error = d.error;
            row.error_ratio = d.error_ratio;
            ratios.push_back(d.error_ratio);
        }
        report.rows.push_back(std::move(row));
    }
    // rows run from large a to small: the ratio must grow as a shrinks
    report.trend_ok = strictly_increasing(ratios);
    return report;
}

SweepReport depth_sweep(std::uint64_t seed) {
    SweepReport report;
    report.sweep = "depth";
    ModulusSet mset(gen_prime_pool(6, 13));  // B_s ~ 1e26
    const Int a = 1000;
    const Int eta_max = 100;
    SeededRandom rng(seed);

    // One sequential chain 100 * 10 * 10 * ...; each step reuses the
    // accumulated ciphertext, like repeated blind multiplication would.
    std::vector<Int> factors{100};
    LabCipher acc = lab_encrypt(100, a, rng.uniform_int(eta_max), mset);
    Int exact = 100;
    std::vector<double> ratios;
    for (unsigned muls = 1; muls <= 6; ++muls) {
        factors.push_back(10);
        Row row;
        std::ostringstream cfg;
        cfg << "chain=100";
        for (unsigned i = 0; i < muls; ++i) cfg << "*10";
        cfg << " (muls=" << muls << ")";
        row.config = cfg.str();
        if (would_overflow(factors, a, eta_max, mset)) {
            row.overflow = true;
            report.rows.push_back(std::move(row));
            break;  // deeper rows only overflow harder
        }
        LabCipher ten = lab_encrypt(10, a, rng.uniform_int(eta_max), mset);
        acc = lab_mul(acc, ten, mset);
        exact *= 10;
        LabDecryption d = lab_decrypt(acc, a, exact, mset);
        row.result = d.rounded;
        row.error = d.error;
        row.error_ratio = d.error_ratio;
        ratios.push_back(d.error_ratio);
        report.rows.push_back(std::move(row));
    }
    report.trend_ok = strictly_increasing(ratios);
    return report;
}

SweepReport imbalance_sweep(std::uint64_t seed) {
    SweepReport report;
    report.sweep = "imbalance";
    ModulusSet mset(gen_prime_pool(13, 5));
    const Int a = 1000;
    const Int eta_max = 100;
    SeededRandom rng(seed);
    Int eta1 = rng.uniform_int(eta_max);
    Int eta2 = rng.uniform_int(eta_max);

    const std::vector<std::pair<long, long>> pairs{
        {10000, 1000}, {20000, 500}, {50000, 200}, {100000, 100}, {200000, 50}};
    std::vector<double> ratios;
    for (auto [xv, yv] : pairs) {
        Int x = xv, y = yv;
        Int exact = x * y;
        Row row;
        row.config = std::to_string(xv) + "*" + std::to_string(yv);
        if (would_overflow({x, y}, a, eta_max, mset)) {
            row.overflow = true;
        } else {
            LabCipher cx = lab_encrypt(x, a, eta1, mset);
            LabCipher cy = lab_encrypt(y, a, eta2, mset);
            LabDecryption d = lab_decrypt(lab_mul(cx, cy, mset), a, exact, mset);
            row.result = d.rounded;
            row.error = d.error;
            row.error_ratio = d.error_ratio;
            ratios.push_back(d.error_ratio);
        }
        report.rows.push_back(std::move(row));
    }
    report.trend_ok = strictly_increasing(ratios);
    return report;
}

std::string to_csv(const SweepReport& report) {
    std::ostringstream out;
    out << "sweep,config,result,error,error_ratio\n";
    out.precision(10);
    for (const Row& row : report.rows) {
        out << report.sweep << ',' << row.config << ',';
        if (row.overflow)
            out << "overflow,,";
        else
            out << to_decimal(row.result) << ',' << row.error << ',' << row.error_ratio;
        out << '\n';
    }
    out << "trend," << report.sweep << ",monotone=" << (report.trend_ok ? "true" : "false")
        << ",,\n";
    return out.str();
}

}  // namespace cmpswhe::errorlab
