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

#include "cmpswhe/bench.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "cmpswhe/batch.hpp"
#include "cmpswhe/eval.hpp"
#include "cmpswhe/synthetic.hpp"

namespace cmpswhe::bench {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

struct KernelTimes {
    double encrypt_ms, eval_ms, decrypt_ms;
};

/// One pass of the batched frame-difference kernel; verifies the unpacked
/// differences against the plaintext subtraction.
KernelTimes run_kernel(const vision::Frame& prev, const vision::Frame& cur,
                       std::size_t batch, const batch::PackingKey& lanes,
                       const PrivateKey& sk, RandomSource& rng) {
    const std::size_t pixels = prev.data.size();
    const std::size_t groups = (pixels + batch - 1) / batch;
    const long offset = 255;  // keeps cur - prev + offset nonnegative per lane

    auto t0 = Clock::now();
    std::vector<Ciphertext> enc_prev, enc_cur;
    enc_prev.reserve(groups);
    enc_cur.reserve(groups);
    std::vector<Int> lane_prev(batch), lane_cur(batch);
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t i = 0; i < batch; ++i) {
            std::size_t px = std::min(g * batch + i, pixels - 1);
            lane_prev[i] = long(prev.data[px]);
            lane_cur[i] = long(cur.data[px]) + offset;
        }
        enc_prev.push_back(encrypt_private(batch::pack(lane_prev, lanes), sk, rng));
        enc_cur.push_back(encrypt_private(batch::pack(lane_cur, lanes), sk, rng));
    }
    double encrypt_ms = ms_since(t0);

    t0 = Clock::now();
    std::vector<Ciphertext> diff;
    diff.reserve(groups);
    for (std::size_t g = 0; g < groups; ++g)
        diff.push_back(blind_binop(BinOp::sub, enc_cur[g], enc_prev[g]));
    double eval_ms = ms_since(t0);

    t0 = Clock::now();
    std::vector<long> result(groups * batch);
    for (std::size_t g = 0; g < groups; ++g) {
        std::vector<Int> values = batch::unpack(decrypt(diff[g], sk), lanes);
        for (std::size_t i = 0; i < batch; ++i)
            result[g * batch + i] = values[i].get_si() - offset;
    }
    double decrypt_ms = ms_since(t0);

    for (std::size_t px = 0; px < pixels; ++px) {
        long expected = long(cur.data[px]) - long(prev.data[px]);
        if (result[px] != expected)
            throw std::runtime_error("bench kernel produced a wrong difference");
    }
    return {encrypt_ms, eval_ms, decrypt_ms};
}

}  // namespace

BenchReport frame_diff_bench(std::span<const std::size_t> batch_sizes, int frame_size,
                             std::uint64_t seed, int runs) {
    if (runs < 1) throw std::invalid_argument("need at least one timed run");
    KeyParams params = KeyParams::defaults();
    params.envelope = Envelope{int_pow2(260), 1, int_pow2(20)};
    UserKey u = UserKey::from_hex("77707770777077707770777077707770");
    auto [pk, sk] = derive_keys(u, 99, params);

    vision::Frame prev = vision::synthetic::smooth_noise(frame_size, frame_size, seed);
    vision::Frame cur = vision::synthetic::with_square(prev, frame_size / 4,
                                                       frame_size / 4, frame_size / 3, 240);

    BenchReport report;
    report.pixels = prev.data.size();
    report.frame_size = frame_size;
    SeededRandom rng(seed ^ 0x9e3779b97f4a7c15ull);

    for (std::size_t batch : batch_sizes) {
        if (batch < 1) throw std::invalid_argument("batch size must be >= 1");
        auto plan = batch::plan_lanes(batch, Int(510), batch::LaneEnvelope{Int(2), 1}, pk);
        if (!plan.feasible) throw std::runtime_error("bench lane plan failed: " + plan.report);

        run_kernel(prev, cur, batch, *plan.key, sk, rng);  // warmup
        std::vector<double> enc, eval, dec;
        for (int r = 0; r < runs; ++r) {
            KernelTimes t = run_kernel(prev, cur, batch, *plan.key, sk, rng);
            enc.push_back(t.encrypt_ms);
            eval.push_back(t.eval_ms);
            dec.push_back(t.decrypt_ms);
        }
        BenchRow row;
        row.batch_size = batch;
        row.encrypt_ms = median(enc);
        row.eval_ms = median(eval);
        row.decrypt_ms = median(dec);
        row.per_element_us =
            (row.encrypt_ms + row.eval_ms + row.decrypt_ms) * 1000.0 / double(report.pixels);
        report.rows.push_back(row);
    }
    return report;
}

std::string to_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "# pixels=" << report.pixels << " frame=" << report.frame_size << '\n';
    out << "batch_size,encrypt_ms,eval_ms,decrypt_ms,per_element_us\n";
    out.precision(6);
    out << std::fixed;
    for (const BenchRow& row : report.rows)
        out << row.batch_size << ',' << row.encrypt_ms << ',' << row.eval_ms << ','
            << row.decrypt_ms << ',' << row.per_element_us << '\n';
    return out.str();
}

BenchReport parse_csv(std::istream& in) {
    BenchReport report;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# pixels=", 0) != 0)
        throw std::runtime_error("not a bench report");
    std::istringstream meta(line.substr(1));
    std::string field;
    while (meta >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        std::string name = field.substr(0, eq);
        if (name == "pixels") report.pixels = std::stoull(field.substr(eq + 1));
        if (name == "frame") report.frame_size = std::stoi(field.substr(eq + 1));
    }
    if (!std::getline(in, line))  // header row
        throw std::runtime_error("truncated bench report");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        BenchRow row;
        char comma;
        if (!(ls >> row.batch_size >> comma >> row.encrypt_ms >> comma >> row.eval_ms >>
              comma >> row.decrypt_ms >> comma >> row.per_element_us))
            throw std::runtime_error("bad bench row: " + line);
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace cmpswhe::bench
