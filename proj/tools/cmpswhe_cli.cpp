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

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "cmpswhe/batch.hpp"
#include "cmpswhe/bench.hpp"
#include "cmpswhe/cipher.hpp"
#include "cmpswhe/errorlab.hpp"
#include "cmpswhe/errors.hpp"
#include "cmpswhe/eval.hpp"
#include "cmpswhe/inference.hpp"
#include "cmpswhe/stats.hpp"
#include "cmpswhe/synthetic.hpp"
#include "cmpswhe/vision.hpp"

using namespace cmpswhe;

namespace {

std::unique_ptr<RandomSource> make_rng(std::int64_t seed) {
    if (seed >= 0) return std::make_unique<SeededRandom>(static_cast<std::uint64_t>(seed));
    return std::make_unique<SystemRandom>();
}

PublicKey load_public(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open key file " + path);
    LoadedKey k = parse_key_file(in);
    if (k.public_key) return *k.public_key;
    if (k.private_key) return k.private_key->public_key();
    throw std::runtime_error("no key in " + path);
}

PrivateKey load_private(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open key file " + path);
    LoadedKey k = parse_key_file(in);
    if (!k.private_key)
        throw std::runtime_error(path + " does not hold a private key; decryption needs one");
    return *k.private_key;
}

Ciphertext load_ct(const std::string& path, const PublicKey& pk) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ciphertext file " + path);
    return read_ciphertext(in, pk);
}

void store_ct(const std::string& path, const Ciphertext& ct) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_ciphertext(out, ct);
}

Rounding parse_round(const std::string& mode) {
    if (mode == "floor") return Rounding::floor;
    if (mode == "nearest") return Rounding::nearest;
    throw CLI::ValidationError("--round must be floor or nearest");
}

// ---------------------------------------------------------------------------
// keygen
// ---------------------------------------------------------------------------

struct KeygenArgs {
    std::string user_key_hex;
    std::int64_t timestamp = -1;
    std::string out_prefix = "cmpswhe";
    std::size_t pool_size = 64, modulus_count = 20;
    unsigned slots = 64, start_bits = 61;
    unsigned a_bits = 100, eta_bits = 62;
    unsigned max_p_bits = 24, max_order = 8, max_terms_bits = 24;
};

int run_keygen(const KeygenArgs& args) {
    UserKey u = UserKey::from_hex(args.user_key_hex);
    std::uint64_t ts = args.timestamp >= 0
                           ? static_cast<std::uint64_t>(args.timestamp)
                           : static_cast<std::uint64_t>(
                                 std::chrono::duration_cast<std::chrono::seconds>(
                                     std::chrono::system_clock::now().time_since_epoch())
                                     .count());
    KeyParams params;
    params.pool_size = args.pool_size;
    params.modulus_count = args.modulus_count;
    params.slots = args.slots;
    params.pool_start_bits = args.start_bits;
    params.amplification = int_pow2(args.a_bits);
    params.eta_max = int_pow2(args.eta_bits);
    params.envelope =
        Envelope{int_pow2(args.max_p_bits), args.max_order, int_pow2(args.max_terms_bits)};
    auto [pk, sk] = derive_keys(u, ts, params);

    std::ofstream pub(args.out_prefix + ".pub");
    std::ofstream priv(args.out_prefix + ".key");
    if (!pub || !priv) throw std::runtime_error("cannot write key files");
    write_public_key(pub, pk);
    write_private_key(priv, sk);
    std::cout << "wrote " << args.out_prefix << ".pub and " << args.out_prefix
              << ".key (timestamp " << ts << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// demos
// ---------------------------------------------------------------------------

int demo_fgdiff(const std::string& out_dir, std::int64_t seed, unsigned workers,
                int threshold) {
    auto rng = make_rng(seed < 0 ? 1 : seed);
    KeyParams p = KeyParams::defaults();
    p.modulus_count = 8;
    p.slots = 8;
    p.envelope = Envelope{int_pow2(24), 3, int_pow2(24)};
    auto [pk, sk] = derive_keys(UserKey::from_hex("00112233445566778899aabbccddeeff"), 1, p);

    vision::Frame prev = vision::synthetic::smooth_noise(64, 64, 10);
    vision::Frame cur = vision::synthetic::with_square(prev, 20, 24, 12, 245);
    vision::EncFrame ep = vision::encrypt_frame(prev, sk, *rng, workers);
    vision::EncFrame ec = vision::encrypt_frame(cur, sk, *rng, workers);
    vision::OracleSession session(sk);
    vision::Frame blind = vision::threshold_mask(vision::frame_diff_blind(ep, ec, workers),
                                                 Int(threshold) * threshold, session);
    vision::Frame expected = vision::plain::frame_diff_mask(prev, cur, threshold);
    vision::save_pgm(out_dir + "/fgdiff_prev.pgm", prev);
    vision::save_pgm(out_dir + "/fgdiff_cur.pgm", cur);
    vision::save_pgm(out_dir + "/fgdiff_mask.pgm", blind);
    vision::save_pgm(out_dir + "/fgdiff_expected.pgm", expected);
    bool ok = blind.data == expected.data;
    std::cout << "fgdiff: blind mask " << (ok ? "matches" : "DIFFERS FROM")
              << " the plaintext reference (" << out_dir << "/fgdiff_mask.pgm)\n";
    return ok ? 0 : 2;
}

int demo_bgdiff(const std::string& out_dir, std::int64_t seed, unsigned workers,
                int threshold) {
    auto rng = make_rng(seed < 0 ? 2 : seed);
    KeyParams p = KeyParams::defaults();
    p.modulus_count = 8;
    p.slots = 8;
    p.envelope = Envelope{int_pow2(24), 3, int_pow2(24)};
    auto [pk, sk] = derive_keys(UserKey::from_hex("00112233445566778899aabbccddeeff"), 2, p);

    vision::Frame background = vision::synthetic::smooth_noise(48, 48, 20);
    bool all_ok = true;
    for (int f = 0; f < 4; ++f) {
        vision::Frame cur = vision::synthetic::with_square(background, 6 + 8 * f, 18, 10, 250);
        vision::EncFrame ebg = vision::encrypt_frame(background, sk, *rng, workers);
        vision::EncFrame ecur = vision::encrypt_frame(cur, sk, *rng, workers);
        vision::OracleSession session(sk);
        vision::Frame blind = vision::threshold_mask(
            vision::bg_diff_blind(ebg, ecur, workers), Int(threshold) * threshold, session);
        vision::Frame expected = vision::plain::frame_diff_mask(background, cur, threshold);
        all_ok = all_ok && blind.data == expected.data;
        vision::save_pgm(out_dir + "/bgdiff_mask_" + std::to_string(f) + ".pgm", blind);
        background = vision::update_background(background, cur, 1, 8);
    }
    std::cout << "bgdiff: 4 frames, blind masks "
              << (all_ok ? "match" : "DIFFER FROM") << " the plaintext reference\n";
    return all_ok ? 0 : 2;
}

int demo_flow(const std::string& out_dir, std::int64_t seed, unsigned workers) {
    auto rng = make_rng(seed < 0 ? 3 : seed);
    KeyParams p = KeyParams::defaults();
    p.modulus_count = 8;
    p.slots = 8;
    p.envelope = Envelope{int_pow2(24), 3, int_pow2(24)};
    auto [pk, sk] = derive_keys(UserKey::from_hex("00112233445566778899aabbccddeeff"), 3, p);

    vision::Frame prev = vision::synthetic::smooth_noise(40, 32, 30);
    vision::Frame cur = prev;
    for (int dy = 0; dy < 6; ++dy)
        for (int dx = 0; dx < 6; ++dx) {
            prev.at(12 + dx, 12 + dy) = 250;
            cur.at(13 + dx, 12 + dy) = 250;  // object moved right by one
        }
    vision::EncFrame ep = vision::encrypt_frame(prev, sk, *rng, workers);
    vision::EncFrame ec = vision::encrypt_frame(cur, sk, *rng, workers);
    vision::OracleSession session(sk);
    vision::Frame mask = vision::threshold_mask(vision::frame_diff_blind(ep, ec, workers),
                                                Int(25) * 25, session);
    auto points = vision::select_feature_points(mask, 4);
    vision::FlowResult blind = vision::optical_flow_blind(ep, ec, points, session);
    vision::FlowResult expected = vision::plain::optical_flow(prev, cur, points);
    bool ok = blind.points.size() == expected.points.size();
    for (std::size_t i = 0; ok && i < blind.points.size(); ++i)
        ok = blind.points[i].accepted == expected.points[i].accepted &&
             blind.points[i].dx == expected.points[i].dx &&
             blind.points[i].dy == expected.points[i].dy;
    vision::save_pgm(out_dir + "/flow_mask.pgm", mask);
    std::ofstream txt(out_dir + "/flow_displacements.txt");
    for (const auto& fp : blind.points)
        if (fp.accepted) txt << fp.x << ' ' << fp.y << " -> " << fp.dx << ' ' << fp.dy << '\n';
    std::cout << "flow: " << points.size() << " feature points, blind displacements "
              << (ok ? "match" : "DIFFER FROM") << " the plaintext reference\n";
    return ok ? 0 : 2;
}

int demo_detect(const std::string& out_dir, std::int64_t seed, unsigned workers,
                const std::string& cascade_path, int pyramid_levels) {
    auto rng = make_rng(seed < 0 ? 4 : seed);
    KeyParams p = KeyParams::defaults();
    p.modulus_count = 8;
    p.slots = 8;
    p.envelope = Envelope{int_pow2(24), 3, int_pow2(24)};
    auto [pk, sk] = derive_keys(UserKey::from_hex("00112233445566778899aabbccddeeff"), 4, p);

    vision::Cascade cascade;
    if (cascade_path.empty()) {
        cascade = vision::synthetic::toy_cascade_two_stage(8, 8);
        std::ofstream cf(out_dir + "/toy_cascade.txt");
        vision::write_cascade(cf, cascade);
    } else {
        std::ifstream cf(cascade_path);
        if (!cf) throw std::runtime_error("cannot open cascade " + cascade_path);
        cascade = vision::read_cascade(cf);
    }

    vision::Frame scene = vision::synthetic::smooth_noise(48, 36, 44);
    scene = vision::synthetic::with_bright_top_pattern(scene, 16, 12, 8, 8);
    vision::save_pgm(out_dir + "/detect_scene.pgm", scene);

    bool all_ok = true;
    std::size_t total = 0;
    vision::Frame level = scene;
    for (int lvl = 0; lvl <= pyramid_levels; ++lvl) {
        if (level.width < cascade.window_w || level.height < cascade.window_h) break;
        vision::EncFrame ef = vision::encrypt_frame(level, sk, *rng, workers);
        vision::OracleSession session(sk);
        auto blind = vision::cascade_blind(ef, cascade, 2, session);
        auto expected = vision::plain::cascade_detect(level, cascade, 2);
        all_ok = all_ok && blind == expected;
        for (const auto& d : blind) {
            int s = 1 << lvl;
            std::cout << "detect: box " << d.x * s << ',' << d.y * s << ' ' << d.w * s
                      << 'x' << d.h * s << " (level " << lvl << ")\n";
            ++total;
        }
        // 2x box downscale for the next pyramid level (client side, plaintext)
        if (lvl < pyramid_levels) {
            vision::Frame half(level.width / 2, level.height / 2);
            for (int yy = 0; yy < half.height; ++yy)
                for (int xx = 0; xx < half.width; ++xx) {
                    int sum = level.at(2 * xx, 2 * yy) + level.at(2 * xx + 1, 2 * yy) +
                              level.at(2 * xx, 2 * yy + 1) + level.at(2 * xx + 1, 2 * yy + 1);
                    half.at(xx, yy) = static_cast<std::uint8_t>(sum / 4);
                }
            level = half;
        }
    }
    std::cout << "detect: " << total << " boxes, blind result "
              << (all_ok ? "matches" : "DIFFERS FROM") << " the plaintext cascade\n";
    return all_ok ? 0 : 2;
}

int demo_mnist(const std::string& out_dir, std::int64_t seed, const std::string& model_path,
               int count) {
    auto rng = make_rng(seed < 0 ? 5 : seed);
    KeyParams p = KeyParams::defaults();
    p.slots = 8;
    p.amplification = int_pow2(160);
    p.envelope = Envelope{int_pow2(70), 5, int_pow2(12)};
    auto [pk, sk] = derive_keys(UserKey::from_hex("5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a"), 5, p);

    inference::LoadedModel lm;
    if (model_path.empty()) {
        inference::FloatModel fm = inference::make_toy_model(2026);
        {
            std::ofstream mf(out_dir + "/toy_model.txt");
            inference::write_model(mf, fm, 4);
        }
        std::ifstream back(out_dir + "/toy_model.txt");
        lm = inference::load_model(back);
    } else {
        std::ifstream mf(model_path);
        if (!mf) throw std::runtime_error("cannot open model " + model_path);
        lm = inference::load_model(mf);
    }
    inference::PolyActivation act = inference::fit_relu_poly(2, -6.0, 6.0);

    inference::BlindClassifier classifier(lm.fixed, act, pk);
    vision::OracleSession session(sk);
    int blind_eq_fixed = 0, fixed_eq_float = 0;
    for (int i = 0; i < count; ++i) {
        vision::Frame img = vision::synthetic::smooth_noise(28, 28, 7000 + i);
        int blind = classifier.predict(img, sk, session, *rng);
        int fixed = inference::predict_fixed(img, lm.fixed, act);
        int flt = inference::predict_float(img, lm.floats, act);
        if (blind == fixed) ++blind_eq_fixed;
        if (fixed == flt) ++fixed_eq_float;
    }
    std::cout << "mnist: blind == fixed-point on " << blind_eq_fixed << "/" << count
              << ", fixed-point == float on " << fixed_eq_float << "/" << count << "\n";
    return blind_eq_fixed == count ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CMP-SWHE blind computing toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string key_path, public_key_path, round_mode = "nearest";
    std::int64_t seed = -1;
    unsigned workers = 1;
    app.add_option("--key", key_path, "private key file");
    app.add_option("--public-key", public_key_path, "public key file");
    app.add_option("--round", round_mode, "decrypt rounding: floor|nearest");
    app.add_option("--seed", seed, "seed for reproducible randomness (default: system entropy)");
    app.add_option("--workers", workers, "worker threads for pixel kernels");

    // keygen
    KeygenArgs kg;
    auto* keygen = app.add_subcommand("keygen", "derive a key pair from a user key");
    keygen->add_option("--user-key", kg.user_key_hex, "128-bit user key, 32 hex chars")
        ->required();
    keygen->add_option("--timestamp", kg.timestamp, "derivation timestamp (default: now)");
    keygen->add_option("-o,--out", kg.out_prefix, "output prefix (.pub/.key)");
    keygen->add_option("--pool-size", kg.pool_size, "prime pool size n");
    keygen->add_option("--modulus-count", kg.modulus_count, "moduli N");
    keygen->add_option("--slots", kg.slots, "projections per modulus M");
    keygen->add_option("--start-bits", kg.start_bits, "prime pool bit floor");
    keygen->add_option("--a-bits", kg.a_bits, "amplification = 2^a_bits");
    keygen->add_option("--eta-bits", kg.eta_bits, "eta_max = 2^eta_bits");
    keygen->add_option("--max-p-bits", kg.max_p_bits, "envelope |plaintext| <= 2^bits");
    keygen->add_option("--max-order", kg.max_order, "envelope polynomial order");
    keygen->add_option("--max-terms-bits", kg.max_terms_bits, "envelope terms <= 2^bits");

    // encrypt
    std::string enc_value, enc_out = "out.ct";
    auto* encrypt = app.add_subcommand("encrypt", "encrypt an integer");
    encrypt->add_option("--value", enc_value, "plaintext integer")->required();
    encrypt->add_option("-o,--out", enc_out, "ciphertext file");

    // decrypt
    std::string dec_in;
    bool dec_raw = false;
    auto* decrypt_cmd = app.add_subcommand("decrypt", "decrypt a ciphertext file");
    decrypt_cmd->add_option("--in", dec_in, "ciphertext file")->required();
    decrypt_cmd->add_flag("--raw", dec_raw, "print the exact numerator/denominator pair");

    // eval
    std::string eval_expr_text, eval_out = "result.ct";
    std::vector<std::string> eval_binds;
    auto* eval_cmd = app.add_subcommand("eval", "blind-evaluate an expression");
    eval_cmd->add_option("--expr", eval_expr_text, "expression, e.g. \"x*y+z\"")->required();
    eval_cmd->add_option("--bind", eval_binds, "variable binding name=ct-file");
    eval_cmd->add_option("-o,--out", eval_out, "result ciphertext file");

    // pack
    auto* pack_cmd = app.add_subcommand("pack", "CRT lane packing");
    pack_cmd->require_subcommand(1);
    std::size_t plan_lanes_n = 4;
    std::string plan_bound = "65536", plan_terms = "16", plan_eta;
    unsigned plan_order = 1;
    std::string plan_out = "packing.key";
    auto* plan = pack_cmd->add_subcommand("plan", "plan lane moduli for a workload");
    plan->add_option("--lanes", plan_lanes_n, "lane count k")->required();
    plan->add_option("--lane-bound", plan_bound, "bound on every lane intermediate");
    plan->add_option("--terms", plan_terms, "additive terms w");
    plan->add_option("--order", plan_order, "multiplicative order t");
    plan->add_option("--eta-bound", plan_eta, "client eta_max (defaults to the key margin)");
    plan->add_option("-o,--out", plan_out, "packing key file");
    std::string combine_key, combine_values;
    auto* combine = pack_cmd->add_subcommand("combine", "pack lane values into one integer");
    combine->add_option("--packing-key", combine_key)->required();
    combine->add_option("--values", combine_values, "comma-separated lane values")->required();
    std::string split_key, split_value;
    auto* split = pack_cmd->add_subcommand("split", "unpack an integer into lanes");
    split->add_option("--packing-key", split_key)->required();
    split->add_option("--value", split_value)->required();

    // bench
    std::string bench_batches = "1,4,8,12,16,20", bench_out;
    int bench_frame = 64, bench_runs = 5;
    auto* bench_cmd = app.add_subcommand("bench", "frame-difference batching benchmark");
    bench_cmd->add_option("--batches", bench_batches, "comma-separated batch sizes");
    bench_cmd->add_option("--frame", bench_frame, "frame side length");
    bench_cmd->add_option("--runs", bench_runs, "timed repetitions (median)");
    bench_cmd->add_option("-o,--out", bench_out, "write the CSV report here");

    // errorlab
    std::string lab_sweep = "all", lab_out;
    auto* lab_cmd = app.add_subcommand("errorlab", "error characterization sweeps");
    lab_cmd->add_option("--sweep", lab_sweep, "amp|depth|imbalance|all");
    lab_cmd->add_option("-o,--out", lab_out, "write the CSV report here");

    // demo
    std::string demo_pipeline, demo_out_dir = ".", demo_cascade, demo_model;
    int demo_threshold = 25, demo_pyramid = 0, demo_count = 10;
    auto* demo_cmd = app.add_subcommand("demo", "blind pipeline demos vs plaintext references");
    demo_cmd->add_option("pipeline", demo_pipeline, "fgdiff|bgdiff|flow|detect|mnist")
        ->required();
    demo_cmd->add_option("--out-dir", demo_out_dir, "output directory");
    demo_cmd->add_option("--threshold", demo_threshold, "difference threshold");
    demo_cmd->add_option("--cascade", demo_cascade, "cascade file (detect)");
    demo_cmd->add_option("--pyramid", demo_pyramid, "extra half-scale levels (detect)");
    demo_cmd->add_option("--model", demo_model, "model file (mnist)");
    demo_cmd->add_option("--count", demo_count, "images to classify (mnist)");

    // residue-image
    std::string ri_in, ri_out = "residue.pgm";
    std::size_t ri_row = 0;
    bool ri_plain = false;
    auto* ri_cmd = app.add_subcommand("residue-image",
                                      "emit one modulus row of an encrypted image as PGM");
    ri_cmd->add_option("--in", ri_in, "input PGM (defaults to a synthetic gradient)");
    ri_cmd->add_option("--row", ri_row, "modulus row index");
    ri_cmd->add_flag("--plain-mod", ri_plain, "project the plain image instead of encrypting");
    ri_cmd->add_option("-o,--out", ri_out, "output PGM");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*keygen) return run_keygen(kg);

        if (*encrypt) {
            Int value = parse_decimal(enc_value);
            if (!key_path.empty()) {
                PrivateKey sk = load_private(key_path);
                auto rng = make_rng(seed);
                store_ct(enc_out, encrypt_private(value, sk, *rng));
            } else if (!public_key_path.empty()) {
                store_ct(enc_out, encrypt_public(value, load_public(public_key_path)));
            } else {
                throw std::runtime_error("encrypt needs --key (client) or --public-key (server)");
            }
            std::cout << "wrote " << enc_out << "\n";
            return 0;
        }

        if (*decrypt_cmd) {
            if (key_path.empty()) throw std::runtime_error("decrypt needs --key");
            PrivateKey sk = load_private(key_path);
            Ciphertext ct = load_ct(dec_in, sk.public_key());
            if (dec_raw) {
                RawValue raw = decrypt_raw(ct, sk);
                std::cout << to_decimal(raw.numerator) << " / " << to_decimal(raw.denominator)
                          << "\n";
            } else {
                std::cout << to_decimal(decrypt(ct, sk, parse_round(round_mode))) << "\n";
            }
            return 0;
        }

        if (*eval_cmd) {
            if (public_key_path.empty() && key_path.empty())
                throw std::runtime_error("eval needs --public-key (or --key for its public part)");
            PublicKey pk = public_key_path.empty() ? load_private(key_path).public_key()
                                                   : load_public(public_key_path);
            std::map<std::string, Ciphertext> env;
            for (const std::string& bind : eval_binds) {
                auto eq = bind.find('=');
                if (eq == std::string::npos)
                    throw std::runtime_error("--bind expects name=ct-file, got " + bind);
                env.emplace(bind.substr(0, eq), load_ct(bind.substr(eq + 1), pk));
            }
            auto ast = parse_expr(eval_expr_text);
            store_ct(eval_out, eval_expr(*ast, env, pk));
            std::cout << "wrote " << eval_out << "\n";
            return 0;
        }

        if (*pack_cmd) {
            if (*plan) {
                if (public_key_path.empty()) throw std::runtime_error("pack plan needs --public-key");
                PublicKey pk = load_public(public_key_path);
                batch::LaneEnvelope env{parse_decimal(plan_terms), plan_order,
                                        plan_eta.empty() ? Int(0) : parse_decimal(plan_eta)};
                auto result = batch::plan_lanes(plan_lanes_n, parse_decimal(plan_bound), env, pk);
                std::cout << result.report << "\n";
                if (!result.feasible) return 3;
                std::ofstream out(plan_out);
                batch::write_packing_key(out, *result.key);
                std::cout << "wrote " << plan_out << "\n";
                return 0;
            }
            if (*combine) {
                std::ifstream in(combine_key);
                batch::PackingKey pkey = batch::parse_packing_key(in);
                std::vector<Int> values;
                std::stringstream ss(combine_values);
                std::string item;
                while (std::getline(ss, item, ',')) values.push_back(parse_decimal(item));
                std::cout << to_decimal(batch::pack(values, pkey)) << "\n";
                return 0;
            }
            if (*split) {
                std::ifstream in(split_key);
                batch::PackingKey pkey = batch::parse_packing_key(in);
                auto lanes = batch::unpack(parse_decimal(split_value), pkey);
                for (std::size_t i = 0; i < lanes.size(); ++i)
                    std::cout << (i ? "," : "") << to_decimal(lanes[i]);
                std::cout << "\n";
                return 0;
            }
        }

        if (*bench_cmd) {
            std::vector<std::size_t> batches;
            std::stringstream ss(bench_batches);
            std::string item;
            while (std::getline(ss, item, ',')) batches.push_back(std::stoull(item));
            auto report = bench::frame_diff_bench(batches, bench_frame,
                                                  seed < 0 ? 7 : std::uint64_t(seed), bench_runs);
            std::string csv = bench::to_csv(report);
            if (bench_out.empty()) {
                std::cout << csv;
            } else {
                std::ofstream out(bench_out);
                out << csv;
                std::cout << "wrote " << bench_out << "\n";
            }
            return 0;
        }

        if (*lab_cmd) {
            std::uint64_t s = seed < 0 ? 1 : std::uint64_t(seed);
            std::ostringstream csv;
            bool all_ok = true;
            if (lab_sweep == "amp" || lab_sweep == "all") {
                auto r = errorlab::amplification_sweep(s);
                csv << errorlab::to_csv(r);
                all_ok = all_ok && r.trend_ok;
            }
            if (lab_sweep == "depth" || lab_sweep == "all") {
                auto r = errorlab::depth_sweep(s);
                csv << errorlab::to_csv(r);
                all_ok = all_ok && r.trend_ok;
            }
            if (lab_sweep == "imbalance" || lab_sweep == "all") {
                auto r = errorlab::imbalance_sweep(s);
                csv << errorlab::to_csv(r);
                all_ok = all_ok && r.trend_ok;
            }
            if (lab_out.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream out(lab_out);
                out << csv.str();
                std::cout << "wrote " << lab_out << "\n";
            }
            return all_ok ? 0 : 3;
        }

        if (*demo_cmd) {
            if (demo_pipeline == "fgdiff")
                return demo_fgdiff(demo_out_dir, seed, workers, demo_threshold);
            if (demo_pipeline == "bgdiff")
                return demo_bgdiff(demo_out_dir, seed, workers, demo_threshold);
            if (demo_pipeline == "flow") return demo_flow(demo_out_dir, seed, workers);
            if (demo_pipeline == "detect")
                return demo_detect(demo_out_dir, seed, workers, demo_cascade, demo_pyramid);
            if (demo_pipeline == "mnist")
                return demo_mnist(demo_out_dir, seed, demo_model, demo_count);
            throw std::runtime_error("unknown pipeline " + demo_pipeline);
        }

        if (*ri_cmd) {
            if (key_path.empty()) throw std::runtime_error("residue-image needs --key");
            PrivateKey sk = load_private(key_path);
            vision::Frame img = ri_in.empty() ? vision::synthetic::gradient(256, 128)
                                              : vision::load_pgm(ri_in);
            if (ri_row >= sk.public_key().modulus_count())
                throw std::runtime_error("row index exceeds the modulus count");
            std::uint64_t b = sk.public_key().mset().modulus(ri_row);
            vision::Frame out(img.width, img.height);
            std::vector<std::uint64_t> bins(64, 0);
            if (ri_plain) {
                for (std::size_t i = 0; i < img.data.size(); ++i) {
                    std::uint64_t r = img.data[i] % b;
                    out.data[i] = static_cast<std::uint8_t>(
                        (static_cast<unsigned __int128>(r) * 256) / b);
                    bins[(static_cast<unsigned __int128>(r) * 64) / b]++;
                }
            } else {
                auto rng = make_rng(seed);
                vision::EncFrame ef = vision::encrypt_frame(img, sk, *rng, workers);
                const auto& tmpl = sk.position_template();
                for (std::size_t i = 0; i < img.data.size(); ++i) {
                    std::uint64_t r = ef.cells[i].at(ri_row, tmpl[ri_row]);
                    out.data[i] = static_cast<std::uint8_t>(
                        (static_cast<unsigned __int128>(r) * 256) / b);
                    bins[(static_cast<unsigned __int128>(r) * 64) / b]++;
                }
            }
            vision::save_pgm(ri_out, out);
            bool flat = uniformity_not_rejected(bins, 0.01);
            std::cout << "wrote " << ri_out << " (modulus " << b << "); histogram "
                      << (flat ? "does not reject" : "REJECTS") << " uniformity at 0.01\n";
            return 0;
        }
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
