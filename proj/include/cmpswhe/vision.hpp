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

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "cmpswhe/cipher.hpp"
#include "cmpswhe/eval.hpp"

namespace cmpswhe::vision {

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// 8-bit grayscale frame, row-major.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    Frame() = default;
    Frame(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    bool same_size(const Frame& o) const { return width == o.width && height == o.height; }
};

/// Binary PGM (P5, maxval 255).  Writing is canonical ("P5\n<w> <h>\n255\n"
/// + rows), so write(read(f)) of a canonical file is byte-identical.
Frame read_pgm(std::istream& in);
void write_pgm(std::ostream& out, const Frame& f);
Frame load_pgm(const std::string& path);
void save_pgm(const std::string& path, const Frame& f);

/// Per-pixel ciphertexts of a frame; all cells share one order.
struct EncFrame {
    int width = 0;
    int height = 0;
    std::vector<Ciphertext> cells;

    const Ciphertext& at(int x, int y) const { return cells[std::size_t(y) * width + x]; }
    std::uint32_t order() const { return cells.empty() ? 1 : cells.front().order(); }
    bool same_size(const EncFrame& o) const {
        return width == o.width && height == o.height;
    }
};

/// Client-side frame encryption: one independent encryption per pixel, with
/// a fresh noise draw each (stream forked per pixel so any worker count
/// reproduces the same ciphertexts under a seeded source).
EncFrame encrypt_frame(const Frame& f, const PrivateKey& sk, RandomSource& rng,
                       unsigned workers = 1);

/// Decrypts every cell (nearest rounding).
std::vector<Int> decrypt_cells(const EncFrame& ef, const PrivateKey& sk);

// ---------------------------------------------------------------------------
// Comparison oracle ("additional server")
// ---------------------------------------------------------------------------

/// Holds the private key and answers only comparison-style queries; the
/// compute role never sees a decrypted value.  Responses are serialized per
/// session and recorded in a transcript so tests can assert that nothing but
/// bits and argmin indices flow back (rescale entries are used only by the
/// inference pipeline, which re-encrypts).
class OracleSession {
public:
    explicit OracleSession(PrivateKey sk) : sk_(std::move(sk)) {}

    /// 1 iff decrypt(ct) > threshold (strict).
    bool threshold_exceeds(const Ciphertext& ct, const Int& threshold);

    /// Index of the smallest decrypted value (first index on ties).
    std::size_t argmin(std::span<const Ciphertext> candidates);

    /// Decrypt, divide by `magnification` (nearest), re-encrypt at order 1.
    Ciphertext rescale_reencrypt(const Ciphertext& ct, const Int& magnification,
                                 RandomSource& rng);

    struct TranscriptEntry {
        enum class Kind { bit, argmin_index, rescale };
        Kind kind;
        std::uint64_t value;  // bit or index; 0 for rescale
    };
    const std::vector<TranscriptEntry>& transcript() const { return log_; }
    void clear_transcript() { log_.clear(); }

    const PrivateKey& private_key() const { return sk_; }

private:
    PrivateKey sk_;
    std::vector<TranscriptEntry> log_;
    std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Foreground extraction
// ---------------------------------------------------------------------------

/// Per-pixel blind (cur - prev)^2; squaring stands in for the absolute
/// difference so the oracle can threshold against T^2.  Output order 2.
EncFrame frame_diff_blind(const EncFrame& prev, const EncFrame& cur,
                          unsigned workers = 1);

/// Background difference is the same squared-difference kernel against an
/// encrypted background frame.
EncFrame bg_diff_blind(const EncFrame& bg, const EncFrame& cur, unsigned workers = 1);

/// Client-side plaintext running average:
/// bg <- round((alpha_num*cur + (alpha_den-alpha_num)*bg) / alpha_den).
Frame update_background(const Frame& bg, const Frame& cur, int alpha_num, int alpha_den);

/// Oracle-thresholded mask: 255 where decrypt(cell) > threshold, else 0.
Frame threshold_mask(const EncFrame& cells, const Int& threshold, OracleSession& session);

// ---------------------------------------------------------------------------
// Optical flow (3x3 window matching)
// ---------------------------------------------------------------------------

struct FlowPoint {
    int x = 0, y = 0;
    bool accepted = false;  // false: too close to the border
    int dx = 0, dy = 0;     // displacement from prev to cur, in {-1,0,1}
};
struct FlowResult {
    std::vector<FlowPoint> points;
};

/// For each point, the compute role forms the blind SSD between the 3x3
/// window around p in cur and the windows around p+d in prev for the nine
/// offsets d; the oracle returns the argmin offset and the displacement is
/// its negation.  Points closer than 2 pixels to the border are rejected.
FlowResult optical_flow_blind(const EncFrame& prev, const EncFrame& cur,
                              std::span<const std::pair<int, int>> points,
                              OracleSession& session);

// ---------------------------------------------------------------------------
// Haar cascade detection
// ---------------------------------------------------------------------------

/// Blind 2-D prefix sums (additions only, order unchanged).
EncFrame integral_blind(const EncFrame& ef, unsigned workers = 1);

struct WeightedRect {
    int x = 0, y = 0, w = 0, h = 0;  // window-relative
    int weight = 1;
};

/// Stump: feature > threshold selects right_val, else left_val.
struct Stump {
    std::vector<WeightedRect> rects;  // up to 3
    Int threshold;
    int left_val = 0;
    int right_val = 1;
};

/// Stage passes when the accumulated stump values exceed the threshold.
struct Stage {
    Int threshold;
    std::vector<Stump> stumps;
};

struct Cascade {
    int window_w = 0;
    int window_h = 0;
    std::vector<Stage> stages;
};

/// Structured text cascade files (schema in docs/file-formats.md).
Cascade read_cascade(std::istream& in);
void write_cascade(std::ostream& out, const Cascade& c);

/// Sum over rects of weight * (4-corner combination of the blind integral),
/// for the window at (wx, wy).  Output order 2 (weights enter semi-blind).
Ciphertext haar_blind(const EncFrame& ii, std::span<const WeightedRect> rects,
                      int wx, int wy);

struct Detection {
    int x = 0, y = 0, w = 0, h = 0;
    bool operator==(const Detection&) const = default;
};

/// Sweeps the detection window at a single scale with the given stride;
/// stump verdicts come from the oracle, stage values accumulate blind via
/// public-key encryptions of the verdict values, stages exit early on the
/// first failure.
std::vector<Detection> cascade_blind(const EncFrame& ef, const Cascade& c, int stride,
                                     OracleSession& session);

// ---------------------------------------------------------------------------
// Plaintext reference pipelines (client-side ground truth)
// ---------------------------------------------------------------------------

namespace plain {

Frame frame_diff_mask(const Frame& prev, const Frame& cur, int threshold);
std::vector<std::int64_t> integral(const Frame& f);
std::int64_t haar_feature(const std::vector<std::int64_t>& ii, int frame_w,
                          std::span<const WeightedRect> rects, int wx, int wy);
FlowResult optical_flow(const Frame& prev, const Frame& cur,
                        std::span<const std::pair<int, int>> points);
std::vector<Detection> cascade_detect(const Frame& f, const Cascade& c, int stride);

}  // namespace plain

/// Feature points for the flow demo: foreground-mask pixels subsampled by
/// `stride`, plus the mask centroid.
std::vector<std::pair<int, int>> select_feature_points(const Frame& mask, int stride);

}  // namespace cmpswhe::vision
