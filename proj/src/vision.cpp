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

#include "cmpswhe/vision.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cmpswhe/errors.hpp"
#include "cmpswhe/parallel.hpp"

namespace cmpswhe::vision {

// ---------------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------------

namespace {

int next_pgm_token(std::istream& in) {
    // Skips whitespace and '#' comments, returns a nonnegative integer.
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value;
    if (!(in >> value) || value < 0) throw ParseError("malformed PGM header");
    return value;
}

}  // namespace

Frame read_pgm(std::istream& in) {
    char p = 0, five = 0;
    in.get(p);
    in.get(five);
    if (!in || p != 'P' || five != '5') throw ParseError("not a binary PGM (P5) stream");
    int w = next_pgm_token(in);
    int h = next_pgm_token(in);
    int maxval = next_pgm_token(in);
    if (w < 1 || h < 1) throw ParseError("bad PGM dimensions");
    if (maxval != 255) throw ParseError("PGM maxval must be 255");
    in.get();  // single whitespace byte before the raster
    Frame f(w, h);
    in.read(reinterpret_cast<char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(f.data.size()))
        throw ParseError("truncated PGM raster");
    return f;
}

void write_pgm(std::ostream& out, const Frame& f) {
    out << "P5\n" << f.width << ' ' << f.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(f.data.data()),
              static_cast<std::streamsize>(f.data.size()));
}

Frame load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_pgm(in);
}

void save_pgm(const std::string& path, const Frame& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_pgm(out, f);
}

// ---------------------------------------------------------------------------
// Frame encryption
// ---------------------------------------------------------------------------

EncFrame encrypt_frame(const Frame& f, const PrivateKey& sk, RandomSource& rng,
                       unsigned workers) {
    EncFrame ef;
    ef.width = f.width;
    ef.height = f.height;
    const std::size_t n = f.data.size();
    // Placeholder cells so workers can assign out of order.
    std::vector<Ciphertext> cells(n, encrypt_public(0, sk.public_key()));
    parallel_for(n, workers, [&](std::size_t i) {
        auto stream = rng.fork(i);
        cells[i] = encrypt_private(Int(static_cast<unsigned long>(f.data[i])), sk, *stream);
    });
    ef.cells = std::move(cells);
    return ef;
}

std::vector<Int> decrypt_cells(const EncFrame& ef, const PrivateKey& sk) {
    std::vector<Int> out;
    out.reserve(ef.cells.size());
    for (const Ciphertext& c : ef.cells) out.push_back(decrypt(c, sk, Rounding::nearest));
    return out;
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

bool OracleSession::threshold_exceeds(const Ciphertext& ct, const Int& threshold) {
    std::lock_guard<std::mutex> lock(mu_);
    bool bit = decrypt(ct, sk_, Rounding::nearest) > threshold;
    log_.push_back({TranscriptEntry::Kind::bit, bit ? 1ull : 0ull});
    return bit;
}

std::size_t OracleSession::argmin(std::span<const Ciphertext> candidates) {
    if (candidates.empty()) throw std::invalid_argument("argmin over an empty candidate set");
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t best = 0;
    Int best_value = decrypt(candidates[0], sk_, Rounding::nearest);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        Int v = decrypt(candidates[i], sk_, Rounding::nearest);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    log_.push_back({TranscriptEntry::Kind::argmin_index, best});
    return best;
}

Ciphertext OracleSession::rescale_reencrypt(const Ciphertext& ct, const Int& magnification,
                                            RandomSource& rng) {
    if (magnification < 1) throw std::invalid_argument("magnification must be >= 1");
    std::lock_guard<std::mutex> lock(mu_);
    Int value = decrypt(ct, sk_, Rounding::nearest);
    Int rescaled = div_nearest(value, magnification);
    log_.push_back({TranscriptEntry::Kind::rescale, 0});
    return encrypt_private(rescaled, sk_, rng);
}

// ---------------------------------------------------------------------------
// Foreground extraction
// ---------------------------------------------------------------------------

namespace {

void require_same_size(const EncFrame& a, const EncFrame& b) {
    if (!a.same_size(b)) throw std::invalid_argument("frame dimensions differ");
}

}  // namespace

EncFrame frame_diff_blind(const EncFrame& prev, const EncFrame& cur, unsigned workers) {
    require_same_size(prev, cur);
    EncFrame out;
    out.width = cur.width;
    out.height = cur.height;
    std::vector<Ciphertext> cells(cur.cells.begin(), cur.cells.end());
    parallel_for(cur.cells.size(), workers, [&](std::size_t i) {
        Ciphertext d = blind_binop(BinOp::sub, cur.cells[i], prev.cells[i]);
        cells[i] = blind_binop(BinOp::mul, d, d);
    });
    out.cells = std::move(cells);
    return out;
}

EncFrame bg_diff_blind(const EncFrame& bg, const EncFrame& cur, unsigned workers) {
    return frame_diff_blind(bg, cur, workers);
}

Frame update_background(const Frame& bg, const Frame& cur, int alpha_num, int alpha_den) {
    if (!bg.same_size(cur)) throw std::invalid_argument("frame dimensions differ");
    if (alpha_den <= 0 || alpha_num < 0 || alpha_num > alpha_den)
        throw std::invalid_argument("require 0 <= alpha_num <= alpha_den");
    Frame out(bg.width, bg.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        long v = (long(alpha_num) * cur.data[i] + long(alpha_den - alpha_num) * bg.data[i] +
                  alpha_den / 2) /
                 alpha_den;
        out.data[i] = static_cast<std::uint8_t>(std::clamp(v, 0l, 255l));
    }
    return out;
}

Frame threshold_mask(const EncFrame& cells, const Int& threshold, OracleSession& session) {
    Frame mask(cells.width, cells.height);
    for (int y = 0; y < cells.height; ++y)
        for (int x = 0; x < cells.width; ++x)
            mask.at(x, y) = session.threshold_exceeds(cells.at(x, y), threshold) ? 255 : 0;
    return mask;
}

// ---------------------------------------------------------------------------
// Optical flow
// ---------------------------------------------------------------------------

namespace {

constexpr int kOffsets[9][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {0, 0},
                                {1, 0},   {-1, 1}, {0, 1},  {1, 1}};

bool flow_point_valid(int x, int y, int w, int h) {
    return x >= 2 && y >= 2 && x <= w - 3 && y <= h - 3;
}

}  // namespace

FlowResult optical_flow_blind(const EncFrame& prev, const EncFrame& cur,
                              std::span<const std::pair<int, int>> points,
                              OracleSession& session) {
    require_same_size(prev, cur);
    FlowResult result;
    result.points.reserve(points.size());
    for (auto [px, py] : points) {
        FlowPoint fp;
        fp.x = px;
        fp.y = py;
        if (!flow_point_valid(px, py, cur.width, cur.height)) {
            result.points.push_back(fp);  // rejected: too close to the border
            continue;
        }
        std::vector<Ciphertext> candidates;
        candidates.reserve(9);
        for (const auto& off : kOffsets) {
            // Blind SSD between the 3x3 window around p in cur and the
            // window around p+d in prev: subtract, square, accumulate.
            std::vector<Ciphertext> terms;
            terms.reserve(9);
            for (int wy = -1; wy <= 1; ++wy) {
                for (int wx = -1; wx <= 1; ++wx) {
                    Ciphertext d =
                        blind_binop(BinOp::sub, cur.at(px + wx, py + wy),
                                    prev.at(px + off[0] + wx, py + off[1] + wy));
                    terms.push_back(blind_binop(BinOp::mul, d, d));
                }
            }
            Ciphertext ssd = terms[0];
            for (std::size_t i = 1; i < terms.size(); ++i)
                ssd = blind_binop(BinOp::add, ssd, terms[i]);
            candidates.push_back(std::move(ssd));
        }
        std::size_t best = session.argmin(candidates);
        fp.accepted = true;
        fp.dx = -kOffsets[best][0];  // displacement = -(matching offset)
        fp.dy = -kOffsets[best][1];
        result.points.push_back(fp);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Integral image and haar features
// ---------------------------------------------------------------------------

EncFrame integral_blind(const EncFrame& ef, unsigned workers) {
    EncFrame out = ef;
    // Row prefix sums, then column prefix sums; additions keep the order.
    parallel_for(std::size_t(ef.height), workers, [&](std::size_t y) {
        for (int x = 1; x < out.width; ++x)
            out.cells[y * out.width + x] = blind_binop(
                BinOp::add, out.cells[y * out.width + x], out.cells[y * out.width + x - 1]);
    });
    parallel_for(std::size_t(ef.width), workers, [&](std::size_t x) {
        for (int y = 1; y < out.height; ++y)
            out.cells[std::size_t(y) * out.width + x] =
                blind_binop(BinOp::add, out.cells[std::size_t(y) * out.width + x],
                            out.cells[std::size_t(y - 1) * out.width + x]);
    });
    return out;
}

namespace {

/// Rect sum from the blind integral; corners at index -1 contribute nothing.
Ciphertext rect_sum_blind(const EncFrame& ii, int x0, int y0, int x1, int y1) {
    Ciphertext acc = ii.at(x1, y1);
    if (x0 > 0) acc = blind_binop(BinOp::sub, acc, ii.at(x0 - 1, y1));
    if (y0 > 0) acc = blind_binop(BinOp::sub, acc, ii.at(x1, y0 - 1));
    if (x0 > 0 && y0 > 0) acc = blind_binop(BinOp::add, acc, ii.at(x0 - 1, y0 - 1));
    return acc;
}

}  // namespace

Ciphertext haar_blind(const EncFrame& ii, std::span<const WeightedRect> rects, int wx,
                      int wy) {
    if (rects.empty()) throw std::invalid_argument("haar feature needs at least one rect");
    const PublicKey& pk = ii.cells.front().key();
    Ciphertext acc = encrypt_public(0, pk);
    bool first = true;
    for (const WeightedRect& r : rects) {
        int x0 = wx + r.x, y0 = wy + r.y;
        int x1 = x0 + r.w - 1, y1 = y0 + r.h - 1;
        if (r.w <= 0 || r.h <= 0 || x0 < 0 || y0 < 0 || x1 >= ii.width || y1 >= ii.height)
            throw std::invalid_argument("haar rect outside the frame");
        Ciphertext weighted =
            semiblind(BinOp::mul, rect_sum_blind(ii, x0, y0, x1, y1), Int(r.weight), pk);
        if (first) {
            acc = std::move(weighted);
            first = false;
        } else {
            acc = blind_binop(BinOp::add, acc, weighted);
        }
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Cascade
// ---------------------------------------------------------------------------

std::vector<Detection> cascade_blind(const EncFrame& ef, const Cascade& c, int stride,
                                     OracleSession& session) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (c.window_w > ef.width || c.window_h > ef.height)
        throw std::invalid_argument("detection window larger than the frame");
    // Stage values stay within the stump count; make sure the envelope
    // admits them before sweeping.
    for (const Stage& st : c.stages) {
        if (Int(static_cast<long>(st.stumps.size())) >
            ef.cells.front().key().envelope().max_p)
            throw CapacityError("stage value budget exceeds the key envelope");
    }

    EncFrame ii = integral_blind(ef);
    const PublicKey& pk = ef.cells.front().key();
    std::vector<Detection> hits;
    for (int y = 0; y + c.window_h <= ef.height; y += stride) {
        for (int x = 0; x + c.window_w <= ef.width; x += stride) {
            bool pass = true;
            for (const Stage& stage : c.stages) {
                Ciphertext stage_value = encrypt_public(0, pk);
                for (const Stump& stump : stage.stumps) {
                    Ciphertext feature = haar_blind(ii, stump.rects, x, y);
                    bool bit = session.threshold_exceeds(feature, stump.threshold);
                    int v = bit ? stump.right_val : stump.left_val;
                    stage_value =
                        blind_binop(BinOp::add, stage_value, encrypt_public(Int(v), pk));
                }
                if (!session.threshold_exceeds(stage_value, stage.threshold)) {
                    pass = false;
                    break;  // early exit on the first failed stage
                }
            }
            if (pass) hits.push_back({x, y, c.window_w, c.window_h});
        }
    }
    return hits;
}

// ---------------------------------------------------------------------------
// Cascade files
// ---------------------------------------------------------------------------

namespace {
constexpr const char* kCascadeMagic = "cmpswhe-cascade v1";
}

void write_cascade(std::ostream& out, const Cascade& c) {
    out << kCascadeMagic << '\n';
    out << "window " << c.window_w << ' ' << c.window_h << '\n';
    for (const Stage& stage : c.stages) {
        out << "stage threshold " << to_decimal(stage.threshold) << '\n';
        for (const Stump& stump : stage.stumps) {
            out << "  stump threshold " << to_decimal(stump.threshold) << " left "
                << stump.left_val << " right " << stump.right_val << '\n';
            for (const WeightedRect& r : stump.rects)
                out << "    rect " << r.x << ' ' << r.y << ' ' << r.w << ' ' << r.h << ' '
                    << r.weight << '\n';
        }
    }
    out << "end\n";
}

Cascade read_cascade(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCascadeMagic)
        throw ParseError("not a cmpswhe cascade file", 1);
    Cascade c;
    std::size_t line_no = 1;
    bool ended = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word == "window") {
            if (!(ls >> c.window_w >> c.window_h) || c.window_w < 1 || c.window_h < 1)
                throw ParseError("bad window line", line_no);
        } else if (word == "stage") {
            std::string kw, value;
            if (!(ls >> kw >> value) || kw != "threshold")
                throw ParseError("bad stage line", line_no);
            Stage stage;
            stage.threshold = parse_decimal(value);
            c.stages.push_back(std::move(stage));
        } else if (word == "stump") {
            if (c.stages.empty()) throw ParseError("stump before any stage", line_no);
            std::string kw, value, lw, rw;
            int lv, rv;
            Stump stump;
            if (!(ls >> kw >> value) || kw != "threshold")
                throw ParseError("bad stump line", line_no);
            stump.threshold = parse_decimal(value);
            if (!(ls >> lw >> lv >> rw >> rv) || lw != "left" || rw != "right")
                throw ParseError("bad stump line", line_no);
            stump.left_val = lv;
            stump.right_val = rv;
            c.stages.back().stumps.push_back(std::move(stump));
        } else if (word == "rect") {
            if (c.stages.empty() || c.stages.back().stumps.empty())
                throw ParseError("rect before any stump", line_no);
            WeightedRect r;
            if (!(ls >> r.x >> r.y >> r.w >> r.h >> r.weight))
                throw ParseError("bad rect line", line_no);
            auto& rects = c.stages.back().stumps.back().rects;
            if (rects.size() >= 3) throw ParseError("more than 3 rects in a stump", line_no);
            if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.x + r.w > c.window_w ||
                r.y + r.h > c.window_h)
                throw ParseError("rect outside the detection window", line_no);
            rects.push_back(r);
        } else if (word == "end") {
            ended = true;
            break;
        } else {
            throw ParseError("unknown cascade keyword '" + word + "'", line_no);
        }
    }
    if (!ended) throw ParseError("cascade file missing 'end'");
    if (c.window_w < 1) throw ParseError("cascade file missing window");
    return c;
}

// ---------------------------------------------------------------------------
// Plaintext references
// ---------------------------------------------------------------------------

namespace plain {

Frame frame_diff_mask(const Frame& prev, const Frame& cur, int threshold) {
    if (!prev.same_size(cur)) throw std::invalid_argument("frame dimensions differ");
    Frame mask(cur.width, cur.height);
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        int d = int(cur.data[i]) - int(prev.data[i]);
        mask.data[i] = std::abs(d) > threshold ? 255 : 0;
    }
    return mask;
}

std::vector<std::int64_t> integral(const Frame& f) {
    std::vector<std::int64_t> ii(f.data.size(), 0);
    for (int y = 0; y < f.height; ++y) {
        std::int64_t row = 0;
        for (int x = 0; x < f.width; ++x) {
            row += f.at(x, y);
            ii[std::size_t(y) * f.width + x] =
                row + (y > 0 ? ii[std::size_t(y - 1) * f.width + x] : 0);
        }
    }
    return ii;
}

namespace {

std::int64_t corner(const std::vector<std::int64_t>& ii, int frame_w, int x, int y) {
    if (x < 0 || y < 0) return 0;
    return ii[std::size_t(y) * frame_w + x];
}

std::int64_t rect_sum(const std::vector<std::int64_t>& ii, int frame_w, int x0, int y0,
                      int x1, int y1) {
    return corner(ii, frame_w, x1, y1) - corner(ii, frame_w, x0 - 1, y1) -
           corner(ii, frame_w, x1, y0 - 1) + corner(ii, frame_w, x0 - 1, y0 - 1);
}

}  // namespace

std::int64_t haar_feature(const std::vector<std::int64_t>& ii, int frame_w,
                          std::span<const WeightedRect> rects, int wx, int wy) {
    std::int64_t acc = 0;
    for (const WeightedRect& r : rects) {
        int x0 = wx + r.x, y0 = wy + r.y;
        acc += std::int64_t(r.weight) *
               rect_sum(ii, frame_w, x0, y0, x0 + r.w - 1, y0 + r.h - 1);
    }
    return acc;
}

FlowResult optical_flow(const Frame& prev, const Frame& cur,
                        std::span<const std::pair<int, int>> points) {
    if (!prev.same_size(cur)) throw std::invalid_argument("frame dimensions differ");
    FlowResult result;
    for (auto [px, py] : points) {
        FlowPoint fp;
        fp.x = px;
        fp.y = py;
        if (!flow_point_valid(px, py, cur.width, cur.height)) {
            result.points.push_back(fp);
            continue;
        }
        long best_ssd = std::numeric_limits<long>::max();
        std::size_t best = 0;
        for (std::size_t k = 0; k < 9; ++k) {
            long ssd = 0;
            for (int wy = -1; wy <= 1; ++wy)
                for (int wx = -1; wx <= 1; ++wx) {
                    long d =
                        long(cur.at(px + wx, py + wy)) -
                        long(prev.at(px + kOffsets[k][0] + wx, py + kOffsets[k][1] + wy));
                    ssd += d * d;
                }
            if (ssd < best_ssd) {
                best_ssd = ssd;
                best = k;
            }
        }
        fp.accepted = true;
        fp.dx = -kOffsets[best][0];
        fp.dy = -kOffsets[best][1];
        result.points.push_back(fp);
    }
    return result;
}

std::vector<Detection> cascade_detect(const Frame& f, const Cascade& c, int stride) {
    std::vector<std::int64_t> ii = integral(f);
    std::vector<Detection> hits;
    for (int y = 0; y + c.window_h <= f.height; y += stride) {
        for (int x = 0; x + c.window_w <= f.width; x += stride) {
            bool pass = true;
            for (const Stage& stage : c.stages) {
                long stage_value = 0;
                for (const Stump& stump : stage.stumps) {
                    std::int64_t feature = haar_feature(ii, f.width, stump.rects, x, y);
                    stage_value +=
                        Int(feature) > stump.threshold ? stump.right_val : stump.left_val;
                }
                if (!(Int(stage_value) > stage.threshold)) {
                    pass = false;
                    break;
                }
            }
            if (pass) hits.push_back({x, y, c.window_w, c.window_h});
        }
    }
    return hits;
}

}  // namespace plain

std::vector<std::pair<int, int>> select_feature_points(const Frame& mask, int stride) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    std::vector<std::pair<int, int>> points;
    long sum_x = 0, sum_y = 0, count = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y) > 0) {
                ++count;
                sum_x += x;
                sum_y += y;
                if ((x % stride) == 0 && (y % stride) == 0) points.emplace_back(x, y);
            }
    if (count > 0) {
        int cx = int(sum_x / count), cy = int(sum_y / count);
        if (std::find(points.begin(), points.end(), std::make_pair(cx, cy)) == points.end())
            points.emplace_back(cx, cy);
    }
    return points;
}

}  // namespace cmpswhe::vision
