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

#include "cmpswhe/inference.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cmpswhe/errors.hpp"

namespace cmpswhe::inference {

// ---------------------------------------------------------------------------
// Activation fitting
// ---------------------------------------------------------------------------

double PolyActivation::eval_float(double x) const {
    double acc = 0;
    for (double k : coeffs) acc = acc * x + k;
    return acc;
}

PolyActivation fit_relu_poly(unsigned degree, double lo, double hi) {
    if (degree < 2) throw std::invalid_argument("activation degree must be >= 2");
    if (!(lo < 0.0 && 0.0 < hi)) throw std::invalid_argument("fit interval must straddle 0");

    const unsigned m = degree;
    const int nodes = 512;
    auto relu = [](double x) { return x > 0 ? x : 0.0; };
    auto to_x = [&](double t) { return lo + (t + 1.0) * 0.5 * (hi - lo); };

    // Chebyshev series coefficients on [-1, 1].
    std::vector<double> cheb(m + 1, 0.0);
    for (unsigned k = 0; k <= m; ++k) {
        double acc = 0;
        for (int j = 0; j < nodes; ++j) {
            double theta = M_PI * (j + 0.5) / nodes;
            acc += relu(to_x(std::cos(theta))) * std::cos(k * theta);
        }
        cheb[k] = acc * 2.0 / nodes;
    }
    cheb[0] *= 0.5;

    // Expand sum c_k T_k(t) into a power series in t.
    std::vector<std::vector<double>> T(m + 1);
    T[0] = {1.0};
    if (m >= 1) T[1] = {0.0, 1.0};
    for (unsigned k = 2; k <= m; ++k) {
        T[k].assign(k + 1, 0.0);
        for (std::size_t i = 0; i < T[k - 1].size(); ++i) T[k][i + 1] += 2.0 * T[k - 1][i];
        for (std::size_t i = 0; i < T[k - 2].size(); ++i) T[k][i] -= T[k - 2][i];
    }
    std::vector<double> in_t(m + 1, 0.0);  // coefficient of t^i
    for (unsigned k = 0; k <= m; ++k)
        for (std::size_t i = 0; i < T[k].size(); ++i) in_t[i] += cheb[k] * T[k][i];

    // Substitute t = (2x - (lo+hi)) / (hi-lo): accumulate binomially.
    double alpha = 2.0 / (hi - lo);
    double beta = -(lo + hi) / (hi - lo);
    std::vector<double> in_x(m + 1, 0.0);
    std::vector<double> term{1.0};  // (alpha*x + beta)^i
    for (unsigned i = 0; i <= m; ++i) {
        for (std::size_t d = 0; d < term.size(); ++d) in_x[d] += in_t[i] * term[d];
        if (i < m) {
            std::vector<double> next(term.size() + 1, 0.0);
            for (std::size_t d = 0; d < term.size(); ++d) {
                next[d] += term[d] * beta;
                next[d + 1] += term[d] * alpha;
            }
            term = std::move(next);
        }
    }

    PolyActivation act;
    act.degree = m;
    act.lo = lo;
    act.hi = hi;
    act.coeffs.resize(m + 1);
    for (unsigned j = 0; j <= m; ++j) act.coeffs[j] = in_x[m - j];  // k_j on x^(m-j)

    double dev = 0;
    const int samples = 20001;
    for (int s = 0; s < samples; ++s) {
        double x = lo + (hi - lo) * s / (samples - 1);
        dev = std::max(dev, std::abs(act.eval_float(x) - relu(x)));
    }
    act.max_deviation = dev;
    return act;
}

std::int64_t to_fixed(double f, unsigned n) {
    double scale = std::pow(10.0, double(n));
    return static_cast<std::int64_t>(std::floor(scale * f));
}

std::vector<std::int64_t> fixed_activation_coeffs(const PolyActivation& act, unsigned n) {
    std::vector<std::int64_t> out;
    out.reserve(act.coeffs.size());
    for (double k : act.coeffs) out.push_back(to_fixed(k, n));
    return out;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

FixedPointModel quantize(const FloatModel& m, unsigned precision) {
    FixedPointModel out;
    out.precision = precision;
    out.weights.reserve(m.weights.size());
    for (const auto& layer : m.weights) {
        std::vector<std::vector<std::int64_t>> fixed_layer;
        fixed_layer.reserve(layer.size());
        for (const auto& row : layer) {
            std::vector<std::int64_t> fixed_row;
            fixed_row.reserve(row.size());
            for (double w : row) fixed_row.push_back(to_fixed(w, precision));
            fixed_layer.push_back(std::move(fixed_row));
        }
        out.weights.push_back(std::move(fixed_layer));
    }
    return out;
}

namespace {
constexpr const char* kModelMagic = "cmpswhe-model v1";
}

void write_model(std::ostream& out, const FloatModel& m, unsigned precision) {
    out << kModelMagic << '\n';
    out << "precision " << precision << '\n';
    out << "layers " << m.weights.size() << '\n';
    out.precision(9);
    for (const auto& layer : m.weights) {
        if (layer.empty()) throw std::invalid_argument("empty model layer");
        out << "layer " << layer.size() << ' ' << layer[0].size() << '\n';
        for (const auto& row : layer) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << ' ';
                out << row[i];
            }
            out << '\n';
        }
    }
    out << "end\n";
}

LoadedModel load_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kModelMagic)
        throw ParseError("not a cmpswhe model file", 1);
    std::size_t line_no = 1;
    unsigned precision = 0;
    std::size_t layer_count = 0;
    FloatModel fm;
    bool saw_precision = false, saw_layers = false, ended = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word == "precision") {
            if (!(ls >> precision)) throw ParseError("bad precision line", line_no);
            saw_precision = true;
        } else if (word == "layers") {
            if (!(ls >> layer_count)) throw ParseError("bad layers line", line_no);
            saw_layers = true;
        } else if (word == "layer") {
            std::size_t rows = 0, cols = 0;
            if (!(ls >> rows >> cols) || rows < 1 || cols < 1)
                throw ParseError("bad layer header", line_no);
            if (!fm.weights.empty() && fm.weights.back()[0].size() != 0 &&
                cols != fm.weights.back().size())
                throw ParseError("layer input width does not match the previous layer",
                                 line_no);
            std::vector<std::vector<double>> layer;
            layer.reserve(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                if (!std::getline(in, line)) throw ParseError("truncated layer", line_no);
                ++line_no;
                std::istringstream row_in(line);
                std::vector<double> row(cols);
                for (std::size_t c = 0; c < cols; ++c)
                    if (!(row_in >> row[c])) throw ParseError("short weight row", line_no);
                double extra;
                if (row_in >> extra) throw ParseError("trailing weights in row", line_no);
                layer.push_back(std::move(row));
            }
            fm.weights.push_back(std::move(layer));
        } else if (word == "end") {
            ended = true;
            break;
        } else {
            throw ParseError("unknown model keyword '" + word + "'", line_no);
        }
    }
    if (!saw_precision || !saw_layers || !ended)
        throw ParseError("incomplete model file");
    if (fm.weights.size() != layer_count)
        throw ParseError("layer count does not match the header");
    LoadedModel lm;
    lm.fixed = quantize(fm, precision);
    lm.floats = std::move(fm);
    return lm;
}

FloatModel make_toy_model(std::uint64_t seed) {
    SeededRandom rng(seed);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (double(rng.next_u64() >> 11) / double(1ull << 53));
    };
    FloatModel m;
    const std::vector<std::pair<std::size_t, std::size_t>> dims{{16, 784}, {16, 16}, {10, 16}};
    for (auto [rows, cols] : dims) {
        std::vector<std::vector<double>> layer(rows, std::vector<double>(cols));
        double bound = cols > 100 ? 0.1 : 0.3;
        for (auto& row : layer)
            for (double& w : row) w = uniform(-bound, bound);
        m.weights.push_back(std::move(layer));
    }
    return m;
}

std::vector<std::int64_t> fixed_input(const vision::Frame& img, unsigned precision) {
    std::int64_t c = 1;
    for (unsigned i = 0; i < precision; ++i) c *= 10;
    std::vector<std::int64_t> out;
    out.reserve(img.data.size());
    for (std::uint8_t px : img.data)
        out.push_back((2 * std::int64_t(px) * c + 255) / 510);  // round(px*c/255)
    return out;
}

// ---------------------------------------------------------------------------
// Plaintext pipelines
// ---------------------------------------------------------------------------

namespace {

Int int_pow10(unsigned n) {
    Int c = 1;
    for (unsigned i = 0; i < n; ++i) c *= 10;
    return c;
}

std::size_t argmax_smallest_tie(const std::vector<Int>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace

int predict_fixed(const vision::Frame& img, const FixedPointModel& model,
                  const PolyActivation& act, std::vector<Int>* output) {
    const unsigned n = model.precision;
    const Int c = int_pow10(n);
    std::vector<std::int64_t> k_fixed = fixed_activation_coeffs(act, n);
    const unsigned m = act.degree;

    std::vector<Int> layer;
    for (std::int64_t v : fixed_input(img, n)) layer.emplace_back(static_cast<long>(v));
    unsigned scale = 1;

    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        if (w[0].size() != layer.size())
            throw std::invalid_argument("layer width mismatch in the fixed pipeline");
        std::vector<Int> product(w.size(), Int(0));
        for (std::size_t r = 0; r < w.size(); ++r)
            for (std::size_t col = 0; col < layer.size(); ++col)
                product[r] += Int(static_cast<long>(w[r][col])) * layer[col];
        unsigned product_scale = scale + 1;

        if (l + 1 == model.weights.size()) {
            layer = std::move(product);
            scale = product_scale;
            break;
        }
        // Homogenized activation then rescale back to a single magnification.
        unsigned act_scale = m * product_scale + 1;
        std::vector<Int> activated(product.size());
        for (std::size_t r = 0; r < product.size(); ++r) {
            Int acc = 0;
            for (unsigned j = 0; j <= m; ++j) {
                Int term = Int(static_cast<long>(k_fixed[j]));
                term *= pow_int(product[r], m - j);
                term *= pow_int(c, static_cast<unsigned long>(j) * product_scale);
                acc += term;
            }
            activated[r] = acc;
        }
        Int magnification = pow_int(c, act_scale - 1);
        for (auto& v : activated) v = div_nearest(v, magnification);
        layer = std::move(activated);
        scale = 1;
    }
    if (output) *output = layer;
    return static_cast<int>(argmax_smallest_tie(layer));
}

int predict_float(const vision::Frame& img, const FloatModel& model,
                  const PolyActivation& act) {
    std::vector<double> layer;
    layer.reserve(img.data.size());
    for (std::uint8_t px : img.data) layer.push_back(double(px) / 255.0);

    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        std::vector<double> product(w.size(), 0.0);
        for (std::size_t r = 0; r < w.size(); ++r)
            for (std::size_t col = 0; col < layer.size(); ++col)
                product[r] += w[r][col] * layer[col];
        if (l + 1 == model.weights.size()) {
            layer = std::move(product);
            break;
        }
        for (auto& v : product) v = act.eval_float(v);
        layer = std::move(product);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < layer.size(); ++i)
        if (layer[i] > layer[best]) best = i;
    return static_cast<int>(best);
}

// ---------------------------------------------------------------------------
// Blind pipeline
// ---------------------------------------------------------------------------

std::vector<Ciphertext> blind_dense(std::span<const Ciphertext> input,
                                    std::span<const Ciphertext> weights,
                                    std::size_t rows, std::size_t cols) {
    if (weights.size() != rows * cols)
        throw std::invalid_argument("weight matrix shape mismatch");
    if (input.size() != cols)
        throw std::invalid_argument("input width does not match the weight matrix");
    std::vector<Ciphertext> out;
    out.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        Ciphertext acc = blind_binop(BinOp::mul, weights[r * cols], input[0]);
        for (std::size_t c = 1; c < cols; ++c)
            acc = blind_binop(BinOp::add, acc,
                              blind_binop(BinOp::mul, weights[r * cols + c], input[c]));
        out.push_back(std::move(acc));
    }
    return out;
}

Ciphertext blind_activation(const Ciphertext& x, std::span<const std::int64_t> k_fixed,
                            unsigned precision, unsigned input_scale,
                            const PublicKey& pk) {
    if (k_fixed.size() < 2) throw std::invalid_argument("activation needs degree >= 1");
    const unsigned m = static_cast<unsigned>(k_fixed.size() - 1);
    const Int c = int_pow10(precision);

    Ciphertext acc = [&] {
        // j = 0 term: K_0 * x^m
        Ciphertext p = blind_pow(x, m);
        return semiblind(BinOp::mul, p, Int(static_cast<long>(k_fixed[0])), pk);
    }();
    for (unsigned j = 1; j <= m; ++j) {
        Int coeff = Int(static_cast<long>(k_fixed[j])) *
                    pow_int(c, static_cast<unsigned long>(j) * input_scale);
        Ciphertext term =
            j == m ? encrypt_public(coeff, pk)
                   : semiblind(BinOp::mul, blind_pow(x, m - j), coeff, pk);
        acc = blind_binop(BinOp::add, acc, term);
    }
    return acc;
}

BlindClassifier::BlindClassifier(const FixedPointModel& model, const PolyActivation& act,
                                 const PublicKey& pk)
    : pk_(pk), precision_(model.precision), degree_(act.degree) {
    act_coeffs_ = fixed_activation_coeffs(act, precision_);
    layers_.reserve(model.weights.size());
    for (const auto& layer : model.weights) {
        EncMatrix em;
        em.rows = layer.size();
        em.cols = layer[0].size();
        em.cells.reserve(em.rows * em.cols);
        for (const auto& row : layer) {
            if (row.size() != em.cols)
                throw std::invalid_argument("ragged weight matrix");
            for (std::int64_t w : row)
                em.cells.push_back(encrypt_public(Int(static_cast<long>(w)), pk_));
        }
        layers_.push_back(std::move(em));
    }
}

int BlindClassifier::predict(const vision::Frame& img, const PrivateKey& sk,
                             vision::OracleSession& session, RandomSource& rng,
                             std::vector<Int>* output) const {
    if (!sk.public_key().same_group(pk_))
        throw KeyMismatchError("client key does not match the classifier key");
    const Int c = int_pow10(precision_);

    std::vector<Ciphertext> layer;
    std::vector<std::int64_t> l0 = fixed_input(img, precision_);
    layer.reserve(l0.size());
    for (std::int64_t v : l0)
        layer.push_back(encrypt_private(Int(static_cast<long>(v)), sk, rng));
    unsigned scale = 1;

    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const EncMatrix& em = layers_[l];
        std::vector<Ciphertext> product = blind_dense(layer, em.cells, em.rows, em.cols);
        unsigned product_scale = scale + 1;
        if (l + 1 == layers_.size()) {
            layer = std::move(product);
            scale = product_scale;
            break;
        }
        unsigned act_scale = degree_ * product_scale + 1;
        Int magnification = pow_int(c, act_scale - 1);
        std::vector<Ciphertext> next;
        next.reserve(product.size());
        for (const Ciphertext& p : product) {
            Ciphertext activated =
                blind_activation(p, act_coeffs_, precision_, product_scale, pk_);
            next.push_back(session.rescale_reencrypt(activated, magnification, rng));
        }
        layer = std::move(next);
        scale = 1;
    }

    std::vector<Int> values;
    values.reserve(layer.size());
    for (const Ciphertext& ct : layer) values.push_back(decrypt(ct, sk, Rounding::nearest));
    if (output) *output = values;
    return static_cast<int>(argmax_smallest_tie(values));
}

int predict_blind(const vision::Frame& img, const FixedPointModel& model,
                  const PolyActivation& act, const PrivateKey& sk,
                  vision::OracleSession& session, RandomSource& rng) {
    BlindClassifier classifier(model, act, sk.public_key());
    return classifier.predict(img, sk, session, rng);
}

}  // namespace cmpswhe::inference
