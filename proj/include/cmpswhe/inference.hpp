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
#include <vector>

#include "cmpswhe/vision.hpp"

namespace cmpswhe::inference {

// ---------------------------------------------------------------------------
// Activation
// ---------------------------------------------------------------------------

/// Polynomial stand-in for ReLU: R(x) = k_0 x^m + k_1 x^(m-1) + ... + k_m.
struct PolyActivation {
    unsigned degree = 2;  // m
    double lo = -1.0, hi = 1.0;
    std::vector<double> coeffs;  // k_0..k_m (k_j multiplies x^(m-j))
    double max_deviation = 0.0;  // max |R - relu| over [lo, hi]

    double eval_float(double x) const;
};

/// Chebyshev-series fit of max(0, x) on [lo, hi], truncated at `degree`.
/// Requires degree >= 2 and lo < 0 < hi.
PolyActivation fit_relu_poly(unsigned degree, double lo, double hi);

/// floor(10^n * f): fixed-point conversion with floor semantics for
/// negatives ((-1.5, 1) -> -15).
std::int64_t to_fixed(double f, unsigned n);

/// Fixed-point activation coefficients K_j = to_fixed(k_j, n).
std::vector<std::int64_t> fixed_activation_coeffs(const PolyActivation& act, unsigned n);

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// Weight matrices as trained (floats); layer l maps weights[l][row][col],
/// applied as out[row] = sum_col w[row][col] * in[col].  No bias terms.
struct FloatModel {
    std::vector<std::vector<std::vector<double>>> weights;
};

/// The same matrices scaled by 10^precision and floored to integers.
struct FixedPointModel {
    unsigned precision = 2;  // n
    std::vector<std::vector<std::vector<std::int64_t>>> weights;
};

FixedPointModel quantize(const FloatModel& m, unsigned precision);

/// Text matrix model files with a (layers, dims, precision) header.
void write_model(std::ostream& out, const FloatModel& m, unsigned precision);
struct LoadedModel {
    FloatModel floats;
    FixedPointModel fixed;
};
LoadedModel load_model(std::istream& in);

/// Random toy MLP (two hidden layers of 16 by default) for demos and tests.
FloatModel make_toy_model(std::uint64_t seed);

/// Input layer: each pixel divided by 255, realized on the fixed-point grid
/// as round(pixel * 10^n / 255).
std::vector<std::int64_t> fixed_input(const vision::Frame& img, unsigned precision);

// ---------------------------------------------------------------------------
// Plaintext pipelines
// ---------------------------------------------------------------------------

/// Exact integer pipeline: dense layers, homogenized polynomial activation,
/// nearest-rounding rescale between layers; ties in the output argmax break
/// to the smallest index.  Returns the predicted digit and, optionally, the
/// decrypted-scale output vector.
int predict_fixed(const vision::Frame& img, const FixedPointModel& model,
                  const PolyActivation& act, std::vector<Int>* output = nullptr);

/// Double-precision pipeline with the same polynomial activation, for the
/// quantization check.
int predict_float(const vision::Frame& img, const FloatModel& model,
                  const PolyActivation& act);

// ---------------------------------------------------------------------------
// Blind pipeline
// ---------------------------------------------------------------------------

/// Holds the model weights encrypted under the public key (the server's
/// secret stays hidden from the client; the client's input stays hidden from
/// the server) plus the fixed activation.  Reusable across predictions.
class BlindClassifier {
public:
    BlindClassifier(const FixedPointModel& model, const PolyActivation& act,
                    const PublicKey& pk);

    /// Encrypts the input under the client key, runs blind dense layers and
    /// activations with oracle-assisted rescaling, decrypts the 1x10 output
    /// and returns the argmax (smallest index on ties).
    int predict(const vision::Frame& img, const PrivateKey& sk,
                vision::OracleSession& session, RandomSource& rng,
                std::vector<Int>* output = nullptr) const;

    unsigned precision() const { return precision_; }

private:
    struct EncMatrix {
        std::size_t rows = 0, cols = 0;
        std::vector<Ciphertext> cells;  // row-major
    };
    PublicKey pk_;
    unsigned precision_;
    unsigned degree_;
    std::vector<std::int64_t> act_coeffs_;  // K_0..K_m
    std::vector<EncMatrix> layers_;
};

/// Blind matrix-vector product: out[r] = sum_c weights[r*cols+c] * in[c].
std::vector<Ciphertext> blind_dense(std::span<const Ciphertext> input,
                                    std::span<const Ciphertext> weights,
                                    std::size_t rows, std::size_t cols);

/// Homogenized activation on a ciphertext whose fixed-point scale exponent
/// is `input_scale` (value ~ f * c^input_scale): returns
/// sum_j K_j * x^(m-j) * c^(j*input_scale), scale m*input_scale + 1.
Ciphertext blind_activation(const Ciphertext& x, std::span<const std::int64_t> k_fixed,
                            unsigned precision, unsigned input_scale,
                            const PublicKey& pk);

/// One-shot convenience wrapper around BlindClassifier.
int predict_blind(const vision::Frame& img, const FixedPointModel& model,
                  const PolyActivation& act, const PrivateKey& sk,
                  vision::OracleSession& session, RandomSource& rng);

}  // namespace cmpswhe::inference
