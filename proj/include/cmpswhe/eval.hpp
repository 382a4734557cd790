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

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "cmpswhe/cipher.hpp"

namespace cmpswhe {

enum class BinOp { add, sub, mul };

/// Raises a ciphertext to a higher order by multiplying every residue by
/// a^(target - order); addition operands must share an order so that one
/// division by a^t decrypts both.
Ciphertext homogenize(const Ciphertext& ct, std::uint32_t target_order,
                      const PublicKey& pk);

/// Element-wise residue arithmetic per row modulus.  Orders are equalized
/// automatically before add/sub; multiplication sums them.
Ciphertext blind_binop(BinOp op, const Ciphertext& x, const Ciphertext& y);

/// Row-wise v -> (b_i - v) mod b_i; order unchanged.
Ciphertext blind_neg(const Ciphertext& x);

/// Entry-wise modular exponentiation; order becomes k * order.  k >= 1
/// (x^0 would need an encryption of 1 at matching order, which the scheme
/// does not define).
Ciphertext blind_pow(const Ciphertext& x, std::uint32_t k);

/// Blind operation with one plaintext operand, encrypted under the public
/// key at call time.
Ciphertext semiblind(BinOp op, const Ciphertext& x, const Int& value,
                     const PublicKey& pk);

// ---------------------------------------------------------------------------
// Arithmetic expressions over named ciphertexts
// ---------------------------------------------------------------------------

/// Grammar (EBNF, also in docs/expression-grammar.md):
///   expr    = term { ("+" | "-") term } ;
///   term    = unary { "*" unary } ;
///   unary   = "-" unary | power ;
///   power   = primary { "^" integer } ;
///   primary = integer | identifier | "(" expr ")" ;
/// Exponents must be nonnegative integer literals; +, -, * are
/// left-associative; "^" binds tighter than unary minus.
struct Expr {
    enum class Kind { literal, variable, negate, add, sub, mul, pow };
    Kind kind;
    Int literal;                  // Kind::literal
    std::string name;             // Kind::variable
    std::uint32_t exponent = 0;   // Kind::pow
    std::unique_ptr<Expr> lhs, rhs;
};

/// Throws ParseError with a character position on malformed input.
std::unique_ptr<Expr> parse_expr(std::string_view text);

/// Canonical textual dump (for tests and diagnostics), e.g.
/// "add(mul(var(x),var(y)),var(z))".
std::string dump_expr(const Expr& e);

/// Per-subtree capacity bookkeeping: `order` is the polynomial order t and
/// `terms` bounds the number w of additive monomials.
struct ExprBudget {
    std::uint32_t order = 1;
    Int terms;
};
ExprBudget expr_budget(const Expr& e,
                       const std::map<std::string, Ciphertext>& env);

/// Evaluates under the public key only (literals enter semi-blind).  Fails
/// fast with CapacityError, reporting required vs. available B_s, before any
/// subtree could wrap around the modulus product.
Ciphertext eval_expr(const Expr& e, const std::map<std::string, Ciphertext>& env,
                     const PublicKey& pk);

}  // namespace cmpswhe
