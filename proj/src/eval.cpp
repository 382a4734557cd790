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

#include "cmpswhe/eval.hpp"

#include <cctype>
#include <optional>
#include <stdexcept>

#include "cmpswhe/errors.hpp"

namespace cmpswhe {

namespace {

void require_same_group(const Ciphertext& x, const Ciphertext& y) {
    if (!x.key().same_group(y.key()))
        throw KeyMismatchError("operands belong to different modulus groups");
}

void require_order_capacity(const PublicKey& pk, std::uint32_t order) {
    const Envelope& env = pk.envelope();
    if (order > env.max_order ||
        !capacity_check(pk.amplification(), env.max_p, order, env.max_terms, pk.mset()))
        throw CapacityError(
            "resulting order " + std::to_string(order) +
            " exceeds the key envelope (max_order " + std::to_string(env.max_order) +
            ", B_s " + to_decimal(pk.mset().product()) + ")");
}

}  // namespace

Ciphertext homogenize(const Ciphertext& ct, std::uint32_t target_order,
                      const PublicKey& pk) {
    if (target_order < ct.order())
        throw std::invalid_argument("homogenize target order below the ciphertext order");
    if (target_order == ct.order()) return ct;
    require_order_capacity(pk, target_order);

    const std::size_t n = ct.rows(), m = ct.slots();
    std::vector<std::uint64_t> out(n * m);
    std::uint32_t delta = target_order - ct.order();
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t b = pk.mset().modulus(i);
        std::uint64_t factor = pow_mod(pk.amplification_mod(i), delta, b);
        for (std::size_t j = 0; j < m; ++j)
            out[i * m + j] = mul_mod(ct.at(i, j), factor, b);
    }
    return Ciphertext(ct.key(), std::move(out), target_order, ct.slot_uniform());
}

Ciphertext blind_binop(BinOp op, const Ciphertext& x, const Ciphertext& y) {
    require_same_group(x, y);
    const PublicKey& pk = x.key();

    std::uint32_t result_order;
    const Ciphertext* a = &x;
    const Ciphertext* b = &y;
    std::optional<Ciphertext> lifted;
    if (op == BinOp::mul) {
        result_order = x.order() + y.order();
    } else {
        result_order = std::max(x.order(), y.order());
        if (x.order() < result_order) {
            lifted = homogenize(x, result_order, pk);
            a = &*lifted;
        } else if (y.order() < result_order) {
            lifted = homogenize(y, result_order, pk);
            b = &*lifted;
        }
    }
    require_order_capacity(pk, result_order);

    // Residues stay below 2^62, so u + v and u + (mod - v) cannot overflow.
    const std::size_t n = x.rows(), m = x.slots();
    std::vector<std::uint64_t> out(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t mod = pk.mset().modulus(i);
        for (std::size_t j = 0; j < m; ++j) {
            std::uint64_t u = a->at(i, j);
            std::uint64_t v = b->at(i, j);
            std::uint64_t r;
            switch (op) {
                case BinOp::add: {
                    std::uint64_t s = u + v;
                    r = s >= mod ? s - mod : s;
                    break;
                }
                case BinOp::sub: {
                    std::uint64_t s = u + (mod - v);
                    r = s >= mod ? s - mod : s;
                    break;
                }
                case BinOp::mul: r = mul_mod(u, v, mod); break;
                default: throw std::logic_error("unreachable");
            }
            out[i * m + j] = r;
        }
    }
    return Ciphertext(pk, std::move(out), result_order,
                      x.slot_uniform() && y.slot_uniform());
}

Ciphertext blind_neg(const Ciphertext& x) {
    const PublicKey& pk = x.key();
    const std::size_t n = x.rows(), m = x.slots();
    std::vector<std::uint64_t> out(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t mod = pk.mset().modulus(i);
        for (std::size_t j = 0; j < m; ++j) {
            std::uint64_t v = x.at(i, j);
            out[i * m + j] = v == 0 ? 0 : mod - v;
        }
    }
    return Ciphertext(pk, std::move(out), x.order(), x.slot_uniform());
}

Ciphertext blind_pow(const Ciphertext& x, std::uint32_t k) {
    if (k == 0)
        throw std::invalid_argument(
            "x^0 is not supported: it would require an encryption of 1 at matching order");
    if (k == 1) return x;
    const PublicKey& pk = x.key();
    std::uint32_t result_order = x.order() * k;
    require_order_capacity(pk, result_order);

    const std::size_t n = x.rows(), m = x.slots();
    std::vector<std::uint64_t> out(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t mod = pk.mset().modulus(i);
        for (std::size_t j = 0; j < m; ++j)
            out[i * m + j] = pow_mod(x.at(i, j), k, mod);
    }
    return Ciphertext(pk, std::move(out), result_order, x.slot_uniform());
}

Ciphertext semiblind(BinOp op, const Ciphertext& x, const Int& value,
                     const PublicKey& pk) {
    return blind_binop(op, x, encrypt_public(value, pk));
}

// ---------------------------------------------------------------------------
// Expression parsing
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    std::unique_ptr<Expr> parse() {
        auto e = parse_expr_rule();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_ + 1);
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    std::unique_ptr<Expr> make(Expr::Kind kind, std::unique_ptr<Expr> lhs = nullptr,
                               std::unique_ptr<Expr> rhs = nullptr) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->lhs = std::move(lhs);
        e->rhs = std::move(rhs);
        return e;
    }

    std::unique_ptr<Expr> parse_expr_rule() {
        auto lhs = parse_term();
        for (;;) {
            if (eat('+'))
                lhs = make(Expr::Kind::add, std::move(lhs), parse_term());
            else if (eat('-'))
                lhs = make(Expr::Kind::sub, std::move(lhs), parse_term());
            else
                return lhs;
        }
    }

    std::unique_ptr<Expr> parse_term() {
        auto lhs = parse_unary();
        while (eat('*')) lhs = make(Expr::Kind::mul, std::move(lhs), parse_unary());
        return lhs;
    }

    std::unique_ptr<Expr> parse_unary() {
        if (eat('-')) return make(Expr::Kind::negate, parse_unary());
        return parse_power();
    }

    std::unique_ptr<Expr> parse_power() {
        auto base = parse_primary();
        while (eat('^')) {
            skip_ws();
            std::size_t at = pos_ + 1;
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                throw ParseError("exponent must be a nonnegative integer literal", at);
            Int value = parse_integer();
            if (!mpz_fits_ulong_p(value.get_mpz_t()) || value.get_ui() > 0xffffffffull)
                throw ParseError("exponent too large", at);
            auto e = make(Expr::Kind::pow, std::move(base));
            e->exponent = static_cast<std::uint32_t>(value.get_ui());
            base = std::move(e);
        }
        return base;
    }

    Int parse_integer() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        return Int(std::string(text_.substr(start, pos_ - start)), 10);
    }

    std::unique_ptr<Expr> parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_ + 1);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = parse_expr_rule();
            if (!eat(')')) throw ParseError("unbalanced parenthesis", pos_ + 1);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            auto e = make(Expr::Kind::literal);
            e->literal = parse_integer();
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            auto e = make(Expr::Kind::variable);
            e->name = std::string(text_.substr(start, pos_ - start));
            return e;
        }
        throw ParseError(std::string("unknown token '") + c + "'", pos_ + 1);
    }
};

}  // namespace

std::unique_ptr<Expr> parse_expr(std::string_view text) { return Parser(text).parse(); }

std::string dump_expr(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::literal: return "lit(" + to_decimal(e.literal) + ")";
        case Expr::Kind::variable: return "var(" + e.name + ")";
        case Expr::Kind::negate: return "neg(" + dump_expr(*e.lhs) + ")";
        case Expr::Kind::add:
            return "add(" + dump_expr(*e.lhs) + "," + dump_expr(*e.rhs) + ")";
        case Expr::Kind::sub:
            return "sub(" + dump_expr(*e.lhs) + "," + dump_expr(*e.rhs) + ")";
        case Expr::Kind::mul:
            return "mul(" + dump_expr(*e.lhs) + "," + dump_expr(*e.rhs) + ")";
        case Expr::Kind::pow:
            return "pow(" + dump_expr(*e.lhs) + "," + std::to_string(e.exponent) + ")";
    }
    throw std::logic_error("unreachable");
}

ExprBudget expr_budget(const Expr& e, const std::map<std::string, Ciphertext>& env) {
    switch (e.kind) {
        case Expr::Kind::literal: return {1, Int(1)};
        case Expr::Kind::variable: {
            auto it = env.find(e.name);
            if (it == env.end())
                throw std::invalid_argument("unbound variable '" + e.name + "'");
            return {it->second.order(), Int(1)};
        }
        case Expr::Kind::negate: return expr_budget(*e.lhs, env);
        case Expr::Kind::add:
        case Expr::Kind::sub: {
            ExprBudget l = expr_budget(*e.lhs, env);
            ExprBudget r = expr_budget(*e.rhs, env);
            return {std::max(l.order, r.order), l.terms + r.terms};
        }
        case Expr::Kind::mul: {
            ExprBudget l = expr_budget(*e.lhs, env);
            ExprBudget r = expr_budget(*e.rhs, env);
            return {l.order + r.order, l.terms * r.terms};
        }
        case Expr::Kind::pow: {
            ExprBudget l = expr_budget(*e.lhs, env);
            if (e.exponent == 0)
                throw std::invalid_argument("exponent 0 is not supported in blind evaluation");
            Int terms = 1;
            for (std::uint32_t i = 0; i < e.exponent; ++i) terms *= l.terms;
            return {l.order * e.exponent, terms};
        }
    }
    throw std::logic_error("unreachable");
}

Ciphertext eval_expr(const Expr& e, const std::map<std::string, Ciphertext>& env,
                     const PublicKey& pk) {
    ExprBudget budget = expr_budget(e, env);
    const Envelope& envp = pk.envelope();
    Int required = budget.terms * pow_int(pk.amplification() * envp.max_p, budget.order);
    if (required >= pk.mset().product())
        throw CapacityError("expression needs modulus product > " + to_decimal(required) +
                            " but the key provides " + to_decimal(pk.mset().product()));

    switch (e.kind) {
        case Expr::Kind::literal: return encrypt_public(e.literal, pk);
        case Expr::Kind::variable: return env.at(e.name);
        case Expr::Kind::negate: return blind_neg(eval_expr(*e.lhs, env, pk));
        case Expr::Kind::add:
            return blind_binop(BinOp::add, eval_expr(*e.lhs, env, pk),
                               eval_expr(*e.rhs, env, pk));
        case Expr::Kind::sub:
            return blind_binop(BinOp::sub, eval_expr(*e.lhs, env, pk),
                               eval_expr(*e.rhs, env, pk));
        case Expr::Kind::mul:
            return blind_binop(BinOp::mul, eval_expr(*e.lhs, env, pk),
                               eval_expr(*e.rhs, env, pk));
        case Expr::Kind::pow: return blind_pow(eval_expr(*e.lhs, env, pk), e.exponent);
    }
    throw std::logic_error("unreachable");
}

}  // namespace cmpswhe
