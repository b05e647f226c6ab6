#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "kps/rational_expr.hpp"

namespace kps {

/// Recursive-descent parser for the expression grammar:
///
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := ('+' | '-')* power
///   power  := atom ('^' signed-integer)?
///   atom   := integer | symbol | '(' expr ')'
///
/// '^' takes an integer exponent; a negative exponent is only accepted on an
/// atomic base (symbol or integer).  Symbols must exist in the environment
/// (canonical names and registered aliases both resolve).
class ExprParser {
public:
    ExprParser(EnvPtr env, std::string_view text) : env_(std::move(env)), s_(text) {}

    RatExpr parse() {
        RatExpr e = parse_expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw parse_error(msg, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    bool eat(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    RatExpr parse_expr() {
        RatExpr e = parse_term();
        for (;;) {
            if (eat('+')) e = e + parse_term();
            else if (eat('-')) e = e - parse_term();
            else return e;
        }
    }

    RatExpr parse_term() {
        RatExpr e = parse_unary();
        for (;;) {
            if (eat('*')) e = e * parse_unary();
            else if (eat('/')) {
                std::size_t at = pos_;
                RatExpr d = parse_unary();
                if (d.is_zero_expr()) throw parse_error("division by zero", at);
                e = e / d;
            } else return e;
        }
    }

    RatExpr parse_unary() {
        bool neg = false;
        for (;;) {
            if (eat('-')) neg = !neg;
            else if (eat('+')) continue;
            else break;
        }
        RatExpr e = parse_power();
        return neg ? -e : e;
    }

    RatExpr parse_power() {
        bool atomic = false;
        RatExpr base = parse_atom(atomic);
        if (peek() == '^') {
            ++pos_;
            long e = parse_exponent();
            if (e < 0 && !atomic) fail("negative exponent requires an atomic base");
            if (e < 0 && base.is_zero_expr()) fail("0 raised to a negative power");
            return base.pow(e);
        }
        return base;
    }

    long parse_exponent() {
        skip_ws();
        bool neg = false;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
            neg = s_[pos_] == '-';
            ++pos_;
        }
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
            fail("expected integer exponent after '^'");
        long v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + (s_[pos_] - '0');
            if (v > 4096) fail("exponent too large");
            ++pos_;
        }
        return neg ? -v : v;
    }

    RatExpr parse_atom(bool& atomic) {
        char c = peek();
        if (c == '(') {
            ++pos_;
            RatExpr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            atomic = false;
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            atomic = true;
            return RatExpr(env_, Rational(Integer(std::string(s_.substr(start, pos_ - start)))));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string name(s_.substr(start, pos_ - start));
            int i = env_ ? env_->index_of(name) : -1;
            if (i < 0) throw parse_error("unknown symbol '" + name + "'", start);
            atomic = true;
            return RatExpr::variable(env_, std::size_t(i));
        }
        if (c == '\0') fail("unexpected end of input; expected a number, symbol, or '('");
        fail(std::string("unexpected character '") + c + "'; expected a number, symbol, or '('");
    }

    EnvPtr env_;
    std::string_view s_;
    std::size_t pos_ = 0;
};

inline RatExpr parse_expr(const EnvPtr& env, std::string_view text) {
    return ExprParser(env, text).parse();
}

} // namespace kps
