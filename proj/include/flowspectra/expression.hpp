#pragma once

#include "flowspectra/error.hpp"

#include <Eigen/Core>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

namespace flowspectra {

/// Arithmetic over ambient coordinates:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | primary
///   primary := number | x | y | z | exp '(' expr ')' | '(' expr ')'
class Expression {
public:
    explicit Expression(std::string text)
        : text_(std::move(text))
    {
        pos_ = 0;
        root_ = parse_expr();
        skip_space();
        if (pos_ != text_.size()) {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
    }

    double operator()(const Eigen::Vector3d& p) const { return eval(*root_, p); }

    double operator()(const Eigen::Vector2d& p) const
    {
        return eval(*root_, Eigen::Vector3d(p.x(), p.y(), 0.0));
    }

    const std::string& text() const noexcept { return text_; }

private:
    enum class Op { Number, X, Y, Z, Neg, Add, Sub, Mul, Div, Exp };

    struct Node {
        Op op;
        double value = 0.0;
        std::unique_ptr<Node> lhs;
        std::unique_ptr<Node> rhs;
    };

    static std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> a = {}, std::unique_ptr<Node> b = {})
    {
        auto n = std::make_unique<Node>();
        n->op = op;
        n->lhs = std::move(a);
        n->rhs = std::move(b);
        return n;
    }

    static double eval(const Node& n, const Eigen::Vector3d& p)
    {
        switch (n.op) {
        case Op::Number: return n.value;
        case Op::X: return p.x();
        case Op::Y: return p.y();
        case Op::Z: return p.z();
        case Op::Neg: return -eval(*n.lhs, p);
        case Op::Add: return eval(*n.lhs, p) + eval(*n.rhs, p);
        case Op::Sub: return eval(*n.lhs, p) - eval(*n.rhs, p);
        case Op::Mul: return eval(*n.lhs, p) * eval(*n.rhs, p);
        case Op::Div: return eval(*n.lhs, p) / eval(*n.rhs, p);
        case Op::Exp: return std::exp(eval(*n.lhs, p));
        }
        return 0.0;
    }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConfigError("expression '" + text_ + "' at column " + std::to_string(pos_ + 1) + ": " +
                          msg);
    }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            fail(std::string("expected '") + c + "'");
        }
    }

    std::unique_ptr<Node> parse_expr()
    {
        auto lhs = parse_term();
        while (true) {
            if (accept('+')) {
                lhs = make(Op::Add, std::move(lhs), parse_term());
            } else if (accept('-')) {
                lhs = make(Op::Sub, std::move(lhs), parse_term());
            } else {
                return lhs;
            }
        }
    }

    std::unique_ptr<Node> parse_term()
    {
        auto lhs = parse_unary();
        while (true) {
            if (accept('*')) {
                lhs = make(Op::Mul, std::move(lhs), parse_unary());
            } else if (accept('/')) {
                lhs = make(Op::Div, std::move(lhs), parse_unary());
            } else {
                return lhs;
            }
        }
    }

    std::unique_ptr<Node> parse_unary()
    {
        if (accept('-')) {
            return make(Op::Neg, parse_unary());
        }
        if (accept('+')) {
            return parse_unary();
        }
        return parse_primary();
    }

    std::unique_ptr<Node> parse_primary()
    {
        skip_space();
        if (pos_ >= text_.size()) {
            fail("unexpected end of expression");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) {
                fail("bad number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = make(Op::Number);
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t end = pos_;
            while (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) {
                ++end;
            }
            const std::string word = text_.substr(pos_, end - pos_);
            if (word == "x" || word == "y" || word == "z") {
                pos_ = end;
                return make(word == "x" ? Op::X : word == "y" ? Op::Y : Op::Z);
            }
            if (word == "exp") {
                pos_ = end;
                expect('(');
                auto arg = parse_expr();
                expect(')');
                return make(Op::Exp, std::move(arg));
            }
            fail("unknown name '" + word + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string text_;
    std::size_t pos_ = 0;
    std::shared_ptr<Node> root_;
};

} // namespace flowspectra
