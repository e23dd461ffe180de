#ifndef MTFD_EXPRESSION_HPP
#define MTFD_EXPRESSION_HPP

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>

#include "mtfd/errors.hpp"
#include "mtfd/problem.hpp"

namespace mtfd {

// Tiny arithmetic grammar for coefficient functions of one variable x:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power        (unary minus below '^': -x^2 = -(x^2))
//   power  := primary ('^' factor)?
//   primary:= number | 'x' | 'pi' | ('sin'|'cos'|'exp') '(' expr ')' | '(' expr ')'
class ExpressionParser {
public:
    static ScalarField parse(const std::string& text) {
        ExpressionParser p(text);
        ScalarField f = p.expr();
        p.skip_ws();
        if (p.pos_ != text.size())
            throw spec_error("expression: trailing input at '" + text.substr(p.pos_) + "'");
        return f;
    }

private:
    explicit ExpressionParser(const std::string& t) : text_(t) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace((unsigned char)text_[pos_])) ++pos_;
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

    ScalarField expr() {
        ScalarField acc = term();
        for (;;) {
            if (eat('+')) {
                ScalarField rhs = term();
                acc = [acc, rhs](double x) { return acc(x) + rhs(x); };
            } else if (eat('-')) {
                ScalarField rhs = term();
                acc = [acc, rhs](double x) { return acc(x) - rhs(x); };
            } else {
                return acc;
            }
        }
    }
    ScalarField term() {
        ScalarField acc = factor();
        for (;;) {
            if (eat('*')) {
                ScalarField rhs = factor();
                acc = [acc, rhs](double x) { return acc(x) * rhs(x); };
            } else if (eat('/')) {
                ScalarField rhs = factor();
                acc = [acc, rhs](double x) { return acc(x) / rhs(x); };
            } else {
                return acc;
            }
        }
    }
    ScalarField factor() {
        if (eat('-')) {
            ScalarField v = factor();
            return [v](double x) { return -v(x); };
        }
        return power();
    }
    ScalarField power() {
        ScalarField base = primary();
        if (eat('^')) {
            ScalarField e = factor();  // right associative; exponent may be signed
            return [base, e](double x) { return std::pow(base(x), e(x)); };
        }
        return base;
    }
    ScalarField primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw spec_error("expression: unexpected end of input");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            ScalarField v = expr();
            if (!eat(')')) throw spec_error("expression: missing ')'");
            return v;
        }
        if (std::isdigit((unsigned char)c) || c == '.') {
            const char* start = text_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(start, &end);
            if (end == start) throw spec_error("expression: bad number");
            pos_ += end - start;
            return ProblemSpec::constant(v);
        }
        if (std::isalpha((unsigned char)c)) {
            std::size_t j = pos_;
            while (j < text_.size() && std::isalpha((unsigned char)text_[j])) ++j;
            std::string name = text_.substr(pos_, j - pos_);
            pos_ = j;
            if (name == "x") return [](double x) { return x; };
            if (name == "pi") return ProblemSpec::constant(M_PI);
            if (name == "sin" || name == "cos" || name == "exp") {
                if (!eat('(')) throw spec_error("expression: expected '(' after " + name);
                ScalarField a = expr();
                if (!eat(')')) throw spec_error("expression: missing ')'");
                if (name == "sin") return [a](double x) { return std::sin(a(x)); };
                if (name == "cos") return [a](double x) { return std::cos(a(x)); };
                return [a](double x) { return std::exp(a(x)); };
            }
            throw spec_error("expression: unknown identifier '" + name + "'");
        }
        throw spec_error(std::string("expression: unexpected character '") + c + "'");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

inline ScalarField parse_expression(const std::string& text) {
    return ExpressionParser::parse(text);
}

// evaluate a constant expression (no free variable use expected)
inline double parse_number(const std::string& text) {
    return ExpressionParser::parse(text)(0.0);
}

}  // namespace mtfd

#endif
