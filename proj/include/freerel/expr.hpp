#pragma once

// Text form of sigma-expressions.
//
//   expr   := term (('+' | '-') term)*
//   term   := ['-'] item ('*' item)*
//   item   := coeff | factor
//   factor := 'sigma' '(' INT ',' word ')' | 'tr' '(' word ')'
//   word   := atom ('*' atom)*
//   atom   := LETTER ["'"] | 'T' '(' word ')'
//   LETTER := 'x' INT | 'y' INT '_' INT
//   coeff  := INT ['/' INT]
//
// Whitespace is ignored. Parsing first builds an AST with source positions;
// lowering into a field canonicalizes every word class.

#include <gmpxx.h>

#include <cctype>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "freerel/error.hpp"
#include "freerel/field.hpp"
#include "freerel/sigma.hpp"
#include "freerel/words.hpp"

namespace freerel {

struct SourcePos {
    std::size_t line = 1;
    std::size_t column = 1;
};

struct FactorNode {
    std::uint32_t t = 1;  // tr is t = 1
    Word word;
    SourcePos pos;
};

struct ProductNode {
    bool negated = false;
    mpz_class num = 1;
    mpz_class den = 1;
    std::vector<FactorNode> factors;
    SourcePos pos;
};

struct ExprAst {
    std::vector<ProductNode> terms;
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string text) : text_(std::move(text)) {}

    ExprAst parse_expr() {
        ExprAst ast;
        skip_ws();
        if (at_end()) error("empty expression");
        bool negate = false;
        if (peek() == '-') {
            advance();
            negate = true;
        } else if (peek() == '+') {
            advance();
        }
        ast.terms.push_back(parse_term(negate));
        while (true) {
            skip_ws();
            if (at_end()) break;
            char c = peek();
            if (c != '+' && c != '-') error(std::string("expected '+', '-' or end of input, found '") + c + "'");
            advance();
            ast.terms.push_back(parse_term(c == '-'));
        }
        return ast;
    }

    Word parse_word_only() {
        skip_ws();
        Word w = parse_word();
        skip_ws();
        if (!at_end()) error(std::string("unexpected '") + peek() + "' after word");
        return w;
    }

private:
    ProductNode parse_term(bool negated) {
        ProductNode node;
        node.negated = negated;
        skip_ws();
        node.pos = pos();
        parse_item(node);
        while (true) {
            skip_ws();
            if (at_end() || peek() != '*') break;
            advance();
            parse_item(node);
        }
        return node;
    }

    void parse_item(ProductNode& node) {
        skip_ws();
        if (at_end()) error("expected a coefficient, sigma(...) or tr(...)");
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
            mpz_class num = parse_int();
            mpz_class den = 1;
            skip_ws();
            if (!at_end() && peek() == '/') {
                advance();
                skip_ws();
                SourcePos dp = pos();
                den = parse_int();
                if (den == 0) error_at(dp, "zero denominator");
            }
            node.num *= num;
            node.den *= den;
            return;
        }
        SourcePos start = pos();
        std::string ident = parse_ident();
        if (ident == "tr") {
            expect('(');
            Word w = parse_word();
            expect(')');
            node.factors.push_back({1, std::move(w), start});
        } else if (ident == "sigma") {
            expect('(');
            skip_ws();
            SourcePos tp = pos();
            mpz_class t = parse_int();
            if (t == 0) error_at(tp, "sigma(0, a) is the constant 1 by convention and is not a generator; write 1");
            if (t > 1000000) error_at(tp, "sigma index too large");
            expect(',');
            Word w = parse_word();
            expect(')');
            node.factors.push_back({static_cast<std::uint32_t>(t.get_ui()), std::move(w), start});
        } else if (ident.empty()) {
            error(std::string("unexpected '") + peek() + "'");
        } else {
            error_at(start, "unknown function '" + ident + "' (expected sigma or tr)");
        }
    }

    Word parse_word() {
        Word w = parse_atom();
        while (true) {
            skip_ws();
            if (at_end() || peek() != '*') break;
            advance();
            Word next = parse_atom();
            w.insert(w.end(), next.begin(), next.end());
        }
        return w;
    }

    Word parse_atom() {
        skip_ws();
        if (at_end()) error("expected a letter or T(...)");
        SourcePos start = pos();
        char c = peek();
        if (c == 'T') {
            advance();
            expect('(');
            Word inner = parse_word();
            expect(')');
            return maybe_prime(involution(inner));
        }
        if (c == 'x' || c == 'y') {
            advance();
            Letter l;
            l.k = parse_index("letter index");
            if (c == 'y') {
                if (at_end() || peek() != '_') error("expected '_' in y-letter (y<k>_<q>)");
                advance();
                l.q = parse_index("derivation index");
                if (l.q == 0) error_at(start, "y-letter derivation index must be >= 1");
            }
            if (l.k == 0) error_at(start, "letter index must be >= 1");
            return maybe_prime(Word{l});
        }
        error(std::string("expected a letter (x<k>, y<k>_<q>) or T(...), found '") + c + "'");
    }

    Word maybe_prime(Word w) {
        skip_ws();
        while (!at_end() && peek() == '\'') {
            advance();
            w = involution(w);
            skip_ws();
        }
        return w;
    }

    std::uint32_t parse_index(const char* what) {
        if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) error(std::string("expected ") + what);
        mpz_class v = parse_int();
        if (v > 0xFFF) error(std::string(what) + " out of range");
        return static_cast<std::uint32_t>(v.get_ui());
    }

    mpz_class parse_int() {
        if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) error("expected an integer");
        std::string digits;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
            digits += peek();
            advance();
        }
        return mpz_class(digits);
    }

    std::string parse_ident() {
        std::string s;
        while (!at_end() && std::isalpha(static_cast<unsigned char>(peek()))) {
            s += peek();
            advance();
        }
        return s;
    }

    void expect(char c) {
        skip_ws();
        if (at_end()) error(std::string("expected '") + c + "', found end of input");
        if (peek() != c) error(std::string("expected '") + c + "', found '" + peek() + "'");
        advance();
    }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
    }

    bool at_end() const { return i_ >= text_.size(); }
    char peek() const { return text_[i_]; }
    void advance() {
        if (text_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }
    SourcePos pos() const { return {line_, col_}; }

    [[noreturn]] void error(const std::string& msg) const { throw ParseError(msg, line_, col_); }
    [[noreturn]] static void error_at(SourcePos p, const std::string& msg) { throw ParseError(msg, p.line, p.column); }

    std::string text_;
    std::size_t i_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

}  // namespace detail

inline ExprAst parse_ast(const std::string& text) { return detail::Parser(text).parse_expr(); }

inline Word parse_word(const std::string& text) { return detail::Parser(text).parse_word_only(); }

/// Lowers an AST into the field; words must be primitive.
template <Field F>
SigmaPoly<F> lower(const ExprAst& ast, const F& field) {
    SigmaPoly<F> out(field);
    for (const auto& term : ast.terms) {
        std::vector<SigmaMonomial::Entry> entries;
        for (const auto& f : term.factors) {
            CanonicalForm cf = canonicalize(f.word);
            if (cf.power != 1) {
                throw ParseError("word " + word_str(f.word) + " is a proper power of " + word_str(cf.root.canonical) +
                                     "; only primitive words are generators",
                                 f.pos.line, f.pos.column);
            }
            entries.emplace_back(SigmaFactor{f.t, std::move(cf.root)}, 1);
        }
        auto c = field.from_rational(term.num, term.den);
        if (term.negated) c = field.neg(c);
        out.add_term(SigmaMonomial(std::move(entries)), c);
    }
    return out;
}

template <Field F>
SigmaPoly<F> parse_expr(const std::string& text, const F& field) {
    return lower(parse_ast(text), field);
}

/// Canonical text; parse_expr(format_expr(f)) == f.
template <Field F>
std::string format_expr(const SigmaPoly<F>& f) {
    return f.str();
}

}  // namespace freerel
