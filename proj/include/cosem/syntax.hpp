#ifndef COSEM_SYNTAX_HPP
#define COSEM_SYNTAX_HPP

#include <cctype>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "term.hpp"

namespace cosem {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t pos, const std::string& msg)
        : std::runtime_error("parse error at " + std::to_string(pos) + ": " + msg), pos_(pos)
    {
    }
    std::size_t position() const noexcept { return pos_; }

private:
    std::size_t pos_;
};

class OpenTermError : public std::invalid_argument {
public:
    explicit OpenTermError(const std::string& name)
        : std::invalid_argument("open term: free variable '" + name + "'"), name_(name)
    {
    }
    const std::string& variable() const noexcept { return name_; }

private:
    std::string name_;
};

inline bool is_value(const Term& a) noexcept { return a.is_const() || a.is_abs(); }

namespace detail {

// Plain structural substitution. Capture-avoiding whenever `b` is closed,
// which is the only way the evaluators use it on closed programs. On open
// replacements it may capture, like the textbook definition without renaming.
inline Term subst_raw(const Term& a, const std::string& x, const Term& b)
{
    if (!a.has_free(x)) return a;
    switch (a.kind()) {
    case Term::Kind::Var: return b;
    case Term::Kind::Const: return a;
    case Term::Kind::Abs:
        // has_free(x) already excludes the shadowed case.
        return Term::abs(a.param(), subst_raw(a.body(), x, b));
    case Term::Kind::App:
        return Term::app(subst_raw(a.fun(), x, b), subst_raw(a.arg(), x, b));
    }
    return a;
}

} // namespace detail

// a[x <- b] for closed b.
inline Term subst(const Term& a, const std::string& x, const Term& b)
{
    if (!b.is_closed()) throw OpenTermError(b.free_vars().front());
    return detail::subst_raw(a, x, b);
}

inline std::size_t left_app_height(const Term& a) noexcept
{
    std::size_t h = 0;
    const Term* t = &a;
    while (t->is_app()) {
        ++h;
        t = &t->fun();
    }
    return h;
}

bool is_cps(const Term& a);

// Atoms: x | c | \x. b  with b a CPS term.
inline bool is_atom(const Term& a)
{
    switch (a.kind()) {
    case Term::Kind::Var:
    case Term::Kind::Const: return true;
    case Term::Kind::Abs: return is_cps(a.body());
    case Term::Kind::App: return false;
    }
    return false;
}

// CPS terms: a | b a.
inline bool is_cps(const Term& a)
{
    const Term* t = &a;
    while (t->is_app()) {
        if (!is_atom(t->arg())) return false;
        t = &t->fun();
    }
    return is_atom(*t);
}

namespace detail {

inline DbTerm to_db(const Term& a, std::vector<std::string>& scope)
{
    switch (a.kind()) {
    case Term::Kind::Var:
        for (std::size_t i = scope.size(); i-- > 0;)
            if (scope[i] == a.name()) return DbTerm::var(scope.size() - 1 - i);
        throw OpenTermError(a.name());
    case Term::Kind::Const: return DbTerm::constant(a.value());
    case Term::Kind::Abs: {
        scope.push_back(a.param());
        DbTerm body = to_db(a.body(), scope);
        scope.pop_back();
        return DbTerm::abs(std::move(body));
    }
    case Term::Kind::App: {
        DbTerm f = to_db(a.fun(), scope);
        return DbTerm::app(std::move(f), to_db(a.arg(), scope));
    }
    }
    throw std::logic_error("unreachable");
}

} // namespace detail

inline DbTerm to_debruijn(const Term& a)
{
    std::vector<std::string> scope;
    return detail::to_db(a, scope);
}

// Fixed table of named terms: @delta @omega @Omega @Y @F.
class MacroTable {
public:
    static const MacroTable& instance()
    {
        static const MacroTable table;
        return table;
    }

    const Term* find(std::string_view name) const
    {
        auto it = entries_.find(std::string(name));
        return it == entries_.end() ? nullptr : &it->second;
    }
    const std::map<std::string, Term>& entries() const noexcept { return entries_; }

    const Term& delta() const { return entries_.at("delta"); }
    const Term& omega() const { return entries_.at("omega"); }
    const Term& big_omega() const { return entries_.at("Omega"); }
    const Term& y() const { return entries_.at("Y"); }
    const Term& f() const { return entries_.at("F"); }

private:
    MacroTable()
    {
        auto v = [](const char* n) { return Term::var(n); };
        auto lam = [](const char* p, Term b) { return Term::abs(p, std::move(b)); };
        auto ap = [](Term f, Term x) { return Term::app(std::move(f), std::move(x)); };

        Term delta = lam("x", ap(v("x"), v("x")));
        Term omega = ap(delta, delta);
        entries_.emplace("delta", delta);
        entries_.emplace("omega", omega);
        entries_.emplace("Omega", lam("x", omega));
        // \f. (\x. f (x x)) (\x. f (\y. (x x) y))
        entries_.emplace("Y",
                         lam("f", ap(lam("x", ap(v("f"), ap(v("x"), v("x")))),
                                     lam("x", ap(v("f"), lam("y", ap(ap(v("x"), v("x")), v("y"))))))));
        // \f. \x. (\g. \y. g y) (f x)
        entries_.emplace("F", lam("f", lam("x", ap(lam("g", lam("y", ap(v("g"), v("y")))),
                                                   ap(v("f"), v("x"))))));
    }

    std::map<std::string, Term> entries_;
};

namespace detail {

// term   := lambda | atom+ [lambda]
// lambda := ("\" | "λ") ident+ "." term
// atom   := ident | int | "(" term ")" | "@" name
class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Term parse_all()
    {
        Term t = parse_term();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, msg); }

    void skip_ws()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool at_lambda()
    {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '\\') return true;
        return src_.substr(pos_, 2) == "\xCE\xBB";
    }

    bool at_atom()
    {
        skip_ws();
        if (pos_ >= src_.size()) return false;
        char c = src_[pos_];
        if (c == '(' || c == '@' || std::isdigit(static_cast<unsigned char>(c))) return true;
        if (c == '-' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))
            return true;
        return is_ident_start(c);
    }

    static bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
    static bool is_ident_char(char c)
    {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    }

    std::string ident()
    {
        skip_ws();
        if (pos_ >= src_.size() || !is_ident_start(src_[pos_])) fail("expected identifier");
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        return std::string(src_.substr(start, pos_ - start));
    }

    Term parse_term()
    {
        if (at_lambda()) return parse_lambda();
        if (!at_atom()) fail(pos_ >= src_.size() ? "unexpected end of input" : "expected a term");
        Term t = parse_atom();
        while (true) {
            if (at_atom()) {
                t = Term::app(std::move(t), parse_atom());
            } else if (at_lambda()) {
                t = Term::app(std::move(t), parse_lambda());
                break;
            } else {
                break;
            }
        }
        return t;
    }

    Term parse_lambda()
    {
        pos_ += src_[pos_] == '\\' ? 1 : 2;
        std::vector<std::string> params;
        params.push_back(ident());
        skip_ws();
        while (pos_ < src_.size() && src_[pos_] != '.') params.push_back(ident()), skip_ws();
        if (pos_ >= src_.size()) fail("expected '.'");
        ++pos_;
        Term body = parse_term();
        for (auto it = params.rbegin(); it != params.rend(); ++it) body = Term::abs(*it, std::move(body));
        return body;
    }

    Term parse_atom()
    {
        skip_ws();
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Term t = parse_term();
            skip_ws();
            if (pos_ >= src_.size() || src_[pos_] != ')') fail("expected ')'");
            ++pos_;
            return t;
        }
        if (c == '@') {
            std::size_t at = pos_;
            ++pos_;
            std::string name = ident();
            const Term* m = MacroTable::instance().find(name);
            if (!m) throw ParseError(at, "unknown macro '@" + name + "'");
            return *m;
        }
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            if (c == '-') ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            try {
                return Term::constant(std::stoll(std::string(src_.substr(start, pos_ - start))));
            } catch (const std::out_of_range&) {
                throw ParseError(start, "integer constant out of range");
            }
        }
        return Term::var(ident());
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline Term parse(std::string_view src) { return detail::Parser(src).parse_all(); }

} // namespace cosem

#endif
