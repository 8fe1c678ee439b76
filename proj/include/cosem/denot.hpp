#ifndef COSEM_DENOT_HPP
#define COSEM_DENOT_HPP

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "syntax.hpp"

namespace cosem {

// Outcome of computing a term at bounded recursion depth: a value, err, or
// bottom (depth exhausted). Flat order: Bottom <= r and r <= r.
class Result3 {
public:
    enum class Kind { Bottom, Err, Val };

    static Result3 bottom() { return Result3(Kind::Bottom, std::nullopt); }
    static Result3 err() { return Result3(Kind::Err, std::nullopt); }
    static Result3 val(Term v) { return Result3(Kind::Val, std::move(v)); }

    Kind kind() const noexcept { return kind_; }
    bool is_bottom() const noexcept { return kind_ == Kind::Bottom; }
    bool is_err() const noexcept { return kind_ == Kind::Err; }
    bool is_val() const noexcept { return kind_ == Kind::Val; }
    const Term& value() const
    {
        if (!v_) throw std::logic_error("only Val carries a term");
        return *v_;
    }

    friend bool operator==(const Result3& a, const Result3& b) { return a.kind_ == b.kind_ && a.v_ == b.v_; }
    friend bool operator!=(const Result3& a, const Result3& b) { return !(a == b); }

private:
    Result3(Kind k, std::optional<Term> v) : kind_(k), v_(std::move(v)) {}

    Kind kind_;
    std::optional<Term> v_;
};

inline bool flat_leq(const Result3& a, const Result3& b) { return a.is_bottom() || a == b; }

inline std::ostream& operator<<(std::ostream& os, const Result3& r)
{
    switch (r.kind()) {
    case Result3::Kind::Bottom: return os << "Bottom";
    case Result3::Kind::Err: return os << "Err";
    case Result3::Kind::Val: return os << r.value();
    }
    return os;
}

// Monadic composition: bottom and err short-circuit, a value feeds f.
template <class F>
Result3 operator|(const Result3& r, F&& f)
{
    if (!r.is_val()) return r;
    return std::forward<F>(f)(r.value());
}

// C(n, a), by recursion on n.
inline Result3 compute(std::size_t n, const Term& a)
{
    if (n == 0) return Result3::bottom();
    switch (a.kind()) {
    case Term::Kind::Var: return Result3::err();
    case Term::Kind::Const:
    case Term::Kind::Abs: return Result3::val(a);
    case Term::Kind::App: break;
    }
    const std::size_t m = n - 1;
    return compute(m, a.fun()) | [&](const Term& v1) {
        return compute(m, a.arg()) | [&](const Term& v2) {
            if (!v1.is_abs()) return Result3::err();
            return compute(m, detail::subst_raw(v1.body(), v1.param(), v2));
        };
    };
}

// Denotation up to budget `depth`; Bottom reads as "bottom so far".
inline Result3 exec_approx(const Term& a, std::size_t depth)
{
    if (depth == 0) throw std::invalid_argument("exec_approx needs depth >= 1");
    return compute(depth, a);
}

} // namespace cosem

#endif
