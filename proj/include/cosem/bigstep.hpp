#ifndef COSEM_BIGSTEP_HPP
#define COSEM_BIGSTEP_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "syntax.hpp"
#include "traces.hpp"

namespace cosem {

// Recursion-depth budget. One unit is consumed per rule unfolding, the same
// way the index of the denotational C(n, a) decreases.
struct Fuel {
    std::size_t depth = 1000;
};

inline constexpr Fuel default_fuel{1000};

class EvalOutcome {
public:
    enum class Kind { Value, Wrong, FuelOut };

    static EvalOutcome value(Term v) { return EvalOutcome(Kind::Value, std::move(v)); }
    static EvalOutcome wrong(Term at) { return EvalOutcome(Kind::Wrong, std::move(at)); }
    static EvalOutcome fuel_out() { return EvalOutcome(Kind::FuelOut, std::nullopt); }

    Kind kind() const noexcept { return kind_; }
    bool is_value() const noexcept { return kind_ == Kind::Value; }
    bool is_wrong() const noexcept { return kind_ == Kind::Wrong; }
    bool is_fuel_out() const noexcept { return kind_ == Kind::FuelOut; }

    // The value, or the subterm where evaluation went wrong.
    const Term& term() const
    {
        if (!term_) throw std::logic_error("FuelOut carries no term");
        return *term_;
    }

    friend bool operator==(const EvalOutcome& a, const EvalOutcome& b)
    {
        return a.kind_ == b.kind_ && a.term_ == b.term_;
    }

private:
    EvalOutcome(Kind k, std::optional<Term> t) : kind_(k), term_(std::move(t)) {}

    Kind kind_;
    std::optional<Term> term_;
};

namespace detail {

inline void require_closed(const Term& a)
{
    if (!a.is_closed()) throw OpenTermError(a.free_vars().front());
}

inline EvalOutcome eval(const Term& a, std::size_t n)
{
    if (n == 0) return EvalOutcome::fuel_out();
    switch (a.kind()) {
    case Term::Kind::Var: return EvalOutcome::wrong(a);
    case Term::Kind::Const:
    case Term::Kind::Abs: return EvalOutcome::value(a);
    case Term::Kind::App: break;
    }
    EvalOutcome r1 = eval(a.fun(), n - 1);
    if (!r1.is_value()) return r1;
    EvalOutcome r2 = eval(a.arg(), n - 1);
    if (!r2.is_value()) return r2;
    const Term& f = r1.term();
    if (!f.is_abs()) return EvalOutcome::wrong(Term::app(f, r2.term()));
    return eval(detail::subst_raw(f.body(), f.param(), r2.term()), n - 1);
}

inline EvalOutcome eval_traced(const Term& a, std::size_t n, FiniteTrace& out)
{
    if (n == 0) return EvalOutcome::fuel_out();
    switch (a.kind()) {
    case Term::Kind::Var: return EvalOutcome::wrong(a);
    case Term::Kind::Const:
    case Term::Kind::Abs: return EvalOutcome::value(a);
    case Term::Kind::App: break;
    }
    // t = (t1 a2) . ((\x.b) t2) . ((\x.b) v2) . t3
    FiniteTrace t1;
    EvalOutcome r1 = eval_traced(a.fun(), n - 1, t1);
    for (auto& t : t1) out.push_back(Term::app(std::move(t), a.arg()));
    if (!r1.is_value()) return r1;
    const Term& f = r1.term();
    FiniteTrace t2;
    EvalOutcome r2 = eval_traced(a.arg(), n - 1, t2);
    for (auto& t : t2) out.push_back(Term::app(f, std::move(t)));
    if (!r2.is_value()) return r2;
    if (!f.is_abs()) return EvalOutcome::wrong(Term::app(f, r2.term()));
    out.push_back(Term::app(f, r2.term()));
    return eval_traced(detail::subst_raw(f.body(), f.param(), r2.term()), n - 1, out);
}

} // namespace detail

inline EvalOutcome eval_fuel(const Term& a, Fuel fuel = default_fuel)
{
    detail::require_closed(a);
    return detail::eval(a, fuel.depth);
}

struct TracedEval {
    FiniteTrace trace;
    EvalOutcome outcome;
};

// Evaluation that also assembles the reduction trace from the application
// rule's concatenation scheme. On Wrong/FuelOut the trace built so far is kept.
inline TracedEval eval_trace(const Term& a, Fuel fuel = default_fuel)
{
    detail::require_closed(a);
    FiniteTrace trace;
    EvalOutcome r = detail::eval_traced(a, fuel.depth, trace);
    return {std::move(trace), std::move(r)};
}

namespace detail {

// Memoised evaluation at a fixed fuel, shared by the approximant checkers.
class EvalCache {
public:
    explicit EvalCache(std::size_t fuel) : fuel_(fuel) {}

    const EvalOutcome& operator()(const Term& a)
    {
        auto it = cache_.find(a);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(a, eval(a, fuel_)).first->second;
    }

private:
    std::size_t fuel_;
    std::unordered_map<Term, EvalOutcome, TermHash> cache_;
};

// Both approximants are antitone in k, so one interval per key is enough:
// true for every k <= max_true, false for every k >= min_false.
struct ApproxBounds {
    std::size_t max_true = 0;
    std::size_t min_false = static_cast<std::size_t>(-1);
};

class DivergenceApprox {
public:
    explicit DivergenceApprox(std::size_t fuel) : eval_(fuel) {}

    bool operator()(const Term& a, std::size_t k)
    {
        if (k == 0) return true;
        if (!a.is_app()) return false;
        auto& b = memo_[a];
        if (k <= b.max_true) return true;
        if (k >= b.min_false) return false;
        bool r = unfold(a, k);
        auto& b2 = memo_[a];
        if (r)
            b2.max_true = std::max(b2.max_true, k);
        else
            b2.min_false = std::min(b2.min_false, k);
        return r;
    }

private:
    bool unfold(const Term& a, std::size_t k)
    {
        const Term& a1 = a.fun();
        const Term& a2 = a.arg();
        // (app-l)
        if ((*this)(a1, k - 1)) return true;
        EvalOutcome r1 = eval_(a1);
        if (!r1.is_value()) return false;
        // (app-r)
        if ((*this)(a2, k - 1)) return true;
        EvalOutcome r2 = eval_(a2);
        if (!r2.is_value() || !r1.term().is_abs()) return false;
        // (app-f)
        const Term& f = r1.term();
        return (*this)(detail::subst_raw(f.body(), f.param(), r2.term()), k - 1);
    }

    EvalCache eval_;
    std::unordered_map<Term, ApproxBounds, TermHash> memo_;
};

class CoevalApprox {
public:
    explicit CoevalApprox(std::size_t fuel)
        : eval_(fuel), omega_witness_(MacroTable::instance().big_omega())
    {
    }

    bool operator()(const Term& a, const Term& v, std::size_t k)
    {
        if (k == 0) return true;
        switch (a.kind()) {
        case Term::Kind::Var: return false;
        case Term::Kind::Const:
        case Term::Kind::Abs: return a == v;
        case Term::Kind::App: break;
        }
        auto key = std::make_pair(a, v);
        auto& b = memo_[key];
        if (k <= b.max_true) return true;
        if (k >= b.min_false) return false;
        bool r = unfold(a, v, k);
        auto& b2 = memo_[key];
        if (r)
            b2.max_true = std::max(b2.max_true, k);
        else
            b2.min_false = std::min(b2.min_false, k);
        return r;
    }

private:
    // Witness for a premise: its value when it evaluates within the fuel,
    // Omega = \x. omega when it runs out of fuel, nothing when it goes wrong.
    std::optional<Term> witness(const Term& a)
    {
        const EvalOutcome& r = eval_(a);
        if (r.is_value()) return r.term();
        if (r.is_fuel_out()) return omega_witness_;
        return std::nullopt;
    }

    bool unfold(const Term& a, const Term& v, std::size_t k)
    {
        auto w1 = witness(a.fun());
        if (!w1 || !w1->is_abs()) return false;
        auto w2 = witness(a.arg());
        if (!w2) return false;
        if (!(*this)(a.fun(), *w1, k - 1)) return false;
        if (!(*this)(a.arg(), *w2, k - 1)) return false;
        return (*this)(detail::subst_raw(w1->body(), w1->param(), *w2), v, k - 1);
    }

    struct PairHash {
        std::size_t operator()(const std::pair<Term, Term>& p) const noexcept
        {
            return hash_mix(p.first.hash(), p.second.hash());
        }
    };

    EvalCache eval_;
    Term omega_witness_;
    std::unordered_map<std::pair<Term, Term>, ApproxBounds, PairHash> memo_;
};

} // namespace detail

// k-th approximant of the coinductive divergence relation. The evaluation
// premises of (app-r) and (app-f) are discharged by eval_fuel at `fuel`.
inline bool diverges_approx(const Term& a, std::size_t k, Fuel fuel = default_fuel)
{
    detail::require_closed(a);
    return detail::DivergenceApprox(fuel.depth)(a, k);
}

// k-th approximant of coevaluation, with premise witnesses picked by
// evaluation (value, else Omega on FuelOut). Sound, not complete.
inline bool coeval_approx(const Term& a, const Term& v, std::size_t k, Fuel fuel = default_fuel)
{
    detail::require_closed(a);
    if (!is_value(v) || !v.is_closed())
        throw std::invalid_argument("coevaluation target must be a closed value: " + to_string(v));
    return detail::CoevalApprox(fuel.depth)(a, v, k);
}

class NotDiverging : public std::runtime_error {
public:
    explicit NotDiverging(Term at)
        : std::runtime_error("no divergence rule applies to " + to_string(at)), at_(std::move(at))
    {
    }
    const Term& term() const noexcept { return at_; }

private:
    Term at_;
};

// Infinite trace of a diverging term, assembled from the divergence rules:
//   (app-l)  T1 a2
//   (app-r)  (t1 a2) . (v T2)
//   (app-f)  (t1 a2) . ((\x.b) t2) . ((\x.b) v2) . T3
// A premise that runs out of fuel is taken to be the diverging one. Throws
// NotDiverging (at construction or on a later pull) when an unfolding reaches
// a term that evaluates or goes wrong.
inline LazyTrace diverge_trace_stream(const Term& a, Fuel fuel = default_fuel)
{
    detail::require_closed(a);
    if (!a.is_app()) throw NotDiverging(a);
    const Term& a1 = a.fun();
    const Term& a2 = a.arg();

    // Rule selection uses plain evaluation; traces are only built for
    // premises that converge.
    EvalOutcome r1 = detail::eval(a1, fuel.depth);
    if (r1.is_fuel_out()) return app_left(diverge_trace_stream(a1, fuel), a2);
    if (r1.is_wrong()) throw NotDiverging(a);
    FiniteTrace t1;
    detail::eval_traced(a1, fuel.depth, t1);
    FiniteTrace prefix = app_left(t1, a2);
    const Term& f = r1.term();

    EvalOutcome r2 = detail::eval(a2, fuel.depth);
    if (r2.is_fuel_out()) return concat(std::move(prefix), app_right(f, diverge_trace_stream(a2, fuel)));
    if (r2.is_wrong() || !f.is_abs()) throw NotDiverging(a);
    FiniteTrace t2;
    detail::eval_traced(a2, fuel.depth, t2);

    for (auto& t : t2) prefix.push_back(Term::app(f, std::move(t)));
    prefix.push_back(Term::app(f, r2.term()));
    Term body = detail::subst_raw(f.body(), f.param(), r2.term());
    return concat(std::move(prefix), defer([body = std::move(body), fuel] {
                      return diverge_trace_stream(body, fuel);
                  }));
}

} // namespace cosem

#endif
