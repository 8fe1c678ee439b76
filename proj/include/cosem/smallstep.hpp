#ifndef COSEM_SMALLSTEP_HPP
#define COSEM_SMALLSTEP_HPP

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "syntax.hpp"
#include "traces.hpp"

namespace cosem {

inline constexpr std::size_t default_step_limit = 10000;

// One call-by-value reduction step with left-to-right evaluation order.
// nullopt means no rule applies: values, free variables, constant heads.
inline std::optional<Term> step(const Term& a)
{
    if (!a.is_app()) return std::nullopt;
    const Term& f = a.fun();
    const Term& x = a.arg();
    if (f.is_abs() && is_value(x)) return detail::subst_raw(f.body(), f.param(), x);
    if (auto f2 = step(f)) return Term::app(std::move(*f2), x);
    if (is_value(f))
        if (auto x2 = step(x)) return Term::app(f, std::move(*x2));
    return std::nullopt;
}

struct ReductionClass {
    enum class Kind { ValueReached, Stuck, StepLimit };

    Kind kind;
    Term term; // the value, the stuck term, or the last reduct
    std::size_t steps;

    bool value_reached() const noexcept { return kind == Kind::ValueReached; }
    bool stuck() const noexcept { return kind == Kind::Stuck; }
    bool step_limit() const noexcept { return kind == Kind::StepLimit; }
};

namespace detail {

// A term split into a focus and its evaluation context, innermost frame last.
// After a contraction, refocusing starts from the contractum, so the cost of
// a step does not grow with the depth of the surrounding context.
class Zipper {
public:
    enum class State { Redex, Value, Stuck };

    explicit Zipper(Term a) : focus_(std::move(a)) {}

    // Descend to the next redex, or stop at a final value or a stuck point.
    State refocus()
    {
        while (true) {
            if (focus_.is_app()) {
                ctx_.push_back({true, focus_.arg()});
                focus_ = Term(focus_.fun());
                continue;
            }
            if (focus_.is_var()) return State::Stuck;
            if (ctx_.empty()) return State::Value;
            Frame& fr = ctx_.back();
            if (fr.hole_is_fun) {
                Term arg = fr.other;
                fr = {false, focus_};
                focus_ = std::move(arg);
                continue;
            }
            return fr.other.is_abs() ? State::Redex : State::Stuck;
        }
    }

    // Requires refocus() == Redex.
    void contract()
    {
        Term f = std::move(ctx_.back().other);
        ctx_.pop_back();
        focus_ = subst_raw(f.body(), f.param(), focus_);
    }

    Term plug() const
    {
        Term t = focus_;
        for (auto it = ctx_.rbegin(); it != ctx_.rend(); ++it)
            t = it->hole_is_fun ? Term::app(std::move(t), it->other) : Term::app(it->other, std::move(t));
        return t;
    }

private:
    struct Frame {
        bool hole_is_fun; // [] other, else other []
        Term other;
    };

    Term focus_;
    std::vector<Frame> ctx_;
};

// A stuck term is reported as Stuck even when the budget is spent: detecting
// it performs no step.
template <class OnStep>
ReductionClass reduce(const Term& a, std::size_t limit, OnStep&& on_step)
{
    Zipper z(a);
    for (std::size_t n = 0;; ++n) {
        switch (z.refocus()) {
        case Zipper::State::Value: return {ReductionClass::Kind::ValueReached, z.plug(), n};
        case Zipper::State::Stuck: return {ReductionClass::Kind::Stuck, z.plug(), n};
        case Zipper::State::Redex: break;
        }
        if (n == limit) return {ReductionClass::Kind::StepLimit, z.plug(), n};
        on_step(z);
        z.contract();
    }
}

} // namespace detail

inline ReductionClass classify(const Term& a, std::size_t limit = default_step_limit)
{
    return detail::reduce(a, limit, [](const detail::Zipper&) {});
}

struct TracedReduction {
    FiniteTrace trace; // source term of every step performed; final term excluded
    ReductionClass result;
};

inline TracedReduction reduce_with_trace(const Term& a, std::size_t limit = default_step_limit)
{
    FiniteTrace trace;
    ReductionClass r = detail::reduce(a, limit, [&](const detail::Zipper& z) { trace.push_back(z.plug()); });
    return {std::move(trace), std::move(r)};
}

// a, then its successive reducts; an irreducible term repeats forever.
inline LazyTrace reduct_stream(Term a)
{
    return generate([cur = std::move(a)]() mutable {
        Term out = cur;
        if (auto next = step(cur)) cur = std::move(*next);
        return out;
    });
}

} // namespace cosem

#endif
