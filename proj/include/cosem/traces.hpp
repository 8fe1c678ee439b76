#ifndef COSEM_TRACES_HPP
#define COSEM_TRACES_HPP

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "syntax.hpp"

namespace cosem {

using FiniteTrace = std::vector<Term>;

// Conceptually infinite sequence of terms, produced on demand.
// Single owner: moving hands the remaining stream over, copying is not allowed.
class LazyTrace {
public:
    class Source;

    // What a source yields on a pull: either the next element, or another
    // source that takes its place (so concatenation tails do not nest).
    struct Pull {
        std::optional<Term> item;
        std::unique_ptr<Source> become;
    };

    class Source {
    public:
        virtual ~Source() = default;
        virtual Pull pull() = 0;
    };

    explicit LazyTrace(std::unique_ptr<Source> src) : src_(std::move(src)) {}

    LazyTrace(LazyTrace&&) noexcept = default;
    LazyTrace& operator=(LazyTrace&&) noexcept = default;
    LazyTrace(const LazyTrace&) = delete;
    LazyTrace& operator=(const LazyTrace&) = delete;

    Term next()
    {
        while (true) {
            Pull p = src_->pull();
            if (p.become) {
                src_ = std::move(p.become);
                continue;
            }
            return std::move(*p.item);
        }
    }

    // Hands the underlying producer to a combinator; the trace is empty afterwards.
    std::unique_ptr<Source> release() && { return std::move(src_); }

    FiniteTrace take(std::size_t n)
    {
        FiniteTrace out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(next());
        return out;
    }

private:
    std::unique_ptr<Source> src_;
};

namespace detail {

template <class F>
class GeneratorSource final : public LazyTrace::Source {
public:
    explicit GeneratorSource(F f) : f_(std::move(f)) {}
    LazyTrace::Pull pull() override { return {f_(), nullptr}; }

private:
    F f_;
};

class ConcatSource final : public LazyTrace::Source {
public:
    ConcatSource(FiniteTrace prefix, std::unique_ptr<LazyTrace::Source> tail)
        : prefix_(prefix.begin(), prefix.end()), tail_(std::move(tail))
    {
    }
    LazyTrace::Pull pull() override
    {
        if (prefix_.empty()) return {std::nullopt, std::move(tail_)};
        Term t = std::move(prefix_.front());
        prefix_.pop_front();
        return {std::move(t), nullptr};
    }

private:
    std::deque<Term> prefix_;
    std::unique_ptr<LazyTrace::Source> tail_;
};

template <class Factory>
class DeferSource final : public LazyTrace::Source {
public:
    explicit DeferSource(Factory f) : f_(std::move(f)) {}
    LazyTrace::Pull pull() override;

private:
    Factory f_;
};

template <class F>
class MapSource final : public LazyTrace::Source {
public:
    MapSource(LazyTrace inner, F f) : inner_(std::move(inner)), f_(std::move(f)) {}
    LazyTrace::Pull pull() override { return {f_(inner_.next()), nullptr}; }

private:
    LazyTrace inner_;
    F f_;
};

} // namespace detail

template <class F>
LazyTrace generate(F f)
{
    return LazyTrace(std::make_unique<detail::GeneratorSource<F>>(std::move(f)));
}

inline LazyTrace repeat(Term a)
{
    return generate([a = std::move(a)] { return a; });
}

// Stream built on first pull; lets corecursive definitions stay productive.
template <class Factory>
LazyTrace defer(Factory f)
{
    return LazyTrace(std::make_unique<detail::DeferSource<Factory>>(std::move(f)));
}

template <class F>
LazyTrace map(LazyTrace t, F f)
{
    return LazyTrace(std::make_unique<detail::MapSource<F>>(std::move(t), std::move(f)));
}

inline FiniteTrace concat(FiniteTrace t, const FiniteTrace& u)
{
    t.insert(t.end(), u.begin(), u.end());
    return t;
}

inline LazyTrace concat(FiniteTrace t, LazyTrace u)
{
    if (t.empty()) return u;
    return LazyTrace(std::make_unique<detail::ConcatSource>(std::move(t), std::move(u).release()));
}

inline FiniteTrace app_left(const FiniteTrace& t, const Term& b)
{
    FiniteTrace out;
    out.reserve(t.size());
    for (const auto& a : t) out.push_back(Term::app(a, b));
    return out;
}

inline LazyTrace app_left(LazyTrace t, Term b)
{
    return map(std::move(t), [b = std::move(b)](const Term& a) { return Term::app(a, b); });
}

inline void require_value(const Term& v)
{
    if (!is_value(v)) throw std::invalid_argument("right application needs a value, got " + to_string(v));
}

inline FiniteTrace app_right(const Term& v, const FiniteTrace& t)
{
    require_value(v);
    FiniteTrace out;
    out.reserve(t.size());
    for (const auto& a : t) out.push_back(Term::app(v, a));
    return out;
}

inline LazyTrace app_right(Term v, LazyTrace t)
{
    require_value(v);
    return map(std::move(t), [v = std::move(v)](const Term& a) { return Term::app(v, a); });
}

// k-th approximant of trace bisimilarity: the first k elements agree.
inline bool bisim_to_depth(LazyTrace t1, LazyTrace t2, std::size_t k)
{
    for (std::size_t i = 0; i < k; ++i)
        if (t1.next() != t2.next()) return false;
    return true;
}

template <class Factory>
LazyTrace::Pull detail::DeferSource<Factory>::pull()
{
    return {std::nullopt, f_().release()};
}

} // namespace cosem

#endif
