#include <gtest/gtest.h>

#include "cosem/traces.hpp"
#include "test_util.hpp"

using namespace cosem;
using cosem::test::P;

namespace {

std::vector<FiniteTrace> random_traces(std::uint64_t seed, std::size_t n)
{
    TermGenerator g(seed);
    std::vector<FiniteTrace> out;
    for (std::size_t i = 0; i < n; ++i) {
        FiniteTrace t;
        for (auto k = g.below(5); k > 0; --k) t.push_back(g.any(8));
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace

TEST(Concat, EmptyIsNeutral)
{
    FiniteTrace t{P("0"), P("1")};
    EXPECT_EQ(concat(FiniteTrace{}, t), t);
    EXPECT_EQ(concat(t, FiniteTrace{}), t);
}

TEST(Concat, Finite) { EXPECT_EQ(concat(FiniteTrace{P("a")}, FiniteTrace{P("b")}), (FiniteTrace{P("a"), P("b")})); }

TEST(Concat, FiniteThenLazy)
{
    LazyTrace t = concat(FiniteTrace{P("a")}, repeat(P("b")));
    EXPECT_EQ(t.take(4), (FiniteTrace{P("a"), P("b"), P("b"), P("b")}));
}

TEST(Concat, EmptyThenLazy) { EXPECT_EQ(concat(FiniteTrace{}, repeat(P("b"))).take(2), (FiniteTrace{P("b"), P("b")})); }

TEST(Concat, AssociativeAndNeutral)
{
    auto ts = random_traces(71, 300);
    for (std::size_t i = 0; i + 2 < ts.size(); i += 3) {
        const auto &t = ts[i], &u = ts[i + 1], &w = ts[i + 2];
        ASSERT_EQ(concat(concat(t, u), w), concat(t, concat(u, w)));
        ASSERT_EQ(concat(FiniteTrace{}, t), t);
        ASSERT_EQ(concat(t, FiniteTrace{}), t);
    }
}

TEST(AppLeft, Elementwise)
{
    EXPECT_EQ(app_left(FiniteTrace{P("a1"), P("a2")}, P("b")), (FiniteTrace{P("a1 b"), P("a2 b")}));
    EXPECT_TRUE(app_left(FiniteTrace{}, P("b")).empty());
}

TEST(AppRight, Elementwise) { EXPECT_EQ(app_right(P("\\x. x"), FiniteTrace{P("0")}), FiniteTrace{P("(\\x. x) 0")}); }

TEST(AppRight, RejectsNonValue)
{
    EXPECT_THROW(app_right(P("f x"), FiniteTrace{P("0")}), std::invalid_argument);
    EXPECT_THROW(app_right(P("f x"), repeat(P("0"))), std::invalid_argument);
}

TEST(AppLeft, CommutesWithConcat)
{
    auto ts = random_traces(72, 200);
    Term b = P("\\z. z");
    for (std::size_t i = 0; i + 1 < ts.size(); i += 2) {
        ASSERT_EQ(app_left(concat(ts[i], ts[i + 1]), b), concat(app_left(ts[i], b), app_left(ts[i + 1], b)));
        ASSERT_EQ(app_right(b, concat(ts[i], ts[i + 1])), concat(app_right(b, ts[i]), app_right(b, ts[i + 1])));
    }
}

TEST(LazyApp, MatchesFiniteOnPrefix)
{
    Term w = P("@omega");
    EXPECT_EQ(app_left(repeat(w), P("0")).take(2), (FiniteTrace{P("@omega 0"), P("@omega 0")}));
    EXPECT_EQ(app_right(P("1"), repeat(w)).take(2), (FiniteTrace{P("1 @omega"), P("1 @omega")}));
}

TEST(Bisim, Reflexive)
{
    auto counter = [] {
        return generate([n = 0]() mutable { return Term::constant(n++); });
    };
    EXPECT_TRUE(bisim_to_depth(counter(), counter(), 100));
}

TEST(Bisim, OmegaAgainstConstantStream)
{
    Term w = P("@omega");
    EXPECT_TRUE(bisim_to_depth(reduct_stream(w), repeat(w), 50));
}

TEST(Bisim, DifferAtHead)
{
    EXPECT_FALSE(bisim_to_depth(repeat(P("0")), repeat(P("1")), 1));
    EXPECT_TRUE(bisim_to_depth(repeat(P("0")), repeat(P("1")), 0));
}

TEST(Bisim, MonotoneDownward)
{
    auto mk = [](int diff_at) {
        return generate([n = 0, diff_at]() mutable { return Term::constant(n++ == diff_at ? -1 : 0); });
    };
    for (int d = 0; d < 10; ++d) {
        for (std::size_t k = 0; k <= 12; ++k) {
            bool expect = static_cast<int>(k) <= d;
            ASSERT_EQ(bisim_to_depth(repeat(P("0")), mk(d), k), expect) << d << " " << k;
        }
    }
}

TEST(Defer, BuiltOnFirstPull)
{
    int built = 0;
    LazyTrace t = defer([&] {
        ++built;
        return repeat(P("0"));
    });
    EXPECT_EQ(built, 0);
    t.next();
    t.next();
    EXPECT_EQ(built, 1);
}

TEST(Defer, LongCorecursiveChainsStayFlat)
{
    // Each segment is a concat whose tail defers to the next segment; a
    // nested representation would exhaust the stack long before 200000.
    std::function<LazyTrace(int)> seg = [&](int n) {
        return concat(FiniteTrace{Term::constant(n)}, defer([&seg, n] { return seg(n + 1); }));
    };
    LazyTrace t = seg(0);
    for (int i = 0; i < 200000; ++i) ASSERT_EQ(t.next(), Term::constant(i));
}
