#include <gtest/gtest.h>

#include "cosem/bigstep.hpp"
#include "cosem/smallstep.hpp"
#include "test_util.hpp"

using namespace cosem;
using cosem::test::P;

namespace {

const Term& omega() { return MacroTable::instance().omega(); }

std::vector<Term> corpus_divergent()
{
    std::vector<Term> out;
    for (const auto& e : load_corpus(COSEM_CORPUS_PATH))
        if (e.kind == "diverges") out.push_back(e.term);
    return out;
}

} // namespace

TEST(EvalFuel, Constant) { EXPECT_EQ(eval_fuel(P("0"), Fuel{1}), EvalOutcome::value(P("0"))); }

TEST(EvalFuel, ZeroFuelIsFuelOut) { EXPECT_TRUE(eval_fuel(P("0"), Fuel{0}).is_fuel_out()); }

TEST(EvalFuel, OmegaNeverEvaluates)
{
    for (std::size_t n = 0; n <= 300; ++n) ASSERT_TRUE(eval_fuel(omega(), Fuel{n}).is_fuel_out()) << n;
}

TEST(EvalFuel, ZeroZeroGoesWrong)
{
    EXPECT_EQ(eval_fuel(P("0 0"), Fuel{2}), EvalOutcome::wrong(P("0 0")));
    EXPECT_TRUE(eval_fuel(P("0 0"), Fuel{1}).is_fuel_out());
}

TEST(EvalFuel, RejectsOpenTerms) { EXPECT_THROW(eval_fuel(P("x")), OpenTermError); }

TEST(EvalFuel, FuelCountsRuleUnfoldings)
{
    // (\x. x) 0 needs the application rule plus one level for its premises.
    EXPECT_TRUE(eval_fuel(P("(\\x. x) 0"), Fuel{1}).is_fuel_out());
    EXPECT_EQ(eval_fuel(P("(\\x. x) 0"), Fuel{2}), EvalOutcome::value(P("0")));
}

TEST(EvalFuel, MonotoneInFuel)
{
    for (const Term& a : test::sample_terms(81, 1000)) {
        std::optional<EvalOutcome> settled;
        for (std::size_t n = 0; n <= 60; ++n) {
            EvalOutcome r = eval_fuel(a, Fuel{n});
            if (settled) ASSERT_EQ(r, *settled) << to_string(a) << " at " << n;
            else if (!r.is_fuel_out()) settled = r;
        }
    }
}

TEST(EvalFuel, AgreesWithSmallStep)
{
    for (const Term& a : test::sample_terms(82, 3000)) {
        EvalOutcome e = eval_fuel(a);
        ReductionClass c = classify(a, 100000);
        ASSERT_EQ(e.is_value(), c.value_reached()) << to_string(a);
        if (e.is_value()) ASSERT_EQ(e.term(), c.term) << to_string(a);
        ASSERT_EQ(e.is_wrong(), c.stuck()) << to_string(a);
    }
}

TEST(EvalFuel, DepthBoundedByBetaSteps)
{
    // A value reached in s steps has an evaluation derivation of depth <= s + 1.
    for (const Term& a : test::sample_terms(83, 3000)) {
        ReductionClass c = classify(a, 100000);
        if (!c.value_reached()) continue;
        ASSERT_EQ(eval_fuel(a, Fuel{c.steps + 1}), EvalOutcome::value(c.term)) << to_string(a);
    }
}

TEST(EvalTrace, SingleBeta)
{
    auto r = eval_trace(P("(\\x. x) 0"));
    EXPECT_EQ(r.trace, FiniteTrace{P("(\\x. x) 0")});
    EXPECT_EQ(r.outcome, EvalOutcome::value(P("0")));
}

TEST(EvalTrace, ConstantHasEmptyTrace)
{
    auto r = eval_trace(P("5"));
    EXPECT_TRUE(r.trace.empty());
    EXPECT_EQ(r.outcome, EvalOutcome::value(P("5")));
}

TEST(EvalTrace, ArgumentFirst)
{
    auto r = eval_trace(P("(\\x. x) ((\\y. y) 1)"));
    EXPECT_EQ(r.trace, (FiniteTrace{P("(\\x. x) ((\\y. y) 1)"), P("(\\x. x) 1")}));
    EXPECT_EQ(r.outcome, EvalOutcome::value(P("1")));
}

TEST(EvalTrace, MatchesReductionTrace)
{
    for (const Term& a : test::sample_terms(84, 3000)) {
        auto e = eval_trace(a);
        if (!e.outcome.is_value()) continue;
        auto r = reduce_with_trace(a, e.trace.size());
        ASSERT_TRUE(r.result.value_reached());
        ASSERT_EQ(e.trace, r.trace) << to_string(a);
    }
}

TEST(DivergesApprox, Omega)
{
    for (std::size_t k = 0; k <= 200; ++k) ASSERT_TRUE(diverges_approx(omega(), k, Fuel{100})) << k;
}

TEST(DivergesApprox, ConstantDoesNotDiverge)
{
    EXPECT_TRUE(diverges_approx(P("0"), 0, Fuel{100}));
    for (std::size_t k = 1; k <= 20; ++k) ASSERT_FALSE(diverges_approx(P("0"), k, Fuel{100}));
}

TEST(DivergesApprox, LeftRule)
{
    for (std::size_t k = 1; k <= 50; ++k) ASSERT_TRUE(diverges_approx(P("@omega (0 0)"), k, Fuel{100}));
}

TEST(DivergesApprox, RightRule)
{
    for (std::size_t k = 1; k <= 50; ++k) ASSERT_TRUE(diverges_approx(P("(\\x. 0) @omega"), k, Fuel{100}));
}

TEST(DivergesApprox, GoesWrongIsNotDivergence) { EXPECT_FALSE(diverges_approx(P("0 0"), 2, Fuel{100})); }

TEST(DivergesApprox, AntitoneInK)
{
    for (const Term& a : test::sample_terms(85, 600)) {
        bool prev = true;
        for (std::size_t k = 0; k <= 12; ++k) {
            bool cur = diverges_approx(a, k, Fuel{200});
            ASSERT_TRUE(prev || !cur) << to_string(a) << " at " << k;
            prev = cur;
        }
    }
}

TEST(DivergesApprox, ExclusiveWithEvaluation)
{
    for (const Term& a : test::sample_terms(86, 3000)) {
        ReductionClass c = classify(a, 100000);
        if (!c.value_reached()) continue;
        ASSERT_FALSE(diverges_approx(a, c.steps + 2)) << to_string(a);
    }
}

TEST(DivergeTrace, Omega)
{
    Term w = omega();
    EXPECT_EQ(diverge_trace_stream(w, Fuel{100}).take(5), (FiniteTrace{w, w, w, w, w}));
}

TEST(DivergeTrace, RightRuleMatchesReduction)
{
    Term a = P("(\\x. 0) @omega");
    EXPECT_TRUE(bisim_to_depth(diverge_trace_stream(a, Fuel{100}), reduct_stream(a), 200));
}

TEST(DivergeTrace, NotDivergingOnWrong)
{
    EXPECT_THROW(diverge_trace_stream(P("0 0"), Fuel{100}), NotDiverging);
    EXPECT_THROW(diverge_trace_stream(P("5"), Fuel{100}), NotDiverging);
}

TEST(DivergeTrace, NotDivergingDiscoveredLazily)
{
    // At fuel 2 the argument looks divergent; unfolding it reveals a value.
    LazyTrace t = diverge_trace_stream(P("(\\x. x) ((\\y. y) ((\\z. z) 1))"), Fuel{2});
    EXPECT_THROW(t.take(10), NotDiverging);
}

TEST(DivergeTrace, BisimilarToReductsOnCorpus)
{
    for (const Term& a : corpus_divergent())
        ASSERT_TRUE(bisim_to_depth(diverge_trace_stream(a), reduct_stream(a), 200)) << to_string(a);
}

TEST(Coeval, OmegaToAnything)
{
    for (const char* v : {"0", "1", "42", "\\x. x", "@delta", "@Omega", "@Y"})
        ASSERT_TRUE(coeval_approx(omega(), P(v), 200, Fuel{100})) << v;
}

TEST(Coeval, ConstantFunctionOfOmega)
{
    Term a = P("(\\x. 0) @omega");
    EXPECT_TRUE(coeval_approx(a, P("0"), 200, Fuel{100}));
    for (std::size_t k = 2; k <= 200; k += 33) EXPECT_FALSE(coeval_approx(a, P("1"), k, Fuel{100})) << k;
}

TEST(Coeval, WrongArgumentBlocks)
{
    Term a = P("@omega (0 0)");
    for (const char* v : {"0", "1", "\\x. x", "@Omega"})
        for (std::size_t k = 2; k <= 200; k += 66) ASSERT_FALSE(coeval_approx(a, P(v), k, Fuel{100})) << v << k;
}

TEST(Coeval, ZeroDepthIsTrivial) { EXPECT_TRUE(coeval_approx(P("0 0"), P("1"), 0)); }

TEST(Coeval, RejectsNonValueTarget) { EXPECT_THROW(coeval_approx(omega(), P("0 0"), 5), std::invalid_argument); }

TEST(Coeval, ContainsEvaluation)
{
    for (const Term& a : test::sample_terms(87, 2000)) {
        EvalOutcome e = eval_fuel(a, Fuel{200});
        if (!e.is_value()) continue;
        ASSERT_TRUE(coeval_approx(a, e.term(), 200, Fuel{200})) << to_string(a);
    }
}
