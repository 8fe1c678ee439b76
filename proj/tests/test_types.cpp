#include <gtest/gtest.h>

#include "cosem/types.hpp"
#include "test_util.hpp"

using namespace cosem;
using cosem::test::P;

namespace {

TypeGraph type_of(const Term& a)
{
    auto r = infer(a);
    if (auto* e = std::get_if<IllTyped>(&r)) throw std::runtime_error(e->reason);
    return std::get<TypeGraph>(r);
}

// s = s -> int
TypeGraph self_arrow_int()
{
    TypeGraph g;
    auto s = g.add_int();
    auto i = g.add_int();
    g.set_arrow(s, s, i);
    g.set_root(s);
    return g;
}

// s = int -> s, and its one-step unfolding int -> s
TypeGraph stream_of_int(bool unfold)
{
    TypeGraph g;
    auto s = g.add_int();
    auto i = g.add_int();
    g.set_arrow(s, i, s);
    g.set_root(unfold ? g.add_arrow(g.add_int(), s) : s);
    return g;
}

TypeGraph arrow_of_vars(std::size_t a, std::size_t b)
{
    TypeGraph g;
    g.set_root(g.add_arrow(g.add_var(a), g.add_var(b)));
    return g;
}

} // namespace

TEST(TypeEqual, Basics)
{
    TypeGraph i = TypeGraph::int_type();
    TypeGraph ii;
    ii.set_root(ii.add_arrow(ii.add_int(), ii.add_int()));
    EXPECT_TRUE(type_equal(i, i));
    EXPECT_FALSE(type_equal(i, ii));
}

TEST(TypeEqual, UnfoldingPreservesTree)
{
    EXPECT_TRUE(type_equal(stream_of_int(false), stream_of_int(true)));
    EXPECT_FALSE(type_equal(stream_of_int(false), self_arrow_int()));
}

TEST(TypeEqual, VariablesUpToRenaming)
{
    EXPECT_TRUE(type_equal(arrow_of_vars(0, 1), arrow_of_vars(7, 3)));
    EXPECT_TRUE(type_equal(arrow_of_vars(2, 2), arrow_of_vars(5, 5)));
    EXPECT_FALSE(type_equal(arrow_of_vars(0, 1), arrow_of_vars(4, 4)));
    EXPECT_FALSE(type_equal(arrow_of_vars(4, 4), arrow_of_vars(0, 1)));
}

TEST(TypeEqual, EquivalenceOnInferredTypes)
{
    std::vector<TypeGraph> ts;
    for (const Term& a : test::sample_terms(101, 60, 20, GenMode::Typable)) ts.push_back(type_of(a));
    for (std::size_t i = 0; i < ts.size(); ++i) {
        ASSERT_TRUE(type_equal(ts[i], ts[i]));
        for (std::size_t j = 0; j < ts.size(); ++j) {
            ASSERT_EQ(type_equal(ts[i], ts[j]), type_equal(ts[j], ts[i]));
            if (!type_equal(ts[i], ts[j])) continue;
            for (std::size_t k = 0; k < ts.size(); ++k)
                if (type_equal(ts[j], ts[k])) ASSERT_TRUE(type_equal(ts[i], ts[k]));
        }
    }
}

TEST(Unify, SelfReferenceMakesCycle)
{
    UnificationState st;
    auto a = st.fresh_var();
    auto b = st.fresh_var();
    auto ab = st.arrow(a, b);
    EXPECT_FALSE(st.unify(a, ab));
    EXPECT_EQ(st.find(a), st.find(ab));
    TypeGraph g = st.extract(a);
    const auto& root = g.node(g.root());
    ASSERT_EQ(root.kind, TypeGraph::Node::Kind::Arrow);
    EXPECT_EQ(root.dom, g.root());
}

TEST(Unify, ClashReportsLabels)
{
    UnificationState st;
    auto i = st.int_type();
    auto f = st.arrow(st.fresh_var(), st.fresh_var());
    auto clash = st.unify(i, f);
    ASSERT_TRUE(clash);
    EXPECT_EQ(clash->left, "int");
    EXPECT_EQ(clash->right, "->");
}

TEST(Unify, VariableToInt)
{
    UnificationState st;
    auto a = st.fresh_var();
    auto i = st.int_type();
    EXPECT_FALSE(st.unify(a, i));
    EXPECT_TRUE(type_equal(st.extract(a), TypeGraph::int_type()));
}

TEST(Unify, CyclicAgainstCyclic)
{
    // a = a -> int and b = b -> int unify without looping.
    UnificationState st;
    auto a = st.fresh_var();
    auto b = st.fresh_var();
    EXPECT_FALSE(st.unify(a, st.arrow(a, st.int_type())));
    EXPECT_FALSE(st.unify(b, st.arrow(st.arrow(b, st.int_type()), st.int_type())));
    EXPECT_FALSE(st.unify(a, b));
    EXPECT_TRUE(type_equal(st.extract(a), self_arrow_int()));
}

TEST(Infer, Identity) { EXPECT_EQ(to_string(type_of(P("\\x. x"))), "'a -> 'a"); }

TEST(Infer, FixpointCombinatorShape)
{
    EXPECT_EQ(to_string(type_of(MacroTable::instance().y())), "(('a -> 'b) -> 'a -> 'b) -> 'a -> 'b");
}

TEST(Infer, SelfApplicationUsesRecursiveType)
{
    EXPECT_EQ(to_string(type_of(P("@delta"))), "%1=(%1 -> 'a) -> 'a");
    EXPECT_EQ(to_string(type_of(P("@omega"))), "'a");
}

TEST(Infer, ZeroZeroIllTyped)
{
    auto r = infer(P("0 0"));
    ASSERT_TRUE(std::holds_alternative<IllTyped>(r));
    EXPECT_EQ(std::get<IllTyped>(r).at, P("0 0"));
}

TEST(Infer, UnboundVariable)
{
    auto r = infer(P("\\x. y"));
    ASSERT_TRUE(std::holds_alternative<IllTyped>(r));
    EXPECT_EQ(std::get<IllTyped>(r).at, P("y"));
}

TEST(Infer, Environment)
{
    TypeEnv env{{"n", TypeGraph::int_type()}, {"f", arrow_of_vars(0, 0)}};
    EXPECT_EQ(to_string(std::get<TypeGraph>(infer(env, P("f n")))), "int");
    EXPECT_TRUE(std::holds_alternative<IllTyped>(infer(env, P("n n"))));
}

TEST(Infer, FixpointOfFAppliedTypechecks) { EXPECT_TRUE(typable(P("@Y @F 0"))); }

TEST(TypePrint, BackReference) { EXPECT_EQ(to_string(self_arrow_int()), "%1=(%1 -> int)"); }

TEST(TypePrint, RightAssociativeArrows)
{
    TypeGraph g;
    auto i = g.add_int();
    g.set_root(g.add_arrow(g.add_arrow(i, i), g.add_arrow(i, i)));
    EXPECT_EQ(to_string(g), "(int -> int) -> int -> int");
}

TEST(IsInstance, Basics)
{
    TypeGraph ii;
    ii.set_root(ii.add_arrow(ii.add_int(), ii.add_int()));
    EXPECT_TRUE(is_instance(arrow_of_vars(0, 1), ii));
    EXPECT_TRUE(is_instance(arrow_of_vars(0, 0), ii));
    EXPECT_FALSE(is_instance(ii, arrow_of_vars(0, 1)));
    EXPECT_FALSE(is_instance(arrow_of_vars(0, 0), arrow_of_vars(0, 1)));
    EXPECT_TRUE(is_instance(arrow_of_vars(0, 1), arrow_of_vars(2, 2)));
    EXPECT_TRUE(is_instance(arrow_of_vars(0, 1), self_arrow_int()));
}

TEST(Preservation, Examples)
{
    EXPECT_TRUE(check_preservation(P("(\\x. x) 0")));
    EXPECT_TRUE(check_preservation(P("\\x. x")));
    Term a = P("@Y @F 0");
    for (int i = 0; i < 5; ++i) a = *step(a);
    EXPECT_TRUE(typable(a));
    EXPECT_TRUE(check_preservation(a));
}

TEST(Preservation, PrincipalTypeMayGeneralise)
{
    // Before the step x is shared between y and z; afterwards they are unrelated.
    Term a = P("(\\x. \\y. \\z. (\\p. \\q. 0) (x y) (x z)) (\\w. w)");
    Term b = *step(a);
    TypeGraph ta = type_of(a), tb = type_of(b);
    EXPECT_EQ(to_string(ta), "'a -> 'a -> int");
    EXPECT_EQ(to_string(tb), "'a -> 'b -> int");
    EXPECT_FALSE(type_equal(ta, tb));
    EXPECT_TRUE(is_instance(tb, ta));
    EXPECT_TRUE(check_preservation(a));
}

TEST(Progress, Examples)
{
    EXPECT_TRUE(check_progress(P("0")));
    EXPECT_TRUE(check_progress(P("@Y @F 0")));
}

TEST(Soundness, TypableTermsNeverGetStuck)
{
    for (const Term& a : test::sample_terms(102, 1000, 30, GenMode::Typable)) {
        ReductionClass c = classify(a, 10000);
        ASSERT_FALSE(c.stuck()) << to_string(a);
        ASSERT_TRUE(check_progress(a));
    }
}

TEST(Soundness, PreservationAlongReductions)
{
    for (const Term& a : test::sample_terms(103, 300, 30, GenMode::Typable)) {
        Term cur = a;
        for (int i = 0; i < 200; ++i) {
            ASSERT_TRUE(check_preservation(cur)) << to_string(cur);
            auto nx = step(cur);
            if (!nx) break;
            cur = *nx;
        }
    }
}
