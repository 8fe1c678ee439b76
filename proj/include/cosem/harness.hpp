#ifndef COSEM_HARNESS_HPP
#define COSEM_HARNESS_HPP

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bigstep.hpp"
#include "denot.hpp"
#include "machine.hpp"
#include "smallstep.hpp"
#include "syntax.hpp"
#include "traces.hpp"
#include "types.hpp"

namespace cosem {

// ---------------------------------------------------------------------------
// Generation.

enum class GenMode { AnyClosed, CpsClosed, Typable };

inline std::string to_string(GenMode m)
{
    switch (m) {
    case GenMode::AnyClosed: return "any-closed";
    case GenMode::CpsClosed: return "cps-closed";
    case GenMode::Typable: return "typable";
    }
    return "?";
}

inline std::optional<GenMode> parse_gen_mode(const std::string& s)
{
    if (s == "any-closed") return GenMode::AnyClosed;
    if (s == "cps-closed") return GenMode::CpsClosed;
    if (s == "typable") return GenMode::Typable;
    return std::nullopt;
}

struct GenConfig {
    std::uint64_t seed = 1;
    std::size_t count = 100;
    std::size_t max_size = 30;
    GenMode mode = GenMode::AnyClosed;
};

// Bottom-up generator with a size budget. Variables are drawn only from the
// enclosing binders, so every term is closed. Plain modulo arithmetic on the
// engine output keeps sequences identical across standard libraries.
class TermGenerator {
public:
    explicit TermGenerator(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t below(std::uint64_t n) { return rng_() % n; }

    Term any(std::size_t max_size)
    {
        std::vector<std::string> scope;
        return gen_any(max_size, scope);
    }

    Term cps(std::size_t max_size)
    {
        std::vector<std::string> scope;
        return gen_cps(max_size, scope);
    }

private:
    enum class Pick { App, Abs, Var, Const };

    // 40% App, 30% Abs, 20% Var, 10% Const, demoted when the budget or the
    // scope cannot support the choice.
    Pick pick(std::size_t budget, const std::vector<std::string>& scope, bool allow_app)
    {
        std::uint64_t r = below(100);
        Pick p = r < 40 ? Pick::App : r < 70 ? Pick::Abs : r < 90 ? Pick::Var : Pick::Const;
        if (p == Pick::App && (!allow_app || budget < 3)) p = budget >= 2 ? Pick::Abs : Pick::Var;
        if (p == Pick::Abs && budget < 2) p = Pick::Var;
        if (p == Pick::Var && scope.empty()) p = Pick::Const;
        return p;
    }

    std::string binder() { return names_[below(names_.size())]; }

    Term leaf(Pick p, const std::vector<std::string>& scope)
    {
        if (p == Pick::Var) return Term::var(scope[below(scope.size())]);
        return Term::constant(static_cast<std::int64_t>(below(4)));
    }

    Term abs(std::size_t budget, std::vector<std::string>& scope, bool cps_body)
    {
        std::string x = binder();
        scope.push_back(x);
        Term body = cps_body ? gen_cps(budget - 1, scope) : gen_any(budget - 1, scope);
        scope.pop_back();
        return Term::abs(std::move(x), std::move(body));
    }

    Term gen_any(std::size_t budget, std::vector<std::string>& scope)
    {
        Pick p = pick(budget, scope, true);
        if (p == Pick::App) {
            std::size_t left = 1 + below(budget - 2);
            Term f = gen_any(left, scope);
            Term x = gen_any(budget - 1 - left, scope);
            return Term::app(std::move(f), std::move(x));
        }
        if (p == Pick::Abs) return abs(budget, scope, false);
        return leaf(p, scope);
    }

    // b ::= atom | b atom, atom ::= x | c | \x. b
    Term gen_cps(std::size_t budget, std::vector<std::string>& scope)
    {
        Pick p = pick(budget, scope, true);
        if (p == Pick::App) {
            std::size_t right = 1 + below(budget - 2);
            Term x = gen_atom(right, scope);
            Term f = gen_cps(budget - 1 - right, scope);
            return Term::app(std::move(f), std::move(x));
        }
        if (p == Pick::Abs) return abs(budget, scope, true);
        return leaf(p, scope);
    }

    Term gen_atom(std::size_t budget, std::vector<std::string>& scope)
    {
        Pick p = pick(budget, scope, false);
        if (p == Pick::Abs) return abs(budget, scope, true);
        return leaf(p, scope);
    }

    std::mt19937_64 rng_;
    std::vector<std::string> names_{"x", "y", "z", "f", "g", "h"};
};

inline std::vector<Term> gen_terms(const GenConfig& cfg)
{
    TermGenerator g(cfg.seed);
    std::vector<Term> out;
    out.reserve(cfg.count);
    std::size_t attempts = 0;
    while (out.size() < cfg.count) {
        switch (cfg.mode) {
        case GenMode::AnyClosed: out.push_back(g.any(cfg.max_size)); break;
        case GenMode::CpsClosed: out.push_back(g.cps(cfg.max_size)); break;
        case GenMode::Typable: {
            ++attempts;
            if (attempts > 100 * (cfg.count + 1))
                throw std::runtime_error("typable generation rejected more than 99% of candidates");
            Term t = g.any(cfg.max_size);
            if (typable(t)) out.push_back(std::move(t));
            break;
        }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verdicts.

struct HarnessConfig {
    std::size_t fuel = 1000;
    std::size_t limit = default_step_limit;
    std::size_t bisim_depth = 200;
    std::size_t coeval_depth = 200;
};

// Budget used once one semantics has shown that a term terminates: the other
// side then runs to its natural end, which is finite.
inline constexpr std::size_t unbounded_budget = std::size_t{1} << 40;

enum class TermClass { Converges, DivergesUpTo, GoesWrong, Undetermined };

inline std::string to_string(TermClass c)
{
    switch (c) {
    case TermClass::Converges: return "Converges";
    case TermClass::DivergesUpTo: return "DivergesUpTo";
    case TermClass::GoesWrong: return "GoesWrong";
    case TermClass::Undetermined: return "Undetermined";
    }
    return "?";
}

struct Verdict {
    std::string term;
    TermClass cls = TermClass::Undetermined;
    std::optional<std::string> result; // value (Converges) or stuck term (GoesWrong)
    std::size_t steps = 0;             // small steps taken (Converges, GoesWrong)
    std::size_t fuel = 0;
    std::map<std::string, bool> agreements;
    double millis = 0;

    bool all_pass() const
    {
        return std::all_of(agreements.begin(), agreements.end(), [](const auto& kv) { return kv.second; });
    }
};

namespace detail {

inline bool outcome_matches(const Result3& d, const EvalOutcome& e)
{
    switch (d.kind()) {
    case Result3::Kind::Bottom: return e.is_fuel_out();
    case Result3::Kind::Err: return e.is_wrong();
    case Result3::Kind::Val: return e.is_value() && e.term() == d.value();
    }
    return false;
}

inline bool env_matches(const EnvOutcome& w, const EvalOutcome& e)
{
    if (w.kind != e.kind()) return false;
    if (!e.is_value()) return true;
    return readback(*w.value) == to_debruijn(e.term());
}

} // namespace detail

// Runs (compile(a) ++ C ; S ; empty) until the code is exactly C again and
// checks the state is (C ; [v].S ; empty) for a's closure value v.
inline bool check_compiled_terminating(const Term& a, const Code& suffix, const std::vector<StackSlot>& stack,
                                       CompileOptions opt = {}, std::size_t* steps = nullptr)
{
    DbTerm db = to_debruijn(a);
    EnvOutcome w = env_eval(SEnv{}, db, Fuel{unbounded_budget});
    if (!w.is_value()) return false;
    MState start{compile_onto(db, suffix, opt), stack, {}};
    RunResult r = run_until(std::move(start), unbounded_budget,
                            [&](const MState& s) { return s.code.same(suffix) && s.stack.size() == stack.size() + 1; });
    if (steps) *steps = r.steps;
    if (r.status != RunResult::Status::Reached || !r.state.env.empty()) return false;
    std::vector<StackSlot> expect = stack;
    expect.emplace_back(compile_value(*w.value, opt));
    return r.state.stack == expect;
}

inline Verdict classify_term(const Term& a, const HarnessConfig& cfg = {})
{
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    v.term = to_string(a);
    v.fuel = cfg.fuel;
    auto& ag = v.agreements;

    TracedEval e = eval_trace(a, Fuel{cfg.fuel});
    ReductionClass c = classify(a, cfg.limit);

    // Budgets differ in unit (derivation depth against step count), so when
    // one side terminates the other is rerun without a practical bound.
    ReductionClass c_full = c;
    if (e.outcome.is_value() && !c.value_reached())
        c_full = classify(a, std::max(cfg.limit, e.trace.size()));
    else if (e.outcome.is_wrong() && !c.stuck())
        c_full = classify(a, std::max(cfg.limit, e.trace.size() + 1));
    EvalOutcome e_full = e.outcome;
    if (!e.outcome.is_value() && (c.value_reached() || c.stuck())) e_full = eval_fuel(a, Fuel{unbounded_budget});

    bool agree = true;
    if (e_full.is_value() || c_full.value_reached())
        agree = e_full.is_value() && c_full.value_reached() && e_full.term() == c_full.term;
    else if (e_full.is_wrong() || c_full.stuck())
        agree = e_full.is_wrong() && c_full.stuck();
    ag["bigstep_smallstep"] = agree;

    Result3 d = compute(cfg.fuel, a);
    ag["denot_bigstep"] = detail::outcome_matches(d, e.outcome);
    {
        bool mono = true;
        Result3 prev = compute(0, a);
        for (std::size_t n : {cfg.fuel / 8, cfg.fuel / 4, cfg.fuel / 2, cfg.fuel}) {
            Result3 cur = n == cfg.fuel ? d : compute(n, a);
            mono = mono && flat_leq(prev, cur);
            prev = cur;
        }
        ag["denot_monotone"] = mono;
    }

    DbTerm db = to_debruijn(a);
    ag["env_eval_agree"] = detail::env_matches(env_eval(SEnv{}, db, Fuel{cfg.fuel}), e.outcome);

    if (c_full.value_reached() && e_full.is_value()) {
        v.cls = TermClass::Converges;
        v.result = to_string(c_full.term);
        v.steps = c_full.steps;
        // Traces are compared at a fuel where evaluation completes.
        TracedEval ef = e.outcome.is_value() ? std::move(e) : eval_trace(a, Fuel{unbounded_budget});
        ag["trace_exact"] = ef.trace == reduce_with_trace(a, c_full.steps).trace;
        ag["exclusivity"] = !diverges_approx(a, c_full.steps + 2, Fuel{cfg.fuel});
        ag["eval_coeval"] = coeval_approx(a, c_full.term, std::min(cfg.coeval_depth, cfg.fuel), Fuel{cfg.fuel});
        std::size_t plain = 0, nop = 0;
        bool plain_ok = check_compiled_terminating(a, Code{}, {}, {false}, &plain);
        ag["machine_terminating"] = plain_ok;
        // one extra transition per application evaluated, i.e. per beta step
        ag["nop_variant"] = check_compiled_terminating(a, Code{}, {}, {true}, &nop) && nop == plain + c_full.steps;
    } else if (c_full.stuck() && e_full.is_wrong()) {
        v.cls = TermClass::GoesWrong;
        v.result = to_string(c_full.term);
        v.steps = c_full.steps;
        RunResult r = run(compile(db), unbounded_budget);
        ag["machine_wrong"] = r.status == RunResult::Status::Crashed;
    } else if (e.outcome.is_fuel_out() && c.step_limit() && diverges_approx(a, cfg.bisim_depth, Fuel{cfg.fuel})) {
        v.cls = TermClass::DivergesUpTo;
        bool bisim = false;
        try {
            bisim = bisim_to_depth(diverge_trace_stream(a, Fuel{cfg.fuel}), reduct_stream(a), cfg.bisim_depth);
        } catch (const NotDiverging&) {
        }
        ag["diverge_bisim"] = bisim;
        RunResult r = run(compile(db), cfg.limit);
        RunResult rn = run(compile(db, {true}), cfg.limit);
        ag["machine_diverging"] = r.status == RunResult::Status::StepLimit && rn.status == RunResult::Status::StepLimit;
    }

    if (typable(a)) ag["type_soundness"] = v.cls != TermClass::GoesWrong;

    v.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

// ---------------------------------------------------------------------------
// CPS coevaluation suite.

struct CpsReport {
    std::size_t converges = 0;
    std::size_t diverges = 0;
    std::size_t wrong = 0;
    std::size_t undetermined = 0;
    std::vector<std::string> failures;
};

// Converging closed CPS terms coevaluate to their value; diverging ones
// coevaluate to Omega. Terms that go wrong are exempt.
inline CpsReport cps_theorem_suite(const GenConfig& gen, const HarnessConfig& cfg = {})
{
    if (gen.mode != GenMode::CpsClosed) throw std::invalid_argument("cps_theorem_suite needs mode cps-closed");
    CpsReport rep;
    const Term& big_omega = MacroTable::instance().big_omega();
    for (const Term& b : gen_terms(gen)) {
        Verdict v = classify_term(b, cfg);
        bool ok = true;
        switch (v.cls) {
        case TermClass::Converges:
            ++rep.converges;
            ok = coeval_approx(b, parse(*v.result), cfg.coeval_depth, Fuel{cfg.fuel});
            break;
        case TermClass::DivergesUpTo:
            ++rep.diverges;
            ok = coeval_approx(b, big_omega, cfg.coeval_depth, Fuel{cfg.fuel});
            break;
        case TermClass::GoesWrong: ++rep.wrong; break;
        case TermClass::Undetermined: ++rep.undetermined; break;
        }
        if (!ok) rep.failures.push_back(v.term);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Random machine contexts: a suffix code and a stack that the compiled term
// must leave untouched.

inline Code random_code(TermGenerator& g, std::size_t len, int depth = 0)
{
    std::vector<Instr> xs;
    for (std::size_t i = 0; i < len; ++i) {
        switch (g.below(depth < 2 ? 6 : 5)) {
        case 0: xs.push_back(Instr::var(1 + g.below(3))); break;
        case 1: xs.push_back(Instr::constant(static_cast<std::int64_t>(g.below(10)))); break;
        case 2: xs.push_back(Instr::app()); break;
        case 3: xs.push_back(Instr::ret()); break;
        case 4: xs.push_back(Instr::nop()); break;
        default: xs.push_back(Instr::clos(random_code(g, 1 + g.below(3), depth + 1))); break;
        }
    }
    return Code::from_vector(xs);
}

inline MValue random_mvalue(TermGenerator& g)
{
    if (g.below(2) == 0) return MValue::constant(static_cast<std::int64_t>(g.below(10)));
    MEnv env;
    for (std::uint64_t i = g.below(3); i > 0; --i) env = MEnv::cons(MValue::constant(static_cast<std::int64_t>(i)), env);
    return MValue::closure(random_code(g, 1 + g.below(4)), std::move(env));
}

inline std::vector<StackSlot> random_stack(TermGenerator& g, std::size_t len)
{
    std::vector<StackSlot> s;
    for (std::size_t i = 0; i < len; ++i) {
        if (g.below(3) == 0) {
            MEnv env;
            if (g.below(2) == 0) env = MEnv::cons(random_mvalue(g), env);
            s.emplace_back(Frame{random_code(g, g.below(4)), std::move(env)});
        } else {
            s.emplace_back(random_mvalue(g));
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Regression corpus. One entry per line, fields separated by '|':
//   converges | term | value
//   diverges  | term
//   wrong     | term
//   value     | term          (a closed value, used as a coevaluation target)
// Blank lines and lines starting with '#' are ignored.

struct CorpusEntry {
    std::string kind;
    Term term;
    std::optional<Term> value;
    std::size_t line = 0;
};

namespace detail {

inline std::string trim(std::string s)
{
    auto ws = [](unsigned char ch) { return std::isspace(ch) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

} // namespace detail

inline std::vector<CorpusEntry> parse_corpus(std::istream& in)
{
    std::vector<CorpusEntry> out;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(t);
        for (std::string f; std::getline(ss, f, '|');) fields.push_back(detail::trim(f));
        auto fail = [&](const std::string& why) {
            throw std::runtime_error("corpus line " + std::to_string(no) + ": " + why);
        };
        if (fields.size() < 2) fail("expected 'kind | term'");
        const std::string& kind = fields[0];
        if (kind != "converges" && kind != "diverges" && kind != "wrong" && kind != "value")
            fail("unknown kind '" + kind + "'");
        CorpusEntry e{kind, parse(fields[1]), std::nullopt, no};
        if (kind == "converges") {
            if (fields.size() != 3) fail("converges needs a value field");
            e.value = parse(fields[2]);
        } else if (fields.size() != 2) {
            fail("unexpected extra field");
        }
        if (kind == "value" && !is_value(e.term)) fail("not a value");
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<CorpusEntry> load_corpus(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus " + path);
    return parse_corpus(in);
}

// Every closed value mentioned in the corpus, deduplicated.
inline std::vector<Term> corpus_values(const std::vector<CorpusEntry>& corpus)
{
    std::vector<Term> out;
    auto add = [&](const Term& t) {
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    };
    for (const auto& e : corpus) {
        if (e.kind == "value") add(e.term);
        if (e.value) add(*e.value);
    }
    return out;
}

inline bool expected_class_matches(const CorpusEntry& e, const Verdict& v)
{
    if (e.kind == "converges") return v.cls == TermClass::Converges && v.result && parse(*v.result) == *e.value;
    if (e.kind == "diverges") return v.cls == TermClass::DivergesUpTo;
    if (e.kind == "wrong") return v.cls == TermClass::GoesWrong;
    return true;
}

} // namespace cosem

#endif
