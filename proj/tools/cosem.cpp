#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cosem/denot.hpp"
#include "cosem/report.hpp"

using namespace cosem;

namespace {

void print_outcome(const EvalOutcome& r)
{
    switch (r.kind()) {
    case EvalOutcome::Kind::Value: std::cout << r.term() << "\n"; break;
    case EvalOutcome::Kind::Wrong: std::cout << "Wrong: " << r.term() << "\n"; break;
    case EvalOutcome::Kind::FuelOut: std::cout << "FuelOut\n"; break;
    }
}

int exit_for(const EvalOutcome& r) { return r.is_value() ? 0 : r.is_wrong() ? 2 : 3; }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cosem: semantics workbench for call-by-value lambda calculus"};
    app.require_subcommand(1);

    std::string term, value;
    std::size_t limit = default_step_limit, fuel = default_fuel.depth, depth = 200;
    bool trace = false, nop = false, dump = false;

    auto* parse_cmd = app.add_subcommand("parse", "Parse and print a term in canonical form");
    parse_cmd->add_option("term", term)->required();

    auto* reduce_cmd = app.add_subcommand("reduce", "Small-step reduction");
    reduce_cmd->add_option("term", term)->required();
    reduce_cmd->add_option("--limit", limit, "step limit");
    reduce_cmd->add_flag("--trace", trace, "print every reduct");

    auto* eval_cmd = app.add_subcommand("eval", "Big-step evaluation with fuel");
    eval_cmd->add_option("term", term)->required();
    eval_cmd->add_option("--fuel", fuel, "recursion depth budget");
    eval_cmd->add_flag("--trace", trace, "print the reduction trace");

    auto* coeval_cmd = app.add_subcommand("coeval", "Coevaluation approximant at depth K");
    coeval_cmd->add_option("term", term)->required();
    coeval_cmd->add_option("value", value)->required();
    coeval_cmd->add_option("--depth", depth, "approximant depth");
    coeval_cmd->add_option("--fuel", fuel, "fuel for premise witnesses");

    auto* diverges_cmd = app.add_subcommand("diverges", "Divergence approximant at depth K");
    diverges_cmd->add_option("term", term)->required();
    diverges_cmd->add_option("--depth", depth, "approximant depth");
    diverges_cmd->add_option("--fuel", fuel, "fuel for evaluation premises");

    auto* denot_cmd = app.add_subcommand("denot", "Denotation up to depth N");
    denot_cmd->add_option("term", term)->required();
    denot_cmd->add_option("--depth", depth, "depth N >= 1")->required();

    auto* type_cmd = app.add_subcommand("typecheck", "Principal equi-recursive type");
    type_cmd->add_option("term", term)->required();

    auto* compile_cmd = app.add_subcommand("compile", "Print machine code");
    compile_cmd->add_option("term", term)->required();
    compile_cmd->add_flag("--nop", nop, "emit Nop before each application");

    auto* run_cmd = app.add_subcommand("run", "Compile and run on the machine");
    run_cmd->add_option("term", term)->required();
    run_cmd->add_option("--limit", limit, "transition limit");
    run_cmd->add_flag("--nop", nop, "use the Nop variant");
    run_cmd->add_flag("--dump-states", dump, "print every state");

    GenConfig gen;
    HarnessConfig hcfg;
    std::string mode = "any-closed", json_path;
    auto* fuzz_cmd = app.add_subcommand("fuzz", "Differential testing on generated terms");
    fuzz_cmd->add_option("--seed", gen.seed);
    fuzz_cmd->add_option("--count", gen.count);
    fuzz_cmd->add_option("--max-size", gen.max_size);
    fuzz_cmd->add_option("--mode", mode)->check(CLI::IsMember({"any-closed", "cps-closed", "typable"}));
    fuzz_cmd->add_option("--fuel", hcfg.fuel);
    fuzz_cmd->add_option("--limit", hcfg.limit);
    fuzz_cmd->add_option("--bisim-depth", hcfg.bisim_depth);
    fuzz_cmd->add_option("--coeval-depth", hcfg.coeval_depth);
    fuzz_cmd->add_option("--json", json_path, "write the JSON report here ('-' for stdout)");

    std::string corpus_path = COSEM_CORPUS_PATH;
    auto* corpus_cmd = app.add_subcommand("corpus", "Classify every corpus entry");
    corpus_cmd->add_option("path", corpus_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*parse_cmd) {
            std::cout << parse(term) << "\n";
            return 0;
        }
        if (*reduce_cmd) {
            Term a = parse(term);
            TracedReduction r = reduce_with_trace(a, limit);
            if (trace)
                for (const Term& t : r.trace) std::cout << t << "\n";
            switch (r.result.kind) {
            case ReductionClass::Kind::ValueReached:
                std::cout << r.result.term << "\n" << "value after " << r.result.steps << " steps\n";
                return 0;
            case ReductionClass::Kind::Stuck:
                std::cout << r.result.term << "\n" << "stuck after " << r.result.steps << " steps\n";
                return 2;
            case ReductionClass::Kind::StepLimit:
                std::cout << r.result.term << "\n" << "step limit " << limit << " reached\n";
                return 3;
            }
        }
        if (*eval_cmd) {
            Term a = parse(term);
            if (!trace) {
                EvalOutcome r = eval_fuel(a, Fuel{fuel});
                print_outcome(r);
                return exit_for(r);
            }
            TracedEval r = eval_trace(a, Fuel{fuel});
            for (const Term& t : r.trace) std::cout << t << "\n";
            print_outcome(r.outcome);
            return exit_for(r.outcome);
        }
        if (*coeval_cmd) {
            bool r = coeval_approx(parse(term), parse(value), depth, Fuel{fuel});
            std::cout << (r ? "true" : "false") << "\n";
            return r ? 0 : 1;
        }
        if (*diverges_cmd) {
            bool r = diverges_approx(parse(term), depth, Fuel{fuel});
            std::cout << (r ? "true" : "false") << "\n";
            return r ? 0 : 1;
        }
        if (*denot_cmd) {
            Term a = parse(term);
            detail::require_closed(a);
            std::cout << exec_approx(a, depth) << "\n";
            return 0;
        }
        if (*type_cmd) {
            InferResult r = infer(parse(term));
            if (auto* t = std::get_if<TypeGraph>(&r)) {
                std::cout << to_string(*t) << "\n";
                return 0;
            }
            const auto& e = std::get<IllTyped>(r);
            std::cout << "IllTyped: " << e.reason << " at " << e.at << "\n";
            return 2;
        }
        if (*compile_cmd) {
            std::cout << assembly(compile(to_debruijn(parse(term)), {nop}));
            return 0;
        }
        if (*run_cmd) {
            MState s{compile(to_debruijn(parse(term)), {nop}), {}, {}};
            std::size_t n = 0;
            StepKind k = StepKind::Stepped;
            for (; n < limit; ++n) {
                if (dump) std::cout << "-- " << n << "\n" << s << "\n";
                k = advance(s);
                if (k != StepKind::Stepped) break;
            }
            if (dump && k == StepKind::Stepped) std::cout << "-- " << n << "\n" << s << "\n";
            switch (k) {
            case StepKind::Halt:
                std::cout << "halted after " << n << " transitions\n" << s << "\n";
                return 0;
            case StepKind::Crash:
                std::cout << "crashed after " << n << " transitions\n" << s << "\n";
                return 2;
            case StepKind::Stepped:
                std::cout << "limit of " << limit << " transitions reached\n";
                return 3;
            }
        }
        if (*fuzz_cmd) {
            gen.mode = *parse_gen_mode(mode);
            auto t0 = std::chrono::steady_clock::now();
            std::vector<Verdict> vs;
            for (const Term& t : gen_terms(gen)) vs.push_back(classify_term(t, hcfg));
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            auto rep = make_report({gen, hcfg}, vs);
            if (json_path == "-") {
                std::cout << rep.dump(2) << "\n";
            } else {
                if (!json_path.empty()) {
                    std::ofstream out(json_path);
                    if (!out) throw std::runtime_error("cannot write " + json_path);
                    out << rep.dump(2) << "\n";
                }
                const auto& s = rep["summary"];
                std::cout << "terms " << vs.size() << " pass " << s["pass"] << " fail " << s["fail"] << " in "
                          << secs << " s\n";
                for (auto& [cls, n] : s["by_class"].items()) std::cout << "  " << cls << " " << n << "\n";
                for (auto& [check, c] : s["by_check"].items())
                    if (c["fail"] != 0) std::cout << "  FAILING " << check << " " << c["fail"] << "\n";
            }
            return rep["summary"]["fail"] == 0 ? 0 : 1;
        }
        if (*corpus_cmd) {
            int bad = 0;
            for (const auto& e : load_corpus(corpus_path)) {
                if (e.kind == "value") continue;
                Verdict v = classify_term(e.term);
                bool ok = expected_class_matches(e, v) && v.all_pass();
                bad += !ok;
                std::cout << (ok ? "ok   " : "FAIL ") << e.line << " " << to_string(v.cls) << " " << v.term << "\n";
            }
            return bad == 0 ? 0 : 1;
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 64;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 65;
    }
    return 0;
}
