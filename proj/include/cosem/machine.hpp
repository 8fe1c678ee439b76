#ifndef COSEM_MACHINE_HPP
#define COSEM_MACHINE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bigstep.hpp"
#include "smallstep.hpp"
#include "term.hpp"

namespace cosem {

// Immutable singly linked list. Tails are shared, so prepending is O(1) and
// two lists can be compared for identity with same().
template <class T>
class PList {
public:
    PList() = default;

    static PList cons(T head, PList tail);

    bool empty() const noexcept { return !cell_; }
    const T& head() const;
    const PList& tail() const;
    bool same(const PList& other) const noexcept { return cell_ == other.cell_; }

    std::size_t size() const
    {
        std::size_t n = 0;
        for (const PList* p = this; !p->empty(); p = &p->tail()) ++n;
        return n;
    }

    // nullptr when i is out of range.
    const T* at(std::size_t i) const
    {
        const PList* p = this;
        for (; i > 0 && !p->empty(); --i) p = &p->tail();
        return p->empty() ? nullptr : &p->head();
    }

    std::vector<T> to_vector() const
    {
        std::vector<T> out;
        for (const PList* p = this; !p->empty(); p = &p->tail()) out.push_back(p->head());
        return out;
    }

    static PList from_vector(const std::vector<T>& xs)
    {
        PList out;
        for (auto it = xs.rbegin(); it != xs.rend(); ++it) out = cons(*it, std::move(out));
        return out;
    }

    // Structural; shared tails short-circuit.
    friend bool operator==(const PList& a, const PList& b)
    {
        const PList* p = &a;
        const PList* q = &b;
        while (true) {
            if (p->same(*q)) return true;
            if (p->empty() || q->empty()) return false;
            if (!(p->head() == q->head())) return false;
            p = &p->tail();
            q = &q->tail();
        }
    }
    friend bool operator!=(const PList& a, const PList& b) { return !(a == b); }

private:
    struct Cell;
    explicit PList(std::shared_ptr<const Cell> c) : cell_(std::move(c)) {}
    std::shared_ptr<const Cell> cell_;
};

template <class T>
struct PList<T>::Cell {
    T head;
    PList tail;

    ~Cell()
    {
        // Long environments and stacks are dropped without deep recursion.
        std::vector<std::shared_ptr<const Cell>> pending;
        auto detach = [&pending](Cell& c) {
            if (c.tail.cell_ && c.tail.cell_.use_count() == 1) pending.push_back(std::move(c.tail.cell_));
        };
        detach(*this);
        detail::release_deep(pending, detach);
    }
};

template <class T>
PList<T> PList<T>::cons(T head, PList tail)
{
    return PList(std::make_shared<Cell>(std::move(head), std::move(tail)));
}

template <class T>
const T& PList<T>::head() const
{
    if (!cell_) throw std::out_of_range("head of empty list");
    return cell_->head;
}

template <class T>
const PList<T>& PList<T>::tail() const
{
    if (!cell_) throw std::out_of_range("tail of empty list");
    return cell_->tail;
}

// ---------------------------------------------------------------------------
// Closure-based evaluation of de Bruijn terms.

struct SValue;
using SEnv = PList<SValue>;

// SConst(c) or SClos(body, env), the closure of \. body over env.
struct SValue {
    enum class Kind { Const, Clos };
    Kind kind = Kind::Const;
    std::int64_t value = 0;
    std::optional<DbTerm> body;
    SEnv env;

    static SValue constant(std::int64_t c) { return {Kind::Const, c, std::nullopt, {}}; }
    static SValue closure(DbTerm body, SEnv env) { return {Kind::Clos, 0, std::move(body), std::move(env)}; }
    bool is_clos() const noexcept { return kind == Kind::Clos; }

    friend bool operator==(const SValue& a, const SValue& b)
    {
        if (a.kind != b.kind) return false;
        if (a.kind == Kind::Const) return a.value == b.value;
        return *a.body == *b.body && a.env == b.env;
    }
};

struct EnvOutcome {
    EvalOutcome::Kind kind;
    std::optional<SValue> value;

    bool is_value() const noexcept { return kind == EvalOutcome::Kind::Value; }
    bool is_wrong() const noexcept { return kind == EvalOutcome::Kind::Wrong; }
    bool is_fuel_out() const noexcept { return kind == EvalOutcome::Kind::FuelOut; }
};

namespace detail {

inline EnvOutcome env_eval(const SEnv& e, const DbTerm& a, std::size_t n)
{
    using K = EvalOutcome::Kind;
    if (n == 0) return {K::FuelOut, std::nullopt};
    switch (a.kind()) {
    case DbTerm::Kind::Var:
        if (const SValue* v = e.at(a.index())) return {K::Value, *v};
        return {K::Wrong, std::nullopt};
    case DbTerm::Kind::Const: return {K::Value, SValue::constant(a.value())};
    case DbTerm::Kind::Abs: return {K::Value, SValue::closure(a.body(), e)};
    case DbTerm::Kind::App: break;
    }
    EnvOutcome r1 = env_eval(e, a.fun(), n - 1);
    if (!r1.is_value()) return r1;
    EnvOutcome r2 = env_eval(e, a.arg(), n - 1);
    if (!r2.is_value()) return r2;
    if (!r1.value->is_clos()) return {K::Wrong, std::nullopt};
    return env_eval(SEnv::cons(std::move(*r2.value), r1.value->env), *r1.value->body, n - 1);
}

inline DbTerm readback_under(const DbTerm& a, std::size_t depth, const SEnv& e);

} // namespace detail

// Same fuel discipline as eval_fuel: one unit per rule unfolding, so the two
// evaluators agree outcome for outcome at equal fuel.
inline EnvOutcome env_eval(const SEnv& e, const DbTerm& a, Fuel fuel = default_fuel)
{
    return detail::env_eval(e, a, fuel.depth);
}

// The closed nameless term a closure value stands for: (\. b)[e] reads back
// as \. b with e substituted for the indices that escape the binder.
inline DbTerm readback(const SValue& v)
{
    if (!v.is_clos()) return DbTerm::constant(v.value);
    return DbTerm::abs(detail::readback_under(*v.body, 1, v.env));
}

inline DbTerm detail::readback_under(const DbTerm& a, std::size_t depth, const SEnv& e)
{
    switch (a.kind()) {
    case DbTerm::Kind::Var: {
        if (a.index() < depth) return a;
        const SValue* v = e.at(a.index() - depth);
        return v ? readback(*v) : a;
    }
    case DbTerm::Kind::Const: return a;
    case DbTerm::Kind::Abs: return DbTerm::abs(readback_under(a.body(), depth + 1, e));
    case DbTerm::Kind::App:
        return DbTerm::app(readback_under(a.fun(), depth, e), readback_under(a.arg(), depth, e));
    }
    return a;
}

// ---------------------------------------------------------------------------
// Compilation.

struct Instr;
using Code = PList<Instr>;

struct Instr {
    enum class Op { Var, Const, Clos, App, Ret, Nop };
    Op op = Op::Nop;
    std::int64_t operand = 0; // 1-based slot for Var, the constant for Const
    Code body;                // Clos only

    static Instr var(std::size_t n) { return {Op::Var, static_cast<std::int64_t>(n), {}}; }
    static Instr constant(std::int64_t c) { return {Op::Const, c, {}}; }
    static Instr clos(Code body) { return {Op::Clos, 0, std::move(body)}; }
    static Instr app() { return {Op::App, 0, {}}; }
    static Instr ret() { return {Op::Ret, 0, {}}; }
    static Instr nop() { return {Op::Nop, 0, {}}; }

    friend bool operator==(const Instr& a, const Instr& b)
    {
        return a.op == b.op && a.operand == b.operand && a.body == b.body;
    }
};

struct CompileOptions {
    bool nop = false; // applications compile to Nop, [a1], [a2], App
};

// [a] followed by suffix. DbVar i becomes Var(i + 1): the machine numbers
// environment slots from 1.
inline Code compile_onto(const DbTerm& a, Code suffix, CompileOptions opt = {})
{
    switch (a.kind()) {
    case DbTerm::Kind::Var: return Code::cons(Instr::var(a.index() + 1), std::move(suffix));
    case DbTerm::Kind::Const: return Code::cons(Instr::constant(a.value()), std::move(suffix));
    case DbTerm::Kind::Abs:
        return Code::cons(Instr::clos(compile_onto(a.body(), Code::cons(Instr::ret(), {}), opt)), std::move(suffix));
    case DbTerm::Kind::App: {
        Code c = compile_onto(a.fun(), compile_onto(a.arg(), Code::cons(Instr::app(), std::move(suffix)), opt), opt);
        return opt.nop ? Code::cons(Instr::nop(), std::move(c)) : c;
    }
    }
    return suffix;
}

inline Code compile(const DbTerm& a, CompileOptions opt = {}) { return compile_onto(a, Code{}, opt); }

struct MValue;
using MEnv = PList<MValue>;

struct MValue {
    enum class Kind { Const, Clos };
    Kind kind = Kind::Const;
    std::int64_t value = 0;
    Code code;
    MEnv env;

    static MValue constant(std::int64_t c) { return {Kind::Const, c, {}, {}}; }
    static MValue closure(Code code, MEnv env) { return {Kind::Clos, 0, std::move(code), std::move(env)}; }
    bool is_clos() const noexcept { return kind == Kind::Clos; }

    friend bool operator==(const MValue& a, const MValue& b)
    {
        if (a.kind != b.kind) return false;
        if (a.kind == Kind::Const) return a.value == b.value;
        return a.code == b.code && a.env == b.env;
    }
};

inline MEnv compile_env(const SEnv& e, CompileOptions opt = {});

inline MValue compile_value(const SValue& v, CompileOptions opt = {})
{
    if (!v.is_clos()) return MValue::constant(v.value);
    return MValue::closure(compile_onto(*v.body, Code::cons(Instr::ret(), {}), opt), compile_env(v.env, opt));
}

inline MEnv compile_env(const SEnv& e, CompileOptions opt)
{
    std::vector<MValue> out;
    for (const auto& v : e.to_vector()) out.push_back(compile_value(v, opt));
    return MEnv::from_vector(out);
}

// ---------------------------------------------------------------------------
// The machine.

struct Frame {
    Code code;
    MEnv env;

    friend bool operator==(const Frame& a, const Frame& b) { return a.code == b.code && a.env == b.env; }
};

using StackSlot = std::variant<MValue, Frame>;

struct MState {
    Code code;
    std::vector<StackSlot> stack; // top is back()
    MEnv env;

    friend bool operator==(const MState& a, const MState& b)
    {
        return a.code == b.code && a.stack == b.stack && a.env == b.env;
    }
};

enum class StepKind { Stepped, Halt, Crash };

// In-place transition. On Halt and Crash the state is left untouched.
inline StepKind advance(MState& s)
{
    if (s.code.empty()) return StepKind::Halt;
    const Instr& ins = s.code.head();
    auto& st = s.stack;
    switch (ins.op) {
    case Instr::Op::Var: {
        if (ins.operand < 1) return StepKind::Crash;
        const MValue* v = s.env.at(static_cast<std::size_t>(ins.operand - 1));
        if (!v) return StepKind::Crash;
        st.emplace_back(*v);
        break;
    }
    case Instr::Op::Const: st.emplace_back(MValue::constant(ins.operand)); break;
    case Instr::Op::Clos: st.emplace_back(MValue::closure(ins.body, s.env)); break;
    case Instr::Op::App: {
        // V . C'[E'] . S  ->  C' ; (C, E) . S ; V . E'
        if (st.size() < 2) return StepKind::Crash;
        auto* arg = std::get_if<MValue>(&st[st.size() - 1]);
        auto* fn = std::get_if<MValue>(&st[st.size() - 2]);
        if (!arg || !fn || !fn->is_clos()) return StepKind::Crash;
        MValue v = std::move(*arg);
        MValue f = std::move(*fn);
        st.pop_back();
        st.back() = Frame{s.code.tail(), s.env};
        s.env = MEnv::cons(std::move(v), std::move(f.env));
        s.code = std::move(f.code);
        return StepKind::Stepped;
    }
    case Instr::Op::Ret: {
        // V . (C', E') . S  ->  C' ; V . S ; E'
        if (st.size() < 2) return StepKind::Crash;
        auto* v = std::get_if<MValue>(&st[st.size() - 1]);
        auto* fr = std::get_if<Frame>(&st[st.size() - 2]);
        if (!v || !fr) return StepKind::Crash;
        Frame f = std::move(*fr);
        MValue val = std::move(*v);
        st.pop_back();
        st.back() = std::move(val);
        s.env = std::move(f.env);
        s.code = std::move(f.code);
        return StepKind::Stepped;
    }
    case Instr::Op::Nop: break;
    }
    s.code = s.code.tail();
    return StepKind::Stepped;
}

struct StepResult {
    StepKind kind;
    MState state; // successor, or the halted/crashed state itself
};

inline StepResult machine_step(const MState& s)
{
    MState next = s;
    StepKind k = advance(next);
    return {k, std::move(next)};
}

struct RunResult {
    enum class Status { Halted, Crashed, StepLimit, Reached };
    Status status;
    MState state;
    std::size_t steps; // transitions performed
};

// Runs until pred(state) holds (Reached), or Halt/Crash, or `limit` transitions.
// pred is tested before every transition, including the first.
template <class Pred>
RunResult run_until(MState s, std::size_t limit, Pred&& pred)
{
    for (std::size_t n = 0;; ++n) {
        if (pred(s)) return {RunResult::Status::Reached, std::move(s), n};
        if (n == limit) return {RunResult::Status::StepLimit, std::move(s), n};
        switch (advance(s)) {
        case StepKind::Halt: return {RunResult::Status::Halted, std::move(s), n};
        case StepKind::Crash: return {RunResult::Status::Crashed, std::move(s), n};
        case StepKind::Stepped: break;
        }
    }
}

inline RunResult run_state(MState s, std::size_t limit)
{
    return run_until(std::move(s), limit, [](const MState&) { return false; });
}

// From (code ; empty ; empty).
inline RunResult run(Code code, std::size_t limit = default_step_limit)
{
    return run_state(MState{std::move(code), {}, {}}, limit);
}

// ---------------------------------------------------------------------------
// Printing.

inline std::ostream& operator<<(std::ostream& os, const Code& c);

inline std::ostream& operator<<(std::ostream& os, const Instr& i)
{
    switch (i.op) {
    case Instr::Op::Var: return os << "Var(" << i.operand << ")";
    case Instr::Op::Const: return os << "Const(" << i.operand << ")";
    case Instr::Op::Clos: return os << "Clos(" << i.body << ")";
    case Instr::Op::App: return os << "App";
    case Instr::Op::Ret: return os << "Ret";
    case Instr::Op::Nop: return os << "Nop";
    }
    return os;
}

// One line, instructions separated by "; ".
inline std::ostream& operator<<(std::ostream& os, const Code& c)
{
    bool first = true;
    for (const Code* p = &c; !p->empty(); p = &p->tail()) {
        if (!first) os << "; ";
        os << p->head();
        first = false;
    }
    return os;
}

inline std::ostream& operator<<(std::ostream& os, const MEnv& e);

inline std::ostream& operator<<(std::ostream& os, const MValue& v)
{
    if (!v.is_clos()) return os << v.value;
    return os << "{" << v.code << "}" << v.env;
}

inline std::ostream& operator<<(std::ostream& os, const MEnv& e)
{
    os << "[";
    bool first = true;
    for (const MEnv* p = &e; !p->empty(); p = &p->tail()) {
        if (!first) os << ", ";
        os << p->head();
        first = false;
    }
    return os << "]";
}

// Stack printed top first.
inline std::ostream& operator<<(std::ostream& os, const MState& s)
{
    os << "code: " << s.code << "\nstack:";
    for (auto it = s.stack.rbegin(); it != s.stack.rend(); ++it) {
        os << ' ';
        if (auto* v = std::get_if<MValue>(&*it))
            os << *v;
        else {
            const auto& f = std::get<Frame>(*it);
            os << "(" << f.code << " | " << f.env << ")";
        }
    }
    return os << "\nenv: " << s.env;
}

namespace detail {

inline void print_assembly(std::ostream& os, const Code& c, std::size_t indent)
{
    for (const Code* p = &c; !p->empty(); p = &p->tail()) {
        const Instr& i = p->head();
        os << std::string(indent, ' ');
        if (i.op == Instr::Op::Clos) {
            os << "Clos\n";
            print_assembly(os, i.body, indent + 2);
        } else {
            os << i << '\n';
        }
    }
}

} // namespace detail

// One instruction per line; closure bodies indented two spaces under Clos.
inline std::string assembly(const Code& c)
{
    std::ostringstream os;
    detail::print_assembly(os, c, 0);
    return os.str();
}

template <class T>
std::string to_text(const T& x)
{
    std::ostringstream os;
    os << x;
    return os.str();
}

} // namespace cosem

#endif
