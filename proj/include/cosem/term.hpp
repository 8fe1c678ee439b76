#ifndef COSEM_TERM_HPP
#define COSEM_TERM_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

namespace cosem {

namespace detail {

inline std::size_t hash_mix(std::size_t seed, std::size_t v)
{
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

inline std::vector<std::string> merge_sorted(const std::vector<std::string>& a,
                                             const std::vector<std::string>& b)
{
    if (a.empty()) return b;
    if (b.empty()) return a;
    std::vector<std::string> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

} // namespace detail

// Named lambda-term with integer constants. Immutable; copies share structure.
// Every node caches its structural hash, size and sorted free-variable list,
// so equality and closedness tests are cheap on the common paths.
class Term {
public:
    enum class Kind : std::uint8_t { Var, Const, Abs, App };

    static Term var(std::string name);
    static Term constant(std::int64_t c);
    static Term abs(std::string param, Term body);
    static Term app(Term fun, Term arg);

    Kind kind() const noexcept;
    bool is_var() const noexcept { return kind() == Kind::Var; }
    bool is_const() const noexcept { return kind() == Kind::Const; }
    bool is_abs() const noexcept { return kind() == Kind::Abs; }
    bool is_app() const noexcept { return kind() == Kind::App; }

    // Variable name (Var) or bound parameter (Abs).
    const std::string& name() const noexcept;
    const std::string& param() const noexcept { return name(); }
    std::int64_t value() const noexcept;
    const Term& body() const noexcept;
    const Term& fun() const noexcept { return body(); }
    const Term& arg() const noexcept;

    std::size_t hash() const noexcept;
    std::size_t size() const noexcept;
    const std::vector<std::string>& free_vars() const noexcept;
    bool is_closed() const noexcept { return free_vars().empty(); }
    bool has_free(const std::string& x) const
    {
        const auto& f = free_vars();
        return std::binary_search(f.begin(), f.end(), x);
    }

    bool same_node(const Term& other) const noexcept { return node_ == other.node_; }

    friend bool operator==(const Term& a, const Term& b)
    {
        if (a.node_ == b.node_) return true;
        if (a.hash() != b.hash() || a.kind() != b.kind() || a.size() != b.size()) return false;
        switch (a.kind()) {
        case Kind::Var: return a.name() == b.name();
        case Kind::Const: return a.value() == b.value();
        case Kind::Abs: return a.param() == b.param() && a.body() == b.body();
        case Kind::App: return a.fun() == b.fun() && a.arg() == b.arg();
        }
        return false;
    }
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

private:
    struct Node;

    Term() = default;
    explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    std::shared_ptr<const Node> node_;
};

namespace detail {

// Releases a chain of uniquely owned nodes with an explicit stack, so that
// dropping a very deep term does not recurse once per level. `detach` moves
// a node's child pointers into the pending list.
template <class Ptr, class Detach>
void release_deep(std::vector<Ptr>& pending, Detach&& detach)
{
    while (!pending.empty()) {
        Ptr n = std::move(pending.back());
        pending.pop_back();
        detach(const_cast<std::remove_const_t<typename Ptr::element_type>&>(*n));
    }
}

} // namespace detail

struct Term::Node {
    Kind kind = Kind::Const;
    std::string name;
    std::int64_t value = 0;
    Term left;
    Term right;
    std::size_t hash = 0;
    std::size_t size = 0;
    std::vector<std::string> free;

    Node() = default;
    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;
    ~Node()
    {
        std::vector<std::shared_ptr<const Node>> pending;
        auto detach = [&pending](Node& n) {
            for (Term* c : {&n.left, &n.right})
                if (c->node_ && c->node_.use_count() == 1) pending.push_back(std::move(c->node_));
        };
        detach(*this);
        detail::release_deep(pending, detach);
    }
};

inline Term::Kind Term::kind() const noexcept { return node_->kind; }
inline const std::string& Term::name() const noexcept { return node_->name; }
inline std::int64_t Term::value() const noexcept { return node_->value; }
inline const Term& Term::body() const noexcept { return node_->left; }
inline const Term& Term::arg() const noexcept { return node_->right; }
inline std::size_t Term::hash() const noexcept { return node_->hash; }
inline std::size_t Term::size() const noexcept { return node_->size; }
inline const std::vector<std::string>& Term::free_vars() const noexcept { return node_->free; }

inline Term Term::var(std::string name)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->hash = detail::hash_mix(1, std::hash<std::string>{}(name));
    n->free.push_back(name);
    n->name = std::move(name);
    n->size = 1;
    return Term(std::move(n));
}

inline Term Term::constant(std::int64_t c)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = c;
    n->hash = detail::hash_mix(2, std::hash<std::int64_t>{}(c));
    n->size = 1;
    return Term(std::move(n));
}

inline Term Term::abs(std::string param, Term body)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Abs;
    n->hash = detail::hash_mix(detail::hash_mix(3, std::hash<std::string>{}(param)), body.hash());
    n->size = body.size() + 1;
    const auto& bf = body.free_vars();
    if (std::binary_search(bf.begin(), bf.end(), param)) {
        n->free.reserve(bf.size() - 1);
        for (const auto& v : bf)
            if (v != param) n->free.push_back(v);
    } else {
        n->free = bf;
    }
    n->name = std::move(param);
    n->left = std::move(body);
    return Term(std::move(n));
}

inline Term Term::app(Term fun, Term arg)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::App;
    n->hash = detail::hash_mix(detail::hash_mix(4, fun.hash()), arg.hash());
    n->size = fun.size() + arg.size() + 1;
    n->free = detail::merge_sorted(fun.free_vars(), arg.free_vars());
    n->left = std::move(fun);
    n->right = std::move(arg);
    return Term(std::move(n));
}

struct TermHash {
    std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

namespace detail {

inline void print_term(std::ostream& os, const Term& t, bool tail)
{
    switch (t.kind()) {
    case Term::Kind::Var: os << t.name(); return;
    case Term::Kind::Const: os << t.value(); return;
    case Term::Kind::Abs:
        if (!tail) os << '(';
        os << '\\' << t.param() << ". ";
        print_term(os, t.body(), true);
        if (!tail) os << ')';
        return;
    case Term::Kind::App: {
        const Term& f = t.fun();
        if (f.is_abs()) {
            os << '(';
            print_term(os, f, true);
            os << ')';
        } else {
            print_term(os, f, false);
        }
        os << ' ';
        const Term& x = t.arg();
        if (x.is_app()) {
            os << '(';
            print_term(os, x, true);
            os << ')';
        } else {
            print_term(os, x, tail);
        }
        return;
    }
    }
}

} // namespace detail

// Canonical text: backslash lambdas, left-associated application, and only
// the parentheses needed for the parser to recover the same tree.
inline std::ostream& operator<<(std::ostream& os, const Term& t)
{
    detail::print_term(os, t, true);
    return os;
}

inline std::string to_string(const Term& t)
{
    std::ostringstream os;
    os << t;
    return os.str();
}

// Nameless terms used by the closure evaluator and the compiler.
// DbVar(0) refers to the innermost enclosing binder.
class DbTerm {
public:
    enum class Kind : std::uint8_t { Var, Const, Abs, App };

    static DbTerm var(std::size_t index);
    static DbTerm constant(std::int64_t c);
    static DbTerm abs(DbTerm body);
    static DbTerm app(DbTerm fun, DbTerm arg);

    Kind kind() const noexcept;
    bool is_var() const noexcept { return kind() == Kind::Var; }
    bool is_const() const noexcept { return kind() == Kind::Const; }
    bool is_abs() const noexcept { return kind() == Kind::Abs; }
    bool is_app() const noexcept { return kind() == Kind::App; }

    std::size_t index() const noexcept;
    std::int64_t value() const noexcept;
    const DbTerm& body() const noexcept;
    const DbTerm& fun() const noexcept { return body(); }
    const DbTerm& arg() const noexcept;
    std::size_t hash() const noexcept;

    // Smallest environment length under which every index is bound.
    std::size_t free_bound() const noexcept;
    bool is_closed() const noexcept { return free_bound() == 0; }

    friend bool operator==(const DbTerm& a, const DbTerm& b)
    {
        if (a.node_ == b.node_) return true;
        if (a.hash() != b.hash() || a.kind() != b.kind()) return false;
        switch (a.kind()) {
        case Kind::Var: return a.index() == b.index();
        case Kind::Const: return a.value() == b.value();
        case Kind::Abs: return a.body() == b.body();
        case Kind::App: return a.fun() == b.fun() && a.arg() == b.arg();
        }
        return false;
    }
    friend bool operator!=(const DbTerm& a, const DbTerm& b) { return !(a == b); }

private:
    struct Node;

    DbTerm() = default;
    explicit DbTerm(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    std::shared_ptr<const Node> node_;
};

struct DbTerm::Node {
    Kind kind = Kind::Const;
    std::size_t index = 0;
    std::int64_t value = 0;
    DbTerm left;
    DbTerm right;
    std::size_t hash = 0;
    std::size_t free_bound = 0;

    Node() = default;
    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;
    ~Node()
    {
        std::vector<std::shared_ptr<const Node>> pending;
        auto detach = [&pending](Node& n) {
            for (DbTerm* c : {&n.left, &n.right})
                if (c->node_ && c->node_.use_count() == 1) pending.push_back(std::move(c->node_));
        };
        detach(*this);
        detail::release_deep(pending, detach);
    }
};

inline DbTerm::Kind DbTerm::kind() const noexcept { return node_->kind; }
inline std::size_t DbTerm::index() const noexcept { return node_->index; }
inline std::int64_t DbTerm::value() const noexcept { return node_->value; }
inline const DbTerm& DbTerm::body() const noexcept { return node_->left; }
inline const DbTerm& DbTerm::arg() const noexcept { return node_->right; }
inline std::size_t DbTerm::hash() const noexcept { return node_->hash; }
inline std::size_t DbTerm::free_bound() const noexcept { return node_->free_bound; }

inline DbTerm DbTerm::var(std::size_t index)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->index = index;
    n->hash = detail::hash_mix(11, index);
    n->free_bound = index + 1;
    return DbTerm(std::move(n));
}

inline DbTerm DbTerm::constant(std::int64_t c)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = c;
    n->hash = detail::hash_mix(12, std::hash<std::int64_t>{}(c));
    return DbTerm(std::move(n));
}

inline DbTerm DbTerm::abs(DbTerm body)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::Abs;
    n->hash = detail::hash_mix(13, body.hash());
    n->free_bound = body.free_bound() == 0 ? 0 : body.free_bound() - 1;
    n->left = std::move(body);
    return DbTerm(std::move(n));
}

inline DbTerm DbTerm::app(DbTerm fun, DbTerm arg)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::App;
    n->hash = detail::hash_mix(detail::hash_mix(14, fun.hash()), arg.hash());
    n->free_bound = std::max(fun.free_bound(), arg.free_bound());
    n->left = std::move(fun);
    n->right = std::move(arg);
    return DbTerm(std::move(n));
}

namespace detail {

inline void print_db(std::ostream& os, const DbTerm& t, bool tail)
{
    switch (t.kind()) {
    case DbTerm::Kind::Var: os << '#' << t.index(); return;
    case DbTerm::Kind::Const: os << t.value(); return;
    case DbTerm::Kind::Abs:
        if (!tail) os << '(';
        os << "\\. ";
        print_db(os, t.body(), true);
        if (!tail) os << ')';
        return;
    case DbTerm::Kind::App:
        if (t.fun().is_abs()) {
            os << '(';
            print_db(os, t.fun(), true);
            os << ')';
        } else {
            print_db(os, t.fun(), false);
        }
        os << ' ';
        if (t.arg().is_app()) {
            os << '(';
            print_db(os, t.arg(), true);
            os << ')';
        } else {
            print_db(os, t.arg(), tail);
        }
        return;
    }
}

} // namespace detail

inline std::ostream& operator<<(std::ostream& os, const DbTerm& t)
{
    detail::print_db(os, t, true);
    return os;
}

inline std::string to_string(const DbTerm& t)
{
    std::ostringstream os;
    os << t;
    return os.str();
}

} // namespace cosem

#endif
