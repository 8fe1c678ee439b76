#ifndef COSEM_TYPES_HPP
#define COSEM_TYPES_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "smallstep.hpp"
#include "syntax.hpp"

namespace cosem {

// Finite rooted graph over int, arrow and type variables. Cycles stand for
// rational infinite trees, i.e. equi-recursive types such as s = s -> int.
class TypeGraph {
public:
    using NodeId = std::size_t;

    struct Node {
        enum class Kind { Int, Arrow, Var };
        Kind kind = Kind::Int;
        NodeId dom = 0;
        NodeId cod = 0;
        std::size_t var = 0;
    };

    NodeId add_int() { return push({Node::Kind::Int, 0, 0, 0}); }
    NodeId add_var(std::size_t id) { return push({Node::Kind::Var, 0, 0, id}); }
    NodeId add_arrow(NodeId dom, NodeId cod) { return push({Node::Kind::Arrow, dom, cod, 0}); }

    // Overwrite an existing node; used to tie cycles.
    void set_arrow(NodeId n, NodeId dom, NodeId cod) { nodes_.at(n) = {Node::Kind::Arrow, dom, cod, 0}; }
    void set_int(NodeId n) { nodes_.at(n) = {Node::Kind::Int, 0, 0, 0}; }
    void set_var(NodeId n, std::size_t id) { nodes_.at(n) = {Node::Kind::Var, 0, 0, id}; }

    NodeId root() const noexcept { return root_; }
    void set_root(NodeId r) { root_ = r; }
    const Node& node(NodeId n) const { return nodes_.at(n); }
    std::size_t size() const noexcept { return nodes_.size(); }

    static TypeGraph int_type()
    {
        TypeGraph g;
        g.set_root(g.add_int());
        return g;
    }

private:
    NodeId push(Node n)
    {
        nodes_.push_back(n);
        return nodes_.size() - 1;
    }

    std::vector<Node> nodes_;
    NodeId root_ = 0;
};

struct Clash {
    std::string left;
    std::string right;
};

// Union-find store for rational-tree unification. There is no occurs check:
// unifying a with a -> b yields a cyclic arrow.
class UnificationState {
public:
    using NodeId = std::size_t;

    NodeId fresh_var() { return push(Kind::Var, 0, 0); }
    NodeId int_type() { return push(Kind::Int, 0, 0); }
    NodeId arrow(NodeId dom, NodeId cod) { return push(Kind::Arrow, dom, cod); }

    NodeId find(NodeId n)
    {
        NodeId r = n;
        while (cells_[r].parent != r) r = cells_[r].parent;
        while (cells_[n].parent != r) {
            NodeId next = cells_[n].parent;
            cells_[n].parent = r;
            n = next;
        }
        return r;
    }

    // nullopt on success. A failed unification leaves the store partially
    // merged.
    std::optional<Clash> unify(NodeId a, NodeId b)
    {
        std::vector<std::pair<NodeId, NodeId>> work{{a, b}};
        while (!work.empty()) {
            auto [x, y] = work.back();
            work.pop_back();
            x = find(x);
            y = find(y);
            if (x == y) continue;
            Cell& cx = cells_[x];
            Cell& cy = cells_[y];
            if (cx.kind == Kind::Var) {
                cx.parent = y;
            } else if (cy.kind == Kind::Var) {
                cy.parent = x;
            } else if (cx.kind == Kind::Int && cy.kind == Kind::Int) {
                cx.parent = y;
            } else if (cx.kind == Kind::Arrow && cy.kind == Kind::Arrow) {
                // link before descending, so a cycle through (x, y) closes
                cx.parent = y;
                work.emplace_back(cx.dom, cy.dom);
                work.emplace_back(cx.cod, cy.cod);
            } else {
                return Clash{label(cx.kind), label(cy.kind)};
            }
        }
        return std::nullopt;
    }

    // Copy a frozen graph in. Type variables with equal ids share one node
    // through var_map.
    NodeId import(const TypeGraph& g, std::map<std::size_t, NodeId>& var_map)
    {
        std::vector<NodeId> ids(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto& n = g.node(i);
            switch (n.kind) {
            case TypeGraph::Node::Kind::Var: {
                auto it = var_map.find(n.var);
                ids[i] = it != var_map.end() ? it->second : (var_map[n.var] = fresh_var());
                break;
            }
            case TypeGraph::Node::Kind::Int: ids[i] = int_type(); break;
            case TypeGraph::Node::Kind::Arrow: ids[i] = arrow(0, 0); break;
            }
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto& n = g.node(i);
            if (n.kind == TypeGraph::Node::Kind::Arrow) {
                cells_[ids[i]].dom = ids[n.dom];
                cells_[ids[i]].cod = ids[n.cod];
            }
        }
        return ids.at(g.root());
    }

    // Frozen copy of what is reachable from root; type variables are
    // renumbered 0, 1, ... in breadth-first discovery order.
    TypeGraph extract(NodeId root)
    {
        TypeGraph g;
        std::unordered_map<NodeId, TypeGraph::NodeId> ids;
        std::vector<NodeId> order;
        auto visit = [&](NodeId n) {
            n = find(n);
            auto it = ids.find(n);
            if (it != ids.end()) return it->second;
            TypeGraph::NodeId id = g.add_int();
            ids.emplace(n, id);
            order.push_back(n);
            return id;
        };
        g.set_root(visit(root));
        std::size_t next_var = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const Cell c = cells_[order[i]];
            TypeGraph::NodeId id = ids.at(order[i]);
            if (c.kind == Kind::Arrow) {
                TypeGraph::NodeId d = visit(c.dom);
                TypeGraph::NodeId r = visit(c.cod);
                g.set_arrow(id, d, r);
            } else if (c.kind == Kind::Var) {
                g.set_var(id, next_var++);
            }
        }
        return g;
    }

private:
    enum class Kind { Int, Arrow, Var };

    struct Cell {
        Kind kind;
        NodeId dom;
        NodeId cod;
        NodeId parent;
    };

    static std::string label(Kind k) { return k == Kind::Int ? "int" : k == Kind::Arrow ? "->" : "var"; }

    NodeId push(Kind k, NodeId dom, NodeId cod)
    {
        cells_.push_back({k, dom, cod, cells_.size()});
        return cells_.size() - 1;
    }

    std::vector<Cell> cells_;
};

namespace detail {

enum class VarMatch { Rename, Identity };

// Bisimilarity of the rational trees rooted at n1 and n2. In Rename mode type
// variables must correspond through one consistent bijection.
inline bool bisimilar(const TypeGraph& g1, TypeGraph::NodeId n1, const TypeGraph& g2, TypeGraph::NodeId n2,
                      VarMatch mode)
{
    using K = TypeGraph::Node::Kind;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::map<std::size_t, std::size_t> fwd, bwd;
    std::vector<std::pair<std::size_t, std::size_t>> work{{n1, n2}};
    while (!work.empty()) {
        auto p = work.back();
        work.pop_back();
        if (!seen.insert(p).second) continue;
        const auto& a = g1.node(p.first);
        const auto& b = g2.node(p.second);
        if (a.kind != b.kind) return false;
        if (a.kind == K::Var) {
            if (mode == VarMatch::Identity) {
                if (a.var != b.var) return false;
                continue;
            }
            auto [fi, fnew] = fwd.emplace(a.var, b.var);
            auto [bi, bnew] = bwd.emplace(b.var, a.var);
            if (fi->second != b.var || bi->second != a.var) return false;
        } else if (a.kind == K::Arrow) {
            work.emplace_back(a.dom, b.dom);
            work.emplace_back(a.cod, b.cod);
        }
    }
    return true;
}

} // namespace detail

// Equality of rational trees up to renaming of type variables.
inline bool type_equal(const TypeGraph& a, const TypeGraph& b)
{
    return detail::bisimilar(a, a.root(), b, b.root(), detail::VarMatch::Rename);
}

// True when some substitution of general's variables makes it equal to
// specific, whose own variables stay rigid.
inline bool is_instance(const TypeGraph& general, const TypeGraph& specific)
{
    using K = TypeGraph::Node::Kind;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::map<std::size_t, std::size_t> binding;
    std::vector<std::pair<std::size_t, std::size_t>> work{{general.root(), specific.root()}};
    while (!work.empty()) {
        auto p = work.back();
        work.pop_back();
        if (!seen.insert(p).second) continue;
        const auto& g = general.node(p.first);
        if (g.kind == K::Var) {
            auto [it, fresh] = binding.emplace(g.var, p.second);
            if (!fresh && !detail::bisimilar(specific, it->second, specific, p.second, detail::VarMatch::Identity))
                return false;
            continue;
        }
        const auto& s = specific.node(p.second);
        if (g.kind != s.kind) return false;
        if (g.kind == K::Arrow) {
            work.emplace_back(g.dom, s.dom);
            work.emplace_back(g.cod, s.cod);
        }
    }
    return true;
}

namespace detail {

inline std::string type_var_name(std::size_t i)
{
    std::string s = "'";
    s += static_cast<char>('a' + i % 26);
    if (i >= 26) s += std::to_string(i / 26);
    return s;
}

class TypePrinter {
public:
    explicit TypePrinter(const TypeGraph& g) : g_(g), on_path_(g.size(), false) {}

    std::string print(TypeGraph::NodeId n)
    {
        using K = TypeGraph::Node::Kind;
        const auto& node = g_.node(n);
        if (node.kind == K::Int) return "int";
        if (node.kind == K::Var) {
            auto [it, fresh] = vars_.emplace(node.var, vars_.size());
            return type_var_name(it->second);
        }
        if (on_path_[n]) return "%" + std::to_string(label_of(n));
        on_path_[n] = true;
        std::string dom = print(node.dom);
        // A labelled binder already carries its own parentheses.
        if (g_.node(node.dom).kind == K::Arrow && dom.front() != '%') dom = "(" + dom + ")";
        std::string s = dom + " -> " + print(node.cod);
        on_path_[n] = false;
        auto it = labels_.find(n);
        if (it != labels_.end()) s = "%" + std::to_string(it->second) + "=(" + s + ")";
        return s;
    }

private:
    std::size_t label_of(TypeGraph::NodeId n)
    {
        return labels_.emplace(n, labels_.size() + 1).first->second;
    }

    const TypeGraph& g_;
    std::vector<bool> on_path_;
    std::map<std::size_t, std::size_t> vars_;
    std::map<TypeGraph::NodeId, std::size_t> labels_;
};

} // namespace detail

// Arrows associate to the right. A node reached again while printing its own
// subtree is shown as %k, with its definition written %k=(...).
inline std::string to_string(const TypeGraph& g)
{
    return detail::TypePrinter(g).print(g.root());
}

struct IllTyped {
    std::string reason;
    Term at;
};

using TypeEnv = std::map<std::string, TypeGraph>;
using InferResult = std::variant<TypeGraph, IllTyped>;

namespace detail {

class Inferencer {
public:
    explicit Inferencer(const TypeEnv& env)
    {
        std::map<std::size_t, UnificationState::NodeId> var_map;
        for (const auto& [name, t] : env) scope_.emplace_back(name, st_.import(t, var_map));
    }

    InferResult run(const Term& a)
    {
        try {
            auto root = go(a);
            return st_.extract(root);
        } catch (IllTyped& e) {
            return std::move(e);
        }
    }

private:
    UnificationState::NodeId go(const Term& a)
    {
        switch (a.kind()) {
        case Term::Kind::Var:
            for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
                if (it->first == a.name()) return it->second;
            throw IllTyped{"unbound variable " + a.name(), a};
        case Term::Kind::Const: return st_.int_type();
        case Term::Kind::Abs: {
            auto x = st_.fresh_var();
            scope_.emplace_back(a.param(), x);
            auto body = go(a.body());
            scope_.pop_back();
            return st_.arrow(x, body);
        }
        case Term::Kind::App: break;
        }
        auto f = go(a.fun());
        auto x = go(a.arg());
        auto r = st_.fresh_var();
        if (auto clash = st_.unify(f, st_.arrow(x, r)))
            throw IllTyped{"cannot unify " + clash->left + " with " + clash->right, a};
        return r;
    }

    UnificationState st_;
    std::vector<std::pair<std::string, UnificationState::NodeId>> scope_;
};

} // namespace detail

// Principal type of a under env. Environment entries share type variables by id.
inline InferResult infer(const TypeEnv& env, const Term& a)
{
    return detail::Inferencer(env).run(a);
}

inline InferResult infer(const Term& a) { return infer(TypeEnv{}, a); }

inline bool typable(const Term& a) { return std::holds_alternative<TypeGraph>(infer(a)); }

// If a is typable and steps to b, then b is typable and a's type is an instance
// of b's principal type (a reduct's principal type may be strictly more general).
// Vacuously true otherwise.
inline bool check_preservation(const Term& a)
{
    auto ta = infer(a);
    if (!std::holds_alternative<TypeGraph>(ta)) return true;
    auto b = step(a);
    if (!b) return true;
    auto tb = infer(*b);
    if (!std::holds_alternative<TypeGraph>(tb)) return false;
    return is_instance(std::get<TypeGraph>(tb), std::get<TypeGraph>(ta));
}

// A typable closed term is a value or can step.
inline bool check_progress(const Term& a)
{
    if (!a.is_closed() || !typable(a)) return true;
    return is_value(a) || step(a).has_value();
}

} // namespace cosem

#endif
