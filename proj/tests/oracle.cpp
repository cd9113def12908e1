#include "oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>

#include "hgp/constraints.hpp"

namespace oracle {

using namespace hgp;

namespace {

struct Node;
using NodeP = std::shared_ptr<const Node>;

struct Node {
    std::string unit;
    int occ = -1;
    Interval extent;
    Interval head;
    std::map<std::string, AttrValue> flags;
    std::vector<std::pair<std::string, NodeP>> kids;
    std::set<int> leaves;
    // Units from this node down through pass-through nodes to the first
    // node that starts a fresh chain (inclusive).
    std::set<std::string> down;
    std::string key;
};

std::string make_key(const Node& n, const std::vector<Occurrence>& occs) {
    std::string s = n.unit;
    if (n.occ >= 0) s += "<" + occs[n.occ].id + ">";
    if (n.kids.empty()) return s;
    std::vector<std::string> parts;
    for (const auto& [r, k] : n.kids) parts.push_back(r + ":" + k->key);
    std::sort(parts.begin(), parts.end());
    s += "(";
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
    return s + ")";
}

class Enumerator {
public:
    Enumerator(const Model& m, const std::vector<Occurrence>& occs) : m_(m), occs_(occs) {
        for (const auto& u : m.units) insts_[u];
        for (std::size_t i = 0; i < occs.size(); ++i) {
            if (!m.pattern_for(occs[i].unit) && !m.alternative_for(occs[i].unit)) {
                auto n = std::make_shared<Node>();
                n->unit = occs[i].unit;
                n->occ = static_cast<int>(i);
                n->extent = n->head = occs[i].attrs.interval;
                n->flags = occs[i].attrs.flags;
                n->leaves = {static_cast<int>(i)};
                n->down = {n->unit};
                n->key = make_key(*n, occs);
                add(std::move(n));
            }
        }
        for (bool grew = true; grew;) {
            grew = false;
            for (const auto& a : m.alternatives) grew |= close_alternative(a);
            for (const auto& p : m.patterns) grew |= close_pattern(p);
        }
    }

    const std::map<std::string, NodeP>& of(const std::string& unit) const { return insts_.at(unit); }

private:
    bool add(NodeP n) {
        auto& bucket = insts_[n->unit];
        return bucket.emplace(n->key, std::move(n)).second;
    }

    bool close_alternative(const Alternative& a) {
        bool grew = false;
        for (std::size_t k = 0; k < a.options.size(); ++k) {
            const auto snapshot = insts_[a.options[k]];
            for (const auto& [key, c] : snapshot) {
                if (c->down.count(a.root)) continue;
                auto n = std::make_shared<Node>();
                n->unit = a.root;
                n->extent = c->extent;
                n->head = c->head;
                n->flags = c->flags;
                n->kids = {{option_role(k), c}};
                n->leaves = c->leaves;
                n->down = c->down;
                n->down.insert(a.root);
                n->key = make_key(*n, occs_);
                grew |= add(std::move(n));
            }
        }
        return grew;
    }

    bool close_pattern(const Pattern& p) {
        const bool detectable = m_.detectable.count(p.root) > 0;
        const bool pass_through = !detectable && p.children.size() == 1;
        std::vector<int> selves;
        if (detectable) {
            for (std::size_t i = 0; i < occs_.size(); ++i) {
                if (occs_[i].unit == p.root) selves.push_back(static_cast<int>(i));
            }
        } else {
            selves.push_back(-1);
        }
        std::vector<std::vector<NodeP>> choices;
        for (const auto& c : p.children) {
            std::vector<NodeP> v;
            for (const auto& [key, n] : insts_[c.unit]) v.push_back(n);
            choices.push_back(std::move(v));
        }
        bool grew = false;
        std::vector<NodeP> pick(p.children.size());
        std::set<int> used;
        for (int self : selves) {
            used.clear();
            if (self >= 0) used.insert(self);
            std::function<void(std::size_t)> rec = [&](std::size_t i) {
                if (i == pick.size()) {
                    grew |= finish(p, self, pick, pass_through);
                    return;
                }
                for (const auto& n : choices[i]) {
                    bool clash = false;
                    for (int x : n->leaves) clash = clash || used.count(x);
                    if (clash) continue;
                    pick[i] = n;
                    used.insert(n->leaves.begin(), n->leaves.end());
                    rec(i + 1);
                    for (int x : n->leaves) used.erase(x);
                }
            };
            rec(0);
        }
        return grew;
    }

    bool finish(const Pattern& p, int self, const std::vector<NodeP>& pick, bool pass_through) {
        std::set<int> leaves;
        if (self >= 0) leaves.insert(self);
        std::size_t total = leaves.size();
        for (const auto& n : pick) {
            total += n->leaves.size();
            leaves.insert(n->leaves.begin(), n->leaves.end());
        }
        if (leaves.size() != total) return false;
        if (pass_through && pick[0]->down.count(p.root)) return false;

        std::vector<Interval> ivs;
        for (const auto& n : pick) ivs.push_back(n->extent);
        const Interval extent = self >= 0 ? occs_[self].attrs.interval : infer_parent_interval(ivs);
        Interval head = extent;
        if (self < 0 && p.head_role) {
            for (std::size_t i = 0; i < pick.size(); ++i) {
                if (p.children[i].role == *p.head_role) head = pick[i]->head;
            }
        }
        Binding b;
        for (std::size_t i = 0; i < pick.size(); ++i) {
            b[p.children[i].role] = AttributeSet{pick[i]->extent, pick[i]->head, pick[i]->flags};
        }
        AttributeSet me{extent, head, {}};
        if (self >= 0) me.flags = occs_[self].attrs.flags;
        b[std::string(kSelfRole)] = me;
        if (!check_binding(p, b)) return false;

        auto n = std::make_shared<Node>();
        n->unit = p.root;
        n->occ = self;
        n->extent = extent;
        n->head = head;
        n->flags = me.flags;
        for (std::size_t i = 0; i < pick.size(); ++i) n->kids.emplace_back(p.children[i].role, pick[i]);
        n->leaves = std::move(leaves);
        if (pass_through) {
            n->down = pick[0]->down;
            n->down.insert(p.root);
        } else {
            n->down = {p.root};
        }
        n->key = make_key(*n, occs_);
        return add(std::move(n));
    }

    const Model& m_;
    const std::vector<Occurrence>& occs_;
    std::map<std::string, std::map<std::string, NodeP>> insts_;
};

std::vector<NodeP> root_trees(const Enumerator& e, const std::vector<std::string>& roots) {
    std::map<std::string, NodeP> out;
    for (const auto& r : roots) {
        for (const auto& [k, n] : e.of(r)) out.emplace(k, n);
    }
    std::vector<NodeP> v;
    for (auto& [k, n] : out) v.push_back(n);
    return v;
}

}  // namespace

std::set<std::string> trees(const Model& model, const std::vector<Occurrence>& occurrences,
                            const std::vector<std::string>& roots) {
    const Enumerator e(model, occurrences);
    std::set<std::string> out;
    for (const auto& n : root_trees(e, roots)) out.insert(n->key);
    return out;
}

std::set<std::string> solutions(const Model& model, const std::vector<Occurrence>& occurrences,
                                const std::vector<std::string>& roots) {
    const Enumerator e(model, occurrences);
    const auto all = root_trees(e, roots);

    std::set<std::string> inner;
    std::function<void(const Node&)> walk = [&](const Node& n) {
        for (const auto& [r, k] : n.kids) {
            inner.insert(k->key);
            walk(*k);
        }
    };
    for (const auto& t : all) walk(*t);
    std::vector<NodeP> kept;
    for (const auto& t : all) {
        if (!inner.count(t->key)) kept.push_back(t);
    }

    auto disjoint = [](const Node& a, const Node& b) {
        for (int x : a.leaves) {
            if (b.leaves.count(x)) return false;
        }
        return true;
    };
    // Every clique, each listed once in increasing index order; keep the maximal ones.
    std::vector<std::vector<std::size_t>> cliques;
    std::vector<std::size_t> cur;
    std::function<void(std::size_t)> grow = [&](std::size_t start) {
        if (!cur.empty()) cliques.push_back(cur);
        for (std::size_t v = start; v < kept.size(); ++v) {
            bool ok = true;
            for (auto j : cur) ok = ok && disjoint(*kept[v], *kept[j]);
            if (!ok) continue;
            cur.push_back(v);
            grow(v + 1);
            cur.pop_back();
        }
    };
    grow(0);

    std::set<std::string> out;
    for (const auto& c : cliques) {
        bool maximal = true;
        for (std::size_t v = 0; v < kept.size() && maximal; ++v) {
            if (std::find(c.begin(), c.end(), v) != c.end()) continue;
            bool fits = true;
            for (auto j : c) fits = fits && disjoint(*kept[v], *kept[j]);
            if (fits) maximal = false;
        }
        if (!maximal) continue;
        std::vector<std::string> comps;
        for (auto j : c) comps.push_back(kept[j]->key);
        std::sort(comps.begin(), comps.end());
        std::string s;
        for (std::size_t i = 0; i < comps.size(); ++i) s += (i ? " | " : "") + comps[i];
        out.insert(s);
    }
    return out;
}

}  // namespace oracle
