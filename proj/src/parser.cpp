#include "hgp/parser.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "hgp/error.hpp"

namespace hgp {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint32_t kInf = kNone / 4;
constexpr int kSelf = -1;

struct CConstraint {
    bool allen = true;
    RelationSet rel;
    int a = kSelf;
    int b = kSelf;
    Span a_span = Span::Extent;
    Span b_span = Span::Extent;
    // Attribute predicates use `a` as the role.
    std::string attr;
    AttrOp op = AttrOp::Eq;
    AttrValue value;
};

struct CUnit {
    std::string name;
    NodeKind kind = NodeKind::Leaf;
    bool detectable = false;
    bool queryable = false;

    // AND
    std::vector<std::string> roles;
    std::vector<std::uint32_t> kids;
    int head = -1;
    std::vector<CConstraint> cons;
    std::vector<std::vector<int>> check_at;
    std::vector<int> check_end;
    std::vector<std::vector<int>> window_at;
    std::vector<std::uint32_t> suffix_min;

    // OR
    std::vector<std::uint32_t> options;

    std::uint32_t min_leaves = kInf;
    /// Same, when unfillable children may be left missing.
    std::uint32_t min_partial = kInf;
    /// Entering this unit starts a fresh pass-through chain.
    bool reset = false;
    std::vector<std::uint32_t> head_units;
};

std::uint32_t sat_add(std::uint32_t a, std::uint32_t b) { return std::min(kInf, a + b); }

}  // namespace

struct Parser::Plan {
    Model model;
    std::vector<CUnit> units;
    std::map<std::string, std::uint32_t, std::less<>> index;

    std::uint32_t at(std::string_view name) const {
        auto it = index.find(name);
        if (it == index.end()) throw ContractViolation("unknown unit " + std::string(name));
        return it->second;
    }
};

namespace {

std::unique_ptr<Parser::Plan> make_plan(Model model) {
    auto report = validate_model(model);
    if (!report.valid()) throw ValidationError("invalid model: " + report.to_string());

    auto plan = std::make_unique<Parser::Plan>();
    plan->model = std::move(model);
    const Model& m = plan->model;
    for (const auto& u : m.units) {
        plan->index.emplace(u, static_cast<std::uint32_t>(plan->units.size()));
        CUnit cu;
        cu.name = u;
        cu.detectable = m.detectable.count(u) > 0;
        cu.queryable = m.is_queryable(u);
        plan->units.push_back(std::move(cu));
    }

    for (const auto& p : m.patterns) {
        CUnit& cu = plan->units[plan->at(p.root)];
        cu.kind = NodeKind::And;
        std::map<std::string, int> role_index;
        for (const auto& c : p.children) {
            role_index[c.role] = static_cast<int>(cu.roles.size());
            cu.roles.push_back(c.role);
            cu.kids.push_back(plan->at(c.unit));
        }
        if (p.head_role) cu.head = role_index.at(*p.head_role);
        auto role_of = [&](const std::string& r) { return r == kSelfRole ? kSelf : role_index.at(r); };
        for (const auto& c : p.constraints) {
            CConstraint cc;
            if (const auto* a = std::get_if<AllenConstraint>(&c)) {
                cc.rel = a->rel;
                cc.a = role_of(a->a);
                cc.b = role_of(a->b);
                cc.a_span = a->a_span;
                cc.b_span = a->b_span;
            } else {
                const auto& pr = std::get<AttrPredicate>(c);
                cc.allen = false;
                cc.a = cc.b = role_of(pr.role);
                cc.attr = pr.attr;
                cc.op = pr.op;
                cc.value = pr.value;
            }
            cu.cons.push_back(std::move(cc));
        }
        const std::size_t n = cu.kids.size();
        cu.check_at.assign(n, {});
        cu.window_at.assign(n, {});
        for (std::size_t ci = 0; ci < cu.cons.size(); ++ci) {
            const auto& cc = cu.cons[ci];
            const bool has_self = cc.a == kSelf || cc.b == kSelf;
            const int last = std::max(cc.a, cc.b);
            if (last == kSelf || (has_self && !cu.detectable)) {
                cu.check_end.push_back(static_cast<int>(ci));
            } else {
                cu.check_at[last].push_back(static_cast<int>(ci));
            }
            if (cc.allen && cc.a != cc.b && last != kSelf && (!has_self || cu.detectable)) {
                cu.window_at[last].push_back(static_cast<int>(ci));
            }
        }
        cu.reset = cu.detectable || n >= 2;
    }
    for (const auto& a : m.alternatives) {
        CUnit& cu = plan->units[plan->at(a.root)];
        cu.kind = NodeKind::Or;
        for (const auto& o : a.options) cu.options.push_back(plan->at(o));
    }
    for (auto& cu : plan->units) {
        if (cu.kind == NodeKind::Leaf) cu.reset = true;
    }

    // Fewest detector occurrences any instance of a unit consumes.
    for (bool changed = true; changed;) {
        changed = false;
        for (auto& cu : plan->units) {
            std::uint32_t v = kInf;
            if (cu.kind == NodeKind::Leaf) {
                v = cu.queryable ? 1 : kInf;
            } else if (cu.kind == NodeKind::Or) {
                for (auto o : cu.options) v = std::min(v, plan->units[o].min_leaves);
            } else {
                v = cu.detectable ? 1 : 0;
                for (auto k : cu.kids) v = sat_add(v, plan->units[k].min_leaves);
            }
            if (v < cu.min_leaves) {
                cu.min_leaves = v;
                changed = true;
            }
        }
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (auto& cu : plan->units) {
            std::uint32_t v = kInf;
            if (cu.kind == NodeKind::Leaf) {
                v = cu.queryable ? 1 : kInf;
            } else if (cu.kind == NodeKind::Or) {
                for (auto o : cu.options) v = std::min(v, plan->units[o].min_partial);
            } else if (cu.detectable) {
                v = 1;
            } else {
                for (auto k : cu.kids) v = std::min(v, plan->units[k].min_partial);
            }
            if (v < cu.min_partial) {
                cu.min_partial = v;
                changed = true;
            }
        }
    }
    for (auto& cu : plan->units) {
        if (cu.kind != NodeKind::And) continue;
        cu.suffix_min.assign(cu.kids.size() + 1, 0);
        for (std::size_t i = cu.kids.size(); i-- > 0;) {
            cu.suffix_min[i] = sat_add(cu.suffix_min[i + 1], plan->units[cu.kids[i]].min_leaves);
        }
    }

    // Head units: the detectable units that can anchor an instance.
    for (std::uint32_t u = 0; u < plan->units.size(); ++u) {
        std::vector<bool> seen(plan->units.size(), false);
        std::set<std::uint32_t> heads;
        std::function<void(std::uint32_t)> walk = [&](std::uint32_t x) {
            if (seen[x]) return;
            seen[x] = true;
            const CUnit& c = plan->units[x];
            if (c.kind == NodeKind::Leaf || c.detectable) {
                if (c.queryable) heads.insert(x);
            } else if (c.kind == NodeKind::Or) {
                for (auto o : c.options) walk(o);
            } else if (c.head >= 0) {
                walk(c.kids[c.head]);
            }
        };
        walk(u);
        plan->units[u].head_units.assign(heads.begin(), heads.end());
    }
    return plan;
}

struct Inst;
using InstPtr = std::shared_ptr<const Inst>;

struct Inst {
    std::uint32_t unit = kNone;
    std::uint32_t occ = kNone;
    Interval extent;
    Interval head;
    const std::map<std::string, AttrValue>* flags = nullptr;
    std::vector<std::pair<std::string, InstPtr>> kids;
    std::vector<std::uint32_t> leaves;
    std::uint32_t size = 1;
    bool missing = false;
    /// Canonical form of the subtree; equal keys mean isomorphic instances.
    std::string key;
};

bool disjoint(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j) return false;
        if (*i < *j) {
            ++i;
        } else {
            ++j;
        }
    }
    return true;
}

std::vector<std::uint32_t> merged(const std::vector<std::uint32_t>& a,
                                  const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

class Search {
public:
    Search(const Parser::Plan& plan, const ParseRequest& req) : plan_(plan), req_(req) {
        if (!req.detector) throw ContractViolation("parse request has no detector");
    }

    ParseResult run();

private:
    struct Frame {
        std::uint32_t unit;
        std::uint32_t self;
        std::uint32_t base_budget;
        const std::vector<std::uint32_t>* chain;
        Interval window;
        std::uint32_t pinned;
        std::vector<const Inst*> bound;
        std::vector<InstPtr> bound_ptr;
        std::vector<InstPtr>* out;
    };

    std::uint32_t min_leaves(const CUnit& cu) const {
        return req_.emit_partial ? cu.min_partial : cu.min_leaves;
    }

    bool tick() {
        if (truncated_) return false;
        if (++expansions_ > req_.budget.max_expansions) {
            truncated_ = true;
            return false;
        }
        return true;
    }

    const std::vector<std::uint32_t>& query(std::uint32_t unit, const Interval& window);
    std::vector<std::uint32_t> candidates(std::uint32_t unit, const Interval& window,
                                          std::uint32_t pinned);
    std::vector<InstPtr> expand(std::uint32_t u, const Interval& window, std::uint32_t pinned,
                                std::uint32_t budget, const std::vector<std::uint32_t>& chain);
    void expand_and(std::uint32_t u, const Interval& window, std::uint32_t pinned,
                    std::uint32_t budget, const std::vector<std::uint32_t>& chain,
                    std::vector<InstPtr>& out);
    void bind(Frame& f, std::size_t i, const std::vector<std::uint32_t>& used);
    void finish(Frame& f, const std::vector<std::uint32_t>& used);
    bool check(const CUnit& cu, const CConstraint& c, const Frame& f, const AttributeSet* self) const;
    AttributeSet operand(const Frame& f, int role, const AttributeSet* self) const;

    InstPtr make_leaf(std::uint32_t u, std::uint32_t occ) const;
    std::string key_of(const Inst& x) const;
    SolutionGraph flatten(const std::vector<const Inst*>& components) const;

    const Parser::Plan& plan_;
    const ParseRequest& req_;
    std::deque<Occurrence> occs_;
    std::unordered_map<std::string, std::uint32_t> occ_index_;
    std::map<std::tuple<std::uint32_t, TimeMs, TimeMs>, std::vector<std::uint32_t>> query_cache_;
    struct MemoEntry {
        std::uint32_t budget;
        std::vector<InstPtr> insts;
    };
    std::unordered_map<std::string, MemoEntry> memo_;
    std::size_t expansions_ = 0;
    bool truncated_ = false;
};

const std::vector<std::uint32_t>& Search::query(std::uint32_t unit, const Interval& window) {
    static const std::vector<std::uint32_t> kEmpty;
    auto clipped = window.intersect(req_.span);
    if (!clipped) return kEmpty;
    auto key = std::make_tuple(unit, clipped->start(), clipped->end());
    auto it = query_cache_.find(key);
    if (it != query_cache_.end()) return it->second;

    std::vector<std::uint32_t> ids;
    for (auto& o : req_.detector->query({plan_.units[unit].name, *clipped})) {
        if (o.unit != plan_.units[unit].name) {
            throw ContractViolation("detector answered " + o.unit + " for a query on " +
                                    plan_.units[unit].name);
        }
        std::string k = o.unit + '\x1f' + o.id;
        auto found = occ_index_.find(k);
        if (found == occ_index_.end()) {
            const auto idx = static_cast<std::uint32_t>(occs_.size());
            occs_.push_back(std::move(o));
            found = occ_index_.emplace(std::move(k), idx).first;
        }
        ids.push_back(found->second);
    }
    return query_cache_.emplace(key, std::move(ids)).first->second;
}

std::vector<std::uint32_t> Search::candidates(std::uint32_t unit, const Interval& window,
                                              std::uint32_t pinned) {
    if (pinned == kNone) return query(unit, window);
    const Occurrence& o = occs_[pinned];
    if (o.unit != plan_.units[unit].name) return {};
    auto w = window.intersect(req_.span);
    if (!w || !o.attrs.interval.intersects(*w)) return {};
    return {pinned};
}

std::string Search::key_of(const Inst& x) const {
    std::string s = plan_.units[x.unit].name;
    if (x.occ != kNone) s += "<" + occs_[x.occ].id + ">";
    if (x.missing) s += "!";
    if (!x.kids.empty()) {
        std::vector<std::string> parts;
        parts.reserve(x.kids.size());
        for (const auto& [role, kid] : x.kids) parts.push_back(role + ":" + kid->key);
        std::sort(parts.begin(), parts.end());
        s += "(";
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) s += ",";
            s += parts[i];
        }
        s += ")";
    }
    return s;
}

InstPtr Search::make_leaf(std::uint32_t u, std::uint32_t occ) const {
    auto x = std::make_shared<Inst>();
    x->unit = u;
    x->occ = occ;
    x->extent = x->head = occs_[occ].attrs.interval;
    x->flags = &occs_[occ].attrs.flags;
    x->leaves = {occ};
    x->key = key_of(*x);
    return x;
}

std::vector<InstPtr> Search::expand(std::uint32_t u, const Interval& window, std::uint32_t pinned,
                                    std::uint32_t budget, const std::vector<std::uint32_t>& chain) {
    const CUnit& cu = plan_.units[u];
    if (truncated_ || min_leaves(cu) > budget) return {};
    if (std::binary_search(chain.begin(), chain.end(), u)) return {};

    std::string mkey;
    mkey.reserve(48 + 4 * chain.size());
    mkey += std::to_string(u) + "|" + std::to_string(window.start()) + "|" +
            std::to_string(window.end()) + "|" + std::to_string(pinned) + "|";
    for (auto c : chain) mkey += std::to_string(c) + ",";
    if (auto it = memo_.find(mkey); it != memo_.end() && it->second.budget >= budget) {
        std::vector<InstPtr> out;
        for (const auto& x : it->second.insts) {
            if (x->leaves.size() <= budget) out.push_back(x);
        }
        return out;
    }
    if (!tick()) return {};

    std::vector<InstPtr> out;
    switch (cu.kind) {
        case NodeKind::Leaf:
            for (auto occ : candidates(u, window, pinned)) out.push_back(make_leaf(u, occ));
            break;
        case NodeKind::Or: {
            std::vector<std::uint32_t> next = chain;
            next.insert(std::upper_bound(next.begin(), next.end(), u), u);
            for (std::size_t k = 0; k < cu.options.size(); ++k) {
                for (auto& child : expand(cu.options[k], window, pinned, budget, next)) {
                    auto x = std::make_shared<Inst>();
                    x->unit = u;
                    x->extent = child->extent;
                    x->head = child->head;
                    x->flags = child->flags;
                    x->leaves = child->leaves;
                    x->size = child->size + 1;
                    x->kids.emplace_back(option_role(k), std::move(child));
                    x->key = key_of(*x);
                    out.push_back(std::move(x));
                }
            }
            break;
        }
        case NodeKind::And:
            expand_and(u, window, pinned, budget, chain, out);
            break;
    }
    if (!truncated_) memo_[mkey] = {budget, out};
    return out;
}

void Search::expand_and(std::uint32_t u, const Interval& window, std::uint32_t pinned,
                        std::uint32_t budget, const std::vector<std::uint32_t>& chain,
                        std::vector<InstPtr>& out) {
    const CUnit& cu = plan_.units[u];
    std::vector<std::uint32_t> selves;
    std::uint32_t base = budget;
    if (cu.detectable) {
        selves = candidates(u, window, pinned);
        base = budget - 1;
    } else {
        if (pinned != kNone && cu.head < 0) return;
        selves = {kNone};
    }
    std::vector<std::uint32_t> child_chain;
    if (!cu.reset) {
        child_chain = chain;
        child_chain.insert(std::upper_bound(child_chain.begin(), child_chain.end(), u), u);
    }
    for (auto self : selves) {
        Frame f{u, self, base, &child_chain, window, pinned, {}, {}, &out};
        f.bound.assign(cu.kids.size(), nullptr);
        f.bound_ptr.assign(cu.kids.size(), nullptr);
        std::vector<std::uint32_t> used;
        if (self != kNone) used.push_back(self);
        bind(f, 0, used);
        if (truncated_) return;
    }
}

AttributeSet Search::operand(const Frame& f, int role, const AttributeSet* self) const {
    if (role == kSelf) {
        if (self) return *self;
        const Occurrence& o = occs_[f.self];
        return AttributeSet{o.attrs.interval, o.attrs.interval, o.attrs.flags};
    }
    const Inst* x = f.bound[role];
    AttributeSet a{x->extent, x->head, {}};
    if (x->flags) a.flags = *x->flags;
    return a;
}

bool Search::check(const CUnit&, const CConstraint& c, const Frame& f,
                   const AttributeSet* self) const {
    for (int r : {c.a, c.b}) {
        if (r != kSelf && (f.bound[r] == nullptr || f.bound[r]->missing)) return true;
    }
    if (c.allen) {
        const AttributeSet a = operand(f, c.a, self);
        const AttributeSet b = operand(f, c.b, self);
        return c.rel.holds(c.a_span == Span::Head ? a.head_span() : a.interval,
                           c.b_span == Span::Head ? b.head_span() : b.interval);
    }
    const AttributeSet a = operand(f, c.a, self);
    auto it = a.flags.find(c.attr);
    const bool equal = it != a.flags.end() && it->second == c.value;
    return c.op == AttrOp::Eq ? equal : !equal;
}

void Search::bind(Frame& f, std::size_t i, const std::vector<std::uint32_t>& used) {
    const CUnit& cu = plan_.units[f.unit];
    if (truncated_) return;
    if (i == cu.kids.size()) {
        finish(f, used);
        return;
    }
    const std::uint32_t kid = cu.kids[i];
    const std::uint32_t consumed = static_cast<std::uint32_t>(used.size()) - (f.self != kNone ? 1 : 0);
    const std::uint32_t reserve = sat_add(consumed, req_.emit_partial ? 0 : cu.suffix_min[i + 1]);
    const std::uint32_t child_budget = f.base_budget >= reserve ? f.base_budget - reserve : 0;

    std::optional<Interval> window = Interval::everything();
    std::uint32_t pin = kNone;
    if (static_cast<int>(i) == cu.head && !cu.detectable) {
        window = f.window;
        pin = f.pinned;
    }
    const CUnit& kc = plan_.units[kid];
    const bool extent_is_head = kc.kind == NodeKind::Leaf || kc.detectable;
    for (int ci : cu.window_at[i]) {
        const CConstraint& c = cu.cons[ci];
        const bool child_is_a = c.a == static_cast<int>(i);
        const int other = child_is_a ? c.b : c.a;
        const Span child_span = child_is_a ? c.a_span : c.b_span;
        const Span other_span = child_is_a ? c.b_span : c.a_span;
        if (child_span == Span::Extent && !extent_is_head) continue;
        Interval anchor;
        if (other == kSelf) {
            anchor = occs_[f.self].attrs.interval;
        } else {
            const Inst* o = f.bound[other];
            if (!o || o->missing) continue;
            anchor = other_span == Span::Head ? o->head : o->extent;
        }
        const RelationSet rel = child_is_a ? c.rel : c.rel.inverse();
        window = window ? window->intersect(rel.window_for_left(anchor)) : std::nullopt;
    }

    std::vector<InstPtr> cands;
    if (window && child_budget >= min_leaves(kc)) {
        cands = expand(kid, *window, pin, child_budget, *f.chain);
    }
    if (truncated_) return;
    if (cands.empty()) {
        if (req_.emit_partial) {
            static const Inst kMissingMarker = [] {
                Inst m;
                m.missing = true;
                return m;
            }();
            f.bound[i] = &kMissingMarker;
            f.bound_ptr[i] = nullptr;
            bind(f, i + 1, used);
            f.bound[i] = nullptr;
        }
        return;
    }
    for (auto& cand : cands) {
        if (!tick()) return;
        if (!disjoint(cand->leaves, used)) continue;
        f.bound[i] = cand.get();
        bool ok = true;
        for (int ci : cu.check_at[i]) {
            if (!check(cu, cu.cons[ci], f, nullptr)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            f.bound_ptr[i] = cand;
            bind(f, i + 1, merged(used, cand->leaves));
        }
        f.bound[i] = nullptr;
        f.bound_ptr[i] = nullptr;
        if (truncated_) return;
    }
}

void Search::finish(Frame& f, const std::vector<std::uint32_t>& used) {
    const CUnit& cu = plan_.units[f.unit];
    std::vector<Interval> present;
    for (const Inst* x : f.bound) {
        if (!x->missing) present.push_back(x->extent);
    }
    Interval extent;
    if (cu.detectable) {
        extent = occs_[f.self].attrs.interval;
    } else {
        if (present.empty()) return;
        extent = infer_parent_interval(present);
    }
    Interval head = extent;
    if (!cu.detectable && cu.head >= 0 && !f.bound[cu.head]->missing) head = f.bound[cu.head]->head;

    AttributeSet self{extent, head, {}};
    if (cu.detectable) self.flags = occs_[f.self].attrs.flags;
    for (int ci : cu.check_end) {
        if (!check(cu, cu.cons[ci], f, &self)) return;
    }
    if (used.empty()) return;

    auto x = std::make_shared<Inst>();
    x->unit = f.unit;
    x->occ = f.self;
    x->extent = extent;
    x->head = head;
    if (cu.detectable) x->flags = &occs_[f.self].attrs.flags;
    x->leaves = used;
    for (std::size_t i = 0; i < cu.kids.size(); ++i) {
        InstPtr k = f.bound_ptr[i];
        if (!k) {
            auto m = std::make_shared<Inst>();
            m->unit = cu.kids[i];
            m->extent = m->head = extent;
            m->missing = true;
            m->size = 0;
            m->key = key_of(*m);
            k = std::move(m);
        }
        x->size += k->size;
        x->kids.emplace_back(cu.roles[i], std::move(k));
    }
    x->key = key_of(*x);
    f.out->push_back(std::move(x));
}

SolutionGraph Search::flatten(const std::vector<const Inst*>& components) const {
    SolutionGraph g;
    std::size_t next = 0;
    std::function<std::string(const Inst&)> rec = [&](const Inst& x) {
        std::string id = "n" + std::to_string(next++);
        SolutionNode n;
        n.id = id;
        n.unit = plan_.units[x.unit].name;
        n.interval = x.extent;
        if (x.missing) {
            n.provenance = Provenance::Missing;
        } else if (x.occ != kNone) {
            n.provenance = occs_[x.occ].provenance;
            n.occurrence = occs_[x.occ].id;
        } else {
            n.provenance = Provenance::Inferred;
        }
        if (x.flags) n.flags = *x.flags;
        if (!x.missing) ++g.score;
        g.nodes.push_back(std::move(n));
        for (const auto& [role, kid] : x.kids) {
            std::string cid = rec(*kid);
            g.edges.push_back({id, role, std::move(cid)});
        }
        return id;
    };
    for (const Inst* c : components) g.roots.push_back(rec(*c));
    return g;
}

ParseResult Search::run() {
    ParseResult result;

    std::uint32_t total = 0;
    for (std::uint32_t u = 0; u < plan_.units.size(); ++u) {
        const CUnit& cu = plan_.units[u];
        if (cu.queryable) {
            total = sat_add(total, static_cast<std::uint32_t>(query(u, Interval::everything()).size()));
        }
    }

    std::vector<InstPtr> trees;
    std::unordered_set<std::string> seen;
    for (const auto& spec : req_.roots) {
        const std::uint32_t u = plan_.at(spec.unit);
        const CUnit& cu = plan_.units[u];
        if (cu.head_units.empty()) {
            throw ContractViolation("root unit " + spec.unit +
                                    " has no detectable head; top-down parsing needs a detectable root");
        }
        const Interval w = spec.window.value_or(req_.span);
        std::vector<std::uint32_t> seeds;
        for (auto hu : cu.head_units) {
            for (auto occ : query(hu, w)) {
                if (spec.seed_ids.empty() ||
                    std::find(spec.seed_ids.begin(), spec.seed_ids.end(), occs_[occ].id) !=
                        spec.seed_ids.end()) {
                    seeds.push_back(occ);
                }
            }
        }
        std::sort(seeds.begin(), seeds.end(), [&](auto a, auto b) {
            return std::tie(occs_[a].attrs.interval, occs_[a].id, a) <
                   std::tie(occs_[b].attrs.interval, occs_[b].id, b);
        });
        seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
        for (auto seed : seeds) {
            for (auto& t : expand(u, w, seed, total, {})) {
                if (seen.insert(t->key).second) trees.push_back(std::move(t));
            }
            if (truncated_) break;
        }
        if (truncated_) break;
    }
    for (const auto& t : trees) result.trees.push_back(t->key);

    // Merge: a tree that reappears inside another tree is absorbed by it.
    std::unordered_set<std::string> inner;
    std::unordered_set<const Inst*> visited;
    std::function<void(const Inst&)> collect = [&](const Inst& x) {
        for (const auto& [role, kid] : x.kids) {
            if (!visited.insert(kid.get()).second) continue;
            inner.insert(kid->key);
            collect(*kid);
        }
    };
    for (const auto& t : trees) collect(*t);
    std::vector<const Inst*> kept;
    for (const auto& t : trees) {
        if (!inner.count(t->key)) kept.push_back(t.get());
    }

    // Solutions are maximal sets of pairwise leaf-disjoint trees.
    const std::size_t n = kept.size();
    const std::size_t words = (n + 63) / 64;
    using Bits = std::vector<std::uint64_t>;
    std::vector<Bits> compat(n, Bits(words, 0));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (disjoint(kept[a]->leaves, kept[b]->leaves)) {
                compat[a][b / 64] |= 1ull << (b % 64);
                compat[b][a / 64] |= 1ull << (a % 64);
            }
        }
    }
    auto count = [](const Bits& x) {
        std::size_t c = 0;
        for (auto w : x) c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    };
    auto land = [](const Bits& x, const Bits& y) {
        Bits r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] & y[i];
        return r;
    };
    auto any = [](const Bits& x) {
        return std::any_of(x.begin(), x.end(), [](auto w) { return w != 0; });
    };

    std::vector<std::size_t> clique;
    std::function<void(Bits, Bits)> bk = [&](Bits p, Bits x) {
        if (!tick()) return;
        if (!any(p) && !any(x)) {
            if (result.solutions.size() >= req_.budget.max_solutions) {
                truncated_ = true;
                return;
            }
            std::vector<const Inst*> comps;
            for (auto i : clique) comps.push_back(kept[i]);
            result.solutions.push_back(flatten(comps));
            return;
        }
        std::size_t pivot = 0, best = 0;
        bool have = false;
        for (std::size_t v = 0; v < n; ++v) {
            if (!(((p[v / 64] | x[v / 64]) >> (v % 64)) & 1)) continue;
            const std::size_t c = count(land(p, compat[v]));
            if (!have || c > best) {
                pivot = v;
                best = c;
                have = true;
            }
        }
        for (std::size_t v = 0; v < n; ++v) {
            if (!((p[v / 64] >> (v % 64)) & 1)) continue;
            if ((compat[pivot][v / 64] >> (v % 64)) & 1) continue;
            clique.push_back(v);
            bk(land(p, compat[v]), land(x, compat[v]));
            clique.pop_back();
            if (truncated_) return;
            p[v / 64] &= ~(1ull << (v % 64));
            x[v / 64] |= 1ull << (v % 64);
        }
    };
    if (n > 0) {
        Bits all(words, 0);
        for (std::size_t v = 0; v < n; ++v) all[v / 64] |= 1ull << (v % 64);
        bk(all, Bits(words, 0));
    }

    result.truncated = truncated_;
    result.expansions = expansions_;
    for (auto& s : result.solutions) s.truncated = truncated_;
    return result;
}

}  // namespace

Parser::Parser(Model model) : plan_(make_plan(std::move(model))) {}
Parser::~Parser() = default;
Parser::Parser(Parser&&) noexcept = default;
Parser& Parser::operator=(Parser&&) noexcept = default;

const Model& Parser::model() const { return plan_->model; }

std::vector<UnitId> Parser::resolve_roots(const std::vector<std::string>& names) const {
    std::vector<UnitId> out;
    for (const auto& name : names) {
        if (!name.empty() && name.back() == '*') {
            const std::string prefix = name.substr(0, name.size() - 1);
            bool any = false;
            for (const auto& u : plan_->model.units) {
                if (u.rfind(prefix, 0) == 0) {
                    out.push_back(u);
                    any = true;
                }
            }
            if (!any) throw ContractViolation("no unit matches root pattern " + name);
        } else {
            if (!plan_->index.count(name)) throw ContractViolation("unknown root unit " + name);
            out.push_back(name);
        }
    }
    return out;
}

std::vector<UnitId> Parser::head_units(const UnitId& unit) const {
    std::vector<UnitId> out;
    for (auto h : plan_->units[plan_->at(unit)].head_units) out.push_back(plan_->units[h].name);
    return out;
}

ParseResult Parser::parse(const ParseRequest& request) const {
    Search search(*plan_, request);
    return search.run();
}

ParseResult parse(const Model& model, const ParseRequest& request) {
    return Parser(model).parse(request);
}

std::vector<RootSpec> root_specs(const Parser& parser, const std::vector<std::string>& names) {
    std::vector<RootSpec> out;
    for (auto& u : parser.resolve_roots(names)) out.push_back(RootSpec{std::move(u), std::nullopt, {}});
    return out;
}

ExternalParseDetector::ExternalParseDetector(std::shared_ptr<const Parser> parser,
                                             std::shared_ptr<const Detector> inner,
                                             std::vector<std::string> roots, SearchBudget budget,
                                             UnitId unit)
    : parser_(std::move(parser)),
      inner_(std::move(inner)),
      roots_(std::move(roots)),
      budget_(budget),
      unit_(std::move(unit)) {}

std::vector<Occurrence> ExternalParseDetector::query(const DetectorQuery& q) const {
    if (q.unit != unit_) throw ContractViolation("external detector only answers for " + unit_);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(q.window); it != cache_.end()) return it->second;
    }
    ParseRequest req;
    req.roots = root_specs(*parser_, roots_);
    req.detector = inner_;
    req.budget = budget_;
    req.span = q.window;
    auto result = parser_->parse(req);
    auto answer = solutions_as_detector(result.solutions, unit_)->query(q);
    std::lock_guard lock(mutex_);
    cache_.emplace(q.window, answer);
    return answer;
}

}  // namespace hgp
