#include "hgp/solution.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <functional>
#include <map>

#include "hgp/error.hpp"
#include "hgp/model_io.hpp"

namespace hgp {

using nlohmann::json;

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Detected: return "detected";
        case Provenance::Inferred: return "inferred";
        case Provenance::External: return "external";
        case Provenance::Missing: return "missing";
    }
    return "inferred";
}

Provenance provenance_from_name(std::string_view name) {
    if (name == "detected") return Provenance::Detected;
    if (name == "inferred") return Provenance::Inferred;
    if (name == "external") return Provenance::External;
    if (name == "missing") return Provenance::Missing;
    throw LoadError("unknown provenance '" + std::string(name) + "'");
}

std::string option_role(std::size_t k) { return "option:" + std::to_string(k); }

bool is_option_role(std::string_view role) { return role.rfind("option:", 0) == 0; }

const SolutionNode* SolutionGraph::node(std::string_view id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

std::vector<const SolutionEdge*> SolutionGraph::out_edges(std::string_view id) const {
    std::vector<const SolutionEdge*> out;
    for (const auto& e : edges) {
        if (e.from == id) out.push_back(&e);
    }
    return out;
}

const SolutionNode& SolutionGraph::head_node(std::string_view id) const {
    const SolutionNode* n = node(id);
    if (!n) throw ContractViolation("solution has no node " + std::string(id));
    while (n->occurrence.empty()) {
        const SolutionNode* next = nullptr;
        for (const auto* e : out_edges(n->id)) {
            if (e->role == "head" || is_option_role(e->role)) {
                next = node(e->to);
                break;
            }
        }
        if (!next) break;
        n = next;
    }
    return *n;
}

Interval SolutionGraph::hull() const {
    if (nodes.empty()) return Interval(0, 0);
    std::vector<Interval> ivs;
    for (const auto& n : nodes) ivs.push_back(n.interval);
    return infer_parent_interval(ivs);
}

std::vector<std::string> SolutionGraph::occurrence_ids() const {
    std::vector<std::string> out;
    for (const auto& n : nodes) {
        if (!n.occurrence.empty()) out.push_back(n.occurrence);
    }
    return out;
}

namespace {

std::map<std::string, std::vector<const SolutionEdge*>> edges_by_source(const SolutionGraph& g) {
    std::map<std::string, std::vector<const SolutionEdge*>> out;
    for (const auto& e : g.edges) out[e.from].push_back(&e);
    return out;
}

}  // namespace

std::string canonical_form(const SolutionGraph& g) {
    std::map<std::string, const SolutionNode*> by_id;
    for (const auto& n : g.nodes) by_id[n.id] = &n;
    const auto out = edges_by_source(g);

    std::function<std::string(const std::string&)> rec = [&](const std::string& id) {
        const SolutionNode* n = by_id.at(id);
        std::string s = n->unit;
        if (!n->occurrence.empty()) s += "<" + n->occurrence + ">";
        if (n->provenance == Provenance::Missing) s += "!";
        auto it = out.find(id);
        if (it != out.end()) {
            std::vector<std::string> parts;
            for (const auto* e : it->second) parts.push_back(e->role + ":" + rec(e->to));
            std::sort(parts.begin(), parts.end());
            s += "(";
            for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
            s += ")";
        }
        return s;
    };
    std::vector<std::string> comps;
    for (const auto& r : g.roots) comps.push_back(rec(r));
    std::sort(comps.begin(), comps.end());
    std::string s;
    for (std::size_t i = 0; i < comps.size(); ++i) s += (i ? " | " : "") + comps[i];
    return s;
}

std::vector<SolutionGraph> rank_solutions(std::vector<SolutionGraph> solutions) {
    struct Keyed {
        TimeMs start;
        std::vector<std::string> occs;
        std::string canon;
        std::size_t index;
    };
    std::vector<Keyed> keys;
    for (std::size_t i = 0; i < solutions.size(); ++i) {
        keys.push_back({solutions[i].hull().start(), solutions[i].occurrence_ids(),
                        canonical_form(solutions[i]), i});
    }
    std::sort(keys.begin(), keys.end(), [&](const Keyed& a, const Keyed& b) {
        const auto sa = solutions[a.index].score, sb = solutions[b.index].score;
        if (sa != sb) return sa > sb;
        if (a.start != b.start) return a.start < b.start;
        if (a.occs != b.occs) return a.occs < b.occs;
        return a.canon < b.canon;
    });
    std::vector<SolutionGraph> out;
    out.reserve(solutions.size());
    for (const auto& k : keys) out.push_back(std::move(solutions[k.index]));
    return out;
}

AnnotationDoc solution_to_annotation(const SolutionGraph& g) {
    AnnotationDoc doc;
    doc.span = g.hull();
    for (const auto& n : g.nodes) {
        Occurrence o;
        o.id = n.id;
        o.unit = n.unit;
        o.attrs.interval = n.interval;
        o.attrs.flags = n.flags;
        o.provenance = n.provenance;
        o.source = n.occurrence;
        doc.occurrences.push_back(std::move(o));
    }
    std::sort(doc.occurrences.begin(), doc.occurrences.end(),
              [](const Occurrence& a, const Occurrence& b) {
                  return std::tie(a.attrs.interval, a.unit, a.id) <
                         std::tie(b.attrs.interval, b.unit, b.id);
              });
    return doc;
}

std::vector<std::string> recheck_solution(const Model& model, const SolutionGraph& g) {
    std::vector<std::string> problems;
    const auto out = edges_by_source(g);

    auto attrs_of = [&](const SolutionNode& n) {
        AttributeSet a;
        a.interval = n.interval;
        a.head = g.head_node(n.id).interval;
        a.flags = n.flags;
        return a;
    };

    for (const auto& n : g.nodes) {
        if (n.provenance == Provenance::Missing) continue;
        auto it = out.find(n.id);
        static const std::vector<const SolutionEdge*> kNone;
        const auto& edges = it == out.end() ? kNone : it->second;

        if (const Alternative* alt = model.alternative_for(n.unit)) {
            if (edges.size() != 1 || !is_option_role(edges[0]->role)) {
                problems.push_back(n.id + " (" + n.unit + "): alternative node needs one option edge");
                continue;
            }
            const std::size_t k = std::stoul(edges[0]->role.substr(7));
            const SolutionNode* c = g.node(edges[0]->to);
            if (k >= alt->options.size() || !c || c->unit != alt->options[k]) {
                problems.push_back(n.id + " (" + n.unit + "): option edge does not match the alternative");
            } else if (c->interval != n.interval) {
                problems.push_back(n.id + " (" + n.unit + "): interval differs from its option");
            }
            continue;
        }

        const Pattern* pat = model.pattern_for(n.unit);
        if (!pat) {
            if (!model.is_queryable(n.unit)) {
                problems.push_back(n.id + " (" + n.unit + "): leaf unit is not detectable");
            }
            if (n.occurrence.empty()) {
                problems.push_back(n.id + " (" + n.unit + "): leaf node has no occurrence");
            }
            continue;
        }

        Binding binding;
        std::set<std::string> missing;
        std::vector<Interval> present;
        for (const auto& child : pat->children) {
            const SolutionEdge* e = nullptr;
            for (const auto* x : edges) {
                if (x->role == child.role) e = x;
            }
            const SolutionNode* c = e ? g.node(e->to) : nullptr;
            if (!c) {
                problems.push_back(n.id + " (" + n.unit + "): role " + child.role + " unbound");
                missing.insert(child.role);
                continue;
            }
            if (c->unit != child.unit) {
                problems.push_back(n.id + " (" + n.unit + "): role " + child.role + " bound to " +
                                   c->unit + ", expected " + child.unit);
            }
            if (c->provenance == Provenance::Missing) {
                missing.insert(child.role);
                continue;
            }
            binding[child.role] = attrs_of(*c);
            present.push_back(c->interval);
        }
        binding[std::string(kSelfRole)] = attrs_of(n);

        if (!model.detectable.count(n.unit) && !present.empty() &&
            infer_parent_interval(present) != n.interval) {
            problems.push_back(n.id + " (" + n.unit + "): interval " + n.interval.to_string() +
                               " is not the hull of its constituents");
        }

        std::vector<ConstraintExpr> active;
        for (const auto& c : pat->constraints) {
            bool skip = false;
            for (const auto& r : constraint_roles(c)) skip = skip || missing.count(r);
            if (!skip) active.push_back(c);
        }
        for (const auto& c : active) {
            if (!eval_constraint(c, binding)) {
                std::string what = std::holds_alternative<AllenConstraint>(c)
                                       ? std::get<AllenConstraint>(c).rel_name
                                       : std::get<AttrPredicate>(c).attr;
                problems.push_back(n.id + " (" + n.unit + "): constraint " + what + " violated");
            }
        }
    }
    return problems;
}

json solution_to_json(const SolutionGraph& g) {
    json nodes = json::array();
    for (const auto& n : g.nodes) {
        json jn = {{"id", n.id},
                   {"unit", n.unit},
                   {"start", n.interval.start()},
                   {"end", n.interval.end()},
                   {"provenance", provenance_name(n.provenance)}};
        if (!n.occurrence.empty()) jn["occurrence"] = n.occurrence;
        if (!n.flags.empty()) {
            json f = json::object();
            for (const auto& [k, v] : n.flags) {
                if (const bool* b = std::get_if<bool>(&v)) {
                    f[k] = *b;
                } else {
                    f[k] = std::get<std::string>(v);
                }
            }
            jn["flags"] = f;
        }
        nodes.push_back(std::move(jn));
    }
    json edges = json::array();
    for (const auto& e : g.edges) edges.push_back({{"from", e.from}, {"role", e.role}, {"to", e.to}});
    return json{{"score", g.score}, {"truncated", g.truncated}, {"roots", g.roots},
                {"nodes", nodes},   {"edges", edges}};
}

SolutionGraph solution_from_json(const json& j) {
    SolutionGraph g;
    g.score = j.value("score", std::size_t{0});
    g.truncated = j.value("truncated", false);
    if (j.contains("roots")) g.roots = j.at("roots").get<std::vector<std::string>>();
    for (const auto& jn : j.at("nodes")) {
        SolutionNode n;
        n.id = jn.at("id").get<std::string>();
        n.unit = jn.at("unit").get<std::string>();
        n.interval = Interval(jn.at("start").get<TimeMs>(), jn.at("end").get<TimeMs>());
        n.provenance = provenance_from_name(jn.at("provenance").get<std::string>());
        n.occurrence = jn.value("occurrence", std::string());
        if (jn.contains("flags")) {
            for (const auto& [k, v] : jn.at("flags").items()) {
                if (v.is_boolean()) {
                    n.flags[k] = v.get<bool>();
                } else {
                    n.flags[k] = v.get<std::string>();
                }
            }
        }
        g.nodes.push_back(std::move(n));
    }
    for (const auto& je : j.at("edges")) {
        g.edges.push_back({je.at("from").get<std::string>(), je.at("role").get<std::string>(),
                           je.at("to").get<std::string>()});
    }
    return g;
}

json solutions_to_json(const std::vector<SolutionGraph>& gs) {
    json arr = json::array();
    for (const auto& g : gs) arr.push_back(solution_to_json(g));
    return json{{"solutions", arr}};
}

std::vector<SolutionGraph> solutions_from_json(const json& j) {
    if (!j.is_object() || !j.contains("solutions") || !j.at("solutions").is_array()) {
        throw LoadError("solutions: expected an object with a \"solutions\" array");
    }
    std::vector<SolutionGraph> out;
    try {
        for (const auto& s : j.at("solutions")) out.push_back(solution_from_json(s));
    } catch (const json::exception& e) {
        throw LoadError(std::string("solutions: ") + e.what());
    }
    return out;
}

std::string solutions_to_string(const std::vector<SolutionGraph>& gs) {
    return solutions_to_json(gs).dump(2) + "\n";
}

std::vector<SolutionGraph> load_solutions(const std::filesystem::path& path) {
    try {
        return solutions_from_json(read_json_file(path));
    } catch (const LoadError& e) {
        std::string msg = e.what();
        if (msg.rfind(path.string(), 0) == 0) throw;
        throw LoadError(path.string() + ": " + msg);
    }
}

void save_solutions(const std::vector<SolutionGraph>& gs, const std::filesystem::path& path) {
    write_text_file(path, solutions_to_string(gs));
}

}  // namespace hgp
