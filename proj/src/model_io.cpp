#include "hgp/model_io.hpp"

#include <fstream>
#include <sstream>

#include "hgp/error.hpp"

namespace hgp {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        throw LoadError(where + ": missing field '" + key + "'");
    }
    return j.at(key);
}

std::string require_string(const json& j, const char* key, const std::string& where) {
    const json& v = require(j, key, where);
    if (!v.is_string()) throw LoadError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw LoadError(where + ": expected an array");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) {
            throw LoadError(where + "[" + std::to_string(i) + "]: expected a string");
        }
        out.push_back(j[i].get<std::string>());
    }
    return out;
}

Span span_from(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) return Span::Extent;
    const auto& v = j.at(key);
    if (v == "extent") return Span::Extent;
    if (v == "head") return Span::Head;
    throw LoadError(where + "." + key + ": expected \"extent\" or \"head\"");
}

const char* kind_name(AttributeKind k) {
    switch (k) {
        case AttributeKind::TimeInterval: return "time-interval";
        case AttributeKind::Boolean: return "boolean";
        case AttributeKind::Symbol: return "symbol";
    }
    return "boolean";
}

}  // namespace

json constraint_to_json(const ConstraintExpr& c) {
    if (const auto* a = std::get_if<AllenConstraint>(&c)) {
        json j = {{"kind", "allen"}, {"rel", a->rel_name}, {"a", a->a}, {"b", a->b}};
        if (a->a_span == Span::Head) j["a_span"] = "head";
        if (a->b_span == Span::Head) j["b_span"] = "head";
        return j;
    }
    const auto& p = std::get<AttrPredicate>(c);
    json j = {{"kind", "attr"}, {"role", p.role}, {"attr", p.attr},
              {"op", p.op == AttrOp::Eq ? "eq" : "ne"}};
    if (const bool* b = std::get_if<bool>(&p.value)) {
        j["value"] = *b;
    } else {
        j["value"] = std::get<std::string>(p.value);
    }
    return j;
}

ConstraintExpr constraint_from_json(const json& j, const std::string& where) {
    const std::string kind = require_string(j, "kind", where);
    if (kind == "allen") {
        const std::string rel = require_string(j, "rel", where);
        if (!RelationSet::from_name(rel)) {
            throw LoadError(where + ".rel: unknown relation '" + rel + "'");
        }
        return make_allen(rel, require_string(j, "a", where), require_string(j, "b", where),
                          span_from(j, "a_span", where), span_from(j, "b_span", where));
    }
    if (kind == "attr") {
        AttrPredicate p;
        p.role = require_string(j, "role", where);
        p.attr = require_string(j, "attr", where);
        const std::string op = require_string(j, "op", where);
        if (op == "eq") {
            p.op = AttrOp::Eq;
        } else if (op == "ne") {
            p.op = AttrOp::Ne;
        } else {
            throw LoadError(where + ".op: expected \"eq\" or \"ne\"");
        }
        const json& v = require(j, "value", where);
        if (v.is_boolean()) {
            p.value = v.get<bool>();
        } else if (v.is_string()) {
            p.value = v.get<std::string>();
        } else {
            throw LoadError(where + ".value: expected a boolean or string literal");
        }
        return p;
    }
    throw LoadError(where + ".kind: unknown constraint kind '" + kind + "'");
}

json model_to_json(const Model& m) {
    json patterns = json::array();
    for (const auto& p : m.patterns) {
        json children = json::array();
        for (const auto& c : p.children) children.push_back({{"role", c.role}, {"unit", c.unit}});
        json cons = json::array();
        for (const auto& c : p.constraints) cons.push_back(constraint_to_json(c));
        json jp = {{"root", p.root}, {"children", children}, {"constraints", cons}};
        if (p.head_role) jp["head"] = *p.head_role;
        patterns.push_back(std::move(jp));
    }
    json alternatives = json::array();
    for (const auto& a : m.alternatives) {
        alternatives.push_back({{"root", a.root}, {"options", a.options}});
    }
    json attrs = json::array();
    for (const auto& a : m.attributes) attrs.push_back({{"name", a.name}, {"kind", kind_name(a.kind)}});
    return json{{"units", m.units},
                {"patterns", patterns},
                {"alternatives", alternatives},
                {"detectable", m.detectable},
                {"external", m.external},
                {"attributes", attrs}};
}

Model model_from_json(const json& j) {
    if (!j.is_object()) throw LoadError("model: expected a JSON object");
    Model m;
    m.units = string_list(require(j, "units", "model"), "units");

    if (j.contains("patterns")) {
        const json& ps = j.at("patterns");
        if (!ps.is_array()) throw LoadError("patterns: expected an array");
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const std::string where = "patterns[" + std::to_string(i) + "]";
            Pattern p;
            p.root = require_string(ps[i], "root", where);
            const json& cs = require(ps[i], "children", where);
            if (!cs.is_array()) throw LoadError(where + ".children: expected an array");
            for (std::size_t k = 0; k < cs.size(); ++k) {
                const std::string cw = where + ".children[" + std::to_string(k) + "]";
                p.children.push_back({require_string(cs[k], "role", cw),
                                      require_string(cs[k], "unit", cw)});
            }
            if (ps[i].contains("constraints")) {
                const json& cons = ps[i].at("constraints");
                if (!cons.is_array()) throw LoadError(where + ".constraints: expected an array");
                for (std::size_t k = 0; k < cons.size(); ++k) {
                    p.constraints.push_back(constraint_from_json(
                        cons[k], where + ".constraints[" + std::to_string(k) + "]"));
                }
            }
            if (ps[i].contains("head")) p.head_role = require_string(ps[i], "head", where);
            m.patterns.push_back(std::move(p));
        }
    }
    if (j.contains("alternatives")) {
        const json& as = j.at("alternatives");
        if (!as.is_array()) throw LoadError("alternatives: expected an array");
        for (std::size_t i = 0; i < as.size(); ++i) {
            const std::string where = "alternatives[" + std::to_string(i) + "]";
            Alternative a;
            a.root = require_string(as[i], "root", where);
            a.options = string_list(require(as[i], "options", where), where + ".options");
            m.alternatives.push_back(std::move(a));
        }
    }
    if (j.contains("detectable")) {
        for (auto& u : string_list(j.at("detectable"), "detectable")) m.detectable.insert(u);
    }
    if (j.contains("external")) {
        for (auto& u : string_list(j.at("external"), "external")) m.external.insert(u);
    }
    if (j.contains("attributes")) {
        const json& as = j.at("attributes");
        if (!as.is_array()) throw LoadError("attributes: expected an array");
        for (std::size_t i = 0; i < as.size(); ++i) {
            const std::string where = "attributes[" + std::to_string(i) + "]";
            AttributeDecl d;
            d.name = require_string(as[i], "name", where);
            const std::string kind = require_string(as[i], "kind", where);
            if (kind == "boolean") {
                d.kind = AttributeKind::Boolean;
            } else if (kind == "symbol") {
                d.kind = AttributeKind::Symbol;
            } else if (kind == "time-interval") {
                d.kind = AttributeKind::TimeInterval;
            } else {
                throw LoadError(where + ".kind: unknown attribute kind '" + kind + "'");
            }
            m.attributes.push_back(std::move(d));
        }
    }
    return m;
}

std::string model_to_string(const Model& model) { return model_to_json(model).dump(2) + "\n"; }

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError(path.string() + ": cannot write file");
    out << text;
    if (!out) throw LoadError(path.string() + ": write failed");
}

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

Model load_model(const std::filesystem::path& path) {
    try {
        return model_from_json(read_json_file(path));
    } catch (const LoadError& e) {
        std::string msg = e.what();
        if (msg.rfind(path.string(), 0) == 0) throw;
        throw LoadError(path.string() + ": " + msg);
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

void save_model(const Model& model, const std::filesystem::path& path) {
    write_text_file(path, model_to_string(model));
}

}  // namespace hgp
