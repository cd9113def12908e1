#include "hgp/detector.hpp"

#include <algorithm>
#include <sstream>

#include "hgp/error.hpp"
#include "hgp/model_io.hpp"

namespace hgp {

using nlohmann::json;

void sort_occurrences(std::vector<Occurrence>& occs) {
    std::sort(occs.begin(), occs.end(), [](const Occurrence& a, const Occurrence& b) {
        return std::tie(a.attrs.interval, a.id) < std::tie(b.attrs.interval, b.id);
    });
    occs.erase(std::unique(occs.begin(), occs.end(),
                           [](const Occurrence& a, const Occurrence& b) { return a.id == b.id; }),
               occs.end());
}

AnnotationDetector::AnnotationDetector(AnnotationDoc doc, std::set<UnitId> queryable)
    : doc_(std::move(doc)), queryable_(std::move(queryable)) {
    for (const auto& o : doc_.occurrences) by_unit_[o.unit].push_back(o);
    for (auto& [unit, occs] : by_unit_) sort_occurrences(occs);
}

std::vector<Occurrence> AnnotationDetector::query(const DetectorQuery& q) const {
    if (!queryable_.count(q.unit)) {
        throw ContractViolation("detector query for non-detectable unit " + q.unit);
    }
    std::vector<Occurrence> out;
    auto it = by_unit_.find(q.unit);
    if (it == by_unit_.end()) return out;
    for (const auto& o : it->second) {
        if (o.attrs.interval.start() > q.window.end()) break;
        if (o.attrs.interval.intersects(q.window)) out.push_back(o);
    }
    return out;
}

std::shared_ptr<AnnotationDetector> annotation_detector(AnnotationDoc doc, const Model& model) {
    std::set<UnitId> q = model.detectable;
    q.insert(model.external.begin(), model.external.end());
    return std::make_shared<AnnotationDetector>(std::move(doc), std::move(q));
}

std::shared_ptr<AnnotationDetector> solutions_as_detector(const std::vector<SolutionGraph>& solutions,
                                                          const UnitId& unit) {
    AnnotationDoc doc;
    std::vector<Interval> all;
    for (const auto& sol : solutions) {
        std::vector<Interval> leaves;
        for (const auto& n : sol.nodes) {
            if (n.provenance == Provenance::Detected || n.provenance == Provenance::External) {
                leaves.push_back(n.interval);
            }
        }
        if (leaves.empty()) {
            for (const auto& n : sol.nodes) leaves.push_back(n.interval);
        }
        if (leaves.empty()) continue;
        Occurrence o;
        o.unit = unit;
        o.attrs.interval = infer_parent_interval(leaves);
        // Solutions with the same hull denote the same external occurrence.
        o.id = unit + "@" + std::to_string(o.attrs.interval.start()) + "-" +
               std::to_string(o.attrs.interval.end());
        o.provenance = Provenance::External;
        all.push_back(o.attrs.interval);
        doc.occurrences.push_back(std::move(o));
    }
    doc.span = all.empty() ? Interval(0, 0) : infer_parent_interval(all);
    return std::make_shared<AnnotationDetector>(std::move(doc), std::set<UnitId>{unit});
}

RoutingDetector::RoutingDetector(std::shared_ptr<const Detector> fallback)
    : fallback_(std::move(fallback)) {}

void RoutingDetector::route(const UnitId& unit, std::shared_ptr<const Detector> detector) {
    routes_[unit] = std::move(detector);
}

std::vector<Occurrence> RoutingDetector::query(const DetectorQuery& q) const {
    auto it = routes_.find(q.unit);
    if (it != routes_.end()) return it->second->query(q);
    if (!fallback_) throw ContractViolation("no detector for unit " + q.unit);
    return fallback_->query(q);
}

namespace {

struct Checker {
    const Model* model;
    std::set<std::string> ids;
    std::vector<std::string> unknown;

    void add(const Occurrence& o, const std::string& where) {
        if (o.id.empty()) throw LoadError(where + ": empty occurrence id");
        if (!ids.insert(o.id).second) throw LoadError(where + ": duplicate occurrence id " + o.id);
        if (model && !model->is_queryable(o.unit)) {
            unknown.push_back(where + ": unit '" + o.unit + "'");
        }
    }
    void finish() const {
        if (unknown.empty()) return;
        std::string msg = "unknown or non-detectable unit names:";
        for (const auto& u : unknown) msg += "\n  " + u;
        throw LoadError(msg);
    }
};

void check_span(const AnnotationDoc& doc) {
    for (const auto& o : doc.occurrences) {
        if (o.attrs.interval.start() < doc.span.start() || o.attrs.interval.end() > doc.span.end()) {
            throw LoadError("occurrence " + o.id + " " + o.attrs.interval.to_string() +
                            " lies outside the annotation span " + doc.span.to_string());
        }
    }
}

Interval hull_of(const std::vector<Occurrence>& occs) {
    if (occs.empty()) return Interval(0, 0);
    std::vector<Interval> ivs;
    for (const auto& o : occs) ivs.push_back(o.attrs.interval);
    return infer_parent_interval(ivs);
}

Interval read_interval(TimeMs s, TimeMs e, const std::string& where) {
    if (s > e) throw LoadError(where + ": start after end");
    return Interval(s, e);
}

}  // namespace

json annotation_to_json(const AnnotationDoc& doc) {
    json occs = json::array();
    for (const auto& o : doc.occurrences) {
        json jo = {{"id", o.id},
                   {"unit", o.unit},
                   {"start", o.attrs.interval.start()},
                   {"end", o.attrs.interval.end()}};
        json flags = json::object();
        for (const auto& [k, v] : o.attrs.flags) {
            if (const bool* b = std::get_if<bool>(&v)) {
                flags[k] = *b;
            } else {
                flags[k] = std::get<std::string>(v);
            }
        }
        jo["flags"] = flags;
        if (o.provenance != Provenance::Detected) jo["provenance"] = provenance_name(o.provenance);
        if (!o.source.empty()) jo["source"] = o.source;
        occs.push_back(std::move(jo));
    }
    return json{{"span", {doc.span.start(), doc.span.end()}}, {"occurrences", occs}};
}

AnnotationDoc annotation_from_json(const json& j, const Model* model) {
    if (!j.is_object()) throw LoadError("annotation: expected a JSON object");
    AnnotationDoc doc;
    Checker check{model, {}, {}};
    try {
        if (j.contains("occurrences")) {
            const json& occs = j.at("occurrences");
            if (!occs.is_array()) throw LoadError("occurrences: expected an array");
            for (std::size_t i = 0; i < occs.size(); ++i) {
                const std::string where = "occurrences[" + std::to_string(i) + "]";
                const json& jo = occs[i];
                Occurrence o;
                o.id = jo.at("id").get<std::string>();
                o.unit = jo.at("unit").get<std::string>();
                o.attrs.interval =
                    read_interval(jo.at("start").get<TimeMs>(), jo.at("end").get<TimeMs>(), where);
                if (jo.contains("flags")) {
                    for (const auto& [k, v] : jo.at("flags").items()) {
                        if (v.is_boolean()) {
                            o.attrs.flags[k] = v.get<bool>();
                        } else if (v.is_string()) {
                            o.attrs.flags[k] = v.get<std::string>();
                        } else {
                            throw LoadError(where + ".flags." + k + ": expected boolean or string");
                        }
                        if (model && !model->attribute(k)) {
                            throw LoadError(where + ".flags." + k + ": attribute not in the model schema");
                        }
                    }
                }
                if (jo.contains("provenance")) {
                    o.provenance = provenance_from_name(jo.at("provenance").get<std::string>());
                }
                o.source = jo.value("source", o.provenance == Provenance::Detected ? o.id : "");
                check.add(o, where);
                doc.occurrences.push_back(std::move(o));
            }
        }
        if (j.contains("span")) {
            const json& s = j.at("span");
            if (!s.is_array() || s.size() != 2) throw LoadError("span: expected [start, end]");
            doc.span = read_interval(s[0].get<TimeMs>(), s[1].get<TimeMs>(), "span");
        } else {
            doc.span = hull_of(doc.occurrences);
        }
    } catch (const json::exception& e) {
        throw LoadError(std::string("annotation: ") + e.what());
    }
    check.finish();
    check_span(doc);
    return doc;
}

AnnotationDoc annotation_from_csv(const std::string& text, const Model* model) {
    AnnotationDoc doc;
    Checker check{model, {}, {}};
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cols.push_back(cell);
        const std::string where = "line " + std::to_string(lineno);
        if (lineno == 1 && cols.size() >= 1 && cols[0] == "id") continue;
        if (cols.size() != 4) throw LoadError(where + ": expected id,unit,start,end");
        Occurrence o;
        o.id = cols[0];
        o.unit = cols[1];
        try {
            o.attrs.interval = read_interval(std::stoll(cols[2]), std::stoll(cols[3]), where);
        } catch (const std::logic_error&) {
            throw LoadError(where + ": start/end must be integers");
        }
        o.source = o.id;
        check.add(o, where);
        doc.occurrences.push_back(std::move(o));
    }
    check.finish();
    doc.span = hull_of(doc.occurrences);
    return doc;
}

std::string annotation_to_string(const AnnotationDoc& doc) {
    return annotation_to_json(doc).dump(2) + "\n";
}

AnnotationDoc load_annotation(const std::filesystem::path& path, const Model* model) {
    const std::string text = read_text_file(path);
    try {
        if (path.extension() == ".csv") return annotation_from_csv(text, model);
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
            return AnnotationDoc{Interval(0, 0), {}};
        }
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw LoadError(e.what());
        }
        return annotation_from_json(j, model);
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

void save_annotation(const AnnotationDoc& doc, const std::filesystem::path& path) {
    write_text_file(path, annotation_to_string(doc));
}

}  // namespace hgp
