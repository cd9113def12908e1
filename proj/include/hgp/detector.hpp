#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "hgp/model.hpp"
#include "hgp/solution.hpp"

namespace hgp {

struct DetectorQuery {
    UnitId unit;
    Interval window;
};

/// Answers "is there an occurrence of this unit in this window?". The same
/// contract serves a detector preloaded with a whole annotation and one
/// driven interactively. Implementations must allow concurrent queries.
class Detector {
public:
    virtual ~Detector() = default;

    /// Occurrences of q.unit whose interval intersects q.window (closed),
    /// ordered by (start, end, id), without duplicates.
    virtual std::vector<Occurrence> query(const DetectorQuery& q) const = 0;
};

/// Detector over a fixed list of occurrences.
class AnnotationDetector : public Detector {
public:
    /// Queries for units outside `queryable` are contract violations.
    AnnotationDetector(AnnotationDoc doc, std::set<UnitId> queryable);

    std::vector<Occurrence> query(const DetectorQuery& q) const override;
    const AnnotationDoc& doc() const { return doc_; }

private:
    AnnotationDoc doc_;
    std::set<UnitId> queryable_;
    std::map<UnitId, std::vector<Occurrence>, std::less<>> by_unit_;
};

/// Detector answering for the model's detectable and external units.
std::shared_ptr<AnnotationDetector> annotation_detector(AnnotationDoc doc, const Model& model);

/// Exposes one external occurrence per solution, spanning the solution's
/// detected nodes, as occurrences of `unit`.
std::shared_ptr<AnnotationDetector> solutions_as_detector(const std::vector<SolutionGraph>& solutions,
                                                          const UnitId& unit);

/// Sends each query to the detector registered for its unit.
class RoutingDetector : public Detector {
public:
    explicit RoutingDetector(std::shared_ptr<const Detector> fallback = nullptr);
    void route(const UnitId& unit, std::shared_ptr<const Detector> detector);
    std::vector<Occurrence> query(const DetectorQuery& q) const override;

private:
    std::shared_ptr<const Detector> fallback_;
    std::map<UnitId, std::shared_ptr<const Detector>, std::less<>> routes_;
};

/// Orders by (start, end, id) and drops duplicate ids.
void sort_occurrences(std::vector<Occurrence>& occs);

nlohmann::json annotation_to_json(const AnnotationDoc& doc);
/// With a model, unit names must be detectable or external units of it.
AnnotationDoc annotation_from_json(const nlohmann::json& j, const Model* model = nullptr);
/// Rows of id,unit,start,end; an optional header row is skipped.
AnnotationDoc annotation_from_csv(const std::string& text, const Model* model = nullptr);
std::string annotation_to_string(const AnnotationDoc& doc);

/// Reads JSON, or CSV when the extension is ".csv". An empty file is an
/// empty annotation.
AnnotationDoc load_annotation(const std::filesystem::path& path, const Model* model = nullptr);
void save_annotation(const AnnotationDoc& doc, const std::filesystem::path& path);

}  // namespace hgp
