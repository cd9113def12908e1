#include "hgp/interval.hpp"

#include <algorithm>

#include "hgp/error.hpp"

namespace hgp {

Interval::Interval(TimeMs start, TimeMs end) : start_(start), end_(end) {
    if (start > end) {
        throw ContractViolation("interval start " + std::to_string(start) + " after end " +
                                std::to_string(end));
    }
}

std::optional<Interval> Interval::intersect(const Interval& o) const {
    if (!intersects(o)) return std::nullopt;
    return Interval(std::max(start_, o.start_), std::min(end_, o.end_));
}

std::string Interval::to_string() const {
    return "[" + std::to_string(start_) + "," + std::to_string(end_) + "]";
}

Interval infer_parent_interval(std::span<const Interval> children) {
    if (children.empty()) {
        throw ContractViolation("infer_parent_interval: no children");
    }
    TimeMs lo = children.front().start();
    TimeMs hi = children.front().end();
    for (const auto& c : children) {
        lo = std::min(lo, c.start());
        hi = std::max(hi, c.end());
    }
    return Interval(lo, hi);
}

namespace {

struct AllenInfo {
    Allen rel;
    std::string_view name;
    Allen inv;
};

constexpr std::array<AllenInfo, kAllenCount> kInfo = {{
    {Allen::Before, "before", Allen::After},
    {Allen::Meets, "meets", Allen::MetBy},
    {Allen::Overlaps, "overlaps", Allen::OverlappedBy},
    {Allen::Starts, "starts", Allen::StartedBy},
    {Allen::During, "during", Allen::Contains},
    {Allen::Finishes, "finishes", Allen::FinishedBy},
    {Allen::Equal, "equal", Allen::Equal},
    {Allen::After, "after", Allen::Before},
    {Allen::MetBy, "met-by", Allen::Meets},
    {Allen::OverlappedBy, "overlapped-by", Allen::Overlaps},
    {Allen::StartedBy, "started-by", Allen::Starts},
    {Allen::Contains, "contains", Allen::During},
    {Allen::FinishedBy, "finished-by", Allen::Finishes},
}};

const AllenInfo& info(Allen rel) { return kInfo[static_cast<std::size_t>(rel)]; }

bool proper(const Interval& i) { return i.start() < i.end(); }

}  // namespace

Allen inverse(Allen rel) { return info(rel).inv; }

std::string_view allen_name(Allen rel) { return info(rel).name; }

std::optional<Allen> allen_from_name(std::string_view name) {
    for (const auto& i : kInfo) {
        if (i.name == name) return i.rel;
    }
    return std::nullopt;
}

bool eval_allen(Allen rel, const Interval& a, const Interval& b) {
    switch (rel) {
        case Allen::Before:
            return a.end() < b.start();
        case Allen::Meets:
            return a.end() == b.start() && proper(a) && proper(b);
        case Allen::Overlaps:
            return a.start() < b.start() && b.start() < a.end() && a.end() < b.end();
        case Allen::Starts:
            return a.start() == b.start() && a.end() < b.end();
        case Allen::During:
            return b.start() < a.start() && a.end() < b.end();
        case Allen::Finishes:
            return a.end() == b.end() && a.start() > b.start();
        case Allen::Equal:
            return a.start() == b.start() && a.end() == b.end();
        case Allen::After:
        case Allen::MetBy:
        case Allen::OverlappedBy:
        case Allen::StartedBy:
        case Allen::Contains:
        case Allen::FinishedBy:
            return eval_allen(inverse(rel), b, a);
    }
    return false;
}

Allen classify(const Interval& a, const Interval& b) {
    for (Allen r : kAllAllen) {
        if (eval_allen(r, a, b)) return r;
    }
    // Unreachable for well-formed intervals: the relations partition all pairs.
    throw ContractViolation("no Allen relation holds between " + a.to_string() + " and " +
                            b.to_string());
}

RelationSet RelationSet::inverse() const {
    std::uint16_t m = 0;
    for (Allen r : kAllAllen) {
        if (contains(r)) m |= RelationSet::of(hgp::inverse(r)).mask();
    }
    return RelationSet(m);
}

bool RelationSet::holds(const Interval& a, const Interval& b) const {
    return contains(classify(a, b));
}

RelationSet no_overlap_ordered() {
    return RelationSet::of(Allen::Before) | RelationSet::of(Allen::Meets);
}

RelationSet shares_time() {
    std::uint16_t all = (1u << kAllenCount) - 1;
    return RelationSet(all & ~(RelationSet::of(Allen::Before) | RelationSet::of(Allen::After) |
                               RelationSet::of(Allen::Meets) | RelationSet::of(Allen::MetBy))
                                 .mask());
}

RelationSet within() {
    return RelationSet::of(Allen::During) | RelationSet::of(Allen::Starts) |
           RelationSet::of(Allen::Finishes) | RelationSet::of(Allen::Equal);
}

std::optional<RelationSet> RelationSet::from_name(std::string_view name) {
    if (auto r = allen_from_name(name)) return RelationSet::of(*r);
    if (name == "no-overlap-ordered") return no_overlap_ordered();
    if (name == "shares-time") return shares_time();
    if (name == "within") return within();
    return std::nullopt;
}

Interval RelationSet::window_for_left(const Interval& b) const {
    // Hull of the per-relation windows; each is a necessary condition on x.
    std::optional<Interval> hull;
    auto add = [&](TimeMs lo, TimeMs hi) {
        if (lo > hi) return;
        Interval w(lo, hi);
        hull = hull ? Interval(std::min(hull->start(), lo), std::max(hull->end(), hi)) : w;
    };
    for (Allen r : kAllAllen) {
        if (!contains(r)) continue;
        switch (r) {
            case Allen::Before:
                add(kTimeMin, b.start() - 1);
                break;
            case Allen::Meets:
                add(b.start(), b.start());
                break;
            case Allen::After:
                add(b.end() + 1, kTimeMax);
                break;
            case Allen::MetBy:
                add(b.end(), b.end());
                break;
            default:
                add(b.start(), b.end());
                break;
        }
    }
    // An empty set admits nothing; return a window no occurrence can reach.
    return hull.value_or(Interval(kTimeMax, kTimeMax));
}

}  // namespace hgp
