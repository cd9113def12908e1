#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace hgp {

using TimeMs = std::int64_t;

inline constexpr TimeMs kTimeMin = std::numeric_limits<TimeMs>::min() / 4;
inline constexpr TimeMs kTimeMax = std::numeric_limits<TimeMs>::max() / 4;

/// Closed time extent in integer milliseconds, start <= end.
class Interval {
public:
    constexpr Interval() = default;
    Interval(TimeMs start, TimeMs end);

    static constexpr Interval everything() {
        Interval iv;
        iv.start_ = kTimeMin;
        iv.end_ = kTimeMax;
        return iv;
    }

    constexpr TimeMs start() const { return start_; }
    constexpr TimeMs end() const { return end_; }
    constexpr TimeMs length() const { return end_ - start_; }

    /// Closed-interval intersection test; touching endpoints intersect.
    constexpr bool intersects(const Interval& o) const {
        return start_ <= o.end_ && o.start_ <= end_;
    }

    /// Returns the common part, or nullopt when disjoint.
    std::optional<Interval> intersect(const Interval& o) const;

    friend constexpr bool operator==(const Interval&, const Interval&) = default;
    friend constexpr auto operator<=>(const Interval&, const Interval&) = default;

    std::string to_string() const;

private:
    TimeMs start_ = 0;
    TimeMs end_ = 0;
};

/// Temporal hull of a non-empty list of intervals.
Interval infer_parent_interval(std::span<const Interval> children);

// ---------------------------------------------------------------------------
// Allen relations
// ---------------------------------------------------------------------------

enum class Allen : std::uint8_t {
    Before,
    Meets,
    Overlaps,
    Starts,
    During,
    Finishes,
    Equal,
    After,
    MetBy,
    OverlappedBy,
    StartedBy,
    Contains,
    FinishedBy,
};

inline constexpr std::size_t kAllenCount = 13;

inline constexpr std::array<Allen, kAllenCount> kAllAllen = {
    Allen::Before,       Allen::Meets,     Allen::Overlaps, Allen::Starts,
    Allen::During,       Allen::Finishes,  Allen::Equal,    Allen::After,
    Allen::MetBy,        Allen::OverlappedBy, Allen::StartedBy, Allen::Contains,
    Allen::FinishedBy,
};

Allen inverse(Allen rel);
std::string_view allen_name(Allen rel);
std::optional<Allen> allen_from_name(std::string_view name);

/// Evaluates one basic relation straight from its endpoint definition.
///
/// meets / met-by additionally require both intervals to have positive
/// length, so that zero-length intervals still fall in exactly one relation.
bool eval_allen(Allen rel, const Interval& a, const Interval& b);

/// The unique basic relation holding between a and b.
Allen classify(const Interval& a, const Interval& b);

/// A disjunction of basic relations. Named sets cover the 13 basic relations
/// plus the derived disjunctions used by compiled dependency models.
class RelationSet {
public:
    constexpr RelationSet() = default;
    constexpr explicit RelationSet(std::uint16_t mask) : mask_(mask) {}
    static constexpr RelationSet of(Allen r) {
        return RelationSet(static_cast<std::uint16_t>(1u << static_cast<unsigned>(r)));
    }

    constexpr bool contains(Allen r) const {
        return (mask_ >> static_cast<unsigned>(r)) & 1u;
    }
    constexpr std::uint16_t mask() const { return mask_; }
    constexpr bool empty() const { return mask_ == 0; }

    constexpr RelationSet operator|(RelationSet o) const { return RelationSet(mask_ | o.mask_); }
    friend constexpr bool operator==(RelationSet, RelationSet) = default;

    RelationSet inverse() const;
    bool holds(const Interval& a, const Interval& b) const;

    /// Accepts basic names plus "no-overlap-ordered", "shares-time", "within".
    static std::optional<RelationSet> from_name(std::string_view name);

    /// Window that any interval x with rel(x, anchor) must intersect.
    Interval window_for_left(const Interval& anchor) const;

private:
    std::uint16_t mask_ = 0;
};

/// before or meets: a ends no later than b starts.
RelationSet no_overlap_ordered();
/// Every relation in which the two intervals share time.
RelationSet shares_time();
/// during, starts, finishes or equal.
RelationSet within();

}  // namespace hgp
