#pragma once

#include "qrec/maps.hpp"

#include "json.hpp"

#include <optional>
#include <span>
#include <vector>

namespace qrec {

enum class BoundaryPolicy {
    HalfOpen,  // boundary points follow the map's half-open convention
    Strict,    // stop at the first boundary point
};

enum class ItineraryStatus { Complete, BoundaryHit, OrbitEnded };

struct Itinerary {
    Word digits;
    ItineraryStatus status = ItineraryStatus::Complete;
    std::optional<std::size_t> failure_index;   // step where the itinerary stopped
    std::optional<std::size_t> first_boundary;  // first boundary step seen under HalfOpen
    bool complete() const { return status == ItineraryStatus::Complete; }
};

// Digits (i_0, ..., i_n) of x.
Itinerary itinerary(const MapModel& map, const Rational& x, std::size_t n,
                    BoundaryPolicy policy = BoundaryPolicy::HalfOpen);
Itinerary itinerary(const MapModel& map, double x, std::size_t n,
                    BoundaryPolicy policy = BoundaryPolicy::HalfOpen);

struct Cylinder {
    Word word;
    Rational left;
    Rational right;
    bool exact = true;  // false when endpoints are rounded reals (Blaschke)
    std::string map_id;

    std::size_t depth() const { return word.empty() ? 0 : word.size() - 1; }
    Rational length() const { return right - left; }
    bool contains(const Rational& x) const { return x >= left && x <= right; }
};

Cylinder cylinder_from_word(const MapModel& map, std::span<const Digit> word);
Cylinder locate_cylinder(const MapModel& map, const Rational& x, std::size_t n,
                         BoundaryPolicy policy = BoundaryPolicy::HalfOpen);

// Block of depth n containing the one-sided neighbourhood of x selected by `side`.
Cylinder locate_cylinder_sided(const MapModel& map, const Rational& x, std::size_t n, Side side);

// Exact one-step image of a cylinder: the cylinder of the shifted word.
Cylinder shift(const MapModel& map, const Cylinder& c);

// Smallest t_k with closure(P(t_k, x0)) inside the closed ball B(x0, r_k).
// `x0_word` must be long enough; `x0` is the (possibly approximate) point.
std::vector<std::size_t> refine_schedule_to_depths(const MapModel& map, const Rational& x0,
                                                   std::span<const Digit> x0_word,
                                                   std::span<const double> radii);

// Exact nested cylinders P(0,x0) .. P(depth,x0) of a word.
std::vector<Cylinder> nested_cylinders(const MapModel& map, std::span<const Digit> word);

nlohmann::json to_json(const Cylinder& c);

}  // namespace qrec
