#include "qrec/coding.hpp"

#include "qrec/errors.hpp"

#include <algorithm>
#include <array>

namespace qrec {

namespace {

// x -> (a x + b) / (c x + d)
struct Mobius {
    Rational a = 1, b = 0, c = 0, d = 1;

    Rational apply(const Rational& x) const { return (a * x + b) / (c * x + d); }

    Mobius then(const Mobius& g) const {  // this ∘ g
        return {a * g.a + b * g.c, a * g.b + b * g.d, c * g.a + d * g.c, c * g.b + d * g.d};
    }
};

// Inverse branch of `from` restricted to the block of `to`.
Mobius branch(const MapModel& map, Digit from, Digit to) {
    if (map.kind() == MapKind::Gauss) return {0, 1, 1, Rational(from)};
    auto i = static_cast<std::size_t>(from), j = static_cast<std::size_t>(to);
    Rational s = map.slope(i, j);
    return {1 / s, map.sub_left(i, j) - map.block_left(j) / s, 0, 1};
}

void check_word(const MapModel& map, std::span<const Digit> word) {
    if (word.empty()) throw InvalidArgument("empty word");
    for (std::size_t k = 0; k < word.size(); ++k) {
        Digit d = word[k];
        if (map.kind() == MapKind::Gauss) {
            if (d < 1) throw InvalidArgument("digit not admissible: Gauss digit " + std::to_string(d));
            continue;
        }
        auto n = static_cast<Digit>(map.branch_count().value());
        if (d < 0 || d >= n) throw InvalidArgument("digit not admissible: " + std::to_string(d) + " out of range");
        if (map.is_linear() && map.stationary()[d] == 0)
            throw InvalidArgument("digit not admissible: block " + std::to_string(d) + " is empty");
        if (k + 1 < word.size() && !map.admissible(d, word[k + 1]))
            throw InvalidArgument("digit not admissible: transition " + std::to_string(d) + "->" +
                                  std::to_string(word[k + 1]));
    }
}

double blaschke_preimage(const MapModel& map, Digit d, double y) {
    if (y >= 1.0) return map.blaschke_cut(static_cast<std::size_t>(d) + 1);
    return inverse_branch(map, d, y);
}

Cylinder blaschke_cylinder(const MapModel& map, std::span<const Digit> word) {
    double lo = map.blaschke_cut(word.back()), hi = map.blaschke_cut(word.back() + 1);
    for (std::size_t k = word.size() - 1; k-- > 0;) {
        lo = blaschke_preimage(map, word[k], lo);
        hi = blaschke_preimage(map, word[k], hi);
    }
    Cylinder c{Word(word.begin(), word.end()), from_double(lo), from_double(hi), false, map.id()};
    return c;
}

Cylinder make(const MapModel& map, std::span<const Digit> word, const Mobius& f) {
    Interval last = map.block(word.back());
    Rational u = f.apply(last.left), v = f.apply(last.right);
    if (u > v) std::swap(u, v);
    return Cylinder{Word(word.begin(), word.end()), u, v, true, map.id()};
}

}  // namespace

Itinerary itinerary(const MapModel& map, const Rational& x, std::size_t n, BoundaryPolicy policy) {
    Itinerary out;
    Rational y = x;
    for (std::size_t k = 0; k <= n; ++k) {
        if (map.kind() == MapKind::Gauss && y == 0) {
            out.status = ItineraryStatus::OrbitEnded;
            out.failure_index = k;
            return out;
        }
        if (map.on_boundary(y)) {
            if (!out.first_boundary) out.first_boundary = k;
            if (policy == BoundaryPolicy::Strict) {
                out.status = ItineraryStatus::BoundaryHit;
                out.failure_index = k;
                return out;
            }
        }
        Side side = map.kind() == MapKind::Gauss ? Side::Left : Side::Right;
        out.digits.push_back(map.digit_of(y, side));
        if (k < n) y = evaluate(map, y).value;
    }
    return out;
}

Itinerary itinerary(const MapModel& map, double x, std::size_t n, BoundaryPolicy policy) {
    if (map.kind() != MapKind::Blaschke) return itinerary(map, from_double(x), n, policy);
    Itinerary out;
    double y = x;
    for (std::size_t k = 0; k <= n; ++k) {
        if (map.on_boundary(y)) {
            if (!out.first_boundary) out.first_boundary = k;
            if (policy == BoundaryPolicy::Strict) {
                out.status = ItineraryStatus::BoundaryHit;
                out.failure_index = k;
                return out;
            }
        }
        out.digits.push_back(map.digit_of(y));
        if (k < n) y = evaluate(map, y).value;
    }
    return out;
}

Cylinder cylinder_from_word(const MapModel& map, std::span<const Digit> word) {
    check_word(map, word);
    if (map.kind() == MapKind::Blaschke) return blaschke_cylinder(map, word);
    Mobius f;
    for (std::size_t k = 0; k + 1 < word.size(); ++k) f = f.then(branch(map, word[k], word[k + 1]));
    return make(map, word, f);
}

std::vector<Cylinder> nested_cylinders(const MapModel& map, std::span<const Digit> word) {
    check_word(map, word);
    std::vector<Cylinder> out;
    out.reserve(word.size());
    if (map.kind() == MapKind::Blaschke) {
        for (std::size_t n = 1; n <= word.size(); ++n) out.push_back(blaschke_cylinder(map, word.first(n)));
        return out;
    }
    Mobius f;
    for (std::size_t n = 0; n < word.size(); ++n) {
        if (n > 0) f = f.then(branch(map, word[n - 1], word[n]));
        out.push_back(make(map, word.first(n + 1), f));
    }
    return out;
}

Cylinder locate_cylinder(const MapModel& map, const Rational& x, std::size_t n, BoundaryPolicy policy) {
    Itinerary it = itinerary(map, x, n, policy);
    if (!it.complete()) {
        std::string why = it.status == ItineraryStatus::OrbitEnded ? "orbit ended at 0" : "boundary point";
        throw BoundaryError(why + " at step " + std::to_string(*it.failure_index), *it.failure_index);
    }
    return cylinder_from_word(map, it.digits);
}

Cylinder locate_cylinder_sided(const MapModel& map, const Rational& x, std::size_t n, Side side) {
    Word w;
    Rational y = x;
    for (std::size_t k = 0; k <= n; ++k) {
        if (map.kind() == MapKind::Gauss && y == 0) throw BoundaryError("orbit ended at 0", k);
        w.push_back(map.digit_of(y, side));
        if (k < n) std::tie(y, side) = evaluate_sided(map, y, side);
    }
    return cylinder_from_word(map, w);
}

Cylinder shift(const MapModel& map, const Cylinder& c) {
    if (c.word.size() < 2) throw InvalidArgument("cannot shift a depth-0 cylinder");
    return cylinder_from_word(map, std::span<const Digit>(c.word).subspan(1));
}

std::vector<std::size_t> refine_schedule_to_depths(const MapModel& map, const Rational& x0,
                                                   std::span<const Digit> x0_word,
                                                   std::span<const double> radii) {
    if (x0_word.empty()) throw InvalidArgument("empty target word");
    check_word(map, x0_word);
    std::vector<Rational> rho;  // max distance from x0 to closure(P(t, x0))
    Mobius f;
    std::size_t built = 0;
    auto extend = [&] {
        if (built >= x0_word.size())
            throw InvalidArgument("target word too short for the requested radius (depth " +
                                  std::to_string(built) + ")");
        if (built > 0) f = f.then(branch(map, x0_word[built - 1], x0_word[built]));
        Cylinder c = map.kind() == MapKind::Blaschke ? blaschke_cylinder(map, x0_word.first(built + 1))
                                                     : make(map, x0_word.first(built + 1), f);
        Rational r = std::max(Rational(x0 - c.left), Rational(c.right - x0));
        if (!rho.empty() && r > rho.back()) r = rho.back();  // guards approximate x0
        rho.push_back(r);
        ++built;
    };
    extend();
    std::vector<std::size_t> out;
    out.reserve(radii.size());
    double prev_r = -1.0;
    std::size_t prev_t = 0;
    for (double r : radii) {
        if (!(r >= 0.0)) throw InvalidArgument("negative radius");
        if (r == prev_r) {
            out.push_back(prev_t);
            continue;
        }
        Rational rq = from_double(r);
        while (rho.back() > rq) extend();
        auto it = std::partition_point(rho.begin(), rho.end(), [&](const Rational& v) { return v > rq; });
        prev_t = static_cast<std::size_t>(it - rho.begin());
        prev_r = r;
        out.push_back(prev_t);
    }
    return out;
}

nlohmann::json to_json(const Cylinder& c) {
    return nlohmann::json{{"word", c.word},
                          {"left", to_string(c.left)},
                          {"right", to_string(c.right)},
                          {"depth", c.depth()},
                          {"exact", c.exact}};
}

}  // namespace qrec
