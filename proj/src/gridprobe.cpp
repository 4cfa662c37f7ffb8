#include "qrec/dimension.hpp"

#include "qrec/errors.hpp"
#include "qrec/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qrec {

namespace {

// Largest depth-n cylinder length for a linear map, by dynamic programming over the last digit.
class SupLength {
public:
    explicit SupLength(const MapModel& map) : map_(map) {
        const auto D = static_cast<std::size_t>(map.digits());
        std::vector<double> m0(D);
        for (std::size_t i = 0; i < D; ++i) m0[i] = map.stationary()[i].get_d();
        table_.push_back(std::move(m0));
    }

    double at(std::size_t n) {
        const auto D = static_cast<std::size_t>(map_.digits());
        while (table_.size() <= n) {
            const auto& prev = table_.back();
            std::vector<double> next(D, 0.0);
            for (std::size_t i = 0; i < D; ++i)
                for (std::size_t j = 0; j < D; ++j) {
                    const Rational& pij = map_.transition()[i][j];
                    if (pij == 0) continue;
                    const double f = Rational(map_.stationary()[i] * pij / map_.stationary()[j]).get_d();
                    next[i] = std::max(next[i], f * prev[j]);
                }
            table_.push_back(std::move(next));
        }
        return *std::max_element(table_[n].begin(), table_[n].end());
    }

private:
    const MapModel& map_;
    std::vector<std::vector<double>> table_;
};

struct Split {
    double lo, hi;
};

// Level-n cell of the grid on [0,1) obtained by cutting every cell at ratio q.
Split cell_of(double t, double q, std::size_t n) {
    double lo = 0.0, hi = 1.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double cut = lo + q * (hi - lo);
        if (t < cut) hi = cut;
        else lo = cut;
    }
    return {lo, hi};
}

}  // namespace

std::vector<ProbeRow> grid_regularity_probe(const MapModel& map, const std::vector<Ball1D>& balls) {
    if (!map.is_linear()) throw InvalidArgument("grid probe needs a DAryShift or MarkovLinear map");
    SupLength sup(map);
    std::vector<ProbeRow> rows;
    for (std::size_t k = 0; k < balls.size(); ++k) {
        const Ball1D& b = balls[k];
        if (b.radius <= 0) throw InvalidArgument("ball radius must be positive");
        Rational lo = b.center - b.radius, hi = b.center + b.radius;
        if (lo < 0) lo = 0;
        if (hi > 1) hi = 1;
        if (lo >= hi) throw InvalidArgument("ball misses [0,1]");
        const double mass = Rational(hi - lo).get_d();
        std::size_t n = 0;
        while (sup.at(n) > mass) {
            if (++n > 4000) throw NumericalError("grid probe: no level fine enough for ball " + std::to_string(k + 1));
        }
        const Cylinder a = locate_cylinder_sided(map, lo, n, Side::Right);
        const Cylinder c = locate_cylinder_sided(map, hi, n, Side::Left);
        ProbeRow r;
        r.k = k + 1;
        r.level = n;
        r.ball = mass;
        r.cover = Rational(c.right - a.left).get_d();
        r.ratio = r.cover / r.ball;
        rows.push_back(r);
    }
    return rows;
}

std::vector<Ball1D> default_balls(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Ball1D> out;
    for (std::size_t k = 1; k <= count; ++k) {
        const double c = rng.uniform();
        const double r = 0.3 * std::ldexp(1.0, -static_cast<int>(k)) * (1.0 + rng.uniform());
        out.push_back({from_double(c), from_double(r)});
    }
    return out;
}

std::vector<ProbeRow> rectangle_grid_probe(double a, double b, std::size_t k_max) {
    if (!(0.5 < b && b < a && a < 1)) throw InvalidArgument("rectangle grid needs 1/2 < b < a < 1");
    // Work in y' = 1 - y, so the corner square is [0,s]^2 and the y'-grid cuts at ratio 1-b.
    const double qx = a, qy = 1.0 - b;
    const double cell_max = std::max(a, 1 - a) * std::max(b, 1 - b);
    std::vector<ProbeRow> rows;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double s = std::pow(1.0 - b, static_cast<double>(k));
        const double R = s / 2, cx = s / 2, cy = s / 2;
        const double ball = std::numbers::pi * R * R;
        std::size_t n = 0;
        while (std::pow(cell_max, static_cast<double>(n + 1)) > ball) ++n;
        double area = 0.0;
        double x = 0.0;
        while (x < s) {
            const Split I = cell_of(x, qx, n);
            const double nearest = std::clamp(cx, std::max(I.lo, 0.0), std::min(I.hi, s));
            const double h = std::sqrt(std::max(0.0, R * R - (nearest - cx) * (nearest - cx)));
            const Split y0 = cell_of(std::max(0.0, cy - h), qy, n);
            const Split y1 = cell_of(cy + h, qy, n);
            area += (I.hi - I.lo) * (y1.hi - y0.lo);
            if (I.hi <= x) break;
            x = I.hi;
        }
        ProbeRow r;
        r.k = k;
        r.level = n;
        r.ball = ball;
        r.cover = area;
        r.ratio = area / ball;
        rows.push_back(r);
    }
    return rows;
}

nlohmann::json to_json(const std::vector<ProbeRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const ProbeRow& r : rows)
        out.push_back({{"k", r.k}, {"n", r.level}, {"ball", r.ball}, {"cover", r.cover}, {"ratio", r.ratio}});
    return out;
}

}  // namespace qrec
