#include "qrec/orbits.hpp"

#include "qrec/errors.hpp"
#include "qrec/seeding.hpp"

#include <cmath>

namespace qrec {

namespace {

struct ChainTables {
    std::vector<double> start_cdf;
    std::vector<std::vector<double>> row_cdf;
    std::vector<double> left;
    std::vector<double> width;
    std::vector<std::vector<double>> sub_left;
    std::vector<std::vector<double>> inv_slope;
};

ChainTables chain_tables(const MapModel& map) {
    const std::size_t d = static_cast<std::size_t>(map.digits());
    ChainTables t;
    auto cdf = [](const std::vector<Rational>& w) {
        std::vector<double> c;
        Rational acc = 0;
        for (const auto& v : w) {
            acc += v;
            c.push_back(acc.get_d());
        }
        c.back() = 2.0;  // never fall off the end
        return c;
    };
    t.start_cdf = cdf(map.stationary());
    for (std::size_t i = 0; i < d; ++i) t.row_cdf.push_back(cdf(map.transition()[i]));
    t.sub_left.assign(d, std::vector<double>(d));
    t.inv_slope.assign(d, std::vector<double>(d));
    for (std::size_t i = 0; i < d; ++i) {
        t.left.push_back(map.block_left(i).get_d());
        t.width.push_back(map.stationary()[i].get_d());
        for (std::size_t j = 0; j < d; ++j) {
            t.sub_left[i][j] = map.sub_left(i, j).get_d();
            t.inv_slope[i][j] = map.slope(i, j) > 0 ? Rational(1 / map.slope(i, j)).get_d() : 0.0;
        }
    }
    return t;
}

Digit draw(const std::vector<double>& cdf, double u) {
    std::size_t k = 0;
    while (u >= cdf[k]) ++k;
    return static_cast<Digit>(k);
}

Orbit symbolic_orbit(const MapModel& map, std::size_t n, std::size_t lookahead, Rng& rng, bool positions) {
    const ChainTables t = chain_tables(map);
    const std::size_t tail = std::max<std::size_t>(lookahead, 64);
    const std::size_t len = n + 1 + tail;
    Orbit o;
    o.digits.resize(len);
    const bool uniform = map.kind() == MapKind::DAryShift;
    const auto dd = static_cast<std::uint64_t>(map.digits());
    if (uniform && dd == 2) {
        std::uint64_t word = 0;
        int left = 0;
        for (std::size_t k = 0; k < len; ++k) {
            if (left == 0) {
                word = rng.bits();
                left = 64;
            }
            o.digits[k] = static_cast<Digit>(word & 1U);
            word >>= 1;
            --left;
        }
    } else if (uniform) {
        for (std::size_t k = 0; k < len; ++k)
            o.digits[k] = static_cast<Digit>(static_cast<std::uint64_t>(rng.uniform() * static_cast<double>(dd)));
    } else {
        o.digits[0] = draw(t.start_cdf, rng.uniform());
        for (std::size_t k = 1; k < len; ++k) o.digits[k] = draw(t.row_cdf[o.digits[k - 1]], rng.uniform());
    }
    if (!positions) return o;
    // Backward contraction: V_k = G_{i_k}(V_{k+1}), exact orbit up to rounding.
    const Digit last = o.digits[len - 1];
    double v = t.left[last] + rng.uniform() * t.width[last];
    for (std::size_t k = len - 1; k-- > 0;) {
        const auto i = static_cast<std::size_t>(o.digits[k]);
        const auto j = static_cast<std::size_t>(o.digits[k + 1]);
        v = t.sub_left[i][j] + (v - t.left[j]) * t.inv_slope[i][j];
        if (k <= n) {
            if (o.x.empty()) o.x.resize(n + 1);
            o.x[k] = v;
        }
    }
    return o;
}

double start_point(const MapModel& map, const InvariantMeasure& start, Rng& rng) {
    if (start.kind == MeasureKind::Gauss) return std::exp2(rng.uniform_open()) - 1.0;
    (void)map;
    return rng.uniform_open();
}

}  // namespace

std::string to_string(Engine e) {
    switch (e) {
        case Engine::Auto: return "auto";
        case Engine::Symbolic: return "symbolic";
        case Engine::Float: return "float";
    }
    return "auto";
}

Engine resolve_engine(const MapModel& map, Engine e) {
    if (e == Engine::Auto) return map.is_linear() ? Engine::Symbolic : Engine::Float;
    if (e == Engine::Symbolic && !map.is_linear())
        throw InvalidArgument("the symbolic engine needs a DAryShift or MarkovLinear map");
    return e;
}

Orbit sample_orbit(const MapModel& map, const InvariantMeasure& start, std::size_t n, std::size_t lookahead,
                   std::uint64_t seed, const OrbitOptions& opts) {
    Rng rng(seed);
    if (resolve_engine(map, opts.engine) == Engine::Symbolic)
        return symbolic_orbit(map, n, lookahead, rng, opts.need_positions);

    double dither = opts.dither;
    if (dither < 0.0) dither = (map.kind() == MapKind::Blaschke || map.kind() == MapKind::DAryShift) ? 1e-13 : 0.0;
    const std::size_t len = n + 1 + lookahead;
    Orbit o;
    for (std::size_t attempt = 0; attempt <= opts.max_resample; ++attempt) {
        o.digits.assign(len, 0);
        if (opts.need_positions) o.x.assign(n + 1, 0.0);
        double x = start_point(map, start, rng);
        bool ok = true;
        for (std::size_t k = 0; k < len && ok; ++k) {
            if (k <= n && opts.need_positions) o.x[k] = x;
            switch (map.kind()) {
                case MapKind::Gauss: {
                    if (x <= 1e-18) {  // orbit ended at 0 or digit beyond 64 bits
                        ok = false;
                        break;
                    }
                    const double inv = 1.0 / x;
                    const double f = std::floor(inv);
                    o.digits[k] = static_cast<Digit>(f);
                    x = inv - f;
                    break;
                }
                case MapKind::Blaschke: {
                    const double s = map.blaschke_lift(x);
                    const double f = std::floor(s);
                    o.digits[k] = std::clamp<Digit>(static_cast<Digit>(f), 0,
                                                    static_cast<Digit>(map.zeros().size()) - 1);
                    x = s - f;
                    break;
                }
                default: {
                    o.digits[k] = map.digit_of(x);
                    x = evaluate(map, x).value;
                    break;
                }
            }
            if (dither > 0.0 && ok) {
                x += dither * (2.0 * rng.uniform() - 1.0);
                x -= std::floor(x);
            }
            if (x >= 1.0) x = 0.0;
        }
        if (ok) return o;
        ++o.resampled;
    }
    throw NumericalError("boundary exhaustion: every resampled orbit hit a boundary");
}

}  // namespace qrec
