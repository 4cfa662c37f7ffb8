#include "qrec/measures.hpp"

#include "qrec/errors.hpp"
#include "qrec/orbits.hpp"
#include "qrec/seeding.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

namespace qrec {

namespace {

void check_endpoints(const Rational& a, const Rational& b) {
    if (a > b) throw InvalidArgument("reversed endpoints: " + to_string(a) + " > " + to_string(b));
    if (a < 0 || b > 1) throw InvalidArgument("interval outside [0,1]");
}

// log(1 + r) for a non-negative rational r, accurate for tiny r.
double log1p_of(const Rational& r) {
    if (r == 0) return 0.0;
    double d = r.get_d();
    if (d > 1e-300) return std::log1p(d);
    return 0.0;
}

// Chain mass of [0, x) by summing the cylinders to the left of x's itinerary.
double markov_cdf(const InvariantMeasure& m, const Rational& x) {
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    const std::size_t d = m.p.size();
    const MapModel map = MapModel::markov_linear(m.m, m.p);
    Rational total = 0;
    Rational weight = 1;
    Rational y = x;
    Digit prev = -1;
    for (int depth = 0; depth < 4000; ++depth) {
        Digit i = map.digit_of(y);
        for (Digit j = 0; j < i; ++j) total += weight * (prev < 0 ? m.p[j] : m.m[prev][j]);
        weight *= prev < 0 ? m.p[i] : m.m[prev][i];
        prev = i;
        if (weight < 1e-19 || y == map.block_left(static_cast<std::size_t>(i))) break;
        y = evaluate(map, y).value;
    }
    (void)d;
    return total.get_d();
}

}  // namespace

std::string to_string(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::Lebesgue: return "lebesgue";
        case MeasureKind::Gauss: return "gauss";
        case MeasureKind::MarkovStationary: return "markov";
    }
    return "unknown";
}

InvariantMeasure InvariantMeasure::markov_stationary(Matrix m, std::vector<Rational> p) {
    (void)MapModel::markov_linear(m, p);  // validates stochasticity and stationarity
    return {MeasureKind::MarkovStationary, std::move(p), std::move(m)};
}

InvariantMeasure InvariantMeasure::natural_for(const MapModel& map) {
    switch (map.kind()) {
        case MapKind::Gauss: return gauss();
        case MapKind::Blaschke: return lebesgue();
        default: return markov_stationary(map.transition(), map.stationary());
    }
}

std::string InvariantMeasure::density_description() const {
    switch (kind) {
        case MeasureKind::Gauss: return "(1/log 2) * 1/(1+x)";
        case MeasureKind::MarkovStationary: return "1 (chain measure transported to [0,1) is Lebesgue)";
        default: return "1";
    }
}

double InvariantMeasure::density(double x) const {
    if (kind == MeasureKind::Gauss) return 1.0 / (std::numbers::ln2 * (1.0 + x));
    return 1.0;
}

double measure_interval(const InvariantMeasure& m, const Rational& a, const Rational& b) {
    check_endpoints(a, b);
    switch (m.kind) {
        case MeasureKind::Lebesgue: return Rational(b - a).get_d();
        case MeasureKind::Gauss: return log1p_of((b - a) / (1 + a)) / std::numbers::ln2;
        case MeasureKind::MarkovStationary: return markov_cdf(m, b) - markov_cdf(m, a);
    }
    return 0.0;
}

std::optional<Rational> measure_interval_exact(const InvariantMeasure& m, const Rational& a, const Rational& b) {
    check_endpoints(a, b);
    if (m.kind == MeasureKind::Gauss) return std::nullopt;
    return Rational(b - a);
}

std::optional<Rational> cylinder_measure_exact(const InvariantMeasure& m, const Cylinder& c) {
    if (m.kind == MeasureKind::Gauss) return std::nullopt;
    return c.length();
}

double cylinder_measure(const InvariantMeasure& m, const Cylinder& c) {
    if (m.kind == MeasureKind::Gauss) return measure_interval(m, c.left, c.right);
    return c.length().get_d();
}

double log_cylinder_measure(const InvariantMeasure& m, const Cylinder& c) {
    if (m.kind != MeasureKind::Gauss) return log_of(c.length());
    Rational r = c.length() / (1 + c.left);
    double rd = r.get_d();
    double correction = rd > 1e-300 ? std::log(std::log1p(rd) / rd) : 0.0;
    return log_of(r) + correction - std::log(std::numbers::ln2);
}

Rational word_mass(const MapModel& map, std::span<const Digit> word) {
    if (word.empty()) return 1;
    Rational w = map.stationary().at(word[0]);
    for (std::size_t k = 1; k < word.size(); ++k) w *= map.transition()[word[k - 1]][word[k]];
    return w;
}

std::vector<Rational> stationary_vector(const Matrix& m) {
    const std::size_t d = m.size();
    for (const auto& row : m) {
        if (row.size() != d) throw InvalidArgument("transition matrix is not square");
        Rational s = 0;
        for (const auto& v : row) {
            if (v < 0) throw InvalidArgument("negative transition probability");
            s += v;
        }
        if (s != 1) throw InvalidArgument("transition matrix rows must sum to 1");
    }
    if (d == 0 || !is_primitive(m)) throw NumericalError("transition matrix not primitive");
    // Solve (M^T - I) p = 0 with the last equation replaced by sum(p) = 1.
    std::vector<std::vector<Rational>> a(d, std::vector<Rational>(d + 1, 0));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a[i][j] = m[j][i] - (i == j ? 1 : 0);
    for (std::size_t j = 0; j < d; ++j) a[d - 1][j] = 1;
    a[d - 1][d] = 1;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        while (piv < d && a[piv][col] == 0) ++piv;
        if (piv == d) throw NumericalError("singular stationary system");
        std::swap(a[piv], a[col]);
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col || a[r][col] == 0) continue;
            Rational f = a[r][col] / a[col][col];
            for (std::size_t k = col; k <= d; ++k) a[r][k] -= f * a[col][k];
        }
    }
    std::vector<Rational> p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = a[i][d] / a[i][i];
    return p;
}

std::string to_string(EntropyMethod method) {
    switch (method) {
        case EntropyMethod::ClosedForm: return "closed_form";
        case EntropyMethod::Birkhoff: return "birkhoff";
        case EntropyMethod::SMB: return "smb";
    }
    return "unknown";
}

nlohmann::json to_json(const EntropyEstimate& e) {
    nlohmann::json j{{"method", to_string(e.method)}, {"value", e.value},     {"stderr", e.standard_error},
                     {"n_iter", e.n_iter},            {"n_trials", e.n_trials}, {"seed", e.seed},
                     {"sample_size", e.sample_size},  {"resampled", e.resampled}};
    if (!e.note.empty()) j["note"] = e.note;
    if (!e.trial_values.empty()) j["trial_values"] = e.trial_values;
    return j;
}

void sequential_executor(std::size_t n, const std::function<void(std::size_t)>& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

EntropyEstimate entropy_closed_form(const MapModel& map, const InvariantMeasure& m) {
    EntropyEstimate e;
    e.method = EntropyMethod::ClosedForm;
    auto same_chain = [&] {
        return m.kind == MeasureKind::Lebesgue ||
               (m.kind == MeasureKind::MarkovStationary && m.p == map.stationary() && m.m == map.transition());
    };
    if (map.kind() == MapKind::DAryShift && same_chain()) {
        e.value = std::log(static_cast<double>(map.digits()));
    } else if (map.kind() == MapKind::MarkovLinear && same_chain()) {
        const std::size_t d = static_cast<std::size_t>(map.digits());
        double h = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const Rational& pij = map.transition()[i][j];
                if (pij > 0) h -= Rational(map.stationary()[i] * pij).get_d() * log_of(pij);
            }
        e.value = h;
    } else if (map.kind() == MapKind::Gauss && m.kind == MeasureKind::Gauss) {
        e.value = std::numbers::pi * std::numbers::pi / (6.0 * std::numbers::ln2);
    } else if (map.kind() == MapKind::Blaschke && m.kind == MeasureKind::Lebesgue) {
        double err = 0.0;
        auto f = [&](double t) { return std::log(map.blaschke_lift_derivative(t)); };
        e.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 15, 1e-13, &err);
        if (err > 1e-10) throw NumericalError("entropy quadrature did not reach 1e-10");
        e.standard_error = err;
        e.note = "adaptive Gauss-Kronrod quadrature of log|B'| over the circle";
    } else {
        throw InvalidArgument("unsupported map/measure pair for closed-form entropy: " + map.id() + " with " +
                              to_string(m.kind));
    }
    return e;
}

EntropyEstimate entropy_birkhoff(const MapModel& map, const InvariantMeasure& m, std::size_t n_iter,
                                 std::size_t n_trials, std::uint64_t seed, const TrialExecutor& exec) {
    if (n_iter < 1) throw InvalidArgument("n_iter must be >= 1");
    if (n_trials < 1) throw InvalidArgument("n_trials must be >= 1");
    const bool linear = map.is_linear();
    std::vector<std::vector<double>> log_slope;
    if (linear) {
        const std::size_t d = static_cast<std::size_t>(map.digits());
        log_slope.assign(d, std::vector<double>(d, 0.0));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                if (map.slope(i, j) > 0) log_slope[i][j] = log_of(map.slope(i, j));
    }
    std::vector<double> values(n_trials);
    std::vector<std::size_t> resampled(n_trials);
    exec(n_trials, [&](std::size_t t) {
        OrbitOptions opts;
        opts.need_positions = !linear;
        Orbit o = sample_orbit(map, m, n_iter, 1, trial_seed(seed, t), opts);
        // Kahan-free pairwise-ish accumulation is unnecessary at this length; long double suffices.
        long double s = 0.0L;
        if (linear) {
            for (std::size_t k = 0; k < n_iter; ++k) s += log_slope[o.digits[k]][o.digits[k + 1]];
        } else if (map.kind() == MapKind::Gauss) {
            for (std::size_t k = 0; k < n_iter; ++k) s += -2.0 * std::log(o.x[k]);
        } else {
            for (std::size_t k = 0; k < n_iter; ++k) s += std::log(map.blaschke_lift_derivative(o.x[k]));
        }
        values[t] = static_cast<double>(s / static_cast<long double>(n_iter));
        resampled[t] = o.resampled;
    });
    EntropyEstimate e;
    e.method = EntropyMethod::Birkhoff;
    e.n_iter = n_iter;
    e.n_trials = n_trials;
    e.sample_size = n_iter * n_trials;
    e.seed = seed;
    e.trial_values = values;
    e.resampled = std::accumulate(resampled.begin(), resampled.end(), std::size_t{0});
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n_trials);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    e.value = mean;
    e.standard_error = n_trials > 1 ? std::sqrt(var / static_cast<double>(n_trials - 1) / static_cast<double>(n_trials))
                                    : 0.0;
    return e;
}

EntropyEstimate entropy_smb(const MapModel& map, const InvariantMeasure& m, const Rational& x, std::size_t n) {
    if (n < 1) throw InvalidArgument("SMB depth must be >= 1");
    Cylinder c = locate_cylinder(map, x, n, BoundaryPolicy::Strict);
    EntropyEstimate e;
    e.method = EntropyMethod::SMB;
    e.n_iter = n;
    e.sample_size = 1;
    if (map.is_linear() && m.kind != MeasureKind::Gauss)
        e.value = -log_of(word_mass(map, c.word)) / static_cast<double>(n);
    else
        e.value = -log_cylinder_measure(m, c) / static_cast<double>(n);
    return e;
}

}  // namespace qrec
