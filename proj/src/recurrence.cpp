#include "qrec/recurrence.hpp"

#include "qrec/errors.hpp"
#include "qrec/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t default_depth(const MapModel& map) {
    switch (map.kind()) {
        case MapKind::Gauss: return 400;
        case MapKind::Blaschke: return 40;
        default: return 1024;
    }
}

void fill_rates(const MapModel& map, TargetPoint& x0, bool bounded_digits) {
    const auto cyl = nested_cylinders(map, x0.word);
    const InvariantMeasure mu = InvariantMeasure::natural_for(map);
    const std::size_t n = cyl.size();
    x0.log_lambda.resize(n);
    x0.log_mu.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (cyl[k].length() <= 0) throw NumericalError("degenerate cylinder along the target word");
        x0.log_lambda[k] = log_of(cyl[k].length());
        x0.log_mu[k] = map.kind() == MapKind::Gauss ? log_cylinder_measure(mu, cyl[k]) : x0.log_lambda[k];
    }
    // On an interval the diameter of a block equals its λ-length, so the
    // fitted ratio log λ / log diam is 1; it is still computed from the data.
    const std::size_t lo = std::max<std::size_t>(1, n / 2);
    double dmin = kInf, dmax = 0.0, tau = 0.0;
    for (std::size_t k = lo; k < n; ++k) {
        double diam = log_of(cyl[k].length());
        double d = x0.log_lambda[k] / diam;
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
        if (k + 1 < n) tau = std::max(tau, (x0.log_lambda[k] - x0.log_lambda[k + 1]) / static_cast<double>(k));
    }
    x0.delta_lower = dmin;
    x0.delta_upper = dmax;
    x0.tau_upper = tau;
    const std::size_t last = n - 1;
    x0.digit_rate = last > lo ? (x0.log_lambda[lo] - x0.log_lambda[last]) / static_cast<double>(last - lo)
                              : -x0.log_lambda[last] / static_cast<double>(last + 1);
    // Finite partitions give δ = 1 and τ = 0 exactly; so do bounded CF digits.
    if (map.is_linear() || (map.kind() == MapKind::Gauss && bounded_digits)) {
        x0.closed_form = true;
        x0.delta_lower = x0.delta_upper = 1.0;
        x0.tau_upper = 0.0;
        if (map.kind() == MapKind::DAryShift) x0.digit_rate = std::log(static_cast<double>(map.digits()));
    }
}

std::vector<std::size_t> make_checkpoints(std::size_t n, const std::vector<std::size_t>& horizons, std::size_t per_decade) {
    std::vector<std::size_t> cps(horizons.begin(), horizons.end());
    cps.push_back(n);
    if (per_decade > 0) {
        for (double e = 1.0; ; e += 1.0 / static_cast<double>(per_decade)) {
            auto v = static_cast<std::size_t>(std::llround(std::pow(10.0, e)));
            if (v >= n) break;
            cps.push_back(v);
        }
    }
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    return cps;
}

void summarise(HitSeries& h) {
    const std::size_t nc = h.checkpoints.size();
    const auto nt = static_cast<double>(h.trials.size());
    h.mean_ratio.assign(nc, 0.0);
    h.ci95.assign(nc, 0.0);
    for (std::size_t k = 0; k < nc; ++k) {
        double mean = 0.0;
        for (std::size_t t = 0; t < h.trials.size(); ++t) mean += h.ratio(t, k);
        mean /= nt;
        double var = 0.0;
        for (std::size_t t = 0; t < h.trials.size(); ++t) var += (h.ratio(t, k) - mean) * (h.ratio(t, k) - mean);
        h.mean_ratio[k] = mean;
        h.ci95[k] = nt > 1 ? 1.96 * std::sqrt(var / (nt - 1) / nt) : 0.0;
    }
}

void record_counts(const std::vector<std::size_t>& times, const std::vector<std::size_t>& cps,
                   std::vector<std::uint64_t>& out) {
    out.assign(cps.size(), 0);
    std::size_t p = 0;
    for (std::size_t k = 0; k < cps.size(); ++k) {
        while (p < times.size() && times[p] <= cps[k]) ++p;
        out[k] = p;
    }
}

std::vector<std::size_t> checked_horizons(const HitOptions& opts, std::size_t n) {
    std::vector<std::size_t> hs = opts.horizons.empty() ? std::vector<std::size_t>{n} : opts.horizons;
    for (auto h : hs)
        if (h < 1 || h > n) throw InvalidArgument("horizon outside [1, N]");
    std::sort(hs.begin(), hs.end());
    return hs;
}

double distance(const MapModel& map, double a, double b) {
    double d = std::abs(a - b);
    if (map.is_circle()) d = std::min(d, 1.0 - d);
    return d;
}

// Partial sums of f(1..n_max) at powers of ten.
template <class F>
std::vector<std::pair<std::size_t, double>> partial_sums(F f, std::size_t n_max) {
    std::vector<std::pair<std::size_t, double>> out;
    long double s = 0.0L;
    std::size_t next = 10;
    for (std::size_t n = 1; n <= n_max; ++n) {
        s += f(n);
        if (n == next || n == n_max) {
            out.emplace_back(n, static_cast<double>(s));
            if (n == next) next *= 10;
        }
    }
    return out;
}

// Convergence guess from partial sums at powers of ten.
std::optional<bool> heuristic_convergence(const std::vector<std::pair<std::size_t, double>>& ps) {
    if (ps.size() < 4) return std::nullopt;
    std::vector<double> inc;
    for (std::size_t k = 1; k < ps.size(); ++k) inc.push_back(ps[k].second - ps[k - 1].second);
    const std::size_t m = inc.size();
    double a = inc[m - 2], b = inc[m - 1];
    double total = ps.back().second;
    if (b <= 1e-9 * std::max(1.0, total) || (a > 0 && b / a < 0.35 && b < 0.05 * total)) return true;
    if (a > 0 && b / a >= 0.9) return false;
    return std::nullopt;
}

}  // namespace

TargetPoint TargetPoint::from_rational(const MapModel& map, const Rational& x0, std::size_t depth) {
    if (depth == 0) depth = default_depth(map);
    if (x0 < 0 || x0 >= 1) throw InvalidArgument("target point outside [0,1)");
    Itinerary it = itinerary(map, x0, depth, BoundaryPolicy::Strict);
    if (!it.complete()) {
        std::string why = it.status == ItineraryStatus::OrbitEnded ? "orbit of x0 ended at 0" : "x0 orbit meets a partition boundary";
        throw BoundaryError(why + " at step " + std::to_string(*it.failure_index), *it.failure_index);
    }
    TargetPoint t;
    t.word = std::move(it.digits);
    t.value = x0;
    t.exact_value = map.exact();
    t.approx = x0.get_d();
    bool bounded = false;
    if (map.kind() == MapKind::Gauss) bounded = *std::max_element(t.word.begin(), t.word.end()) <= 1000;
    fill_rates(map, t, bounded);
    return t;
}

TargetPoint TargetPoint::from_word(const MapModel& map, const Word& pattern, bool periodic, std::size_t depth) {
    if (pattern.empty()) throw InvalidArgument("empty target word");
    if (depth == 0) depth = periodic ? default_depth(map) : pattern.size() - 1;
    TargetPoint t;
    if (periodic) {
        t.word.reserve(depth + 1);
        for (std::size_t k = 0; k <= depth; ++k) t.word.push_back(pattern[k % pattern.size()]);
    } else {
        t.word = pattern;
    }
    if (periodic && map.is_linear()) {
        // x0 is the fixed point of the affine composite of one period.
        Word w(pattern);
        w.push_back(pattern.front());
        Cylinder c = cylinder_from_word(map, w);
        Interval b = map.block(pattern.front());
        Rational a = c.length() / b.length();
        Rational off = c.left - a * b.left;
        t.value = off / (1 - a);
        Itinerary it = itinerary(map, t.value, t.word.size() - 1, BoundaryPolicy::Strict);
        if (!it.complete()) throw BoundaryError("periodic target word gives a boundary point", *it.failure_index);
        if (it.digits != t.word) throw NumericalError("periodic point does not reproduce its word");
        t.exact_value = true;
    } else {
        Cylinder c = cylinder_from_word(map, t.word);
        t.value = (c.left + c.right) / 2;
        t.exact_value = false;
    }
    t.approx = t.value.get_d();
    bool bounded = map.kind() == MapKind::Gauss && periodic;
    fill_rates(map, t, bounded);
    return t;
}

double TargetPoint::log_lambda_at(std::size_t t) const {
    if (t < log_lambda.size()) return log_lambda[t];
    return log_lambda.back() - digit_rate * static_cast<double>(t - max_depth());
}

double TargetPoint::log_mu_at(std::size_t t) const {
    if (t < log_mu.size()) return log_mu[t];
    return log_mu.back() - digit_rate * static_cast<double>(t - max_depth());
}

nlohmann::json to_json(const TargetPoint& x0) {
    Word head(x0.word.begin(), x0.word.begin() + std::min<std::size_t>(x0.word.size(), 32));
    return {{"value", to_string(x0.value)},
            {"approx", x0.approx},
            {"exact_value", x0.exact_value},
            {"word_prefix", head},
            {"depth", x0.max_depth()},
            {"delta_lower", x0.delta_lower},
            {"delta_upper", x0.delta_upper},
            {"tau_upper", x0.tau_upper},
            {"digit_rate", x0.digit_rate},
            {"closed_form", x0.closed_form}};
}

double ball_measure(const MapModel& map, const InvariantMeasure& m, double x0, double r) {
    if (r < 0) throw InvalidArgument("negative radius");
    if (map.is_circle()) return std::min(1.0, 2.0 * r);
    double a = std::max(0.0, x0 - r), b = std::min(1.0, x0 + r);
    if (m.kind == MeasureKind::Gauss) return std::log1p((b - a) / (1.0 + a)) / std::log(2.0);
    return b - a;
}

double HitSeries::ratio(std::size_t trial, std::size_t k) const {
    return normalizer[k] > 0 ? static_cast<double>(trials[trial].hits[k]) / normalizer[k] : 0.0;
}

std::vector<std::size_t> metric_hit_times(const MapModel& map, const Orbit& orbit, double x0,
                                          std::span<const double> radii) {
    std::vector<std::size_t> out;
    const std::size_t n = std::min(radii.size(), orbit.x.size() - 1);
    for (std::size_t i = 1; i <= n; ++i)
        if (distance(map, orbit.x[i], x0) <= radii[i - 1]) out.push_back(i);
    return out;
}

std::vector<std::size_t> symbolic_hit_times(const Orbit& orbit, const Word& x0_word,
                                            std::span<const std::size_t> depths, std::size_t* truncated) {
    std::vector<std::size_t> out;
    std::size_t cut = 0;
    const std::size_t avail = orbit.digits.size();
    for (std::size_t i = 1; i <= depths.size(); ++i) {
        const std::size_t t = depths[i - 1];
        std::size_t k = 0;
        bool hit = true;
        for (; k <= t; ++k) {
            if (k >= x0_word.size() || i + k >= avail) {
                hit = false;
                ++cut;
                break;
            }
            if (orbit.digits[i + k] != x0_word[k]) {
                hit = false;
                break;
            }
        }
        if (hit) out.push_back(i);
    }
    if (truncated) *truncated = cut;
    return out;
}

HitSeries run_metric_hits(const MapModel& map, const InvariantMeasure& m, const TargetPoint& x0, const Schedule& sched,
                          std::size_t n, std::size_t trials, std::uint64_t seed, const HitOptions& opts) {
    if (!sched.is_radii()) throw InvalidArgument("run_metric_hits needs a radii schedule");
    if (n < 1 || trials < 1) throw InvalidArgument("horizon and trial count must be positive");
    HitSeries h;
    h.mode = "metric";
    h.horizons = checked_horizons(opts, n);
    h.checkpoints = make_checkpoints(n, h.horizons, opts.trace_points_per_decade);
    const std::vector<double> radii = sched.radii(n);
    {
        long double s = 0.0L;
        std::size_t k = 0;
        h.normalizer.assign(h.checkpoints.size(), 0.0);
        for (std::size_t j = 1; j <= n; ++j) {
            s += ball_measure(map, m, x0.approx, radii[j - 1]);
            if (j == h.checkpoints[k]) h.normalizer[k++] = static_cast<double>(s);
        }
    }
    h.trials.resize(trials);
    opts.exec(trials, [&](std::size_t t) {
        TrialRecord& rec = h.trials[t];
        rec.trial = t;
        rec.seed = trial_seed(seed, t);
        OrbitOptions oo = opts.orbit;
        oo.need_positions = true;
        Orbit o = sample_orbit(map, m, n, 0, rec.seed, oo);
        rec.resampled = o.resampled;
        record_counts(metric_hit_times(map, o, x0.approx, radii), h.checkpoints, rec.hits);
        for (std::size_t hz : h.horizons) {
            double best = kInf;
            for (std::size_t i = hz / 10 + 1; i <= hz; ++i)
                best = std::min(best, distance(map, o.x[i], x0.approx) / radii[i - 1]);
            rec.liminf.push_back(best);
        }
    });
    summarise(h);
    return h;
}

HitSeries run_symbolic_hits(const MapModel& map, const InvariantMeasure& m, const TargetPoint& x0,
                            const Schedule& sched, std::size_t n, std::size_t trials, std::uint64_t seed,
                            const HitOptions& opts) {
    if (!sched.is_depth()) throw InvalidArgument("run_symbolic_hits needs a depth schedule");
    if (n < 1 || trials < 1) throw InvalidArgument("horizon and trial count must be positive");
    HitSeries h;
    h.mode = "symbolic";
    h.horizons = checked_horizons(opts, n);
    h.checkpoints = make_checkpoints(n, h.horizons, opts.trace_points_per_decade);
    std::vector<std::size_t> depths(n);
    for (std::size_t j = 1; j <= n; ++j) depths[j - 1] = sched.depth(j);
    const std::size_t lookahead = std::min(depths.back() + 1, x0.word.size());
    {
        long double s = 0.0L;
        std::size_t k = 0, last_t = SIZE_MAX;
        double mass = 0.0;
        h.normalizer.assign(h.checkpoints.size(), 0.0);
        for (std::size_t j = 1; j <= n; ++j) {
            if (depths[j - 1] != last_t) {
                last_t = depths[j - 1];
                mass = std::exp(x0.log_mu_at(last_t));
            }
            s += mass;
            if (j == h.checkpoints[k]) h.normalizer[k++] = static_cast<double>(s);
        }
    }
    h.trials.resize(trials);
    opts.exec(trials, [&](std::size_t t) {
        TrialRecord& rec = h.trials[t];
        rec.trial = t;
        rec.seed = trial_seed(seed, t);
        OrbitOptions oo = opts.orbit;
        oo.need_positions = false;
        Orbit o = sample_orbit(map, m, n, lookahead, rec.seed, oo);
        rec.resampled = o.resampled;
        record_counts(symbolic_hit_times(o, x0.word, depths, &rec.truncated_checks), h.checkpoints, rec.hits);
    });
    summarise(h);
    return h;
}

nlohmann::json to_json(const HitSeries& h) {
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& r : h.trials) {
        nlohmann::json j{{"trial", r.trial}, {"seed", r.seed}, {"hits", r.hits}, {"resampled", r.resampled}};
        if (!r.liminf.empty()) j["liminf"] = r.liminf;
        if (r.truncated_checks) j["truncated_checks"] = r.truncated_checks;
        trials.push_back(std::move(j));
    }
    return {{"mode", h.mode},           {"checkpoints", h.checkpoints}, {"horizons", h.horizons},
            {"normalizer", h.normalizer}, {"mean_ratio", h.mean_ratio},   {"ci95", h.ci95},
            {"trials", trials}};
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::MeasureZero: return "MeasureZero";
        case Verdict::FullMeasure: return "FullMeasure";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

nlohmann::json to_json(const Classification& c) {
    auto series = [](const SeriesReport& s) {
        nlohmann::json ps = nlohmann::json::array();
        for (auto [n, v] : s.partial_sums) ps.push_back({n, v});
        nlohmann::json j{{"name", s.name}, {"partial_sums", ps}, {"closed_form", s.closed_form}, {"rule", s.rule}};
        j["converges"] = s.converges ? nlohmann::json(*s.converges) : nlohmann::json(nullptr);
        return j;
    };
    nlohmann::json j{{"verdict", to_string(c.verdict)}, {"series", series(c.series)}, {"notes", c.notes}};
    if (c.strengthened) {
        j["strengthened"] = series(*c.strengthened);
        j["exponent"] = c.exponent;
    }
    return j;
}

Rates depth_mass_rates(const TargetPoint& x0, const Schedule& sched, std::size_t n_max) {
    if (!sched.is_depth()) throw InvalidArgument("depth_mass_rates needs a depth schedule");
    Rates dr = sched.depth_rates();
    if (std::isinf(dr.upper)) {
        Rates r{kInf, std::isinf(dr.lower) ? kInf : 0.0, true};
        return r;
    }
    double hi = 0.0, lo = kInf;
    for (std::size_t n = n_max / 2; n <= n_max; n += std::max<std::size_t>(1, n_max / 2000)) {
        double v = -x0.log_lambda_at(sched.depth(n)) / static_cast<double>(n);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
    }
    // With w = lim t_n/n known exactly, L = w * digit rate on typical points.
    if (dr.closed_form && x0.closed_form) return {dr.upper * x0.digit_rate, dr.lower * x0.digit_rate, true};
    return {hi, lo, false};
}

Classification borel_cantelli_classify(const MapModel& map, const InvariantMeasure& m, const TargetPoint& x0,
                                       const Schedule& sched) {
    (void)m;
    Classification c;
    const std::size_t n_max = 1000000;
    const InvariantMeasure lambda = InvariantMeasure::lebesgue();
    const bool hypotheses = std::isfinite(x0.tau_upper) && x0.delta_lower > 0 && std::isfinite(x0.delta_upper);
    if (!hypotheses) c.notes.push_back("divergence hypotheses fail: need finite tau and 0 < delta_lower <= delta_upper < inf");
    if (!x0.closed_form) c.notes.push_back("delta and tau at x0 are finite-depth estimates");

    if (sched.is_radii()) {
        c.series.name = "sum lambda(B(x0, r_n))";
        c.series.partial_sums = partial_sums([&](std::size_t n) { return ball_measure(map, lambda, x0.approx, sched.radius(n)); }, n_max);
        const double logb = std::log(map.expansion_beta());
        c.exponent = x0.delta_upper + x0.tau_upper / logb;
        const double eps = 0.01;
        SeriesReport st;
        st.name = "sum r_n^(delta_upper + tau_upper/log beta + eps), eps = 0.01";
        st.partial_sums = partial_sums([&](std::size_t n) { return std::pow(sched.radius(n), c.exponent + eps); }, n_max);
        switch (sched.kind()) {
            case ScheduleKind::RadiiPower: {
                const double a = sched.parameter();
                c.series.closed_form = st.closed_form = true;
                c.series.converges = a < 1.0;
                c.series.rule = "sum n^(-1/alpha) converges iff alpha < 1";
                // Σ n^{-(e+ε)/α} diverges for some ε > 0 iff e/α < 1.
                st.converges = !(c.exponent < a);
                st.rule = "diverges for small eps iff alpha > delta_upper + tau_upper/log beta";
                break;
            }
            case ScheduleKind::RadiiExp:
                c.series.closed_form = st.closed_form = true;
                c.series.converges = st.converges = true;
                c.series.rule = st.rule = "geometric series";
                break;
            case ScheduleKind::RadiiConst:
                c.series.closed_form = st.closed_form = true;
                c.series.converges = st.converges = false;
                c.series.rule = st.rule = "constant positive terms";
                break;
            default:
                c.series.converges = heuristic_convergence(c.series.partial_sums);
                st.converges = heuristic_convergence(st.partial_sums);
                c.series.rule = st.rule = "numeric heuristic on partial sums";
                break;
        }
        c.strengthened = st;
        if (c.series.converges == true)
            c.verdict = Verdict::MeasureZero;
        else if (st.converges == false && hypotheses)
            c.verdict = Verdict::FullMeasure;
        else
            c.verdict = Verdict::Inconclusive;
        return c;
    }

    c.series.name = "sum lambda(P(t_n, x0))";
    std::map<std::size_t, double> memo;
    auto term = [&](std::size_t n) {
        std::size_t t = sched.depth(n);
        auto it = memo.find(t);
        if (it != memo.end()) return it->second;
        double v = std::exp(x0.log_lambda_at(t));
        memo.emplace(t, v);
        return v;
    };
    c.series.partial_sums = partial_sums(term, n_max);
    const double rho = x0.digit_rate;
    switch (sched.kind()) {
        case ScheduleKind::DepthConst:
            c.series.closed_form = true;
            c.series.converges = false;
            c.series.rule = "constant positive terms";
            break;
        case ScheduleKind::DepthPowerFloor:
            c.series.closed_form = true;
            c.series.converges = rho > 0;
            c.series.rule = "terms decay like exp(-rate * n^kappa)";
            break;
        case ScheduleKind::DepthLogFloor: {
            // Condense by the value of t_n: G_t = #{n : t_n = t} * λ(P(t, x0)).
            const double b = sched.parameter();
            const double diff = std::log(b) - rho;
            c.series.closed_form = true;
            if (diff > 0.01) {
                c.series.converges = false;
                c.series.rule = "condensed terms grow like exp(t (log base - rate))";
            } else if (diff < -0.01) {
                c.series.converges = true;
                c.series.rule = "condensed terms decay like exp(t (log base - rate))";
            } else {
                const std::size_t top = std::min<std::size_t>(x0.max_depth(), 60);
                double gmin = kInf;
                for (std::size_t t = top / 2; t <= top; ++t) {
                    double count = std::ceil(std::pow(b, t + 1.0)) - std::ceil(std::pow(b, static_cast<double>(t)));
                    gmin = std::min(gmin, std::log(count) + x0.log_lambda_at(t));
                }
                if (std::exp(gmin) > 1e-3) {
                    c.series.converges = false;
                    c.series.rule = "borderline base: condensed terms stay bounded below";
                } else {
                    c.series.closed_form = false;
                    c.series.rule = "borderline base: undecided";
                }
            }
            break;
        }
        default:
            c.series.converges = heuristic_convergence(c.series.partial_sums);
            c.series.rule = "numeric heuristic on partial sums";
            break;
    }
    if (c.series.converges == true)
        c.verdict = Verdict::MeasureZero;
    else if (c.series.converges == false && x0.delta_lower > 0)
        c.verdict = Verdict::FullMeasure;
    else
        c.verdict = Verdict::Inconclusive;
    return c;
}

}  // namespace qrec
