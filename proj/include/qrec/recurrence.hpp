#pragma once

#include "qrec/coding.hpp"
#include "qrec/maps.hpp"
#include "qrec/measures.hpp"
#include "qrec/orbits.hpp"
#include "qrec/schedule.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qrec {

struct TargetPoint {
    Word word;                 // digits of x0
    Rational value;            // x0 itself, or a deep-cylinder approximation
    bool exact_value = true;
    double approx = 0.0;
    std::vector<double> log_lambda;  // log λ(P(n, x0)), n = 0 .. word.size()-1
    std::vector<double> log_mu;      // log µ(P(n, x0)) for the map's natural measure
    double delta_lower = 1.0;        // lower / upper P_0-dimension of λ at x0
    double delta_upper = 1.0;
    double tau_upper = 0.0;          // decay rate of λ along P(n, x0)
    double digit_rate = 0.0;         // lim (1/n) log(1/λ(P(n, x0)))
    bool closed_form = false;        // δ, τ and the digit rate are exact, not fitted

    static TargetPoint from_rational(const MapModel& map, const Rational& x0, std::size_t depth = 0);
    // A finite word; `periodic` repeats it to the requested depth.
    static TargetPoint from_word(const MapModel& map, const Word& pattern, bool periodic, std::size_t depth = 0);

    std::size_t max_depth() const { return word.size() - 1; }
    // log λ(P(t, x0)) with linear extrapolation past the stored depth.
    double log_lambda_at(std::size_t t) const;
    double log_mu_at(std::size_t t) const;
};

nlohmann::json to_json(const TargetPoint& x0);

// Mass of the closed ball B(x0, r) in the map's geometry (arc distance on the circle).
double ball_measure(const MapModel& map, const InvariantMeasure& m, double x0, double r);

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> hits;  // H(n) at each checkpoint
    std::vector<double> liminf;       // min over (H/10, H] of d(T^n x, x0)/r_n, one per horizon
    std::size_t resampled = 0;
    std::size_t truncated_checks = 0;  // symbolic comparisons cut short by the available word
};

struct HitSeries {
    std::string mode;  // "metric" or "symbolic"
    std::vector<std::size_t> checkpoints;
    std::vector<std::size_t> horizons;
    std::vector<double> normalizer;  // Σ_{j<=n} µ(target_j) at each checkpoint
    std::vector<TrialRecord> trials;
    std::vector<double> mean_ratio;  // per checkpoint
    std::vector<double> ci95;        // half-width per checkpoint

    double ratio(std::size_t trial, std::size_t k) const;
    double final_mean_ratio() const { return mean_ratio.back(); }
};

struct HitOptions {
    std::vector<std::size_t> horizons;  // default: the horizon N only
    std::size_t trace_points_per_decade = 4;
    OrbitOptions orbit;
    TrialExecutor exec = sequential_executor;
};

HitSeries run_metric_hits(const MapModel& map, const InvariantMeasure& m, const TargetPoint& x0, const Schedule& sched,
                          std::size_t n, std::size_t trials, std::uint64_t seed, const HitOptions& opts = {});
HitSeries run_symbolic_hits(const MapModel& map, const InvariantMeasure& m, const TargetPoint& x0,
                            const Schedule& sched, std::size_t n, std::size_t trials, std::uint64_t seed,
                            const HitOptions& opts = {});

// Hit times i in [1, n] for a single orbit.
std::vector<std::size_t> metric_hit_times(const MapModel& map, const Orbit& orbit, double x0,
                                          std::span<const double> radii);
std::vector<std::size_t> symbolic_hit_times(const Orbit& orbit, const Word& x0_word,
                                            std::span<const std::size_t> depths, std::size_t* truncated = nullptr);

nlohmann::json to_json(const HitSeries& h);

enum class Verdict { MeasureZero, FullMeasure, Inconclusive };
std::string to_string(Verdict v);

struct SeriesReport {
    std::string name;
    std::vector<std::pair<std::size_t, double>> partial_sums;
    std::optional<bool> converges;  // nullopt when undecided
    bool closed_form = false;
    std::string rule;
};

struct Classification {
    Verdict verdict = Verdict::Inconclusive;
    SeriesReport series;
    std::optional<SeriesReport> strengthened;
    double exponent = 0.0;  // δ̄ + τ̄/log β used by the strengthened series
    std::vector<std::string> notes;
};

nlohmann::json to_json(const Classification& c);

Classification borel_cantelli_classify(const MapModel& map, const InvariantMeasure& m, const TargetPoint& x0,
                                       const Schedule& sched);

// (1/n) log(1/λ(P(t_n, x0))) rates of a depth schedule at x0.
Rates depth_mass_rates(const TargetPoint& x0, const Schedule& sched, std::size_t n_max = 1000000);

}  // namespace qrec
