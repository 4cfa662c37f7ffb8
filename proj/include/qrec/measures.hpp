#pragma once

#include "qrec/coding.hpp"
#include "qrec/maps.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qrec {

enum class MeasureKind { Lebesgue, Gauss, MarkovStationary };

std::string to_string(MeasureKind kind);

struct InvariantMeasure {
    MeasureKind kind = MeasureKind::Lebesgue;
    std::vector<Rational> p;  // MarkovStationary only
    Matrix m;

    static InvariantMeasure lebesgue() { return {}; }
    static InvariantMeasure gauss() { return {MeasureKind::Gauss, {}, {}}; }
    static InvariantMeasure markov_stationary(Matrix m, std::vector<Rational> p);
    // The natural invariant measure of a map (Gauss measure for Gauss, the
    // stationary chain for linear maps, Lebesgue for Blaschke products).
    static InvariantMeasure natural_for(const MapModel& map);

    std::string density_description() const;
    double density(double x) const;
};

// Mass of [a, b].
double measure_interval(const InvariantMeasure& m, const Rational& a, const Rational& b);
// Exact mass when available (Lebesgue, MarkovStationary).
std::optional<Rational> measure_interval_exact(const InvariantMeasure& m, const Rational& a, const Rational& b);

double cylinder_measure(const InvariantMeasure& m, const Cylinder& c);
// Natural log of the mass; stays finite for very deep cylinders.
double log_cylinder_measure(const InvariantMeasure& m, const Cylinder& c);
std::optional<Rational> cylinder_measure_exact(const InvariantMeasure& m, const Cylinder& c);

// p with pM = p; throws NumericalError("transition matrix not primitive").
std::vector<Rational> stationary_vector(const Matrix& m);

enum class EntropyMethod { ClosedForm, Birkhoff, SMB };
std::string to_string(EntropyMethod method);

struct EntropyEstimate {
    double value = 0.0;
    EntropyMethod method = EntropyMethod::ClosedForm;
    std::size_t sample_size = 0;
    double standard_error = 0.0;
    std::size_t n_iter = 0;
    std::size_t n_trials = 0;
    std::uint64_t seed = 0;
    std::size_t resampled = 0;     // trials restarted after a boundary hit
    std::vector<double> trial_values;
    std::string note;
};

nlohmann::json to_json(const EntropyEstimate& e);

// Runs body(i) for i in [0, n).  The harness supplies a parallel version.
using TrialExecutor = std::function<void(std::size_t n, const std::function<void(std::size_t)>& body)>;
void sequential_executor(std::size_t n, const std::function<void(std::size_t)>& body);

EntropyEstimate entropy_closed_form(const MapModel& map, const InvariantMeasure& m);
EntropyEstimate entropy_birkhoff(const MapModel& map, const InvariantMeasure& m, std::size_t n_iter,
                                 std::size_t n_trials, std::uint64_t seed,
                                 const TrialExecutor& exec = sequential_executor);
EntropyEstimate entropy_smb(const MapModel& map, const InvariantMeasure& m, const Rational& x, std::size_t n);

// Stationary-chain mass of a word: p_{i0} prod p_{ik,ik+1}.
Rational word_mass(const MapModel& map, std::span<const Digit> word);

}  // namespace qrec
