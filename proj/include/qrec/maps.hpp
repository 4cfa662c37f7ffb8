#pragma once

#include "qrec/rational.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qrec {

using Digit = std::int64_t;
using Word = std::vector<Digit>;
using Matrix = std::vector<std::vector<Rational>>;

enum class MapKind { DAryShift, MarkovLinear, Gauss, Blaschke };

std::string to_string(MapKind kind);

enum class StepStatus {
    Ok,
    BoundaryPoint,  // input sat on a boundary of P_0; value follows the half-open convention
    OrbitEnded,     // Gauss orbit reached 0
};

template <class T>
struct StepResult {
    T value;
    StepStatus status = StepStatus::Ok;
};

// Which one-sided neighbourhood of x decides its block.  Right gives the
// half-open [left, right) convention for increasing branches.
enum class Side { Right, Left };

struct Interval {
    Rational left;
    Rational right;
    Rational length() const { return right - left; }
};

class MapModel {
public:
    static MapModel dary_shift(int digits);
    // `stationary` must be a probability vector with pM = p.
    static MapModel markov_linear(Matrix transition, std::vector<Rational> stationary);
    // Same, with p computed from M (requires M primitive).
    static MapModel markov_linear(Matrix transition);
    static MapModel bernoulli(std::vector<Rational> p);
    static MapModel gauss();
    // Zeros of a finite Blaschke product; one of them must be 0.
    static MapModel blaschke(std::vector<std::complex<double>> zeros);

    MapKind kind() const { return kind_; }
    // nullopt for the countable Gauss partition.
    std::optional<std::size_t> branch_count() const;
    double expansion_beta() const { return beta_; }
    bool is_circle() const { return kind_ == MapKind::Blaschke; }
    bool is_linear() const { return kind_ == MapKind::DAryShift || kind_ == MapKind::MarkovLinear; }
    bool exact() const { return kind_ != MapKind::Blaschke; }
    std::string id() const;

    // Block P_d of the initial partition.  Blaschke endpoints are rounded doubles.
    Interval block(Digit d) const;
    // First `limit` blocks (all of them for finite partitions).
    std::vector<Interval> partition0(std::size_t limit = 64) const;

    bool admissible(Digit from, Digit to) const;
    // Smallest n with M^n > 0 (MarkovLinear and DAryShift only).
    std::optional<std::size_t> mixing_exponent() const;

    int digits() const { return static_cast<int>(p_.size()); }
    const Matrix& transition() const { return m_; }
    const std::vector<Rational>& stationary() const { return p_; }
    const std::vector<std::complex<double>>& zeros() const { return zeros_; }

    // Linear-map layout: P_i = [block_left(i), block_left(i+1)), split into
    // sub-blocks P_{i,j} of length p_i p_{ij} that map onto P_j.
    const Rational& block_left(std::size_t i) const { return left_[i]; }
    const Rational& sub_left(std::size_t i, std::size_t j) const { return sub_left_[i][j]; }
    // Slope of the affine branch P_{i,j} -> P_j.
    const Rational& slope(std::size_t i, std::size_t j) const { return slope_[i][j]; }

    Digit digit_of(const Rational& x, Side side = Side::Right) const;
    Digit digit_of(double x) const;
    bool on_boundary(const Rational& x) const;
    bool on_boundary(double x) const;

    // Blaschke lift S(t) with S(0) = 0, S(1) = N, and its derivative.
    double blaschke_lift(double t) const;
    double blaschke_lift_derivative(double t) const;
    double blaschke_cut(std::size_t j) const { return cuts_[j]; }

private:
    MapModel() = default;
    void build_layout();

    MapKind kind_ = MapKind::DAryShift;
    Matrix m_;
    std::vector<Rational> p_;
    std::vector<Rational> left_;
    std::vector<std::vector<Rational>> sub_left_;
    std::vector<std::vector<Rational>> slope_;
    std::vector<std::complex<double>> zeros_;
    std::vector<double> cuts_;
    double beta_ = 2.0;
};

StepResult<Rational> evaluate(const MapModel& map, const Rational& x);
StepResult<double> evaluate(const MapModel& map, double x);

// One step using the branch selected by `side`; returns the image and the
// side to use at the image (flipped by orientation-reversing branches).
std::pair<Rational, Side> evaluate_sided(const MapModel& map, const Rational& x, Side side);

double log_derivative(const MapModel& map, double x);
double log_derivative(const MapModel& map, const Rational& x);

// The x in P_digit with T(x) = y.  For MarkovLinear the target block is the
// block containing y.
Rational inverse_branch(const MapModel& map, Digit digit, const Rational& y);
double inverse_branch(const MapModel& map, Digit digit, double y);

bool is_primitive(const Matrix& m, std::size_t* exponent = nullptr);

}  // namespace qrec
