#pragma once

#include "qrec/coding.hpp"
#include "qrec/maps.hpp"
#include "qrec/recurrence.hpp"
#include "qrec/schedule.hpp"

#include "json.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qrec {

struct DimensionBound {
    std::optional<double> grid_lower;
    std::optional<double> hausdorff_lower;
    std::optional<double> upper;
    std::string formula;
    std::map<std::string, double> inputs;
    std::vector<std::string> notes;
};

nlohmann::json to_json(const DimensionBound& b);

// h/(h + δ̄ℓ̄), and the same times max(0, 1 - τ̄δ̄ℓ̄²/(h² log β)).
DimensionBound bound_radii_lower(double h, double delta_upper, double ell_upper, double tau_upper, double log_beta);
// 1 - δ̄ℓ̄/(s log β), clamped to [0, 1].
DimensionBound bound_doubling(double delta_upper, double ell_upper, double s, double log_beta);
// h/(h + L̄)
DimensionBound bound_code_lower(double h, double L_upper);
// 1/(1 + w̄)
DimensionBound bound_code_w(double w_upper);
// min{1, log D/(h + L̲)}
DimensionBound bound_upper_code(int D, double h, double L_lower);
// min{1, log D/(h + δ̲ℓ̲)}
DimensionBound bound_upper_radii(int D, double h, double delta_lower, double ell_lower);
DimensionBound bound_hoeffding(const std::vector<double>& p, double L_lower);

// b/(a+c) - log(1/δ)/(a+c) * lim j/(N_1+...+N_j), the limit estimated at the last level.
double cantor_lambda(double a, double b, double c, double delta, const std::vector<double>& level_sizes);
// Same, with N_j given as a function and the limit estimated at j = j_max.
double cantor_lambda(double a, double b, double c, double delta, const std::function<double(std::size_t)>& level_size,
                     std::size_t j_max = 1000000);

// Grid transfer: 1 - (1 - grid_dim) * limsup log(1/a_n)/log(1/b_{n-1}), clamped to [0,1].
// The sequences are given as n -> log(1/a_n), n -> log(1/b_n).
struct TransferResult {
    double bound = 0.0;
    double factor = 0.0;
};
TransferResult grid_transfer(const std::function<double(std::size_t)>& log_inv_a,
                             const std::function<double(std::size_t)>& log_inv_b, double grid_dim,
                             std::size_t n_max = 1000000);
TransferResult grid_transfer(const std::vector<double>& a, const std::vector<double>& b, double grid_dim);

// Finite-depth Cantor construction.
struct StageBlock {
    Rational left;
    Rational right;
    Rational nu;
    int level = 0;       // j
    bool tilde = false;  // J̃_j rather than J_j
    long parent = -1;    // index of J_{j-1} (for J̃) or of J̃_j (for J)
    long segment = -1;   // index into the level's free-segment list (J̃ only)

    Rational lambda() const { return right - left; }
};

struct StageLevel {
    std::size_t N = 0;  // length of the free segment
    std::size_t k = 0;  // refinement depth
    std::size_t d = 0;  // shift landing J̃_j on P(0, x0)
    std::size_t count = 0;
    double alpha = 0, beta = 0, gamma = 0, delta = 0;
    bool degenerate = false;
};

struct CantorStage {
    std::string map_id;
    Word x0_word;
    std::vector<StageLevel> levels;  // levels[0] describes J_0
    std::vector<std::vector<Word>> segments;  // per level: the admissible free segments S
    std::vector<StageBlock> blocks;  // J_0 first, then level by level
    std::vector<std::vector<std::size_t>> tilde_index;  // per level j >= 1
    std::vector<std::vector<std::size_t>> j_index;      // per level j >= 0
    double epsilon = 0.3;
    double entropy = 0.0;
    // Log-masses of the intermediate cylinders between consecutive levels.
    std::vector<std::pair<double, double>> intermediate;  // (log ν, log λ)
    double lambda_hypothesis = 0.0;  // largest Λ meeting the level-size inequality on this stage

    std::size_t depth() const { return levels.size() - 1; }
    Word word(std::size_t block) const;
};

struct StageOptions {
    double epsilon = 0.3;
    bool keep_intermediate = true;
};

CantorStage build_cantor_stage(const MapModel& map, const TargetPoint& x0, const Schedule& sched,
                               const std::vector<std::size_t>& level_sizes, const StageOptions& opts = {});

struct StageCheck {
    std::size_t nesting_violations = 0;
    std::size_t ratio_violations = 0;
    std::vector<Rational> level_sums;  // Σ ν(J_j) per level
    bool sums_exact_one = true;
};
StageCheck check_stage(const MapModel& map, const CantorStage& stage);

double stage_cantor_lambda(const CantorStage& stage);

nlohmann::json to_json(const CantorStage& stage, std::size_t max_blocks = 100000);

struct FrostmanResult {
    double gamma = 0.0;
    double cap = 1e3;
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    std::size_t blocks = 0;
};
nlohmann::json to_json(const FrostmanResult& f);

FrostmanResult frostman_exponent(const CantorStage& stage, double cap = 1e3);

// Grid regularity probes.
struct ProbeRow {
    std::size_t k = 0;
    std::size_t level = 0;  // n(k)
    double ball = 0.0;      // λ(B_k)
    double cover = 0.0;     // λ of the union of level-n blocks meeting B_k
    double ratio = 0.0;
};

struct Ball1D {
    Rational center;
    Rational radius;
};

// Interval grid of cylinders of a finite-partition map.
std::vector<ProbeRow> grid_regularity_probe(const MapModel& map, const std::vector<Ball1D>& balls);
// Default ball family: pseudo-random centres, radii 0.3 * 2^{-k} (1 + u).
std::vector<Ball1D> default_balls(std::size_t count, std::uint64_t seed);
// Product grid on the unit square cut at x = a and y = b; ball k is the disc of
// diameter (1-b)^k inscribed in the top-left corner square.
std::vector<ProbeRow> rectangle_grid_probe(double a, double b, std::size_t k_max);

nlohmann::json to_json(const std::vector<ProbeRow>& rows);

}  // namespace qrec
