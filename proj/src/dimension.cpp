#include "qrec/dimension.hpp"

#include "qrec/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

nlohmann::json to_json(const DimensionBound& b) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"formula", b.formula},
            {"grid_lower", opt(b.grid_lower)},
            {"hausdorff_lower", opt(b.hausdorff_lower)},
            {"upper", opt(b.upper)},
            {"inputs", b.inputs},
            {"notes", b.notes}};
}

DimensionBound bound_radii_lower(double h, double delta_upper, double ell_upper, double tau_upper, double log_beta) {
    require(h > 0, "entropy h must be positive");
    require(log_beta > 0, "log beta must be positive");
    require(delta_upper >= 0 && ell_upper >= 0 && tau_upper >= 0, "delta, ell and tau must be non-negative");
    DimensionBound b;
    b.formula = "radii_lower";
    b.inputs = {{"h", h}, {"delta_upper", delta_upper}, {"ell_upper", ell_upper}, {"tau_upper", tau_upper},
                {"log_beta", log_beta}};
    const double g = h / (h + delta_upper * ell_upper);
    b.grid_lower = g;
    const double factor = 1.0 - tau_upper * delta_upper * ell_upper * ell_upper / (h * h * log_beta);
    b.hausdorff_lower = g * std::max(0.0, factor);
    b.notes.push_back("correction factor evaluated with ell_upper squared");
    return b;
}

DimensionBound bound_doubling(double delta_upper, double ell_upper, double s, double log_beta) {
    require(s > 0, "Ahlfors exponent s must be positive");
    require(log_beta > 0, "log beta must be positive");
    require(delta_upper >= 0 && ell_upper >= 0, "delta and ell must be non-negative");
    DimensionBound b;
    b.formula = "doubling";
    b.inputs = {{"delta_upper", delta_upper}, {"ell_upper", ell_upper}, {"s", s}, {"log_beta", log_beta}};
    b.hausdorff_lower = clamp01(1.0 - delta_upper * ell_upper / (s * log_beta));
    return b;
}

DimensionBound bound_code_lower(double h, double L_upper) {
    require(h > 0, "entropy h must be positive");
    require(L_upper >= 0, "L must be non-negative");
    DimensionBound b;
    b.formula = "code_lower";
    b.inputs = {{"h", h}, {"L_upper", L_upper}};
    b.grid_lower = std::isinf(L_upper) ? 0.0 : h / (h + L_upper);
    b.hausdorff_lower = b.grid_lower;
    return b;
}

DimensionBound bound_code_w(double w_upper) {
    require(w_upper >= 0, "w must be non-negative");
    DimensionBound b;
    b.formula = "code_w";
    b.inputs = {{"w_upper", w_upper}};
    b.grid_lower = std::isinf(w_upper) ? 0.0 : 1.0 / (1.0 + w_upper);
    b.hausdorff_lower = b.grid_lower;
    return b;
}

DimensionBound bound_upper_code(int D, double h, double L_lower) {
    require(D >= 2, "partition cardinality D must be >= 2");
    require(h > 0, "entropy h must be positive");
    require(L_lower >= 0, "L must be non-negative");
    DimensionBound b;
    b.formula = "upper_code";
    b.inputs = {{"D", D}, {"h", h}, {"L_lower", L_lower}};
    b.upper = std::min(1.0, std::log(static_cast<double>(D)) / (h + L_lower));
    return b;
}

DimensionBound bound_upper_radii(int D, double h, double delta_lower, double ell_lower) {
    require(D >= 2, "partition cardinality D must be >= 2");
    require(h > 0, "entropy h must be positive");
    require(delta_lower >= 0 && ell_lower >= 0, "delta and ell must be non-negative");
    DimensionBound b;
    b.formula = "upper_radii";
    b.inputs = {{"D", D}, {"h", h}, {"delta_lower", delta_lower}, {"ell_lower", ell_lower}};
    b.upper = std::min(1.0, std::log(static_cast<double>(D)) / (h + delta_lower * ell_lower));
    return b;
}

DimensionBound bound_hoeffding(const std::vector<double>& p, double L_lower) {
    require(p.size() >= 2, "need at least two probabilities");
    require(L_lower >= 0, "L must be non-negative");
    double sum = 0.0, h = 0.0, pmax = 0.0, pmin = kInf;
    for (double v : p) {
        require(v > 0, "every p_i must be positive (ratio max p / min p undefined)");
        sum += v;
        h -= v * std::log(v);
        pmax = std::max(pmax, v);
        pmin = std::min(pmin, v);
    }
    require(std::abs(sum - 1.0) < 1e-12, "probabilities must sum to 1");
    const double R = std::log(pmax / pmin);
    const double L = L_lower;
    const double root = std::sqrt((h + L) * (h + L) + 2.0 * L * R * R);
    DimensionBound b;
    b.formula = "hoeffding";
    b.inputs = {{"h", h}, {"L_lower", L}, {"log_ratio", R}};
    b.upper = (root + h - L) / (root + h + L);
    return b;
}

double cantor_lambda(double a, double b, double c, double delta, const std::vector<double>& level_sizes) {
    require(!level_sizes.empty(), "need at least one level size");
    double total = 0.0;
    for (double n : level_sizes) {
        require(n > 0, "level sizes must be positive");
        total += n;
    }
    const double limit = static_cast<double>(level_sizes.size()) / total;
    require(a > 0 && c >= 0, "need a > 0 and c >= 0");
    require(delta > 0 && delta <= 1, "need 0 < delta <= 1");
    return b / (a + c) - std::log(1.0 / delta) / (a + c) * limit;
}

double cantor_lambda(double a, double b, double c, double delta, const std::function<double(std::size_t)>& level_size,
                     std::size_t j_max) {
    require(a > 0 && c >= 0, "need a > 0 and c >= 0");
    require(delta > 0 && delta <= 1, "need 0 < delta <= 1");
    long double total = 0.0L;
    for (std::size_t j = 1; j <= j_max; ++j) total += level_size(j);
    const double limit = static_cast<double>(j_max) / static_cast<double>(total);
    return b / (a + c) - std::log(1.0 / delta) / (a + c) * limit;
}

TransferResult grid_transfer(const std::function<double(std::size_t)>& log_inv_a,
                             const std::function<double(std::size_t)>& log_inv_b, double grid_dim, std::size_t n_max) {
    require(grid_dim >= 0 && grid_dim <= 1, "grid dimension must lie in [0,1]");
    require(n_max >= 4, "need at least four levels");
    double factor = 0.0;
    const std::size_t step = std::max<std::size_t>(1, n_max / 4000);
    for (std::size_t n = n_max / 2; n <= n_max; n += step) {
        double den = log_inv_b(n - 1);
        require(den > 0, "b_n must be < 1");
        factor = std::max(factor, log_inv_a(n) / den);
    }
    return {clamp01(1.0 - (1.0 - grid_dim) * factor), factor};
}

TransferResult grid_transfer(const std::vector<double>& a, const std::vector<double>& b, double grid_dim) {
    require(a.size() == b.size() && a.size() >= 4, "need matching sequences of length >= 4");
    for (std::size_t n = 0; n < a.size(); ++n)
        require(a[n] > 0 && a[n] <= b[n] && b[n] < 1, "need 0 < a_n <= b_n < 1");
    return grid_transfer([&](std::size_t n) { return -std::log(a[n]); }, [&](std::size_t n) { return -std::log(b[n]); },
                         grid_dim, a.size() - 1);
}

}  // namespace qrec
