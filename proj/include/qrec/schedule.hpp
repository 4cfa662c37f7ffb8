#pragma once

#include "json.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace qrec {

enum class ScheduleKind {
    RadiiPower,       // r_n = n^{-1/alpha}
    RadiiExp,         // r_n = e^{-kappa n}
    RadiiConst,       // r_n = r
    DepthLogFloor,    // t_n = floor(log_base n)
    DepthPowerFloor,  // t_n = floor(n^kappa)
    DepthConst,       // t_n = t
    CustomRadii,
    CustomDepths,
};

std::string to_string(ScheduleKind kind);

struct Rates {
    double upper = 0.0;
    double lower = 0.0;
    bool closed_form = true;
};

class Schedule {
public:
    static Schedule radii_power(double alpha);
    static Schedule radii_exp(double kappa);
    static Schedule radii_const(double r);
    static Schedule depth_log_floor(double base = 2.718281828459045);
    static Schedule depth_power_floor(double kappa);
    static Schedule depth_const(std::size_t t);
    // Tables are indexed from n = 1; the last entry repeats beyond the table.
    static Schedule custom_radii(std::vector<double> radii);
    static Schedule custom_depths(std::vector<std::size_t> depths);

    ScheduleKind kind() const { return kind_; }
    bool is_radii() const;
    bool is_depth() const { return !is_radii(); }
    double parameter() const { return param_; }
    const std::vector<double>& radii_table() const { return radii_; }
    const std::vector<std::size_t>& depth_table() const { return depths_; }

    // n >= 1
    double radius(std::size_t n) const;
    std::size_t depth(std::size_t n) const;
    // r_1 .. r_n
    std::vector<double> radii(std::size_t n) const;
    // -log r_n without underflow
    double log_inverse_radius(std::size_t n) const;

    // lim sup / lim inf of (1/n) log(1/r_n)
    Rates radius_rates() const;
    // lim sup / lim inf of t_n / n
    Rates depth_rates() const;

    nlohmann::json to_json() const;
    static Schedule from_json(const nlohmann::json& j);
    bool operator==(const Schedule& o) const = default;

private:
    ScheduleKind kind_ = ScheduleKind::RadiiConst;
    double param_ = 1.0;
    std::vector<double> radii_;
    std::vector<std::size_t> depths_;
};

}  // namespace qrec
