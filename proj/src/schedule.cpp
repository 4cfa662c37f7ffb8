#include "qrec/schedule.hpp"

#include "qrec/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// floor(log_b n) without rounding surprises at exact powers.
std::size_t floor_log(double base, std::size_t n) {
    long double b = base;
    auto t = static_cast<long long>(std::floor(std::log(static_cast<long double>(n)) / std::log(b)));
    if (t < 0) t = 0;
    while (t > 0 && std::pow(b, static_cast<long double>(t)) > static_cast<long double>(n)) --t;
    while (std::pow(b, static_cast<long double>(t + 1)) <= static_cast<long double>(n)) ++t;
    return static_cast<std::size_t>(t);
}

// floor(n^kappa), saturating.
std::size_t floor_power(double kappa, std::size_t n) {
    long double v = std::pow(static_cast<long double>(n), static_cast<long double>(kappa));
    if (v >= 1e18L) return static_cast<std::size_t>(1e18);
    auto t = static_cast<std::size_t>(std::floor(v));
    // correct off-by-one from pow rounding, e.g. integer kappa
    const long double nn = static_cast<long double>(n);
    while (t > 0 && std::pow(static_cast<long double>(t), 1.0L / kappa) > nn * (1 + 1e-15L)) --t;
    while (std::pow(static_cast<long double>(t + 1), 1.0L / kappa) <= nn * (1 - 1e-15L)) ++t;
    return t;
}

}  // namespace

std::string to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::RadiiPower: return "radii_power";
        case ScheduleKind::RadiiExp: return "radii_exp";
        case ScheduleKind::RadiiConst: return "radii_const";
        case ScheduleKind::DepthLogFloor: return "depth_log_floor";
        case ScheduleKind::DepthPowerFloor: return "depth_power_floor";
        case ScheduleKind::DepthConst: return "depth_const";
        case ScheduleKind::CustomRadii: return "custom_radii";
        case ScheduleKind::CustomDepths: return "custom_depths";
    }
    return "unknown";
}

Schedule Schedule::radii_power(double alpha) {
    if (!(alpha > 0)) throw InvalidArgument("RadiiPower needs alpha > 0");
    Schedule s;
    s.kind_ = ScheduleKind::RadiiPower;
    s.param_ = alpha;
    return s;
}

Schedule Schedule::radii_exp(double kappa) {
    if (!(kappa > 0)) throw InvalidArgument("RadiiExp needs kappa > 0");
    Schedule s;
    s.kind_ = ScheduleKind::RadiiExp;
    s.param_ = kappa;
    return s;
}

Schedule Schedule::radii_const(double r) {
    if (!(r > 0)) throw InvalidArgument("RadiiConst needs r > 0");
    Schedule s;
    s.kind_ = ScheduleKind::RadiiConst;
    s.param_ = r;
    return s;
}

Schedule Schedule::depth_log_floor(double base) {
    if (!(base > 1)) throw InvalidArgument("DepthLogFloor needs base > 1");
    Schedule s;
    s.kind_ = ScheduleKind::DepthLogFloor;
    s.param_ = base;
    return s;
}

Schedule Schedule::depth_power_floor(double kappa) {
    if (!(kappa > 0)) throw InvalidArgument("DepthPowerFloor needs kappa > 0");
    Schedule s;
    s.kind_ = ScheduleKind::DepthPowerFloor;
    s.param_ = kappa;
    return s;
}

Schedule Schedule::depth_const(std::size_t t) {
    Schedule s;
    s.kind_ = ScheduleKind::DepthConst;
    s.param_ = static_cast<double>(t);
    return s;
}

Schedule Schedule::custom_radii(std::vector<double> radii) {
    if (radii.empty()) throw InvalidArgument("empty radii table");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0)) throw InvalidArgument("radii must be positive");
        if (i > 0 && radii[i] > radii[i - 1]) throw InvalidArgument("radii must be non-increasing");
    }
    Schedule s;
    s.kind_ = ScheduleKind::CustomRadii;
    s.radii_ = std::move(radii);
    return s;
}

Schedule Schedule::custom_depths(std::vector<std::size_t> depths) {
    if (depths.empty()) throw InvalidArgument("empty depth table");
    for (std::size_t i = 1; i < depths.size(); ++i)
        if (depths[i] < depths[i - 1]) throw InvalidArgument("depths must be non-decreasing");
    Schedule s;
    s.kind_ = ScheduleKind::CustomDepths;
    s.depths_ = std::move(depths);
    return s;
}

bool Schedule::is_radii() const {
    return kind_ == ScheduleKind::RadiiPower || kind_ == ScheduleKind::RadiiExp ||
           kind_ == ScheduleKind::RadiiConst || kind_ == ScheduleKind::CustomRadii;
}

double Schedule::radius(std::size_t n) const {
    if (n == 0) throw InvalidArgument("schedules are indexed from n = 1");
    switch (kind_) {
        case ScheduleKind::RadiiPower: return std::pow(static_cast<double>(n), -1.0 / param_);
        case ScheduleKind::RadiiExp: return std::exp(-param_ * static_cast<double>(n));
        case ScheduleKind::RadiiConst: return param_;
        case ScheduleKind::CustomRadii: return radii_[std::min(n, radii_.size()) - 1];
        default: throw InvalidArgument("depth schedule has no radii");
    }
}

double Schedule::log_inverse_radius(std::size_t n) const {
    if (kind_ == ScheduleKind::RadiiExp) return param_ * static_cast<double>(n);
    if (kind_ == ScheduleKind::RadiiPower) return std::log(static_cast<double>(n)) / param_;
    return -std::log(radius(n));
}

std::size_t Schedule::depth(std::size_t n) const {
    if (n == 0) throw InvalidArgument("schedules are indexed from n = 1");
    switch (kind_) {
        case ScheduleKind::DepthLogFloor: return floor_log(param_, n);
        case ScheduleKind::DepthPowerFloor: return floor_power(param_, n);
        case ScheduleKind::DepthConst: return static_cast<std::size_t>(param_);
        case ScheduleKind::CustomDepths: return depths_[std::min(n, depths_.size()) - 1];
        default: throw InvalidArgument("radii schedule has no depths");
    }
}

std::vector<double> Schedule::radii(std::size_t n) const {
    std::vector<double> out(n);
    for (std::size_t k = 1; k <= n; ++k) out[k - 1] = radius(k);
    return out;
}

Rates Schedule::radius_rates() const {
    switch (kind_) {
        case ScheduleKind::RadiiPower:
        case ScheduleKind::RadiiConst: return {0.0, 0.0, true};
        case ScheduleKind::RadiiExp: return {param_, param_, true};
        case ScheduleKind::CustomRadii: {
            // A finite table is constant past its end, so the rate is 0; report the
            // tail behaviour of the table itself as an estimate.
            const std::size_t n = radii_.size();
            double hi = 0.0, lo = kInf;
            for (std::size_t k = std::max<std::size_t>(1, n / 2); k <= n; ++k) {
                double v = -std::log(radii_[k - 1]) / static_cast<double>(k);
                hi = std::max(hi, v);
                lo = std::min(lo, v);
            }
            return {hi, lo, false};
        }
        default: throw InvalidArgument("depth schedule has no radius rates");
    }
}

Rates Schedule::depth_rates() const {
    switch (kind_) {
        case ScheduleKind::DepthLogFloor:
        case ScheduleKind::DepthConst: return {0.0, 0.0, true};
        case ScheduleKind::DepthPowerFloor:
            if (param_ < 1) return {0.0, 0.0, true};
            if (param_ == 1) return {1.0, 1.0, true};
            return {kInf, kInf, true};
        case ScheduleKind::CustomDepths: {
            const std::size_t n = depths_.size();
            double hi = 0.0, lo = kInf;
            for (std::size_t k = std::max<std::size_t>(1, n / 2); k <= n; ++k) {
                double v = static_cast<double>(depths_[k - 1]) / static_cast<double>(k);
                hi = std::max(hi, v);
                lo = std::min(lo, v);
            }
            return {hi, lo, false};
        }
        default: throw InvalidArgument("radii schedule has no depth rates");
    }
}

nlohmann::json Schedule::to_json() const {
    nlohmann::json j{{"kind", to_string(kind_)}};
    switch (kind_) {
        case ScheduleKind::RadiiPower: j["alpha"] = param_; break;
        case ScheduleKind::RadiiExp:
        case ScheduleKind::DepthPowerFloor: j["kappa"] = param_; break;
        case ScheduleKind::RadiiConst: j["r"] = param_; break;
        case ScheduleKind::DepthLogFloor: j["base"] = param_; break;
        case ScheduleKind::DepthConst: j["t"] = static_cast<std::size_t>(param_); break;
        case ScheduleKind::CustomRadii: j["values"] = radii_; break;
        case ScheduleKind::CustomDepths: j["values"] = depths_; break;
    }
    return j;
}

Schedule Schedule::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) throw InvalidArgument("schedule needs a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    auto num = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number())
            throw InvalidArgument("schedule '" + kind + "' needs numeric '" + key + "'");
        return j.at(key).get<double>();
    };
    if (kind == "radii_power") return radii_power(num("alpha"));
    if (kind == "radii_exp") return radii_exp(num("kappa"));
    if (kind == "radii_const") return radii_const(num("r"));
    if (kind == "depth_log_floor") return depth_log_floor(j.contains("base") ? num("base") : std::exp(1.0));
    if (kind == "depth_power_floor") return depth_power_floor(num("kappa"));
    if (kind == "depth_const") {
        double t = num("t");
        if (t < 0 || t != std::floor(t)) throw InvalidArgument("depth_const needs a non-negative integer t");
        return depth_const(static_cast<std::size_t>(t));
    }
    if (kind == "custom_radii") return custom_radii(j.at("values").get<std::vector<double>>());
    if (kind == "custom_depths") return custom_depths(j.at("values").get<std::vector<std::size_t>>());
    throw InvalidArgument("unknown schedule kind '" + kind + "'");
}

}  // namespace qrec
