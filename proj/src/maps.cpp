#include "qrec/maps.hpp"

#include "qrec/errors.hpp"
#include "qrec/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qrec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Integer floor_of(const Rational& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

Integer ceil_of(const Rational& q) {
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

Digit to_digit(const Integer& z) {
    if (!z.fits_slong_p()) throw NumericalError("digit does not fit in 64 bits");
    return z.get_si();
}

void require_unit(const Rational& x) {
    if (x < 0 || x >= 1) throw InvalidArgument("point outside [0,1): " + to_string(x));
}

void require_unit(double x) {
    if (!(x >= 0.0 && x < 1.0)) throw InvalidArgument("point outside [0,1): " + std::to_string(x));
}

std::string inadmissible(Digit from, Digit to) {
    return "digit not admissible: transition " + std::to_string(from) + "->" + std::to_string(to);
}

}  // namespace

std::string to_string(MapKind kind) {
    switch (kind) {
        case MapKind::DAryShift: return "dary";
        case MapKind::MarkovLinear: return "markov";
        case MapKind::Gauss: return "gauss";
        case MapKind::Blaschke: return "blaschke";
    }
    return "unknown";
}

MapModel MapModel::dary_shift(int digits) {
    if (digits < 2) throw InvalidArgument("DAryShift needs D >= 2");
    MapModel m;
    m.kind_ = MapKind::DAryShift;
    Rational u(1, digits);
    m.p_.assign(digits, u);
    m.m_.assign(digits, std::vector<Rational>(digits, u));
    m.build_layout();
    m.beta_ = digits;
    return m;
}

MapModel MapModel::bernoulli(std::vector<Rational> p) {
    Matrix rows(p.size(), p);
    return markov_linear(std::move(rows), std::move(p));
}

MapModel MapModel::markov_linear(Matrix transition) {
    auto p = stationary_vector(transition);
    return markov_linear(std::move(transition), std::move(p));
}

MapModel MapModel::markov_linear(Matrix transition, std::vector<Rational> stationary) {
    const std::size_t d = transition.size();
    if (d < 2) throw InvalidArgument("MarkovLinear needs at least two states");
    if (stationary.size() != d) throw InvalidArgument("stationary vector length does not match the matrix");
    Rational psum = 0;
    for (std::size_t i = 0; i < d; ++i) {
        if (transition[i].size() != d) throw InvalidArgument("transition matrix is not square");
        Rational row = 0;
        for (const auto& v : transition[i]) {
            if (v < 0) throw InvalidArgument("negative transition probability");
            row += v;
        }
        if (row != 1) throw InvalidArgument("row " + std::to_string(i) + " does not sum to 1");
        if (stationary[i] < 0) throw InvalidArgument("negative stationary weight");
        psum += stationary[i];
    }
    if (psum != 1) throw InvalidArgument("stationary vector does not sum to 1");
    for (std::size_t j = 0; j < d; ++j) {
        Rational s = 0;
        for (std::size_t i = 0; i < d; ++i) s += stationary[i] * transition[i][j];
        if (s != stationary[j]) throw InvalidArgument("p is not stationary for M (column " + std::to_string(j) + ")");
    }

    MapModel m;
    m.kind_ = MapKind::MarkovLinear;
    m.m_ = std::move(transition);
    m.p_ = std::move(stationary);
    m.build_layout();

    // Smallest slope over branches of positive length; fall back to n-step
    // products when a single step does not expand.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (m.slope_[i][j] > 0) best = std::min(best, m.slope_[i][j].get_d());
    if (best <= 1.0) {
        double found = 0.0;
        for (std::size_t n = 2; n <= 2 * d && found <= 1.0; ++n) {
            // minimum of the product of slopes over admissible paths of n steps
            std::vector<double> cur(d, 0.0);
            for (std::size_t i = 0; i < d; ++i) cur[i] = m.p_[i] > 0 ? 0.0 : std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < n; ++k) {
                std::vector<double> nxt(d, std::numeric_limits<double>::infinity());
                for (std::size_t i = 0; i < d; ++i) {
                    if (!std::isfinite(cur[i])) continue;
                    for (std::size_t j = 0; j < d; ++j)
                        if (m.slope_[i][j] > 0)
                            nxt[j] = std::min(nxt[j], cur[i] + std::log(m.slope_[i][j].get_d()));
                }
                cur = nxt;
            }
            double lo = *std::min_element(cur.begin(), cur.end());
            found = std::exp(lo / static_cast<double>(n));
        }
        if (found <= 1.0) throw InvalidArgument("map is not expanding: some admissible cycle has slope 1");
        best = found;
    }
    m.beta_ = best;
    return m;
}

MapModel MapModel::gauss() {
    MapModel m;
    m.kind_ = MapKind::Gauss;
    m.beta_ = 2.0;  // |(phi^2)'| >= 4
    return m;
}

MapModel MapModel::blaschke(std::vector<std::complex<double>> zeros) {
    if (zeros.size() < 2) throw InvalidArgument("Blaschke product needs at least two zeros to expand");
    bool has_origin = false;
    double beta = 0.0;
    for (const auto& a : zeros) {
        double r = std::abs(a);
        if (!(r < 1.0)) throw InvalidArgument("Blaschke zero outside the open unit disk");
        if (r == 0.0) has_origin = true;
        beta += (1.0 - r) / (1.0 + r);
    }
    if (!has_origin) throw InvalidArgument("Blaschke product must vanish at 0");
    if (beta <= 1.0) throw InvalidArgument("Blaschke product is not expanding: certified bound <= 1");
    MapModel m;
    m.kind_ = MapKind::Blaschke;
    m.zeros_ = std::move(zeros);
    m.beta_ = beta;
    const std::size_t n = m.zeros_.size();
    m.cuts_.assign(n + 1, 0.0);
    m.cuts_[n] = 1.0;
    for (std::size_t j = 1; j < n; ++j) {
        double lo = m.cuts_[j - 1], hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
            double mid = 0.5 * (lo + hi);
            if (m.blaschke_lift(mid) < static_cast<double>(j))
                lo = mid;
            else
                hi = mid;
        }
        m.cuts_[j] = hi;
    }
    return m;
}

void MapModel::build_layout() {
    const std::size_t d = p_.size();
    left_.assign(d + 1, 0);
    for (std::size_t i = 0; i < d; ++i) left_[i + 1] = left_[i] + p_[i];
    sub_left_.assign(d, std::vector<Rational>(d + 1, 0));
    slope_.assign(d, std::vector<Rational>(d, 0));
    for (std::size_t i = 0; i < d; ++i) {
        sub_left_[i][0] = left_[i];
        for (std::size_t j = 0; j < d; ++j) {
            Rational len = p_[i] * m_[i][j];
            sub_left_[i][j + 1] = sub_left_[i][j] + len;
            if (len > 0) slope_[i][j] = p_[j] / len;
        }
    }
}

std::optional<std::size_t> MapModel::branch_count() const {
    switch (kind_) {
        case MapKind::Gauss: return std::nullopt;
        case MapKind::Blaschke: return zeros_.size();
        default: return p_.size();
    }
}

std::string MapModel::id() const {
    std::ostringstream os;
    switch (kind_) {
        case MapKind::DAryShift: os << "dary(" << p_.size() << ")"; break;
        case MapKind::MarkovLinear:
            os << "markov(";
            for (std::size_t i = 0; i < m_.size(); ++i) {
                os << (i ? ";" : "");
                for (std::size_t j = 0; j < m_.size(); ++j) os << (j ? "," : "") << to_string(m_[i][j]);
            }
            os << ")";
            break;
        case MapKind::Gauss: os << "gauss"; break;
        case MapKind::Blaschke:
            os << "blaschke(";
            for (std::size_t k = 0; k < zeros_.size(); ++k)
                os << (k ? "," : "") << zeros_[k].real() << (zeros_[k].imag() >= 0 ? "+" : "") << zeros_[k].imag() << "i";
            os << ")";
            break;
    }
    return os.str();
}

Interval MapModel::block(Digit d) const {
    switch (kind_) {
        case MapKind::Gauss:
            if (d < 1) throw InvalidArgument("Gauss digits start at 1");
            return {Rational(1, d + 1), Rational(1, d)};
        case MapKind::Blaschke:
            if (d < 0 || static_cast<std::size_t>(d) >= zeros_.size()) throw InvalidArgument("digit out of range");
            return {from_double(cuts_[d]), from_double(cuts_[d + 1])};
        default:
            if (d < 0 || static_cast<std::size_t>(d) >= p_.size()) throw InvalidArgument("digit out of range");
            return {left_[d], left_[d + 1]};
    }
}

std::vector<Interval> MapModel::partition0(std::size_t limit) const {
    std::vector<Interval> out;
    if (kind_ == MapKind::Gauss) {
        for (std::size_t n = 1; n <= limit; ++n) out.push_back(block(static_cast<Digit>(n)));
        return out;
    }
    std::size_t n = kind_ == MapKind::Blaschke ? zeros_.size() : p_.size();
    for (std::size_t d = 0; d < n; ++d) out.push_back(block(static_cast<Digit>(d)));
    return out;
}

bool MapModel::admissible(Digit from, Digit to) const {
    switch (kind_) {
        case MapKind::Gauss: return from >= 1 && to >= 1;
        case MapKind::Blaschke: {
            auto n = static_cast<Digit>(zeros_.size());
            return from >= 0 && from < n && to >= 0 && to < n;
        }
        default: {
            auto n = static_cast<Digit>(p_.size());
            if (from < 0 || from >= n || to < 0 || to >= n) return false;
            return p_[from] > 0 && m_[from][to] > 0 && p_[to] > 0;
        }
    }
}

bool is_primitive(const Matrix& m, std::size_t* exponent) {
    const std::size_t d = m.size();
    std::vector<std::vector<char>> a(d, std::vector<char>(d)), cur;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a[i][j] = m[i][j] > 0;
    cur = a;
    const std::size_t bound = (d - 1) * (d - 1) + 1;  // Wielandt
    for (std::size_t n = 1; n <= bound; ++n) {
        bool positive = true;
        for (const auto& row : cur)
            for (char v : row) positive = positive && v;
        if (positive) {
            if (exponent) *exponent = n;
            return true;
        }
        std::vector<std::vector<char>> nxt(d, std::vector<char>(d, 0));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k)
                if (cur[i][k])
                    for (std::size_t j = 0; j < d; ++j) nxt[i][j] |= a[k][j];
        cur = std::move(nxt);
    }
    return false;
}

std::optional<std::size_t> MapModel::mixing_exponent() const {
    if (!is_linear()) return std::nullopt;
    std::size_t n = 0;
    if (!is_primitive(m_, &n)) return std::nullopt;
    return n;
}

Digit MapModel::digit_of(const Rational& x, Side side) const {
    switch (kind_) {
        case MapKind::DAryShift: {
            const auto d = static_cast<Digit>(p_.size());
            if (side == Side::Right) {
                require_unit(x);
                return to_digit(floor_of(x * d));
            }
            if (x <= 0 || x > 1) throw InvalidArgument("point outside (0,1]: " + to_string(x));
            return to_digit(ceil_of(x * d)) - 1;
        }
        case MapKind::MarkovLinear: {
            const std::size_t d = p_.size();
            if (side == Side::Right) {
                require_unit(x);
                for (std::size_t i = 0; i < d; ++i)
                    if (x < left_[i + 1]) return static_cast<Digit>(i);
            } else {
                if (x <= 0 || x > 1) throw InvalidArgument("point outside (0,1]: " + to_string(x));
                for (std::size_t i = 0; i < d; ++i)
                    if (x > left_[i] && x <= left_[i + 1]) return static_cast<Digit>(i);
            }
            throw NumericalError("point not located in any block");
        }
        case MapKind::Gauss: {
            if (x <= 0 || x > 1) throw InvalidArgument("Gauss point outside (0,1]: " + to_string(x));
            Rational inv = 1 / x;
            if (side == Side::Left) return to_digit(floor_of(inv));
            Digit n = to_digit(ceil_of(inv)) - 1;
            if (n < 1) throw InvalidArgument("no block to the right of 1");
            return n;
        }
        case MapKind::Blaschke: return digit_of(x.get_d());
    }
    return 0;
}

Digit MapModel::digit_of(double x) const {
    switch (kind_) {
        case MapKind::DAryShift: {
            require_unit(x);
            auto d = static_cast<Digit>(std::floor(x * static_cast<double>(p_.size())));
            return std::min<Digit>(d, static_cast<Digit>(p_.size()) - 1);
        }
        case MapKind::MarkovLinear: return digit_of(from_double(x));
        case MapKind::Gauss: {
            if (!(x > 0.0 && x <= 1.0)) throw InvalidArgument("Gauss point outside (0,1]");
            return static_cast<Digit>(std::floor(1.0 / x));
        }
        case MapKind::Blaschke: {
            require_unit(x);
            auto d = static_cast<Digit>(std::floor(blaschke_lift(x)));
            return std::clamp<Digit>(d, 0, static_cast<Digit>(zeros_.size()) - 1);
        }
    }
    return 0;
}

bool MapModel::on_boundary(const Rational& x) const {
    switch (kind_) {
        case MapKind::DAryShift: return Rational(x * static_cast<long>(p_.size())).get_den() == 1;
        case MapKind::MarkovLinear: return std::find(left_.begin(), left_.end(), x) != left_.end();
        case MapKind::Gauss: return x == 0 || Rational(1 / x).get_den() == 1;
        case MapKind::Blaschke: return on_boundary(x.get_d());
    }
    return false;
}

bool MapModel::on_boundary(double x) const {
    switch (kind_) {
        case MapKind::DAryShift: {
            double y = x * static_cast<double>(p_.size());
            return y == std::floor(y);
        }
        case MapKind::MarkovLinear: return on_boundary(from_double(x));
        case MapKind::Gauss: {
            if (x == 0.0) return true;
            double inv = 1.0 / x;
            return inv == std::floor(inv);
        }
        case MapKind::Blaschke: return std::find(cuts_.begin(), cuts_.end(), x) != cuts_.end();
    }
    return false;
}

double MapModel::blaschke_lift(double t) const {
    // B normalised so that B(1) = 1; arg(1 - a e^{-i theta}) stays in (-pi/2, pi/2).
    double s = static_cast<double>(zeros_.size()) * t;
    const std::complex<double> z(std::cos(kTwoPi * t), -std::sin(kTwoPi * t));
    for (const auto& a : zeros_) {
        if (a == 0.0) continue;
        s += (std::arg(1.0 - a * z) - std::arg(1.0 - a)) / std::numbers::pi;
    }
    return s;
}

double MapModel::blaschke_lift_derivative(double t) const {
    const std::complex<double> z(std::cos(kTwoPi * t), std::sin(kTwoPi * t));
    double s = 0.0;
    for (const auto& a : zeros_) s += (1.0 - std::norm(a)) / std::norm(z - a);
    return s;
}

StepResult<Rational> evaluate(const MapModel& map, const Rational& x) {
    switch (map.kind()) {
        case MapKind::DAryShift: {
            require_unit(x);
            Rational y = x * map.digits();
            y -= Rational(floor_of(y));
            return {y, map.on_boundary(x) ? StepStatus::BoundaryPoint : StepStatus::Ok};
        }
        case MapKind::MarkovLinear: {
            auto [y, side] = evaluate_sided(map, x, Side::Right);
            (void)side;
            return {y, map.on_boundary(x) ? StepStatus::BoundaryPoint : StepStatus::Ok};
        }
        case MapKind::Gauss: {
            if (x == 0) return {Rational(0), StepStatus::OrbitEnded};
            if (x < 0 || x > 1) throw InvalidArgument("Gauss point outside [0,1]: " + to_string(x));
            Rational inv = 1 / x;
            Rational y = inv - Rational(floor_of(inv));
            return {y, map.on_boundary(x) ? StepStatus::BoundaryPoint : StepStatus::Ok};
        }
        case MapKind::Blaschke: {
            auto r = evaluate(map, x.get_d());
            return {from_double(r.value), r.status};
        }
    }
    return {x};
}

StepResult<double> evaluate(const MapModel& map, double x) {
    switch (map.kind()) {
        case MapKind::DAryShift: {
            require_unit(x);
            double y = x * map.digits();
            double f = std::floor(y);
            return {y - f, y == f ? StepStatus::BoundaryPoint : StepStatus::Ok};
        }
        case MapKind::MarkovLinear: {
            auto r = evaluate(map, from_double(x));
            return {r.value.get_d(), r.status};
        }
        case MapKind::Gauss: {
            if (x == 0.0) return {0.0, StepStatus::OrbitEnded};
            double inv = 1.0 / x;
            double f = std::floor(inv);
            return {inv - f, inv == f ? StepStatus::BoundaryPoint : StepStatus::Ok};
        }
        case MapKind::Blaschke: {
            require_unit(x);
            double s = map.blaschke_lift(x);
            double y = s - std::floor(s);
            if (y >= 1.0) y = 0.0;
            return {y, map.on_boundary(x) ? StepStatus::BoundaryPoint : StepStatus::Ok};
        }
    }
    return {x};
}

std::pair<Rational, Side> evaluate_sided(const MapModel& map, const Rational& x, Side side) {
    switch (map.kind()) {
        case MapKind::DAryShift: {
            Digit d = map.digit_of(x, side);
            return {x * map.digits() - d, side};
        }
        case MapKind::MarkovLinear: {
            auto i = static_cast<std::size_t>(map.digit_of(x, side));
            const std::size_t n = static_cast<std::size_t>(map.digits());
            for (std::size_t j = 0; j < n; ++j) {
                if (map.slope(i, j) == 0) continue;
                const Rational& lo = map.sub_left(i, j);
                const Rational& hi = map.sub_left(i, j + 1);
                bool inside = side == Side::Right ? (x >= lo && x < hi) : (x > lo && x <= hi);
                if (inside) return {map.block_left(j) + (x - lo) * map.slope(i, j), side};
            }
            throw NumericalError("point not located in any sub-block");
        }
        case MapKind::Gauss: {
            if (x == 0) throw BoundaryError("orbit ended at 0", 0);
            Digit n = map.digit_of(x, side);
            return {1 / x - n, side == Side::Right ? Side::Left : Side::Right};
        }
        case MapKind::Blaschke: throw InvalidArgument("one-sided exact evaluation is not available for Blaschke maps");
    }
    return {x, side};
}

double log_derivative(const MapModel& map, double x) {
    // Gauss and D-ary slopes agree on both sides of every cut, so only Markov
    // chains reject boundary points.
    if (map.kind() == MapKind::MarkovLinear && map.on_boundary(x))
        throw BoundaryError("log_derivative at a boundary point", 0);
    switch (map.kind()) {
        case MapKind::DAryShift: return std::log(static_cast<double>(map.digits()));
        case MapKind::MarkovLinear: return log_derivative(map, from_double(x));
        case MapKind::Gauss:
            if (x <= 0.0) throw BoundaryError("log_derivative at 0", 0);
            return -2.0 * std::log(x);  // large but finite for tiny x
        case MapKind::Blaschke: return std::log(map.blaschke_lift_derivative(x));
    }
    return 0.0;
}

double log_derivative(const MapModel& map, const Rational& x) {
    if (map.kind() == MapKind::MarkovLinear) {
        if (map.on_boundary(x)) throw BoundaryError("log_derivative at a boundary point", 0);
        auto i = static_cast<std::size_t>(map.digit_of(x));
        for (std::size_t j = 0; j < static_cast<std::size_t>(map.digits()); ++j)
            if (map.slope(i, j) > 0 && x >= map.sub_left(i, j) && x < map.sub_left(i, j + 1))
                return log_of(map.slope(i, j));
        throw NumericalError("point not located in any sub-block");
    }
    if (map.kind() == MapKind::Gauss) {
        if (x <= 0) throw BoundaryError("log_derivative at 0", 0);
        return -2.0 * log_of(x);
    }
    return log_derivative(map, x.get_d());
}

Rational inverse_branch(const MapModel& map, Digit digit, const Rational& y) {
    switch (map.kind()) {
        case MapKind::DAryShift:
            require_unit(y);
            if (digit < 0 || digit >= map.digits()) throw InvalidArgument("digit not admissible: " + std::to_string(digit));
            return (digit + y) / map.digits();
        case MapKind::MarkovLinear: {
            require_unit(y);
            if (digit < 0 || digit >= map.digits()) throw InvalidArgument("digit not admissible: " + std::to_string(digit));
            Digit j = map.digit_of(y);
            if (!map.admissible(digit, j)) throw InvalidArgument(inadmissible(digit, j));
            auto i = static_cast<std::size_t>(digit);
            auto jj = static_cast<std::size_t>(j);
            return map.sub_left(i, jj) + (y - map.block_left(jj)) / map.slope(i, jj);
        }
        case MapKind::Gauss:
            require_unit(y);
            if (digit < 1) throw InvalidArgument("digit not admissible: " + std::to_string(digit));
            return 1 / (digit + y);
        case MapKind::Blaschke: return from_double(inverse_branch(map, digit, y.get_d()));
    }
    return y;
}

double inverse_branch(const MapModel& map, Digit digit, double y) {
    if (map.kind() != MapKind::Blaschke) {
        if (map.kind() == MapKind::DAryShift) {
            require_unit(y);
            if (digit < 0 || digit >= map.digits()) throw InvalidArgument("digit not admissible: " + std::to_string(digit));
            return (static_cast<double>(digit) + y) / map.digits();
        }
        if (map.kind() == MapKind::Gauss) {
            require_unit(y);
            if (digit < 1) throw InvalidArgument("digit not admissible: " + std::to_string(digit));
            return 1.0 / (static_cast<double>(digit) + y);
        }
        return inverse_branch(map, digit, from_double(y)).get_d();
    }
    require_unit(y);
    const auto n = static_cast<Digit>(map.zeros().size());
    if (digit < 0 || digit >= n) throw InvalidArgument("digit not admissible: " + std::to_string(digit));
    // Safeguarded Newton on S(x) = digit + y over [cut_d, cut_{d+1}]; S is increasing.
    const double target = static_cast<double>(digit) + y;
    double lo = map.blaschke_cut(digit), hi = map.blaschke_cut(digit + 1);
    double x = lo + (hi - lo) * y;
    for (int it = 0; it < 100; ++it) {
        double f = map.blaschke_lift(x) - target;
        if (std::abs(f) <= 1e-14) return x;
        if (f < 0)
            lo = x;
        else
            hi = x;
        double nx = x - f / map.blaschke_lift_derivative(x);
        x = (nx > lo && nx < hi) ? nx : 0.5 * (lo + hi);
        if (hi - lo < 1e-16) return x;
    }
    return x;
}

}  // namespace qrec
