#include "qrec/rational.hpp"

#include "qrec/errors.hpp"

#include <cctype>
#include <cmath>
#include <limits>

namespace qrec {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

Integer parse_integer(std::string_view s, std::string_view whole) {
    bool neg = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    if (!all_digits(s)) throw InvalidArgument("malformed rational: '" + std::string(whole) + "'");
    Integer z(std::string(s), 10);
    return neg ? Integer(-z) : z;
}

Rational parse_decimal(std::string_view s, std::string_view whole) {
    bool neg = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    long exp10 = 0;
    auto epos = s.find_first_of("eE");
    if (epos != std::string_view::npos) {
        std::string_view e = s.substr(epos + 1);
        Integer ez = parse_integer(e, whole);
        if (!ez.fits_slong_p() || std::abs(ez.get_si()) > 10000)
            throw InvalidArgument("exponent out of range: '" + std::string(whole) + "'");
        exp10 = ez.get_si();
        s = s.substr(0, epos);
    }
    std::string digits;
    auto dot = s.find('.');
    if (dot == std::string_view::npos) {
        digits = std::string(s);
    } else {
        std::string_view ip = s.substr(0, dot), fp = s.substr(dot + 1);
        if (ip.empty() && fp.empty()) throw InvalidArgument("malformed rational: '" + std::string(whole) + "'");
        digits = std::string(ip) + std::string(fp);
        exp10 -= static_cast<long>(fp.size());
    }
    if (!all_digits(digits)) throw InvalidArgument("malformed rational: '" + std::string(whole) + "'");
    Rational q(Integer(digits, 10));
    Integer ten_pow;
    mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::abs(exp10)));
    if (exp10 >= 0)
        q *= ten_pow;
    else
        q /= ten_pow;
    q.canonicalize();
    return neg ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) throw InvalidArgument("empty rational");
    auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        Integer num = parse_integer(text.substr(0, slash), text);
        Integer den = parse_integer(text.substr(slash + 1), text);
        if (den == 0) throw InvalidArgument("zero denominator: '" + std::string(text) + "'");
        Rational q(num, den);
        q.canonicalize();
        return q;
    }
    return parse_decimal(text, text);
}

std::string to_string(const Rational& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

double to_double(const Rational& q) { return q.get_d(); }

Rational from_double(double x) {
    if (!std::isfinite(x)) throw InvalidArgument("non-finite value cannot be made exact");
    Rational q(x);  // mpq_set_d is exact
    return q;
}

double log_of(const Integer& z) {
    if (sgn(z) <= 0) throw InvalidArgument("log of non-positive integer");
    long e = 0;
    double m = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::log(m) + static_cast<double>(e) * std::log(2.0);
}

double log_of(const Rational& q) {
    if (sgn(q) <= 0) throw InvalidArgument("log of non-positive rational");
    return log_of(q.get_num()) - log_of(q.get_den());
}

Rational pow(const Rational& q, unsigned long e) {
    Rational r;
    mpz_pow_ui(r.get_num_mpz_t(), q.get_num_mpz_t(), e);
    mpz_pow_ui(r.get_den_mpz_t(), q.get_den_mpz_t(), e);
    r.canonicalize();
    return r;
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : InvalidArgument([&] {
          std::string msg = "invalid configuration:";
          for (const auto& v : violations) msg += "\n  - " + v;
          return msg;
      }()),
      violations_(std::move(violations)) {}

}  // namespace qrec
