#pragma once

// Reference computations written from first principles.  None of these call
// into the library's cylinder, measure or refinement code.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Q = mpq_class;
using Z = mpz_class;

inline Q floor_q(const Q& x) {
    Z f;
    mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return Q(f);
}

// Base-D digits of x in [0,1): d_k = floor(D * x_k), x_{k+1} = D x_k - d_k.
inline std::vector<std::int64_t> base_digits(Q x, int D, std::size_t n) {
    std::vector<std::int64_t> out;
    for (std::size_t k = 0; k <= n; ++k) {
        Q y = x * D;
        Q d = floor_q(y);
        out.push_back(d.get_num().get_si());
        x = y - d;
    }
    return out;
}

// Continued-fraction digits of a rational in (0,1) by Euclid's algorithm.
inline std::vector<std::int64_t> cf_digits(Z num, Z den) {
    std::vector<std::int64_t> out;
    while (num != 0) {
        Z q = den / num;
        Z r = den % num;
        out.push_back(q.get_si());
        den = num;
        num = r;
    }
    return out;
}

// Gauss cylinder of a digit word from convergents: endpoints p_n/q_n and
// (p_n + p_{n-1})/(q_n + q_{n-1}); length 1/(q_n (q_n + q_{n-1})).
struct CfCylinder {
    Q lo, hi, length;
};
inline CfCylinder cf_cylinder(const std::vector<std::int64_t>& a) {
    Z p_prev = 1, q_prev = 0, p = 0, q = 1;
    for (std::int64_t d : a) {
        Z pn = d * p + p_prev, qn = d * q + q_prev;
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
    }
    Q e1(p, q), e2(p + p_prev, q + q_prev);
    e1.canonicalize();
    e2.canonicalize();
    CfCylinder c{std::min(e1, e2), std::max(e1, e2), Q(1) / Q(q * (q + q_prev))};
    c.length.canonicalize();
    return c;
}

// Composite Simpson rule.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

inline double gauss_density(double x) { return 1.0 / (std::log(2.0) * (1.0 + x)); }

// Stationary vector by power iteration in doubles.
inline std::vector<double> power_stationary(const std::vector<std::vector<double>>& m, int iters = 5000) {
    const std::size_t D = m.size();
    std::vector<double> p(D, 1.0 / D);
    for (int it = 0; it < iters; ++it) {
        std::vector<double> q(D, 0.0);
        for (std::size_t i = 0; i < D; ++i)
            for (std::size_t j = 0; j < D; ++j) q[j] += p[i] * m[i][j];
        // Lazy chain avoids oscillation for periodic-looking inputs.
        for (std::size_t j = 0; j < D; ++j) p[j] = 0.5 * (p[j] + q[j]);
    }
    return p;
}

// Chain mass p_{w0} prod m[w_k][w_{k+1}].
inline Q chain_mass(const std::vector<Q>& p, const std::vector<std::vector<Q>>& m, const std::vector<std::int64_t>& w) {
    Q r = p[w[0]];
    for (std::size_t k = 0; k + 1 < w.size(); ++k) r *= m[w[k]][w[k + 1]];
    return r;
}

// Visit every word of the given length over {0..D-1}.
inline void each_word(int D, std::size_t len, const std::function<void(const std::vector<std::int64_t>&)>& f) {
    std::vector<std::int64_t> w(len, 0);
    for (;;) {
        f(w);
        std::size_t k = len;
        while (k > 0) {
            if (++w[k - 1] < D) break;
            w[k - 1] = 0;
            --k;
        }
        if (k == 0) return;
    }
}

// Smallest t with the dyadic cylinder of x0 at depth t inside [x0 - r, x0 + r].
inline std::size_t dyadic_refine(const Q& x0, const Q& r, std::size_t t_max = 200) {
    for (std::size_t t = 0; t <= t_max; ++t) {
        Q scale = Q(Z(1) << static_cast<unsigned>(t + 1));
        Q m = floor_q(x0 * scale);
        Q lo = m / scale, hi = (m + 1) / scale;
        if (lo >= x0 - r && hi <= x0 + r) return t;
    }
    return t_max + 1;
}

// h/(h+L) style Hoeffding bound straight from the formula.
inline double hoeffding(const std::vector<double>& p, double L) {
    double h = 0, pmax = 0, pmin = 1;
    for (double x : p) {
        h -= x * std::log(x);
        pmax = std::max(pmax, x);
        pmin = std::min(pmin, x);
    }
    const double lr = std::log(pmax / pmin);
    const double s = std::sqrt((h + L) * (h + L) + 2 * L * lr * lr);
    return (s + h - L) / (s + h + L);
}

// Union of level-n cells of a product grid meeting a disc, by recursive
// enumeration of rectangles (no product shortcut).  Cells split at ratio qx in x
// and qy in y'.
inline double rectangle_cover(double qx, double qy, std::size_t n, double cx, double cy, double R) {
    double area = 0;
    std::function<void(double, double, double, double, std::size_t)> rec = [&](double x0, double x1, double y0,
                                                                               double y1, std::size_t lvl) {
        const double nx = std::clamp(cx, x0, x1), ny = std::clamp(cy, y0, y1);
        if ((nx - cx) * (nx - cx) + (ny - cy) * (ny - cy) > R * R) return;
        if (lvl == n + 1) {
            area += (x1 - x0) * (y1 - y0);
            return;
        }
        const double xm = x0 + qx * (x1 - x0), ym = y0 + qy * (y1 - y0);
        rec(x0, xm, y0, ym, lvl + 1);
        rec(xm, x1, y0, ym, lvl + 1);
        rec(x0, xm, ym, y1, lvl + 1);
        rec(xm, x1, ym, y1, lvl + 1);
    };
    rec(0, 1, 0, 1, 0);
    return area;
}

}  // namespace oracle
