#ifndef MAGSPHERE_NUMERICS_ROOTS_HPP
#define MAGSPHERE_NUMERICS_ROOTS_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "magsphere/errors.hpp"

namespace magsphere::num {

// Brent's method on a bracketing interval [a,b] with f(a)*f(b) <= 0.
template <class F>
double brent(F&& f, double a, double b, double xtol = 1e-14, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw Error("brent: root not bracketed");
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 0; iter < max_iter; ++iter) {
        if (fb * fc > 0.0) { c = a; fc = fa; e = d = b - a; }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) { p = 2.0 * xm * s; q = 1.0 - s; }
            else {
                q = fa / fc; r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            const double min1 = 3.0 * xm * q - std::fabs(tol1 * q);
            const double min2 = std::fabs(e * q);
            if (2.0 * p < (min1 < min2 ? min1 : min2)) { e = d; d = p / q; }
            else { d = xm; e = d; }
        } else { d = xm; e = d; }
        a = b; fa = fb;
        if (std::fabs(d) > tol1) b += d;
        else b += (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    return b;
}

// Golden-section maximization on [a,b]; returns argmax.
template <class F>
double golden_max(F&& f, double a, double b, double xtol = 1e-10, int max_iter = 200) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && (b - a) > xtol; ++i) {
        if (fc > fd) { b = d; d = c; fd = fc; c = b - gr * (b - a); fc = f(c); }
        else { a = c; c = d; fc = fd; d = a + gr * (b - a); fd = f(d); }
    }
    return 0.5 * (a + b);
}

template <class F>
double golden_min(F&& f, double a, double b, double xtol = 1e-10, int max_iter = 200) {
    return golden_max([&](double x) { return -f(x); }, a, b, xtol, max_iter);
}

struct Bracket {
    double a, b;
};

// Scan [a,b] on n+1 uniform nodes and return every sign-change bracket of f.
template <class F>
std::vector<Bracket> scan_brackets(F&& f, double a, double b, int n) {
    std::vector<Bracket> out;
    double x0 = a, f0 = f(a);
    for (int i = 1; i <= n; ++i) {
        const double x1 = a + (b - a) * static_cast<double>(i) / n;
        const double f1 = f(x1);
        if (f0 == 0.0) out.push_back({x0, x0});
        else if (f0 * f1 < 0.0) out.push_back({x0, x1});
        x0 = x1; f0 = f1;
    }
    return out;
}

} // namespace magsphere::num

#endif
