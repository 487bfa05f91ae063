#ifndef MAGSPHERE_NUMERICS_QUADRATURE_HPP
#define MAGSPHERE_NUMERICS_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "magsphere/errors.hpp"

namespace magsphere::num {

struct GaussRule {
    std::vector<double> x; // nodes on [-1,1]
    std::vector<double> w;
};

// Gauss-Legendre nodes/weights by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        r.w[n - 1 - i] = r.w[i];
    }
    return r;
}

inline const GaussRule& gl8() {
    static const GaussRule r = gauss_legendre(8);
    return r;
}

// Integral of f over [a,b] with one n-point Gauss panel.
template <class F>
double gauss_panel(F&& f, double a, double b, const GaussRule& r = gl8()) {
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
    return s * h;
}

// Composite Gauss integral with panel doubling until two successive levels
// agree to abs_tol (or rel_tol * |I|).
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-12,
                 int panels0 = 8, int max_doublings = 12) {
    double prev = 0.0;
    int n = panels0;
    for (int lvl = 0; lvl <= max_doublings; ++lvl, n *= 2) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x0 = a + (b - a) * static_cast<double>(i) / n;
            const double x1 = a + (b - a) * static_cast<double>(i + 1) / n;
            s += gauss_panel(f, x0, x1);
        }
        if (lvl > 0 && std::fabs(s - prev) < abs_tol + 1e-14 * std::fabs(s)) return s;
        prev = s;
    }
    return prev;
}

// Cumulative primitive F(t) = F0 + \int_a^t f of a smooth integrand.
// Node values are Gauss-panel prefix sums on a uniform grid (doubled until
// the total integral stabilizes below tol); point evaluation is cubic
// Hermite interpolation with the exact node derivatives F' = f, which keeps
// evaluation O(1) for the flow right-hand sides.
class Primitive {
public:
    Primitive() = default;

    template <class F>
    Primitive(F&& f, double a, double b, double F0, double tol = 1e-10)
        : a_(a), b_(b), F0_(F0) {
        // Double the grid until the interpolant reproduces the next level's
        // node values (checked at the inserted midpoints) below tol.
        build(f, 256);
        for (int lvl = 0; lvl < 12; ++lvl) {
            Primitive finer;
            finer.a_ = a_;
            finer.b_ = b_;
            finer.F0_ = F0_;
            finer.build(f, 2 * n_);
            double err = 0.0;
            for (int i = 0; i < n_; ++i) {
                const double tm = a_ + (b_ - a_) * (2.0 * i + 1.0) / (2.0 * n_);
                err = std::max(err, std::fabs((*this)(tm) - (F0_ + finer.prefix_[2 * i + 1])));
            }
            prefix_.swap(finer.prefix_);
            deriv_.swap(finer.deriv_);
            n_ = finer.n_;
            if (err < tol) break;
        }
    }

    double operator()(double t) const {
        if (t <= a_) return F0_;
        if (t >= b_) return F0_ + prefix_.back();
        const double h = (b_ - a_) / n_;
        const int k = std::min<int>(static_cast<int>((t - a_) / h), n_ - 1);
        const double u = (t - (a_ + k * h)) / h;
        const double p0 = prefix_[k], p1 = prefix_[k + 1];
        const double m0 = h * deriv_[k], m1 = h * deriv_[k + 1];
        const double u2 = u * u, u3 = u2 * u;
        return F0_ + (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * m0 +
               (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * m1;
    }

    double total() const { return prefix_.back(); }
    double lo() const { return a_; }
    double hi() const { return b_; }

private:
    template <class F>
    void build(F&& f, int n) {
        n_ = n;
        prefix_.assign(n + 1, 0.0);
        deriv_.assign(n + 1, 0.0);
        deriv_[0] = f(a_);
        for (int i = 0; i < n; ++i) {
            const double x0 = a_ + (b_ - a_) * static_cast<double>(i) / n;
            const double x1 = a_ + (b_ - a_) * static_cast<double>(i + 1) / n;
            prefix_[i + 1] = prefix_[i] + gauss_panel(f, x0, x1);
            deriv_[i + 1] = f(x1);
        }
    }

    double a_ = 0.0, b_ = 1.0, F0_ = 0.0;
    int n_ = 0;
    std::vector<double> prefix_;
    std::vector<double> deriv_;
};

} // namespace magsphere::num

#endif
