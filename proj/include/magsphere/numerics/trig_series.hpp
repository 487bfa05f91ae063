#ifndef MAGSPHERE_NUMERICS_TRIG_SERIES_HPP
#define MAGSPHERE_NUMERICS_TRIG_SERIES_HPP

#include <cmath>
#include <vector>

#include "magsphere/errors.hpp"

namespace magsphere::num {

// Sine series g(t) = sum_k a_k sin(k pi t / L) on [0, L].
// A profile function extends to a smooth odd 2L-periodic function (its even
// derivatives vanish at both ends), so the coefficients of smooth data decay
// superalgebraically and derivatives of any order are available analytically.
class SineSeries {
public:
    SineSeries() = default;
    SineSeries(std::vector<double> coeffs, double length) : a_(std::move(coeffs)), L_(length) {}

    // DST-I interpolation of uniform samples g_i = g(i L / n), i = 0..n
    // (endpoint samples must vanish; they are ignored). Coefficients below
    // drop_tol * max|a| are trimmed from the tail.
    static SineSeries fit(const std::vector<double>& samples, double length,
                          double drop_tol = 1e-13) {
        const int n = static_cast<int>(samples.size()) - 1;
        if (n < 2) throw Error("SineSeries: need at least 3 samples");
        std::vector<double> a(n - 1, 0.0);
        double amax = 0.0;
        for (int k = 1; k < n; ++k) {
            double s = 0.0;
            for (int i = 1; i < n; ++i) s += samples[i] * std::sin(M_PI * k * i / n);
            a[k - 1] = 2.0 * s / n;
            amax = std::max(amax, std::fabs(a[k - 1]));
        }
        int keep = static_cast<int>(a.size());
        while (keep > 1 && std::fabs(a[keep - 1]) < drop_tol * amax) --keep;
        a.resize(keep);
        return SineSeries(std::move(a), length);
    }

    // Value and first three derivatives.
    void eval(double t, double out[4]) const {
        out[0] = out[1] = out[2] = out[3] = 0.0;
        const double w0 = M_PI / L_;
        for (std::size_t k = 0; k < a_.size(); ++k) {
            const double w = w0 * (k + 1);
            const double s = std::sin(w * t), c = std::cos(w * t);
            out[0] += a_[k] * s;
            out[1] += a_[k] * w * c;
            out[2] -= a_[k] * w * w * s;
            out[3] -= a_[k] * w * w * w * c;
        }
    }

    double length() const { return L_; }
    const std::vector<double>& coefficients() const { return a_; }

private:
    std::vector<double> a_;
    double L_ = 1.0;
};

// Cosine series g(t) = b_0 + sum_k b_k cos(k pi t / L) on [0, L]
// (even extension; odd derivatives vanish at the ends).
class CosineSeries {
public:
    CosineSeries() = default;
    CosineSeries(std::vector<double> coeffs, double length) : b_(std::move(coeffs)), L_(length) {}

    static CosineSeries fit(const std::vector<double>& samples, double length,
                            double drop_tol = 1e-13) {
        const int n = static_cast<int>(samples.size()) - 1;
        if (n < 2) throw Error("CosineSeries: need at least 3 samples");
        std::vector<double> b(n + 1, 0.0);
        double bmax = 0.0;
        for (int k = 0; k <= n; ++k) {
            double s = 0.5 * (samples[0] + (k % 2 == 0 ? samples[n] : -samples[n]));
            for (int i = 1; i < n; ++i) s += samples[i] * std::cos(M_PI * k * i / n);
            b[k] = (k == 0 || k == n ? 1.0 : 2.0) * s / n;
            bmax = std::max(bmax, std::fabs(b[k]));
        }
        int keep = static_cast<int>(b.size());
        while (keep > 1 && std::fabs(b[keep - 1]) < drop_tol * bmax) --keep;
        b.resize(keep);
        return CosineSeries(std::move(b), length);
    }

    void eval(double t, double out[3]) const {
        out[0] = b_.empty() ? 0.0 : b_[0];
        out[1] = out[2] = 0.0;
        const double w0 = M_PI / L_;
        for (std::size_t k = 1; k < b_.size(); ++k) {
            const double w = w0 * k;
            const double s = std::sin(w * t), c = std::cos(w * t);
            out[0] += b_[k] * c;
            out[1] -= b_[k] * w * s;
            out[2] -= b_[k] * w * w * c;
        }
    }

    double length() const { return L_; }
    const std::vector<double>& coefficients() const { return b_; }

private:
    std::vector<double> b_;
    double L_ = 1.0;
};

// C-infinity ramp: 0 for x <= 0, 1 for x >= 1.
inline double smooth_ramp(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double e0 = std::exp(-1.0 / x);
    const double e1 = std::exp(-1.0 / (1.0 - x));
    return e0 / (e0 + e1);
}

inline double smooth_ramp_d1(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double h = 1e-6;
    const double lo = std::max(0.0, x - h), hi = std::min(1.0, x + h);
    return (smooth_ramp(hi) - smooth_ramp(lo)) / (hi - lo);
}

} // namespace magsphere::num

#endif
