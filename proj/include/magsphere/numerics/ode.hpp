#ifndef MAGSPHERE_NUMERICS_ODE_HPP
#define MAGSPHERE_NUMERICS_ODE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "magsphere/errors.hpp"

namespace magsphere::num {

// Dormand-Prince 5(4) embedded pair with the classical quartic continuous
// extension (Hairer-Norsett-Wanner DOPRI5 coefficients).

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;     // 0 -> automatic
    double h_max = 0.0;      // 0 -> |s_end - s0|
    long max_steps = 50'000'000;
};

struct OdeStats {
    long n_steps = 0;
    long n_rejected = 0;
    long n_rhs = 0;
};

// One accepted step with its dense-output coefficients.
// y(s0 + th*h) = c0 + th*(c1 + (1-th)*(c2 + th*(c3 + (1-th)*c4)))
struct DenseStep {
    double s0 = 0.0, h = 0.0;
    std::vector<double> cont; // 5*n

    int dim() const { return static_cast<int>(cont.size() / 5); }

    void eval(double s, double* y) const {
        const int n = dim();
        const double th = (s - s0) / h, th1 = 1.0 - th;
        const double* c = cont.data();
        for (int i = 0; i < n; ++i)
            y[i] = c[i] + th * (c[n + i] + th1 * (c[2 * n + i] + th * (c[3 * n + i] + th1 * c[4 * n + i])));
    }
};

enum class StepControl { kContinue, kStop };

// rhs(s, y, dy); cb invoked after every accepted step.
using Rhs = std::function<void(double, const double*, double*)>;
using StepCallback = std::function<StepControl(const DenseStep&, const double* y_end)>;

namespace dopri {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
} // namespace dopri

class Dopri5 {
public:
    explicit Dopri5(int dim) : n_(dim) {
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ysti_}) v->resize(n_);
    }

    // Integrates y from s0 to s_end (s_end may be < s0). Returns final state in y.
    OdeStats run(const Rhs& rhs, double s0, std::vector<double>& y, double s_end,
                 const OdeOptions& opt, const StepCallback& cb) {
        using namespace dopri;
        OdeStats st;
        if (s_end == s0) return st;
        const double dir = (s_end > s0) ? 1.0 : -1.0;
        const double hmax = (opt.h_max > 0 ? opt.h_max : std::fabs(s_end - s0));
        double s = s0;
        rhs(s, y.data(), k1_.data());
        ++st.n_rhs;
        double h = opt.h_init > 0 ? opt.h_init : initial_step(rhs, s, y, dir, hmax, opt, st);
        h *= dir;
        DenseStep dense;
        dense.cont.resize(5 * n_);
        double err_old = 1e-4;
        bool last = false;
        while (true) {
            if (st.n_steps + st.n_rejected > opt.max_steps)
                throw Error("dopri5: max step count exceeded");
            if (dir * (s + h - s_end) > 0.0) { h = s_end - s; last = true; }
            else last = false;
            if (std::fabs(h) < 1e-14 * std::max(1.0, std::fabs(s))) {
                last = true;
                h = s_end - s;
            }

            const double* yv = y.data();
            for (int i = 0; i < n_; ++i) ytmp_[i] = yv[i] + h * a21 * k1_[i];
            rhs(s + c2 * h, ytmp_.data(), k2_.data());
            for (int i = 0; i < n_; ++i) ytmp_[i] = yv[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
            rhs(s + c3 * h, ytmp_.data(), k3_.data());
            for (int i = 0; i < n_; ++i)
                ytmp_[i] = yv[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
            rhs(s + c4 * h, ytmp_.data(), k4_.data());
            for (int i = 0; i < n_; ++i)
                ytmp_[i] = yv[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
            rhs(s + c5 * h, ytmp_.data(), k5_.data());
            for (int i = 0; i < n_; ++i)
                ysti_[i] = yv[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
            rhs(s + h, ysti_.data(), k6_.data());
            for (int i = 0; i < n_; ++i)
                ytmp_[i] = yv[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
            rhs(s + h, ytmp_.data(), k7_.data());
            st.n_rhs += 6;

            double err = 0.0;
            for (int i = 0; i < n_; ++i) {
                const double sk = opt.atol + opt.rtol * std::max(std::fabs(yv[i]), std::fabs(ytmp_[i]));
                const double ei = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
                err += (ei / sk) * (ei / sk);
            }
            err = std::sqrt(err / n_);

            if (err <= 1.0) {
                // accepted: fill dense coefficients
                double* c = dense.cont.data();
                for (int i = 0; i < n_; ++i) {
                    const double ydiff = ytmp_[i] - yv[i];
                    const double bspl = h * k1_[i] - ydiff;
                    c[i] = yv[i];
                    c[n_ + i] = ydiff;
                    c[2 * n_ + i] = bspl;
                    c[3 * n_ + i] = ydiff - h * k7_[i] - bspl;
                    c[4 * n_ + i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
                }
                dense.s0 = s;
                dense.h = h;
                s += h;
                y.swap(ytmp_);
                k1_.swap(k7_); // FSAL
                ++st.n_steps;
                if (cb && cb(dense, y.data()) == StepControl::kStop) return st;
                if (last) return st;
                // PI controller
                const double fac11 = std::pow(err, 0.17);
                double fac = fac11 / std::pow(err_old, 0.04);
                fac = std::max(0.2, std::min(10.0, 0.9 / fac));
                h = dir * std::min(std::fabs(h) * fac, hmax);
                err_old = std::max(err, 1e-4);
            } else {
                ++st.n_rejected;
                const double fac11 = std::pow(err, 0.17);
                h *= std::max(0.2, 0.9 / fac11);
            }
        }
    }

private:
    double initial_step(const Rhs& rhs, double s, const std::vector<double>& y, double dir,
                        double hmax, const OdeOptions& opt, OdeStats& st) {
        double dnf = 0.0, dny = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double sk = opt.atol + opt.rtol * std::fabs(y[i]);
            dnf += (k1_[i] / sk) * (k1_[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        h = std::min(h, hmax);
        for (int i = 0; i < n_; ++i) ytmp_[i] = y[i] + dir * h * k1_[i];
        rhs(s + dir * h, ytmp_.data(), k2_.data());
        ++st.n_rhs;
        double der2 = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double sk = opt.atol + opt.rtol * std::fabs(y[i]);
            der2 += ((k2_[i] - k1_[i]) / sk) * ((k2_[i] - k1_[i]) / sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(std::fabs(der2), std::sqrt(dnf));
        const double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
        return std::min({100.0 * h, h1, hmax});
    }

    int n_;
    std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ysti_;
};

// Stored dense solution over [s_begin, s_end].
class Solution {
public:
    void push(const DenseStep& st) { steps_.push_back(st); }
    bool empty() const { return steps_.empty(); }
    std::size_t size() const { return steps_.size(); }
    const DenseStep& step(std::size_t i) const { return steps_[i]; }
    double s_begin() const { return steps_.front().s0; }
    double s_end() const { return steps_.back().s0 + steps_.back().h; }

    void eval(double s, double* y) const {
        const auto& st = locate(s);
        st.eval(s, y);
    }

    std::vector<double> eval(double s) const {
        std::vector<double> y(steps_.front().dim());
        eval(s, y.data());
        return y;
    }

    const DenseStep& locate(double s) const {
        if (steps_.empty()) throw Error("Solution: empty");
        const bool fwd = steps_.front().h > 0;
        std::size_t lo = 0, hi = steps_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            const double end = steps_[mid].s0 + steps_[mid].h;
            if (fwd ? (s <= end) : (s >= end)) hi = mid;
            else lo = mid + 1;
        }
        return steps_[lo];
    }

private:
    std::vector<DenseStep> steps_;
};

// Locates the zero of g(s, y(s)) inside a dense step by bisection.
template <class G>
double locate_event(const DenseStep& st, G&& g, double s_lo, double s_hi, double stol = 1e-12) {
    std::vector<double> y(st.dim());
    auto eval_g = [&](double s) {
        st.eval(s, y.data());
        return g(s, y.data());
    };
    double ga = eval_g(s_lo), gb = eval_g(s_hi);
    if (ga == 0.0) return s_lo;
    if (gb == 0.0) return s_hi;
    if (ga * gb > 0.0) throw Error("locate_event: no sign change");
    for (int i = 0; i < 200; ++i) {
        const double sm = 0.5 * (s_lo + s_hi);
        if (std::fabs(s_hi - s_lo) < stol * std::max(1.0, std::fabs(sm))) return sm;
        const double gm = eval_g(sm);
        if (gm == 0.0) return sm;
        if (ga * gm < 0.0) { s_hi = sm; gb = gm; }
        else { s_lo = sm; ga = gm; }
    }
    return 0.5 * (s_lo + s_hi);
}

} // namespace magsphere::num

#endif
