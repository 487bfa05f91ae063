#ifndef MAGSPHERE_PROFILE_HPP
#define MAGSPHERE_PROFILE_HPP

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "magsphere/errors.hpp"
#include "magsphere/numerics/quadrature.hpp"
#include "magsphere/numerics/roots.hpp"
#include "magsphere/numerics/trig_series.hpp"

namespace magsphere {

// Value and first three arclength derivatives of the generator curve.
struct Jet4 {
    double g = 0, d1 = 0, d2 = 0, d3 = 0;
};

class ProfileCurve {
public:
    virtual ~ProfileCurve() = default;
    virtual double length() const = 0;
    virtual Jet4 jet(double t) const = 0;
};

namespace detail {

// C^3 polynomial smoothstep on [0,1]: S(0)=0, S(1)=1, S',S'',S''' vanish at both ends.
inline void smoothstep7(double x, double out[4]) {
    if (x <= 0.0) { out[0] = out[1] = out[2] = out[3] = 0.0; return; }
    if (x >= 1.0) { out[0] = 1.0; out[1] = out[2] = out[3] = 0.0; return; }
    const double x2 = x * x, x3 = x2 * x, x4 = x3 * x;
    const double y = 1.0 - x;
    out[0] = x4 * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x3);
    out[1] = 140.0 * x3 * y * y * y;
    out[2] = 420.0 * x2 * y * y * (1.0 - 2.0 * x);
    out[3] = 840.0 * x * y * ((1.0 - 2.0 * x) * (1.0 - 2.0 * x) - x * y);
}

// Antiderivative of smoothstep7 from 0: \int_0^x S = 7x^5 - 14x^6 + 10x^7 - 2.5x^8.
inline double smoothstep7_int(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 0.5;
    const double x2 = x * x, x4 = x2 * x2, x5 = x4 * x;
    return 7.0 * x5 - 14.0 * x5 * x + 10.0 * x5 * x2 - 2.5 * x4 * x4;
}

// Plateau bump on (p, q): ramps of width w at both sides, 1 on [p+w, q-w].
struct PlateauBump {
    double p = 0, q = 1, w = 0.1;

    void eval(double x, double out[3]) const {  // B, B', B''
        double s[4];
        if (x <= p || x >= q) { out[0] = out[1] = out[2] = 0.0; return; }
        if (x < p + w) {
            smoothstep7((x - p) / w, s);
            out[0] = s[0]; out[1] = s[1] / w; out[2] = s[2] / (w * w);
        } else if (x > q - w) {
            smoothstep7((q - x) / w, s);
            out[0] = s[0]; out[1] = -s[1] / w; out[2] = s[2] / (w * w);
        } else { out[0] = 1.0; out[1] = 0.0; out[2] = 0.0; }
    }

    // \int_p^x B
    double integral(double x) const {
        if (x <= p) return 0.0;
        double acc = 0.0;
        acc += w * smoothstep7_int(std::min(1.0, (x - p) / w));
        if (x > p + w) acc += std::min(x, q - w) - (p + w);
        if (x > q - w) acc += w * (0.5 - smoothstep7_int(std::min(1.0, (q - x) / w)));
        return acc;
    }

    double total() const { return integral(q); }
};

} // namespace detail

// ---------------------------------------------------------------------------
// Curve families

class RoundSphereCurve final : public ProfileCurve {
public:
    double length() const override { return M_PI; }
    Jet4 jet(double t) const override {
        return {std::sin(t), std::cos(t), -std::sin(t), -std::cos(t)};
    }
};

// Homothety gamma_lambda(t) = lambda * gamma(t / lambda) on [0, lambda * ell].
class ScaledCurve final : public ProfileCurve {
public:
    ScaledCurve(std::shared_ptr<const ProfileCurve> base, double lambda)
        : base_(std::move(base)), lambda_(lambda) {}
    double length() const override { return lambda_ * base_->length(); }
    Jet4 jet(double t) const override {
        const Jet4 j = base_->jet(t / lambda_);
        return {lambda_ * j.g, j.d1, j.d2 / lambda_, j.d3 / (lambda_ * lambda_)};
    }

private:
    std::shared_ptr<const ProfileCurve> base_;
    double lambda_;
};

class MirrorCurve final : public ProfileCurve {
public:
    explicit MirrorCurve(std::shared_ptr<const ProfileCurve> base) : base_(std::move(base)) {}
    double length() const override { return base_->length(); }
    Jet4 jet(double t) const override {
        const Jet4 j = base_->jet(base_->length() - t);
        return {j.g, -j.d1, j.d2, -j.d3};
    }

private:
    std::shared_ptr<const ProfileCurve> base_;
};

// Meridian ellipse (equatorial semi-axis a, polar semi-axis c) by arclength.
class EllipsoidCurve final : public ProfileCurve {
public:
    EllipsoidCurve(double a, double c) : a_(a), c_(c) {
        if (a <= 0 || c <= 0) throw InfeasibleSpec("ellipsoid semi-axes must be positive");
        const int n = 8192;
        u_nodes_.resize(n + 1);
        t_nodes_.resize(n + 1);
        t_nodes_[0] = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u0 = M_PI * static_cast<double>(i) / n;
            const double u1 = M_PI * static_cast<double>(i + 1) / n;
            t_nodes_[i + 1] = t_nodes_[i] + num::gauss_panel([&](double u) { return speed(u); }, u0, u1);
        }
        for (int i = 0; i <= n; ++i) u_nodes_[i] = M_PI * static_cast<double>(i) / n;
        len_ = t_nodes_.back();
    }

    double length() const override { return len_; }

    Jet4 jet(double t) const override {
        const double u = param(t);
        const double su = std::sin(u), cu = std::cos(u);
        const double w = speed(u);
        const double d = c_ * c_ - a_ * a_;
        const double wp = d * su * cu / w;
        const double wpp = (d * std::cos(2 * u) - wp * wp) / w;
        const double g = a_ * su;
        const double g1 = a_ * cu / w;
        const double N = -a_ * (su * w + cu * wp);
        const double g2 = N / (w * w * w);
        const double Np = -a_ * cu * (w + wpp);
        const double g3 = Np / (w * w * w * w) - 3.0 * N * wp / (w * w * w * w * w);
        return {g, g1, g2, g3};
    }

private:
    double speed(double u) const {
        const double cu = std::cos(u), su = std::sin(u);
        return std::sqrt(a_ * a_ * cu * cu + c_ * c_ * su * su);
    }

    double param(double t) const {
        if (t <= 0) return 0.0;
        if (t >= len_) return M_PI;
        auto it = std::upper_bound(t_nodes_.begin(), t_nodes_.end(), t);
        std::size_t k = std::max<std::ptrdiff_t>(1, it - t_nodes_.begin()) - 1;
        const double f = (t - t_nodes_[k]) / (t_nodes_[k + 1] - t_nodes_[k]);
        double u = u_nodes_[k] + f * (u_nodes_[k + 1] - u_nodes_[k]);
        for (int i = 0; i < 4; ++i) {
            const double r = arclen(u) - t;
            u -= r / speed(u);
        }
        return std::min(M_PI, std::max(0.0, u));
    }

    double arclen(double u) const {
        const int n = static_cast<int>(u_nodes_.size()) - 1;
        const double pos = u / M_PI * n;
        const int k = std::min(n - 1, std::max(0, static_cast<int>(pos)));
        return t_nodes_[k] + num::gauss_panel([&](double x) { return speed(x); }, u_nodes_[k], u);
    }

    double a_, c_, len_;
    std::vector<double> u_nodes_, t_nodes_;
};

// Spherical cap of radius a reparametrized by the inverse of the stretch map
// V(x) = x + amp * \int B; the bump B fixes both polar caps, so the profile
// stays a closed-form reparametrized sphere with exact derivatives.
class StretchedCapCurve final : public ProfileCurve {
public:
    StretchedCapCurve(double a, detail::PlateauBump bump, double amp, double q_offset)
        : a_(a), bump_(bump), amp_(amp), q_off_(q_offset) {
        len_ = map(M_PI * a_);
    }

    double length() const override { return len_; }

    // V(x) = x + amp * (int_p^x B + q_off)
    double map(double x) const { return x + amp_ * (bump_.integral(x) + q_off_); }

    Jet4 jet(double t) const override {
        const double x = invert(t);
        double B[3];
        bump_.eval(x, B);
        const double v1 = 1.0 + amp_ * B[0];
        const double v2 = amp_ * B[1];
        const double v3 = amp_ * B[2];
        const double g = a_ * std::sin(x / a_);
        const double p1 = std::cos(x / a_);
        const double p2 = -std::sin(x / a_) / a_;
        const double p3 = -std::cos(x / a_) / (a_ * a_);
        const double i1 = 1.0 / v1;
        const double j1 = p1 * i1;
        const double j2 = p2 * i1 * i1 - p1 * v2 * i1 * i1 * i1;
        const double j3 = p3 * i1 * i1 * i1 - 3.0 * p2 * v2 * i1 * i1 * i1 * i1 -
                          p1 * v3 * i1 * i1 * i1 * i1 + 3.0 * p1 * v2 * v2 * i1 * i1 * i1 * i1 * i1;
        return {g, j1, j2, j3};
    }

private:
    double invert(double t) const {
        if (t <= 0) return 0.0;
        if (t >= len_) return M_PI * a_;
        double lo = 0.0, hi = M_PI * a_;
        double x = t / (1.0 + amp_ * bump_.total() / (M_PI * a_));
        for (int i = 0; i < 80; ++i) {
            const double r = map(x) - t;
            if (r > 0) hi = x; else lo = x;
            double B[3];
            bump_.eval(x, B);
            const double step = r / (1.0 + amp_ * B[0]);
            x -= step;
            if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
            if (std::fabs(step) < 1e-15 * (1.0 + std::fabs(x))) break;
        }
        return x;
    }

    double a_, len_;
    detail::PlateauBump bump_;
    double amp_, q_off_;
};

class SampledCurve final : public ProfileCurve {
public:
    SampledCurve(num::SineSeries series) : series_(std::move(series)) {}
    double length() const override { return series_.length(); }
    Jet4 jet(double t) const override {
        double v[4];
        series_.eval(t, v);
        return {v[0], v[1], v[2], v[3]};
    }

private:
    num::SineSeries series_;
};

// ---------------------------------------------------------------------------
// Profile value type

class Profile {
public:
    Profile() = default;

    static Profile make(std::shared_ptr<const ProfileCurve> curve, std::string kind) {
        Profile p;
        auto impl = std::make_shared<Impl>();
        impl->curve = std::move(curve);
        impl->kind = std::move(kind);
        impl->ell = impl->curve->length();
        const auto* cv = impl->curve.get();
        impl->int_gamma = num::Primitive([cv](double t) { return cv->jet(t).g; }, 0.0,
                                         impl->ell, 0.0, 1e-10);
        p.impl_ = std::move(impl);
        return p;
    }

    double ell() const { return impl_->ell; }
    const std::string& kind() const { return impl_->kind; }

    Jet4 jet(double t) const { return impl_->curve->jet(t); }
    double gamma(double t) const { return jet(t).g; }
    double dgamma(double t) const { return jet(t).d1; }

    // Primitive of gamma with Gamma(0) = -1 (area convention).
    double Gamma(double t) const { return -1.0 + impl_->int_gamma(t); }
    // Primitive of gamma with Gamma0(0) = 0 (twist/rigid-family convention).
    double Gamma0(double t) const { return impl_->int_gamma(t); }

    double area() const { return impl_->int_gamma.total(); }

    // Gaussian curvature; pole limits by the derivative jet
    // (gamma ~ t at the south pole and ~ ell - t at the north pole, so the
    // 0/0 ratio tends to -d3 and +d3 respectively).
    double K(double t) const {
        const double margin = 1e-4 * ell();
        const Jet4 j = jet(t);
        if (t < margin) return -j.d3;
        if (t > ell() - margin) return j.d3;
        return -j.d2 / j.g;
    }

    // beta_theta / gamma with the 0/0 pole limit resolved by series.
    double beta_over_gamma(double t, double Gamma_val) const {
        const double margin = 1e-4 * ell();
        const Jet4 j = jet(t);
        if (t < margin) return 0.5 * (1.0 - K(t)) * t;
        if (t > ell() - margin) return -0.5 * (1.0 - K(t)) * (ell() - t);
        return (Gamma_val + j.d1) / j.g;
    }

    std::shared_ptr<const ProfileCurve> curve() const { return impl_->curve; }
    bool valid() const { return static_cast<bool>(impl_); }

private:
    struct Impl {
        std::shared_ptr<const ProfileCurve> curve;
        std::string kind;
        double ell = 0;
        num::Primitive int_gamma;
    };
    std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// Factories

inline Profile make_round_sphere() {
    return Profile::make(std::make_shared<RoundSphereCurve>(), "round_sphere");
}

inline Profile normalize(const Profile& p) {
    const double area = p.area();
    if (!(area > 0.0)) throw DegenerateProfile("area must be positive");
    const double lambda = std::sqrt(2.0 / area);
    if (std::fabs(lambda - 1.0) < 1e-13) return p;
    return Profile::make(std::make_shared<ScaledCurve>(p.curve(), lambda),
                         p.kind() + "|normalized");
}

inline Profile mirrored(const Profile& p) {
    return Profile::make(std::make_shared<MirrorCurve>(p.curve()), p.kind() + "|mirrored");
}

inline Profile make_ellipsoid(double a, double c, bool normalized = true) {
    auto curve = std::make_shared<EllipsoidCurve>(a, c);
    Profile raw = Profile::make(curve, "ellipsoid(a=" + std::to_string(a) + ",c=" + std::to_string(c) + ")");
    return normalized ? normalize(raw) : raw;
}

// Lemma-style stretched sphere: round cap of radius a with an odd stretch of
// the zone more than delta away from both poles. C < 0 requests the
// area-normalizing stretch amount (bracketed root-find); C >= 0 applies the
// given shift and rescales by homothety afterwards.
inline Profile make_stretched_sphere(double a, double delta, double C = -1.0) {
    if (!(a > 0.0 && a < 1.0)) throw InfeasibleSpec("stretched sphere needs a in (0,1)");
    if (!(delta > 0.0 && delta < M_PI * a / 2.0))
        throw InfeasibleSpec("stretched sphere needs delta in (0, pi*a/2)");
    const double X = M_PI * a, xm = X / 2.0;
    const double r = xm - delta;
    detail::PlateauBump bump;
    bump.p = xm - r;
    bump.q = xm + r;
    bump.w = 0.5 * r;
    const double q_half = bump.total() / 2.0; // makes the stretch odd around xm

    auto build = [&](double amp) {
        auto curve = std::make_shared<StretchedCapCurve>(a, bump, amp, q_half - bump.integral(xm));
        return curve;
    };
    auto area_of = [&](double amp) {
        // \int gamma dt = \int gamma_base(x) V'(x) dx
        auto base = [&](double x) { return a * std::sin(x / a); };
        double B[3];
        return num::integrate(
            [&](double x) {
                bump.eval(x, B);
                return base(x) * (1.0 + amp * B[0]);
            },
            0.0, X, 1e-13);
    };

    std::string kind = "stretched_sphere(a=" + std::to_string(a) + ",delta=" + std::to_string(delta);
    if (C < 0.0) {
        double hi = 1.0;
        while (area_of(hi) < 2.0) {
            hi *= 2.0;
            if (hi > 1e9) throw InfeasibleSpec("stretched sphere: cannot reach area 2");
        }
        const double amp = num::brent([&](double x) { return area_of(x) - 2.0; }, 0.0, hi, 1e-13);
        return Profile::make(build(amp), kind + ",C=auto)");
    }
    const double amp = (q_half > 0) ? C / q_half : 0.0;
    Profile raw = Profile::make(build(amp), kind + ",C=" + std::to_string(C) + ")");
    return normalize(raw);
}

// Prop.-noncon construction: a cap profile with derivative < -eps at t = delta,
// area-normalized by stretching an interval between delta and the far pole.
inline Profile make_dip_profile(double delta, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw InfeasibleSpec("dip profile needs eps in (0,1)");
    if (!(delta > 0.0 && delta < M_PI / 2.0)) throw InfeasibleSpec("dip profile needs delta in (0, pi/2)");
    const double chi = 0.5 * (M_PI / 2.0 + std::asin(eps) + M_PI); // cos(chi) < -eps
    const double a = delta / chi;
    const double X = M_PI * a;
    detail::PlateauBump bump;
    bump.p = delta + 0.15 * (X - delta);
    bump.q = X - 0.15 * (X - delta);
    bump.w = 0.30 * (bump.q - bump.p);

    auto area_of = [&](double amp) {
        double B[3];
        return num::integrate(
            [&](double x) {
                bump.eval(x, B);
                return a * std::sin(x / a) * (1.0 + amp * B[0]);
            },
            0.0, X, 1e-13);
    };
    double hi = 1.0;
    while (area_of(hi) < 2.0) {
        hi *= 2.0;
        if (hi > 1e12) throw InfeasibleSpec("dip profile: cannot reach area 2");
    }
    const double amp = num::brent([&](double x) { return area_of(x) - 2.0; }, 0.0, hi, 1e-13);
    auto curve = std::make_shared<StretchedCapCurve>(a, bump, amp, 0.0);
    return Profile::make(curve, "dip(delta=" + std::to_string(delta) + ",eps=" + std::to_string(eps) + ")");
}

inline Profile make_sampled_profile(const std::vector<double>& samples, double ell) {
    auto series = num::SineSeries::fit(samples, ell);
    return Profile::make(std::make_shared<SampledCurve>(std::move(series)), "samples");
}

} // namespace magsphere

#endif
