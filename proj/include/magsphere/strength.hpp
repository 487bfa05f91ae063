#ifndef MAGSPHERE_STRENGTH_HPP
#define MAGSPHERE_STRENGTH_HPP

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "magsphere/errors.hpp"
#include "magsphere/numerics/quadrature.hpp"
#include "magsphere/numerics/trig_series.hpp"
#include "magsphere/profile.hpp"

namespace magsphere {

struct Jet3 {
    double f = 1, d1 = 0, d2 = 0;
};

class StrengthCurve {
public:
    virtual ~StrengthCurve() = default;
    virtual Jet3 jet(double t) const = 0;
};

class ConstantStrength final : public StrengthCurve {
public:
    explicit ConstantStrength(double value) : v_(value) {}
    Jet3 jet(double) const override { return {v_, 0.0, 0.0}; }

private:
    double v_;
};

// f(t) = base * (1 + c cos(k pi t / L)); df vanishes at both poles.
class BumpStrength final : public StrengthCurve {
public:
    BumpStrength(double base, double c, int mode, double length)
        : base_(base), c_(c), k_(mode), L_(length) {
        if (std::fabs(c) >= 1.0) throw InfeasibleParams("bump strength needs |c| < 1");
        if (mode < 1) throw InfeasibleParams("bump strength needs mode >= 1");
    }
    Jet3 jet(double t) const override {
        const double w = k_ * M_PI / L_;
        return {base_ * (1.0 + c_ * std::cos(w * t)), -base_ * c_ * w * std::sin(w * t),
                -base_ * c_ * w * w * std::cos(w * t)};
    }

private:
    double base_, c_;
    int k_;
    double L_;
};

// f = 1/sqrt(k Gamma0 + h) with Gamma0(0) = 0; the twist coefficient
// -df/(gamma f^3) is the constant k/2 by construction.
class RigidStrength final : public StrengthCurve {
public:
    RigidStrength(Profile profile, double k, double h)
        : profile_(std::move(profile)), k_(k), h_(h) {
        const double area = profile_.area();
        const double wmin = std::min(h_, h_ + k_ * area);
        if (!(wmin > 0.0))
            throw InfeasibleParams("rigid strength needs k*Gamma0 + h > 0 on [0, ell]");
    }
    Jet3 jet(double t) const override {
        const Jet4 g = profile_.jet(t);
        const double w = k_ * profile_.Gamma0(t) + h_;
        const double f = 1.0 / std::sqrt(w);
        const double w32 = f / w; // w^{-3/2}
        const double d1 = -0.5 * k_ * g.g * w32;
        const double d2 = -0.5 * k_ * g.d1 * w32 + 0.75 * k_ * k_ * g.g * g.g * w32 / w;
        return {f, d1, d2};
    }

private:
    Profile profile_;
    double k_, h_;
};

class SampledStrength final : public StrengthCurve {
public:
    explicit SampledStrength(num::CosineSeries series) : series_(std::move(series)) {}
    Jet3 jet(double t) const override {
        double v[3];
        series_.eval(t, v);
        return {v[0], v[1], v[2]};
    }

private:
    num::CosineSeries series_;
};

class ScaledStrength final : public StrengthCurve {
public:
    ScaledStrength(std::shared_ptr<const StrengthCurve> base, double scale)
        : base_(std::move(base)), s_(scale) {}
    Jet3 jet(double t) const override {
        const Jet3 j = base_->jet(t);
        return {s_ * j.f, s_ * j.d1, s_ * j.d2};
    }

private:
    std::shared_ptr<const StrengthCurve> base_;
    double s_;
};

// ---------------------------------------------------------------------------

class Strength {
public:
    Strength() : Strength(std::make_shared<ConstantStrength>(1.0), "constant", true) {}

    Strength(std::shared_ptr<const StrengthCurve> curve, std::string kind, bool normalized)
        : curve_(std::move(curve)), kind_(std::move(kind)), normalized_(normalized) {}

    Jet3 jet(double t) const { return curve_->jet(t); }
    double f(double t) const { return curve_->jet(t).f; }
    bool normalized() const { return normalized_; }
    const std::string& kind() const { return kind_; }
    std::shared_ptr<const StrengthCurve> curve() const { return curve_; }

private:
    std::shared_ptr<const StrengthCurve> curve_;
    std::string kind_;
    bool normalized_;
};

inline double strength_area(const Profile& p, const Strength& f) {
    return num::integrate([&](double t) { return p.gamma(t) * f.f(t); }, 0.0, p.ell(), 1e-12);
}

inline Strength make_constant_strength() { return Strength(); }

// Cosine bump, rescaled so that the magnetic form has total integral 4 pi
// over the normalized surface (\int gamma f = 2).
inline Strength make_bump_strength(const Profile& p, double c, int mode = 1) {
    auto raw = std::make_shared<BumpStrength>(1.0, c, mode, p.ell());
    const double area = num::integrate([&](double t) { return p.gamma(t) * raw->jet(t).f; },
                                       0.0, p.ell(), 1e-12);
    if (!(area > 0.0)) throw InfeasibleParams("bump strength not positive");
    auto scaled = std::make_shared<ScaledStrength>(raw, 2.0 / area);
    return Strength(scaled, "bump(c=" + std::to_string(c) + ",mode=" + std::to_string(mode) + ")", true);
}

inline Strength make_rigid_strength(const Profile& p, double k, double h) {
    auto curve = std::make_shared<RigidStrength>(p, k, h);
    Strength s(curve, "rigid(k=" + std::to_string(k) + ",h=" + std::to_string(h) + ")", false);
    const double area = strength_area(p, s);
    return Strength(curve, s.kind(), std::fabs(area - 2.0) < 1e-9);
}

inline Strength make_sampled_strength(const Profile& p, const std::vector<double>& samples,
                                      bool renormalize = true) {
    auto series = num::CosineSeries::fit(samples, p.ell());
    auto curve = std::make_shared<SampledStrength>(std::move(series));
    if (!renormalize) {
        Strength s(curve, "samples", false);
        return Strength(curve, "samples", std::fabs(strength_area(p, s) - 2.0) < 1e-9);
    }
    const double area = num::integrate([&](double t) { return p.gamma(t) * curve->jet(t).f; },
                                       0.0, p.ell(), 1e-12);
    if (!(area > 0.0)) throw InfeasibleParams("sampled strength not positive");
    return Strength(std::make_shared<ScaledStrength>(curve, 2.0 / area), "samples|normalized", true);
}

inline Strength normalize(const Profile& p, const Strength& f) {
    const double area = strength_area(p, f);
    if (!(area > 0.0)) throw InfeasibleParams("strength area must be positive");
    return Strength(std::make_shared<ScaledStrength>(f.curve(), 2.0 / area),
                    f.kind() + "|normalized", true);
}

} // namespace magsphere

#endif
