#ifndef MAGSPHERE_GEOMETRY_HPP
#define MAGSPHERE_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "magsphere/errors.hpp"
#include "magsphere/numerics/quadrature.hpp"
#include "magsphere/numerics/roots.hpp"
#include "magsphere/profile.hpp"
#include "magsphere/strength.hpp"

namespace magsphere {

struct GeometryScalars {
    double Gamma = 0;      // primitive of gamma, Gamma(0) = -1
    double Gamma0 = 0;     // primitive of gamma, Gamma0(0) = 0
    double K = 0;          // Gaussian curvature
    double beta_theta = 0; // Gamma_f + dgamma
    double Gamma_f = 0;    // primitive of gamma*f, Gamma_f(0) = -1
};

// Number of scan nodes needed to resolve the profile's smallest feature
// (~ 1/sqrt(max K) for caps of small radius).
inline int feature_nodes(const Profile& p, int base = 4096) {
    double kmax = 1.0;
    for (int i = 1; i < 512; ++i) {
        const double t = p.ell() * i / 512.0;
        kmax = std::max(kmax, std::fabs(p.K(t)));
    }
    const double n = 8.0 * p.ell() * std::sqrt(kmax);
    return std::min(1 << 20, std::max(base, static_cast<int>(n)));
}

// Shared caches for a (profile, strength) pair.
class Surface {
public:
    Surface(Profile p, Strength f) : p_(std::move(p)), f_(std::move(f)) {
        const Profile& pr = p_;
        const Strength& st = f_;
        int_gf_ = num::Primitive([pr, st](double t) { return pr.gamma(t) * st.f(t); }, 0.0,
                                 p_.ell(), 0.0, 1e-10);
        scan_nodes_ = feature_nodes(p_);
    }

    int scan_nodes() const { return scan_nodes_; }

    const Profile& profile() const { return p_; }
    const Strength& strength() const { return f_; }
    double ell() const { return p_.ell(); }

    double Gamma_f(double t) const { return -1.0 + int_gf_(t); }

    double beta_theta(double t) const { return Gamma_f(t) + p_.jet(t).d1; }

    // beta_theta / gamma with pole limits.
    double beta_over_gamma(double t) const {
        const double margin = 1e-4 * ell();
        if (t < margin) return 0.5 * (f_.f(t) - p_.K(t)) * t;
        if (t > ell() - margin) return -0.5 * (f_.f(t) - p_.K(t)) * (ell() - t);
        return beta_theta(t) / p_.gamma(t);
    }

    GeometryScalars scalars(double t) const {
        GeometryScalars s;
        s.Gamma0 = p_.Gamma0(t);
        s.Gamma = s.Gamma0 - 1.0;
        s.K = p_.K(t);
        s.Gamma_f = Gamma_f(t);
        s.beta_theta = s.Gamma_f + p_.jet(t).d1;
        return s;
    }

private:
    Profile p_;
    Strength f_;
    num::Primitive int_gf_;
    int scan_nodes_ = 4096;
};

inline GeometryScalars scalars(const Profile& p, const Strength& f, double t) {
    return Surface(p, f).scalars(t);
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationCheck {
    std::string name;
    double residual = 0;
    double tol = 0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool pass = true;

    void add(const std::string& name, double residual, double tol) {
        const bool ok = std::fabs(residual) <= tol;
        checks.push_back({name, residual, tol, ok});
        pass = pass && ok;
    }
    void add_bound(const std::string& name, double residual, double tol) {
        // residual must be <= tol (one-sided)
        const bool ok = residual <= tol;
        checks.push_back({name, residual, tol, ok});
        pass = pass && ok;
    }
};

inline ValidationReport validate(const Profile& p, const Strength& f, double tol = 1e-8) {
    ValidationReport r;
    const double L = p.ell();
    const int n = feature_nodes(p, 2048);
    double min_gamma = 1e300, max_abs_d1 = 0.0, min_f = 1e300;
    try {
        for (int i = 1; i < n; ++i) {
            const double t = L * i / n;
            const Jet4 j = p.jet(t);
            const Jet3 s = f.jet(t);
            if (!std::isfinite(j.g) || !std::isfinite(j.d1) || !std::isfinite(j.d2) ||
                !std::isfinite(j.d3) || !std::isfinite(s.f))
                throw NonEvaluable("non-finite evaluator value at t=" + std::to_string(t));
            min_gamma = std::min(min_gamma, j.g);
            max_abs_d1 = std::max(max_abs_d1, std::fabs(j.d1));
            min_f = std::min(min_f, s.f);
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw NonEvaluable(e.what());
    }

    r.add("gamma(0) = 0", p.gamma(0.0), tol);
    r.add("gamma(ell) = 0", p.gamma(L), tol);
    r.add_bound("gamma > 0 inside", -min_gamma, 0.0);
    r.add("dgamma(0) = 1", p.jet(0.0).d1 - 1.0, tol);
    r.add("dgamma(ell) = -1", p.jet(L).d1 + 1.0, tol);
    r.add_bound("|dgamma| < 1 inside", max_abs_d1 - 1.0, 0.0);
    r.add("ddgamma(0) = 0", p.jet(0.0).d2, tol);
    r.add("ddgamma(ell) = 0", p.jet(L).d2, tol);
    r.add("area = 2", p.area() - 2.0, tol);

    r.add_bound("f > 0", -min_f + 0.0, 0.0);
    r.add("df(0) = 0", f.jet(0.0).d1, tol);
    r.add("df(ell) = 0", f.jet(L).d1, tol);
    if (f.normalized()) r.add("int gamma f = 2", strength_area(p, f) - 2.0, std::max(tol, 1e-9));
    return r;
}

// ---------------------------------------------------------------------------
// m_gamma and the contact interval

// sup over [0, ell] of |beta_theta / gamma| for f == 1.
inline double m_gamma(const Profile& p) {
    const double L = p.ell();
    const int n = feature_nodes(p);
    auto val = [&](double t) { return std::fabs(p.beta_over_gamma(t, p.Gamma(t))); };
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = val(L * i / n);
    // top local maxima, refined by golden section
    std::vector<int> cand;
    for (int i = 1; i < n; ++i)
        if (v[i] >= v[i - 1] && v[i] >= v[i + 1]) cand.push_back(i);
    std::sort(cand.begin(), cand.end(), [&](int a, int b) { return v[a] > v[b]; });
    if (cand.size() > 5) cand.resize(5);
    double best = 0.0;
    for (int i : cand) {
        const double a = L * (i - 1) / n, b = L * (i + 1) / n;
        const double t = num::golden_max(val, a, b, 1e-10);
        best = std::max(best, val(t));
    }
    for (int i = 0; i <= n; ++i) best = std::max(best, v[i]);
    return best;
}

struct ContactBounds {
    double m_gamma = 0;
    bool full_ray = true;
    double m_minus = 0, m_plus = 0; // valid when !full_ray
};

inline ContactBounds contact_bounds(const Profile& p) {
    ContactBounds b;
    b.m_gamma = m_gamma(p);
    if (b.m_gamma < 2.0) return b;
    const double disc = std::sqrt(b.m_gamma * b.m_gamma - 4.0);
    b.full_ray = false;
    b.m_minus = (b.m_gamma - disc) / 2.0;
    b.m_plus = (b.m_gamma + disc) / 2.0;
    return b;
}

struct KmReport {
    bool positive = false;
    double margin = 0; // inf over t (worst case over the fibre angle)
};

// Magnetic curvature positivity: K_m = m^2 K - m (df o j) + f; the fibre
// worst case of the sin term gives inf_t (m^2 K + f - m |df|).
inline KmReport km_positive(const Profile& p, const Strength& f, double m) {
    const double L = p.ell();
    const int n = feature_nodes(p);
    auto val = [&](double t) {
        const Jet3 s = f.jet(t);
        return m * m * p.K(t) + s.f - m * std::fabs(s.d1);
    };
    double worst = val(0.0);
    double t_worst = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double t = L * i / n;
        const double v = val(t);
        if (v < worst) { worst = v; t_worst = t; }
    }
    const double a = std::max(0.0, t_worst - L / n), b = std::min(L, t_worst + L / n);
    const double t = num::golden_min(val, a, b, 1e-10);
    worst = std::min(worst, val(t));
    return {worst > 0.0, worst};
}

} // namespace magsphere

#endif
