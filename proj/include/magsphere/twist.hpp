#ifndef MAGSPHERE_TWIST_HPP
#define MAGSPHERE_TWIST_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "magsphere/dynamics.hpp"
#include "magsphere/errors.hpp"
#include "magsphere/selfint.hpp"

namespace magsphere {

// Twist coefficient -df/(gamma f^3) extended to the poles.
inline double omega_f(const Profile& p, const Strength& f, double t) {
    const double margin = 1e-4 * p.ell();
    const Jet3 s = f.jet(t);
    if (t < margin) return -s.d2 / (s.f * s.f * s.f);
    if (t > p.ell() - margin) return s.d2 / (s.f * s.f * s.f);
    return -s.d1 / (p.gamma(t) * s.f * s.f * s.f);
}

inline double omega_f_inf(const Profile& p, const Strength& f) {
    double w = 1e300;
    for (int i = 0; i <= 2048; ++i)
        w = std::min(w, std::fabs(omega_f(p, f, p.ell() * i / 2048.0)));
    return w;
}

// Longitude increment of the half return map, computed with phi as the
// independent variable:
//   dt/dphi = m cos(phi) / (f - m dgamma sin(phi)/gamma)
//   dtheta/dphi = m sin(phi) / (gamma f - dgamma m sin(phi))
// For u < 0 the arc starts at (|u|, -pi/2) and runs to phi = +pi/2; for
// u > 0 it starts at (u, +pi/2) and runs to phi = 3 pi/2.
struct HalfMap {
    double theta_m = 0; // longitude increment
    double t_end = 0;
    double u_image = 0; // section coordinate of the image point
    double psi_m = 0;   // theta_m + pi on sign-changing crossings
};

inline HalfMap theta_m(const Flow& flow, double u, double tol = 1e-11) {
    const double L = flow.ell();
    if (!(u > -L && u < L) || u == 0.0) throw Error("theta_m: u must lie in (-ell, ell) \\ {0}");
    const double t0 = std::fabs(u);
    const double phi0 = (u < 0) ? -M_PI / 2 : M_PI / 2;
    const double phi1 = phi0 + M_PI;

    auto rhs = [&flow](double phi, const double* y, double* dy) {
        const Jet4 j = flow.profile().jet(y[0]);
        const double f = flow.strength().f(y[0]);
        const double sp = std::sin(phi), cp = std::cos(phi);
        const double denom = f - flow.m() * j.d1 * sp / j.g;
        if (!(denom > 1e-12))
            throw NonMonotone("phi is not monotone along the arc (m too large for this u)");
        dy[0] = flow.m() * cp / denom;
        dy[1] = flow.m() * sp / (j.g * denom);
    };

    std::vector<double> y = {t0, 0.0};
    num::Dopri5 solver(2);
    num::OdeOptions opts;
    opts.rtol = tol;
    opts.atol = tol * 1e-2;
    solver.run(rhs, phi0, y, phi1, opts, nullptr);

    HalfMap hm;
    hm.theta_m = y[1];
    hm.t_end = y[0];
    hm.u_image = (u < 0) ? y[0] : -y[0];
    hm.psi_m = hm.theta_m + M_PI;
    return hm;
}

// F_m^2(u, psi) = (u, psi + 2 psi_m(u)): u' = u holds analytically by the
// reflection symmetry; the direct-flow consistency of the section return is
// checked separately (see flow_half_map).
struct ReturnSquared {
    double u = 0, psi = 0;
    double psi_shift = 0;
};

inline ReturnSquared return_map_squared(const Flow& flow, double u, double psi,
                                        double tol = 1e-11) {
    const HalfMap hm = theta_m(flow, u, tol);
    ReturnSquared r;
    r.u = u;
    r.psi_shift = std::remainder(2.0 * hm.psi_m, 2.0 * M_PI);
    r.psi = std::remainder(psi + 2.0 * hm.psi_m, 2.0 * M_PI);
    return r;
}

// Independent verification path: drives the full (t, phi, theta) flow through
// one phi half-turn and reports the section data plus timing.
struct FlowHalfMap {
    double u_image = 0;
    double theta_advance = 0;
    double flow_time = 0;
    FullState end_state;
};

inline FlowHalfMap flow_half_map(const Flow& flow, double u, double theta0 = 0.0,
                                 const num::OdeOptions& opts = {}) {
    const double t0 = std::fabs(u);
    FullState s0{t0, (u < 0) ? -M_PI / 2 : M_PI / 2, theta0};
    // terminate when phi has advanced by pi
    const double phi_target = s0.phi + M_PI;
    StopEvent ev;
    ev.g = [phi_target](double, const FullState& st) { return st.phi - phi_target; };
    ev.direction = +1;
    ev.start_after = 1e-9;
    auto res = integrate(flow, s0, 1e6, opts, ev);
    if (!res.stopped) throw Error("flow_half_map: section crossing not reached");
    FlowHalfMap out;
    out.end_state = res.state_stop;
    out.flow_time = res.s_stop;
    out.theta_advance = res.state_stop.theta - theta0;
    const double sin_phi = std::sin(res.state_stop.phi);
    out.u_image = (sin_phi > 0) ? res.state_stop.t : -res.state_stop.t;
    return out;
}

// ---------------------------------------------------------------------------
// Richardson extrapolation of theta_m / m^2

struct TwistFit {
    double limit = 0;  // extrapolated lim theta_m/m^2
    double order = 0;  // empirical convergence order in m
    std::vector<double> ratios;
};

// Neville table on x = m^2 -> 0.
inline double neville_to_zero(const std::vector<double>& x, std::vector<double> y) {
    const std::size_t n = x.size();
    for (std::size_t k = 1; k < n; ++k)
        for (std::size_t i = 0; i + k < n; ++i)
            y[i] = y[i] + (y[i] - y[i + 1]) * x[i] / (x[i + k] - x[i]);
    return y[0];
}

inline TwistFit twist_fit(const Flow& flow_template, double u,
                          const std::vector<double>& m_sequence) {
    TwistFit fit;
    std::vector<double> x, y;
    for (double m : m_sequence) {
        Flow flow = flow_template.with_m(m);
        const HalfMap hm = theta_m(flow, u);
        fit.ratios.push_back(hm.theta_m / (m * m));
        x.push_back(m * m);
        y.push_back(fit.ratios.back());
    }
    fit.limit = neville_to_zero(x, y);
    // empirical order from successive residuals
    double order = 0;
    int cnt = 0;
    for (std::size_t i = 0; i + 1 < fit.ratios.size(); ++i) {
        const double r0 = std::fabs(fit.ratios[i] - fit.limit);
        const double r1 = std::fabs(fit.ratios[i + 1] - fit.limit);
        if (r0 > 0 && r1 > 0 && m_sequence[i] != m_sequence[i + 1]) {
            order += std::log(r0 / r1) / std::log(m_sequence[i] / m_sequence[i + 1]);
            ++cnt;
        }
    }
    fit.order = cnt ? order / cnt : 0.0;
    return fit;
}

inline TwistFit twist_fit(const Profile& p, const Strength& f, double u,
                          const std::vector<double>& m_sequence) {
    Flow flow(m_sequence.front(), p, f);
    return twist_fit(flow, u, m_sequence);
}

// Sampled twist data over a u-grid at fixed m.
struct TwistProfile {
    double m = 0;
    std::vector<double> u;
    std::vector<double> theta;
    std::vector<double> psi;
    std::vector<double> ratio; // theta_m / m^2, the per-u twist estimate
};

inline TwistProfile compute_twist_profile(const Flow& flow, const std::vector<double>& u_grid) {
    TwistProfile tp;
    tp.m = flow.m();
    for (double u : u_grid) {
        const HalfMap hm = theta_m(flow, u);
        tp.u.push_back(u);
        tp.theta.push_back(hm.theta_m);
        tp.psi.push_back(hm.psi_m);
        tp.ratio.push_back(hm.theta_m / (tp.m * tp.m));
    }
    return tp;
}

// ---------------------------------------------------------------------------
// Resonant periodic orbits of the return map

struct ResonanceOrbit {
    double u = 0;          // section coordinate of the periodic point
    int q = 0;             // theta_m(u) = pi / q; orbit closes after 2q crossings
    double closure_error = 0;
    double flow_period = 0;
    double reeb_period = 0;
    std::vector<CurvePoint> points; // projected curve, closed
};

// Finds u with theta_m(u) = target in the bracket [u_a, u_b] (same sign).
inline std::optional<double> solve_theta_m(const Flow& flow, double target, double u_a,
                                           double u_b) {
    auto g = [&](double u) { return theta_m(flow, u).theta_m - target; };
    const double ga = g(u_a), gb = g(u_b);
    if (ga * gb > 0) return std::nullopt;
    return num::brent(g, u_a, u_b, 1e-13);
}

// Integrates the full orbit through 2q section crossings, recording the
// projected curve and the Reeb period (d tau = h ds).
inline ResonanceOrbit trace_resonance_orbit(const Flow& flow, double u, int q,
                                            int samples_per_crossing = 48) {
    ResonanceOrbit orbit;
    orbit.u = u;
    orbit.q = q;
    FullState s0{std::fabs(u), (u < 0) ? -M_PI / 2 : M_PI / 2, 0.0};
    FullState cur = s0;
    num::OdeOptions opts;
    opts.rtol = 1e-11;
    opts.atol = 1e-13;
    double s_total = 0.0, tau_total = 0.0;
    for (int k = 0; k < 2 * q; ++k) {
        const double phi_target = cur.phi + M_PI;
        StopEvent ev;
        ev.g = [phi_target](double, const FullState& st) { return st.phi - phi_target; };
        ev.direction = +1;
        ev.start_after = 1e-9;
        auto res = integrate(flow, cur, 1e6, opts, ev);
        if (!res.stopped) throw NonClosedOrbit("section crossing not reached");
        // sample the crossing-to-crossing arc
        for (int i = 0; i < samples_per_crossing; ++i) {
            const double s = res.s_stop * i / samples_per_crossing;
            const FullState st = res.traj.state(s);
            orbit.points.push_back({st.t, st.theta});
        }
        // Reeb time via the dense trajectory
        const auto rt = reeb_times(res.traj);
        tau_total += rt.total();
        s_total += res.s_stop;
        cur = res.state_stop;
        cur.phi = std::remainder(cur.phi, 2.0 * M_PI); // keep phi bounded
    }
    orbit.points.push_back({s0.t, s0.theta});
    orbit.flow_period = s_total;
    orbit.reeb_period = tau_total;
    const double dth = std::remainder(cur.theta - s0.theta, 2.0 * M_PI);
    orbit.closure_error = std::hypot(cur.t - s0.t, dth) +
                          std::fabs(std::remainder(cur.phi - s0.phi, 2.0 * M_PI));
    return orbit;
}

} // namespace magsphere

#endif
