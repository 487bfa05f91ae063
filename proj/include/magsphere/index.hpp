#ifndef MAGSPHERE_INDEX_HPP
#define MAGSPHERE_INDEX_HPP

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "magsphere/dynamics.hpp"
#include "magsphere/errors.hpp"

namespace magsphere {

using Mat2 = std::array<double, 4>; // row major: [a b; c d]

inline Mat2 mat_mul(const Mat2& A, const Mat2& B) {
    return {A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3],
            A[2] * B[0] + A[3] * B[2], A[2] * B[1] + A[3] * B[3]};
}
inline double mat_det(const Mat2& A) { return A[0] * A[3] - A[1] * A[2]; }
inline double mat_norm(const Mat2& A) {
    return std::sqrt(A[0] * A[0] + A[1] * A[1] + A[2] * A[2] + A[3] * A[3]);
}
inline Mat2 mat_sub(const Mat2& A, const Mat2& B) {
    return {A[0] - B[0], A[1] - B[1], A[2] - B[2], A[3] - B[3]};
}

// positive rotation generator: exp(J t) rotates counterclockwise
constexpr Mat2 kJ{0.0, -1.0, 1.0, 0.0};

inline Mat2 rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c, -s, s, c};
}

// exp(t [[0,-1],[b,0]]): elliptic for b > 0, shear for b = 0, hyperbolic b < 0.
inline Mat2 exp_twist_block(double b, double t) {
    if (b > 0) {
        const double w = std::sqrt(b);
        return {std::cos(w * t), -std::sin(w * t) / w, w * std::sin(w * t), std::cos(w * t)};
    }
    if (b == 0) return {1.0, -t, 0.0, 1.0};
    const double k = std::sqrt(-b);
    return {std::cosh(k * t), -std::sinh(k * t) / k, -k * std::sinh(k * t), std::cosh(k * t)};
}

// ---------------------------------------------------------------------------
// Symplectic paths and the Maslov interval

struct SymplecticPath {
    double T = 0;
    std::vector<double> times;
    std::vector<Mat2> samples; // samples[0] must be the identity
    std::string provenance;    // "analytic-exponential" | "integrated"

    void check() const {
        if (samples.empty() || times.size() != samples.size())
            throw Error("SymplecticPath: inconsistent sampling");
        if (mat_norm(mat_sub(samples.front(), Mat2{1, 0, 0, 1})) > 1e-12)
            throw Error("SymplecticPath: path must start at the identity");
        for (const auto& M : samples)
            if (std::fabs(mat_det(M) - 1.0) > 1e-8)
                throw Error("SymplecticPath: |det - 1| exceeds 1e-8");
    }
};

inline SymplecticPath make_exponential_path(double b, double T, int n_samples = 512) {
    SymplecticPath p;
    p.T = T;
    p.provenance = "analytic-exponential";
    for (int i = 0; i <= n_samples; ++i) {
        const double t = T * i / n_samples;
        p.times.push_back(t);
        p.samples.push_back(exp_twist_block(b, t));
    }
    return p;
}

inline SymplecticPath make_rotation_path(double turns, int n_samples = 512) {
    SymplecticPath p;
    p.T = 1.0;
    p.provenance = "analytic-exponential";
    for (int i = 0; i <= n_samples; ++i) {
        const double t = static_cast<double>(i) / n_samples;
        p.times.push_back(t);
        p.samples.push_back(rotation(2.0 * M_PI * turns * t));
    }
    return p;
}

struct MaslovInterval {
    double lo = 0, hi = 0;
    double length() const { return hi - lo; }
};

namespace detail_idx {

// Winding of the direction u under the path, by continuous angle tracking.
inline double winding_turns(const SymplecticPath& p, double ux, double uy) {
    double prev = std::atan2(uy, ux);
    double acc = 0.0;
    for (const auto& M : p.samples) {
        const double vx = M[0] * ux + M[1] * uy;
        const double vy = M[2] * ux + M[3] * uy;
        const double ang = std::atan2(vy, vx);
        const double d = std::remainder(ang - prev, 2.0 * M_PI);
        if (std::fabs(d) > M_PI / 2)
            throw UnderResolved("consecutive path samples rotate by more than pi/2");
        acc += d;
        prev = ang;
    }
    return acc / (2.0 * M_PI);
}

// Relative rotation angle of Psi(T) on direction alpha, in (-pi, pi].
inline double end_rotation(const Mat2& A, double alpha) {
    const double ux = std::cos(alpha), uy = std::sin(alpha);
    const double vx = A[0] * ux + A[1] * uy;
    const double vy = A[2] * ux + A[3] * uy;
    const double cross = ux * vy - uy * vx;
    const double dot = ux * vx + uy * vy;
    return std::atan2(cross, dot);
}

} // namespace detail_idx

// Maslov interval I(Psi) = { winding(u) : u != 0 }, computed by sweeping
// projective directions, refining the extremes and snapping the endpoints to
// the rotation data of the endpoint matrix Psi(T) (which determines
// e^{2 pi i I(Psi)}).
inline MaslovInterval winding_interval(const SymplecticPath& path, int n_dirs = 720) {
    path.check();
    double wmin = 1e300, wmax = -1e300;
    double amin = 0, amax = 0;
    for (int i = 0; i < n_dirs; ++i) {
        const double a = M_PI * i / n_dirs;
        const double w = detail_idx::winding_turns(path, std::cos(a), std::sin(a));
        if (w < wmin) { wmin = w; amin = a; }
        if (w > wmax) { wmax = w; amax = a; }
    }
    const double da = M_PI / n_dirs;
    auto wind_of = [&](double a) {
        return detail_idx::winding_turns(path, std::cos(a), std::sin(a));
    };
    const double a_lo = num::golden_min(wind_of, amin - da, amin + da, 1e-12);
    const double a_hi = num::golden_max(wind_of, amax - da, amax + da, 1e-12);
    wmin = std::min(wmin, wind_of(a_lo));
    wmax = std::max(wmax, wind_of(a_hi));

    // snap: the fractional parts of the endpoints are extremes of the
    // endpoint-matrix rotation angle over directions
    const Mat2& A = path.samples.back();
    double rmin = 1e300, rmax = -1e300;
    for (int i = 0; i < 4 * n_dirs; ++i) {
        const double a = M_PI * i / (4 * n_dirs);
        const double r = detail_idx::end_rotation(A, a);
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    auto rot_of = [&](double a) { return detail_idx::end_rotation(A, a); };
    for (int i = 0; i < 4 * n_dirs; ++i) {
        const double a = M_PI * i / (4 * n_dirs);
        const double r0 = rot_of(a);
        if (r0 == rmin) {
            const double a2 = num::golden_min(rot_of, a - da, a + da, 1e-13);
            rmin = std::min(rmin, rot_of(a2));
        }
        if (r0 == rmax) {
            const double a2 = num::golden_max(rot_of, a - da, a + da, 1e-13);
            rmax = std::max(rmax, rot_of(a2));
        }
    }
    // Each endpoint's fractional part is rmin/2pi or rmax/2pi up to an
    // integer; snap to the nearest candidate.
    auto snap = [&](double w) {
        const double c1 = std::round(w - rmin / (2.0 * M_PI)) + rmin / (2.0 * M_PI);
        const double c2 = std::round(w - rmax / (2.0 * M_PI)) + rmax / (2.0 * M_PI);
        return std::fabs(c1 - w) <= std::fabs(c2 - w) ? c1 : c2;
    };
    MaslovInterval iv;
    iv.lo = snap(wmin);
    iv.hi = snap(wmax);
    if (iv.hi < iv.lo) std::swap(iv.lo, iv.hi);
    if (iv.length() >= 0.5)
        throw Error("winding interval has length >= 1/2 (invalid symplectic path data)");
    return iv;
}

struct MaslovData {
    MaslovInterval interval;
    int mu_lower = 0, mu_upper = 0;
    bool degenerate = false;
};

// Case table for mu^l / mu^u from the interval; an integer endpoint marks a
// degenerate path.
inline MaslovData maslov(const SymplecticPath& path, int n_dirs = 720,
                         double int_tol = 1e-7) {
    MaslovData md;
    md.interval = winding_interval(path, n_dirs);
    double a = md.interval.lo, b = md.interval.hi;
    const double ra = std::round(a), rb = std::round(b);
    const bool a_int = std::fabs(a - ra) < int_tol;
    const bool b_int = std::fabs(b - rb) < int_tol;
    if (a_int) a = ra;
    if (b_int) b = rb;
    md.degenerate = a_int || b_int;

    if (a_int && b_int && a == b) { // point {k}
        const int k = static_cast<int>(a);
        md.mu_lower = 2 * k - 1;
        md.mu_upper = 2 * k + 1;
        return md;
    }
    if (a_int && std::floor(b) >= a && !b_int) {
        // left endpoint integer k, interval reaches into (k, k+1)
        const int k = static_cast<int>(a);
        md.mu_lower = 2 * k;
        md.mu_upper = 2 * k + 1;
        return md;
    }
    if (b_int && !a_int) {
        const int k = static_cast<int>(b);
        md.mu_lower = 2 * k - 1;
        md.mu_upper = 2 * k;
        return md;
    }
    // no integer endpoint: either an interior integer or none
    const double kf = std::ceil(a);
    if (kf <= b && !a_int && !b_int && std::fabs(kf - a) > int_tol && std::fabs(kf - b) > int_tol) {
        const int k = static_cast<int>(kf);
        md.mu_lower = md.mu_upper = 2 * k;
        return md;
    }
    const int k = static_cast<int>(std::floor(a));
    md.mu_lower = md.mu_upper = 2 * k + 1;
    return md;
}

// ---------------------------------------------------------------------------
// Linearized Reeb flow in the global symplectic frame (H-check, X-check)

// Coordinate components of the frame vectors and the contact projection at a
// state z; the trivialization is Upsilon(Z) = sqrt(h) (eta(Z), lambda(Z)).
class FrameProjector {
public:
    FrameProjector(const Flow& flow, const FullState& z) : flow_(flow) {
        const Jet4 j = flow.profile().jet(z.t);
        const double f = flow.strength().f(z.t);
        const double sp = std::sin(z.phi), cp = std::cos(z.phi);
        const double bog = flow.surface().beta_over_gamma(z.t);
        h_ = flow.m() * flow.m() - flow.m() * bog * sp + f;
        sqrt_h_ = std::sqrt(h_);
        if (!(h_ > 0)) throw NonContactSample("h <= 0 at state");
        // coframe rows: lambda, eta (dt, dphi, dtheta components)
        lambda_[0] = cp; lambda_[1] = 0.0; lambda_[2] = j.g * sp;
        eta_[0] = -sp; eta_[1] = 0.0; eta_[2] = j.g * cp;
        // contact form alpha = m cos(phi) dt + dphi + I(t, phi) dtheta
        alpha_[0] = flow_.m() * cp;
        alpha_[1] = 1.0;
        alpha_[2] = flow_.m() * j.g * sp - flow_.surface().Gamma_f(z.t);
        // Reeb vector R = X^m / h
        const double denom_g = j.g;
        R_[0] = flow_.m() * cp / h_;
        R_[1] = (f - flow_.m() * j.d1 * sp / denom_g) / h_;
        R_[2] = flow_.m() * sp / (denom_g * h_);
        // frame vectors H-check, X-check in coordinates
        const double bH = bog * cp;       // beta(j v)
        const double bX = bog * sp;       // beta(v)
        // H = -sin(phi) dt - (dgamma cos(phi)/gamma) dphi + (cos(phi)/gamma) dtheta
        Hc_[0] = -sp;
        Hc_[1] = -j.d1 * cp / j.g + bH;
        Hc_[2] = cp / j.g;
        // X = cos(phi) dt - (dgamma sin(phi)/gamma) dphi + (sin(phi)/gamma) dtheta
        Xc_[0] = cp;
        Xc_[1] = -j.d1 * sp / j.g + (bX - flow_.m());
        Xc_[2] = sp / j.g;
        for (int i = 0; i < 3; ++i) { Hc_[i] /= sqrt_h_; Xc_[i] /= sqrt_h_; }
    }

    double h() const { return h_; }
    const std::array<double, 3>& frame_H() const { return Hc_; }
    const std::array<double, 3>& frame_X() const { return Xc_; }

    // Upsilon applied to the contact projection of a coordinate vector.
    std::array<double, 2> project(const std::array<double, 3>& W) const {
        const double aW = alpha_[0] * W[0] + alpha_[1] * W[1] + alpha_[2] * W[2];
        std::array<double, 3> V{W[0] - aW * R_[0], W[1] - aW * R_[1], W[2] - aW * R_[2]};
        const double e = eta_[0] * V[0] + eta_[1] * V[1] + eta_[2] * V[2];
        const double l = lambda_[0] * V[0] + lambda_[1] * V[1] + lambda_[2] * V[2];
        return {sqrt_h_ * e, sqrt_h_ * l};
    }

private:
    const Flow& flow_;
    double h_ = 0, sqrt_h_ = 0;
    std::array<double, 3> lambda_{}, eta_{}, alpha_{}, R_{}, Hc_{}, Xc_{};
};

// Latitude-orbit linearization: in the (H-check, X-check) frame the
// coefficient path solves da/dt = B a with the constant matrix
// B = [[0, -1], [b, 0]], b = f/h - m H(h)/h^2, H(h) = -+ d/dt h(t, +-pi/2).
inline double latitude_twist_coefficient(const Flow& flow, const LatitudeOrbit& orbit) {
    const double t0 = orbit.t0;
    const double f = flow.strength().f(t0);
    const double h = flow.h(t0, orbit.sign);
    const double dt = 1e-6 * flow.ell();
    const double hp = flow.h(t0 + dt, orbit.sign), hm = flow.h(t0 - dt, orbit.sign);
    const double dh_dt = (hp - hm) / (2.0 * dt);
    const double Hh = -orbit.sign * dh_dt;
    return f / h - flow.m() * Hh / (h * h);
}

// Reeb-time linearized path over k iterates of a latitude orbit.
inline SymplecticPath linearized_latitude_path(const Flow& flow, const LatitudeOrbit& orbit,
                                               int k_iterates = 1, int samples_per_period = 512) {
    const double b = latitude_twist_coefficient(flow, orbit);
    const double T = k_iterates * orbit.reeb_period;
    SymplecticPath p = make_exponential_path(b, T, k_iterates * samples_per_period);
    p.provenance = "analytic-exponential";
    return p;
}

// General orbits: integrate the variational flow of X^m alongside the orbit
// and project through the frame at matched Reeb times.
inline SymplecticPath linearized_orbit_path(const Flow& flow, const FullState& z0,
                                            double reeb_period, int n_samples = 1024) {
    FrameProjector P0(flow, z0);
    const auto H0 = P0.frame_H();
    const auto X0 = P0.frame_X();

    // state: (t, phi, theta, M flattened 3x3 variational, tau)
    auto rhs = [&flow](double, const double* y, double* dy) {
        const Jet4 j = flow.profile().jet(y[0]);
        const Jet3 s = flow.strength().jet(y[0]);
        const double sp = std::sin(y[1]), cp = std::cos(y[1]);
        const double g = j.g, g1 = j.d1, g2 = j.d2;
        const double m = flow.m();
        dy[0] = m * cp;
        dy[1] = s.f - m * g1 * sp / g;
        dy[2] = m * sp / g;
        // Jacobian of the field wrt (t, phi, theta)
        const double d_dphi_t = s.d1 - m * sp * (g2 / g - g1 * g1 / (g * g));
        const double J[3][3] = {
            {0.0, -m * sp, 0.0},
            {d_dphi_t, -m * g1 * cp / g, 0.0},
            {-m * sp * g1 / (g * g), m * cp / g, 0.0},
        };
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                dy[3 + 3 * r + c] =
                    J[r][0] * y[3 + c] + J[r][1] * y[3 + 3 + c] + J[r][2] * y[3 + 6 + c];
        dy[12] = flow.h(y[0], sp); // Reeb time
    };

    std::vector<double> y(13, 0.0);
    y[0] = z0.t; y[1] = z0.phi; y[2] = z0.theta;
    y[3] = y[7] = y[11] = 1.0;

    SymplecticPath path;
    path.provenance = "integrated";
    path.T = reeb_period;

    num::Dopri5 solver(13);
    num::OdeOptions opts;
    opts.rtol = 1e-11;
    opts.atol = 1e-13;

    // sample at uniform Reeb times via tau-crossing events
    const double dir = reeb_period >= 0 ? 1.0 : -1.0;
    int next = 0;
    auto record = [&](const std::vector<double>& ys, double tau) {
        FullState z{ys[0], ys[1], ys[2]};
        FrameProjector P(flow, z);
        std::array<double, 3> MH{}, MX{};
        for (int r = 0; r < 3; ++r) {
            MH[r] = ys[3 + 3 * r] * H0[0] + ys[4 + 3 * r] * H0[1] + ys[5 + 3 * r] * H0[2];
            MX[r] = ys[3 + 3 * r] * X0[0] + ys[4 + 3 * r] * X0[1] + ys[5 + 3 * r] * X0[2];
        }
        const auto cH = P.project(MH);
        const auto cX = P.project(MX);
        path.times.push_back(tau);
        path.samples.push_back(Mat2{cH[0], cX[0], cH[1], cX[1]});
    };
    record(y, 0.0);
    ++next;

    std::vector<double> ytmp(13);
    auto cb = [&](const num::DenseStep& st, const double* y_end) -> num::StepControl {
        while (next <= n_samples) {
            const double tau_target = reeb_period * next / n_samples;
            if (dir * (y_end[12] - tau_target) < 0) break;
            // locate tau crossing inside the step
            const double sx = num::locate_event(
                st, [&](double, const double* yy) { return yy[12] - tau_target; }, st.s0,
                st.s0 + st.h, 1e-13);
            st.eval(sx, ytmp.data());
            record(ytmp, tau_target);
            ++next;
        }
        return next > n_samples ? num::StepControl::kStop : num::StepControl::kContinue;
    };
    solver.run(rhs, 0.0, y, dir * 1e6, opts, cb);
    if (next <= n_samples) throw NonClosedOrbit("variational integration ended early");
    return path;
}

// d Psi / d tau at tau = 0 by a symmetric finite difference of the
// linearized path over a short Reeb time.
inline Mat2 b_matrix_estimate(const Flow& flow, const FullState& z, double dtau = 1e-4) {
    // forward and backward short paths
    auto short_path = [&](double T) {
        SymplecticPath p = linearized_orbit_path(flow, z, T, 2);
        return p.samples.back();
    };
    const Mat2 Pf = short_path(dtau);
    const Mat2 Pb = short_path(-dtau);
    return {(Pf[0] - Pb[0]) / (2 * dtau), (Pf[1] - Pb[1]) / (2 * dtau),
            (Pf[2] - Pb[2]) / (2 * dtau), (Pf[3] - Pb[3]) / (2 * dtau)};
}

// ---------------------------------------------------------------------------
// Dynamical convexity report

struct DynConvexSample {
    FullState z;
    double deviation = 0; // ||B - J_st||
};

struct DynConvexReport {
    std::vector<double> m_values;
    std::vector<double> sup_deviation; // sup_z ||B^{m} - J_st|| per m
    double fit_exponent = 0;           // slope of log sup vs log m
    double C_estimate = 0;             // max over m of sup/m
    std::vector<int> mu_lower_doubled; // per latitude orbit at the largest m... see report
    bool mu_ok = false;                // all doubled latitudes have mu^l >= 3
    bool period_inequality = false;    // 2 pi / T0 < 1 - C m at the smallest m
    double T0_proxy = 0;
};

inline DynConvexReport dynconvex_report(const Profile& p, const Strength& f,
                                        const std::vector<double>& m_values, int samples,
                                        unsigned seed) {
    DynConvexReport rep;
    rep.m_values = m_values;
    auto surf = std::make_shared<const Surface>(p, f);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.15, 0.85), ua(0.0, 2.0 * M_PI);

    for (double m : m_values) {
        Flow flow(m, surf);
        double sup = 0.0;
        for (int i = 0; i < samples; ++i) {
            FullState z{p.ell() * ut(rng), ua(rng), ua(rng)};
            const Mat2 B = b_matrix_estimate(flow, z);
            sup = std::max(sup, mat_norm(mat_sub(B, kJ)));
        }
        rep.sup_deviation.push_back(sup);
    }
    // log-log fit
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(m_values.size());
    for (int i = 0; i < n; ++i) {
        const double x = std::log(m_values[i]), y = std::log(rep.sup_deviation[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    rep.fit_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.C_estimate = 0.0;
    for (int i = 0; i < n; ++i)
        rep.C_estimate = std::max(rep.C_estimate, rep.sup_deviation[i] / m_values[i]);

    // doubled latitude indices at the smallest m
    const double m_small = *std::min_element(m_values.begin(), m_values.end());
    Flow flow(m_small, surf);
    const auto lats = latitude_orbits(flow);
    rep.mu_ok = !lats.empty();
    double T0 = 1e300;
    for (const auto& o : lats) {
        SymplecticPath path = linearized_latitude_path(flow, o, 2);
        const MaslovData md = maslov(path);
        rep.mu_lower_doubled.push_back(md.mu_lower);
        rep.mu_ok = rep.mu_ok && md.mu_lower >= 3;
        T0 = std::min(T0, 2.0 * o.reeb_period);
    }
    rep.T0_proxy = T0;
    rep.period_inequality = (2.0 * M_PI / T0) < (1.0 - rep.C_estimate * m_small);
    return rep;
}

// ---------------------------------------------------------------------------
// Quaternionic double cover identity p0^* tau0 = -4 upsilon^* lambda_st

struct Quaternion {
    double w = 0, x = 0, y = 0, z = 0;

    Quaternion operator*(const Quaternion& q) const {
        return {w * q.w - x * q.x - y * q.y - z * q.z, w * q.x + x * q.w + y * q.z - z * q.y,
                w * q.y - x * q.z + y * q.w + z * q.x, w * q.z + x * q.y - y * q.x + z * q.w};
    }
    Quaternion operator+(const Quaternion& q) const { return {w + q.w, x + q.x, y + q.y, z + q.z}; }
    Quaternion conj() const { return {w, -x, -y, -z}; }
    double dot(const Quaternion& q) const { return w * q.w + x * q.x + y * q.y + z * q.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    Quaternion scaled(double s) const { return {s * w, s * x, s * y, s * z}; }
};

inline const Quaternion kQi{0, 1, 0, 0};
inline const Quaternion kQj{0, 0, 1, 0};

// Residual of (p0^* tau0)(W) + 4 (upsilon^* lambda_st)(W) at unit U with
// tangent W; exact algebra, roundoff only.
inline double cover_residual(const Quaternion& U, const Quaternion& W) {
    const Quaternion Ui = U.conj(); // inverse on the unit sphere
    const Quaternion u1 = Ui * kQi * U;
    const Quaternion u2 = Ui * kQj * U;
    // d(U^-1 a U)[W] = conj(W) a U + conj(U) a W on tangent vectors
    const Quaternion v2 = (W.conj() * kQj) * U + (Ui * kQj) * W;
    // j_0 at u1 applied to u2 is the cross product u1 x u2 = Im(u1 u2)
    const Quaternion cr = u1 * u2; // pure imaginary since u1 perp u2
    const double tau0 = v2.x * cr.x + v2.y * cr.y + v2.z * cr.z;
    const Quaternion iU = kQi * U;
    const double lam = 0.5 * iU.dot(W);
    return tau0 + 4.0 * lam;
}

struct CoverCheck {
    double max_residual = 0;
    int n_samples = 0;
};

inline CoverCheck quaternion_cover_check(int n_samples, unsigned seed,
                                         bool project_tangent = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CoverCheck out;
    out.n_samples = n_samples;
    for (int i = 0; i < n_samples; ++i) {
        Quaternion U{gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
        U = U.scaled(1.0 / U.norm());
        Quaternion W{gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
        if (project_tangent) {
            const double c = U.dot(W);
            W = {W.w - c * U.w, W.x - c * U.x, W.y - c * U.y, W.z - c * U.z};
        }
        out.max_residual = std::max(out.max_residual, std::fabs(cover_residual(U, W)));
    }
    return out;
}

} // namespace magsphere

#endif
