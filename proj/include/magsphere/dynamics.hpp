#ifndef MAGSPHERE_DYNAMICS_HPP
#define MAGSPHERE_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "magsphere/errors.hpp"
#include "magsphere/geometry.hpp"
#include "magsphere/numerics/ode.hpp"
#include "magsphere/numerics/roots.hpp"

namespace magsphere {

struct FullState {
    double t = 0, phi = 0, theta = 0;
};

inline double wrap_pi(double x) {
    x = std::fmod(x + M_PI, 2.0 * M_PI);
    if (x < 0) x += 2.0 * M_PI;
    return x - M_PI;
}

// The magnetic field X^m = m X + f V on the unit tangent bundle of the
// surface of revolution, in the (t, phi, theta) chart and in the two polar
// charts (x, y, chi) with x = t cos(theta), y = t sin(theta).
class Flow {
public:
    Flow(double m, Profile p, Strength f)
        : Flow(m, std::make_shared<const Surface>(std::move(p), std::move(f))) {}

    Flow(double m, std::shared_ptr<const Surface> surf) : m_(m), surf_(std::move(surf)) {
        ell_ = surf_->ell();
        enter_margin_ = 1e-3 * ell_;
        exit_margin_ = 2e-3 * ell_;
    }

    // Same surface caches, different energy parameter.
    Flow with_m(double m) const { return Flow(m, surf_); }

    int scan_nodes() const { return surf_->scan_nodes(); }

    double m() const { return m_; }
    const Surface& surface() const { return *surf_; }
    const Profile& profile() const { return surf_->profile(); }
    const Strength& strength() const { return surf_->strength(); }
    double ell() const { return ell_; }

    // (dt, dphi, dtheta) = (m cos phi, f - m dgamma sin phi / gamma, m sin phi / gamma)
    void vector_field(const FullState& s, double out[3]) const {
        const double eps = 1e-8 * ell_;
        if (!(s.t > eps && s.t < ell_ - eps))
            throw PoleChart("state at t=" + std::to_string(s.t) + " outside the regular chart");
        const Jet4 j = surf_->profile().jet(s.t);
        const double f = surf_->strength().f(s.t);
        const double sp = std::sin(s.phi), cp = std::cos(s.phi);
        out[0] = m_ * cp;
        out[1] = f - m_ * j.d1 * sp / j.g;
        out[2] = m_ * sp / j.g;
    }

    double momentum(const FullState& s) const {
        return m_ * surf_->profile().gamma(s.t) * std::sin(s.phi) - surf_->Gamma_f(s.t);
    }

    // h(t, phi) = m^2 - m beta_theta sin(phi)/gamma + f
    double h(double t, double sin_phi) const {
        return m_ * m_ - m_ * surf_->beta_over_gamma(t) * sin_phi + surf_->strength().f(t);
    }
    double h(const FullState& s) const { return h(s.t, std::sin(s.phi)); }

    double I_plus(double t) const { return m_ * surf_->profile().gamma(t) - surf_->Gamma_f(t); }
    double I_minus(double t) const { return -m_ * surf_->profile().gamma(t) - surf_->Gamma_f(t); }

    double enter_margin() const { return enter_margin_; }
    double exit_margin() const { return exit_margin_; }

    // Right-hand sides ------------------------------------------------------

    void rhs_global(const double* y, double* dy) const {
        const Jet4 j = surf_->profile().jet(y[0]);
        const double f = surf_->strength().f(y[0]);
        const double sp = std::sin(y[1]), cp = std::cos(y[1]);
        dy[0] = m_ * cp;
        dy[1] = f - m_ * j.d1 * sp / j.g;
        dy[2] = m_ * sp / j.g;
    }

    // Polar chart at the south (north = false) or north pole. State (x, y, chi)
    // with t = |(x,y)| and chi = theta + phi (south) or theta - phi (north).
    void rhs_chart(bool north, const double* y, double* dy) const {
        const double x = y[0], yy = y[1], chi = y[2];
        const double r = std::hypot(x, yy);
        const double tt = north ? ell_ - r : r;
        const Jet4 j = surf_->profile().jet(tt);
        const double f = surf_->strength().f(tt);
        const double theta_rel = (r > 0) ? std::atan2(yy, x) : 0.0;
        if (!north) {
            const double phi = chi - theta_rel;
            const double sp = std::sin(phi);
            // s(t) = (gamma - t) / (t gamma), rho(t) = (1 - dgamma)/gamma
            const double sfun = (r > 1e-12) ? (j.g - r) / (r * j.g) : 0.0;
            const double rho = (r > 1e-12) ? (1.0 - j.d1) / j.g : 0.0;
            dy[0] = m_ * (std::cos(chi) + sfun * sp * yy);
            dy[1] = m_ * (std::sin(chi) - sfun * sp * x);
            dy[2] = f + m_ * sp * rho;
        } else {
            // psi = theta - phi; gamma(ell - r) ~ r near the pole
            const double phi = theta_rel - chi;
            const double sp = std::sin(phi);
            const double sfun = (r > 1e-12) ? (j.g - r) / (r * j.g) : 0.0;
            const double rho = (r > 1e-12) ? (1.0 + j.d1) / j.g : 0.0;
            dy[0] = -m_ * (std::cos(chi) - sfun * sp * yy);
            dy[1] = -m_ * (std::sin(chi) + sfun * sp * x);
            dy[2] = -f + m_ * sp * rho;
        }
    }

    FullState chart_to_global(bool north, const double* y, double theta_hint) const {
        const double r = std::hypot(y[0], y[1]);
        const double theta_rel = std::atan2(y[1], y[0]);
        FullState s;
        s.t = north ? ell_ - r : r;
        s.phi = north ? wrap_pi(theta_rel - y[2]) : wrap_pi(y[2] - theta_rel);
        s.theta = theta_hint + wrap_pi(theta_rel - theta_hint);
        return s;
    }

    void global_to_chart(const FullState& s, bool north, double* y) const {
        const double r = north ? ell_ - s.t : s.t;
        y[0] = r * std::cos(s.theta);
        y[1] = r * std::sin(s.theta);
        y[2] = north ? s.theta - s.phi : s.theta + s.phi;
    }

private:
    double m_;
    std::shared_ptr<const Surface> surf_;
    double ell_, enter_margin_, exit_margin_;
};

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectorySegment {
    enum Chart { kGlobal, kSouth, kNorth };
    Chart chart = kGlobal;
    double theta_entry = 0; // unwrapped theta at segment start (chart segments)
    num::Solution sol;
    double s_begin = 0, s_end = 0;
};

struct PhiCrossing {
    double s;
    int branch; // +1 for phi = +pi/2, -1 for phi = -pi/2 (mod 2 pi)
    FullState state;
};

class Trajectory {
public:
    Trajectory(const Flow* flow, double s0) : flow_(flow), s_begin_(s0), s_end_(s0) {}

    const Flow& flow() const { return *flow_; }
    double s_begin() const { return s_begin_; }
    double s_end() const { return s_end_; }
    double duration() const { return s_end_ - s_begin_; }

    FullState state(double s) const {
        const TrajectorySegment& seg = locate(s);
        std::vector<double> y(3);
        seg.sol.eval(clamp_into(seg, s), y.data());
        return reconstruct(seg, y.data());
    }

    double momentum(double s) const { return flow_->momentum(state(s)); }

    double momentum_drift() const { return drift_; }
    const num::OdeStats& stats() const { return stats_; }
    const std::vector<TrajectorySegment>& segments() const { return segs_; }

    // phi = +-pi/2 crossings from the dense output (off-pole segments only).
    std::vector<PhiCrossing> phi_crossings() const {
        std::vector<PhiCrossing> out;
        for (const auto& seg : segs_) {
            if (seg.chart != TrajectorySegment::kGlobal) continue;
            for (std::size_t i = 0; i < seg.sol.size(); ++i) {
                const auto& st = seg.sol.step(i);
                const double sa = std::max(std::min(st.s0, st.s0 + st.h), seg.s_begin);
                const double sb = std::min(std::max(st.s0, st.s0 + st.h), seg.s_end);
                if (sb <= sa) continue;
                double ya[3], yb[3];
                st.eval(sa, ya);
                st.eval(sb, yb);
                const double ga = std::cos(ya[1]), gb = std::cos(yb[1]);
                if (ga == 0.0 || ga * gb >= 0.0) continue;
                const double sx = num::locate_event(
                    st, [](double, const double* y) { return std::cos(y[1]); }, sa, sb, 1e-12);
                double yx[3];
                st.eval(sx, yx);
                out.push_back({sx, std::sin(yx[1]) > 0 ? +1 : -1, {yx[0], yx[1], yx[2]}});
            }
        }
        return out;
    }

    // -- construction (used by integrate) --
    std::vector<TrajectorySegment>& mutable_segments() { return segs_; }
    void set_range(double s0, double s1) { s_begin_ = s0; s_end_ = s1; }
    void set_stats(const num::OdeStats& st) { stats_ = st; }
    void set_drift(double d) { drift_ = d; }

    FullState reconstruct(const TrajectorySegment& seg, const double* y) const {
        if (seg.chart == TrajectorySegment::kGlobal) return {y[0], y[1], y[2]};
        return flow_->chart_to_global(seg.chart == TrajectorySegment::kNorth, y, seg.theta_entry);
    }

private:
    const TrajectorySegment& locate(double s) const {
        if (segs_.empty()) throw Error("Trajectory: empty");
        const bool fwd = s_end_ >= s_begin_;
        for (const auto& seg : segs_)
            if (fwd ? (s <= seg.s_end) : (s >= seg.s_end)) return seg;
        return segs_.back();
    }

    double clamp_into(const TrajectorySegment& seg, double s) const {
        const double lo = std::min(seg.s_begin, seg.s_end);
        const double hi = std::max(seg.s_begin, seg.s_end);
        return std::min(std::max(s, lo), hi);
    }

    const Flow* flow_;
    double s_begin_, s_end_;
    std::vector<TrajectorySegment> segs_;
    num::OdeStats stats_;
    double drift_ = 0;
};

// Terminal event for integrate(); g is evaluated on the global-chart state.
struct StopEvent {
    std::function<double(double s, const FullState&)> g;
    int direction = 0;   // +1 rising, -1 falling, 0 any
    double start_after = 0.0; // ignore before this flow time from start
};

struct IntegrateResult {
    Trajectory traj;
    bool stopped = false;     // true if the stop event fired
    double s_stop = 0;
    FullState state_stop;
    FullState state_end;      // state at the end of integration
};

// Integrates the flow for (signed) duration T from state s0, switching to a
// polar chart whenever t crosses the margin. Momentum drift is monitored at
// every accepted step.
inline IntegrateResult integrate(const Flow& flow, const FullState& s0, double T,
                                 const num::OdeOptions& opts = {},
                                 const std::optional<StopEvent>& stop = std::nullopt) {
    IntegrateResult res{Trajectory(&flow, 0.0)};
    Trajectory& traj = res.traj;
    const double ell = flow.ell();
    const double I0 = flow.momentum(s0);
    double drift = 0.0;

    double s = 0.0;
    const double s_target = T;
    FullState cur = s0;
    num::OdeStats total_stats;
    num::Dopri5 solver(3);

    const int max_segments = 100000;
    for (int seg_count = 0; seg_count < max_segments && (T > 0 ? s < s_target : s > s_target);
         ++seg_count) {
        TrajectorySegment seg;
        const bool in_south = cur.t < flow.enter_margin();
        const bool in_north = cur.t > ell - flow.enter_margin();
        seg.chart = in_south ? TrajectorySegment::kSouth
                             : (in_north ? TrajectorySegment::kNorth : TrajectorySegment::kGlobal);
        seg.theta_entry = cur.theta;
        seg.s_begin = s;

        std::vector<double> y(3);
        num::Rhs rhs;
        if (seg.chart == TrajectorySegment::kGlobal) {
            y = {cur.t, cur.phi, cur.theta};
            rhs = [&flow](double, const double* yy, double* dy) { flow.rhs_global(yy, dy); };
        } else {
            const bool north = seg.chart == TrajectorySegment::kNorth;
            flow.global_to_chart(cur, north, y.data());
            rhs = [&flow, north](double, const double* yy, double* dy) {
                flow.rhs_chart(north, yy, dy);
            };
        }

        // chart switch trigger, expressed on the raw state vector
        auto switch_g = [&flow, &seg, ell](const double* yy) -> double {
            if (seg.chart == TrajectorySegment::kGlobal) {
                const double lo = yy[0] - flow.enter_margin();
                const double hi = (ell - flow.enter_margin()) - yy[0];
                return std::min(lo, hi);
            }
            return flow.exit_margin() - std::hypot(yy[0], yy[1]);
        };

        bool switched = false, stopped = false;
        double s_cut = s_target;
        FullState stop_state;
        double prev_sw = switch_g(y.data());
        double prev_stop_g = 0.0;
        bool have_prev_stop = false;
        if (stop && s >= stop->start_after) {
            prev_stop_g = stop->g(s, cur);
            have_prev_stop = true;
        }

        auto cb = [&](const num::DenseStep& st, const double* y_end) -> num::StepControl {
            const double s_end = st.s0 + st.h;
            FullState end_state = traj.reconstruct(seg, y_end);
            // momentum drift at step end
            drift = std::max(drift, std::fabs(flow.momentum(end_state) - I0));

            // user stop event (bisected on the dense step via reconstruction)
            if (stop && s_end - traj.s_begin() >= stop->start_after) {
                const double ge = stop->g(s_end, end_state);
                if (have_prev_stop) {
                    const bool crossing = (prev_stop_g < 0 && ge >= 0 && stop->direction >= 0) ||
                                          (prev_stop_g > 0 && ge <= 0 && stop->direction <= 0);
                    if (crossing) {
                        const double sx = num::locate_event(
                            st,
                            [&](double ss, const double* yy) {
                                return stop->g(ss, traj.reconstruct(seg, yy));
                            },
                            st.s0, s_end, 1e-12);
                        std::vector<double> yx(3);
                        st.eval(sx, yx.data());
                        stop_state = traj.reconstruct(seg, yx.data());
                        s_cut = sx;
                        stopped = true;
                        seg.sol.push(st);
                        return num::StepControl::kStop;
                    }
                }
                prev_stop_g = ge;
                have_prev_stop = true;
            }

            // chart switch
            const double swe = switch_g(y_end);
            if (prev_sw > 0 && swe <= 0) {
                const double sx = num::locate_event(
                    st, [&](double, const double* yy) { return switch_g(yy); }, st.s0, s_end,
                    1e-13);
                std::vector<double> yx(3);
                st.eval(sx, yx.data());
                stop_state = traj.reconstruct(seg, yx.data());
                s_cut = sx;
                switched = true;
                seg.sol.push(st);
                return num::StepControl::kStop;
            }
            prev_sw = swe;
            seg.sol.push(st);
            return num::StepControl::kContinue;
        };

        num::OdeStats st = solver.run(rhs, s, y, s_target, opts, cb);
        total_stats.n_steps += st.n_steps;
        total_stats.n_rejected += st.n_rejected;
        total_stats.n_rhs += st.n_rhs;

        if (switched || stopped) {
            seg.s_end = s_cut;
            cur = stop_state;
            s = s_cut;
        } else {
            seg.s_end = s_target;
            std::vector<double> yf(3);
            if (!seg.sol.empty()) {
                seg.sol.eval(s_target, yf.data());
                cur = traj.reconstruct(seg, yf.data());
            }
            s = s_target;
        }
        if (!seg.sol.empty()) traj.mutable_segments().push_back(std::move(seg));

        if (stopped) {
            res.stopped = true;
            res.s_stop = s_cut;
            res.state_stop = cur;
            break;
        }
        if (!switched) break;
    }

    traj.set_range(0.0, s);
    traj.set_stats(total_stats);
    traj.set_drift(drift);
    res.state_end = cur;
    return res;
}

// ---------------------------------------------------------------------------
// Reeb time

struct ReebTimes {
    std::vector<double> s_nodes;
    std::vector<double> tau_nodes;
    double h_min = 0, h_max = 0;

    double tau(double s) const {
        auto it = std::upper_bound(s_nodes.begin(), s_nodes.end(), s);
        const std::size_t k = std::max<std::ptrdiff_t>(1, it - s_nodes.begin()) - 1;
        const double f = (s - s_nodes[k]) /
                         (s_nodes[std::min(k + 1, s_nodes.size() - 1)] - s_nodes[k] + 1e-300);
        if (k + 1 >= tau_nodes.size()) return tau_nodes.back();
        return tau_nodes[k] + f * (tau_nodes[k + 1] - tau_nodes[k]);
    }
    double total() const { return tau_nodes.back(); }
};

// Attaches Reeb time d tau = h ds along the trajectory; throws
// NonContactSample when h <= 0 anywhere on the sampled curve.
inline ReebTimes reeb_times(const Trajectory& traj, int samples_per_unit = 64) {
    const Flow& flow = traj.flow();
    const double S = traj.duration();
    const int n = std::max(16, static_cast<int>(S * samples_per_unit));
    ReebTimes rt;
    rt.s_nodes.resize(n + 1);
    rt.tau_nodes.resize(n + 1);
    rt.h_min = 1e300;
    rt.h_max = -1e300;
    double acc = 0.0;
    double h_prev = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = traj.s_begin() + S * i / n;
        const FullState st = traj.state(s);
        const double h = flow.h(st);
        if (h <= 0.0)
            throw NonContactSample("h <= 0 along trajectory (m outside contact range)");
        rt.h_min = std::min(rt.h_min, h);
        rt.h_max = std::max(rt.h_max, h);
        rt.s_nodes[i] = s;
        if (i > 0) acc += 0.5 * (h + h_prev) * (S / n);
        rt.tau_nodes[i] = acc;
        h_prev = h;
    }
    return rt;
}

// ---------------------------------------------------------------------------
// Latitude orbits

struct LatitudeOrbit {
    double t0 = 0;
    int sign = 0;        // +-1: branch of +-m dgamma = f gamma, phi = sign * pi/2
    double m_t0 = 0;     // |gamma/dgamma| at t0
    double action = 0;   // h(t0, sign * pi/2)
    double momentum = 0; // I on the orbit
    double xm_period = 0;
    double reeb_period = 0;
};

inline std::vector<LatitudeOrbit> latitude_orbits(const Flow& flow) {
    const Profile& p = flow.profile();
    const Strength& f = flow.strength();
    const double L = p.ell(), m = flow.m();
    std::vector<LatitudeOrbit> out;
    if (m <= 0) return out;
    const int n = flow.scan_nodes();
    for (int sign : {+1, -1}) {
        auto g = [&](double t) {
            const Jet4 j = p.jet(t);
            return sign * m * j.d1 - f.f(t) * j.g;
        };
        auto brackets = num::scan_brackets(g, 1e-9 * L, L * (1.0 - 1e-9), n);
        for (const auto& br : brackets) {
            const double t0 = (br.a == br.b) ? br.a : num::brent(g, br.a, br.b, 1e-14);
            bool dup = false;
            for (const auto& o : out)
                if (o.sign == sign && std::fabs(o.t0 - t0) < 1e-9) dup = true;
            if (dup) continue;
            LatitudeOrbit o;
            o.t0 = t0;
            o.sign = sign;
            const Jet4 j = p.jet(t0);
            o.m_t0 = std::fabs(j.g / j.d1);
            o.action = flow.h(t0, sign);
            o.momentum = m * j.g * sign - flow.surface().Gamma_f(t0);
            o.xm_period = 2.0 * M_PI * j.g / m;
            o.reeb_period = o.action * o.xm_period;
            out.push_back(o);
        }
    }
    std::sort(out.begin(), out.end(), [](const LatitudeOrbit& a, const LatitudeOrbit& b) {
        return a.t0 < b.t0;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Momentum range and turning latitudes

struct MomentumRange {
    double I_min = 0, I_max = 0;
    double t_min = 0, t_max = 0; // maximizers
};

inline MomentumRange momentum_range(const Flow& flow) {
    const double L = flow.ell();
    const int n = flow.scan_nodes();
    MomentumRange r;
    r.I_max = -1e300;
    r.I_min = 1e300;
    int imax = 0, imin = 0;
    for (int i = 0; i <= n; ++i) {
        const double t = L * i / n;
        const double ip = flow.I_plus(t), im = flow.I_minus(t);
        if (ip > r.I_max) { r.I_max = ip; imax = i; }
        if (im < r.I_min) { r.I_min = im; imin = i; }
    }
    {
        const double a = std::max(0.0, L * (imax - 1) / n), b = std::min(L, L * (imax + 1) / n);
        const double t = num::golden_max([&](double x) { return flow.I_plus(x); }, a, b, 1e-12);
        if (flow.I_plus(t) > r.I_max) { r.I_max = flow.I_plus(t); }
        r.t_max = t;
    }
    {
        const double a = std::max(0.0, L * (imin - 1) / n), b = std::min(L, L * (imin + 1) / n);
        const double t = num::golden_min([&](double x) { return flow.I_minus(x); }, a, b, 1e-12);
        if (flow.I_minus(t) < r.I_min) { r.I_min = flow.I_minus(t); }
        r.t_min = t;
    }
    return r;
}

struct MomentumBand {
    double I = 0;
    double t_lo = 0, t_hi = 0;
    int binding_lo = 0, binding_hi = 0; // +1 if the endpoint solves I_plus = I, -1 for I_minus
    bool regular = true;
};

struct BandSet {
    std::vector<MomentumBand> bands;
    bool multi = false;
};

// Accessible latitudes for momentum level I: {t : I_minus(t) <= I <= I_plus(t)}.
inline BandSet turning_latitudes(const Flow& flow, double I,
                                 const std::vector<LatitudeOrbit>& lats,
                                 double critical_tol = 1e-9) {
    for (const auto& o : lats)
        if (std::fabs(I - o.momentum) < critical_tol)
            throw CriticalLevel("momentum level within tolerance of a latitude orbit");

    const double L = flow.ell();
    const int n = flow.scan_nodes();
    auto inside = [&](double t) { return std::min(flow.I_plus(t) - I, I - flow.I_minus(t)); };

    BandSet out;
    double prev = inside(0.0);
    double t_prev = 0.0;
    double open_lo = -1.0;
    int open_binding = 0;
    for (int i = 1; i <= n; ++i) {
        const double t = L * i / n;
        const double v = inside(t);
        if (prev <= 0 && v > 0) {
            const double plus_gap = std::fabs(flow.I_plus(t_prev) - I);
            const double minus_gap = std::fabs(I - flow.I_minus(t_prev));
            open_binding = (plus_gap < minus_gap) ? +1 : -1;
            auto g = open_binding > 0 ? std::function<double(double)>([&](double x) { return flow.I_plus(x) - I; })
                                      : std::function<double(double)>([&](double x) { return I - flow.I_minus(x); });
            open_lo = num::brent(g, t_prev, t, 1e-14);
        } else if (prev > 0 && v <= 0 && open_lo >= 0) {
            const double plus_gap = std::fabs(flow.I_plus(t) - I);
            const double minus_gap = std::fabs(I - flow.I_minus(t));
            const int binding = (plus_gap < minus_gap) ? +1 : -1;
            auto g = binding > 0 ? std::function<double(double)>([&](double x) { return flow.I_plus(x) - I; })
                                 : std::function<double(double)>([&](double x) { return I - flow.I_minus(x); });
            const double hi = num::brent(g, t_prev, t, 1e-14);
            out.bands.push_back({I, open_lo, hi, open_binding, binding, true});
            open_lo = -1.0;
        }
        prev = v;
        t_prev = t;
    }
    if (out.bands.empty())
        throw CriticalLevel("no accessible band found for momentum level");
    out.multi = out.bands.size() > 1;
    return out;
}

inline BandSet turning_latitudes(const Flow& flow, double I, double critical_tol = 1e-9) {
    return turning_latitudes(flow, I, latitude_orbits(flow), critical_tol);
}

} // namespace magsphere

#endif
