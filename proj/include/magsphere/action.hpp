#ifndef MAGSPHERE_ACTION_HPP
#define MAGSPHERE_ACTION_HPP

#include <cmath>
#include <string>
#include <vector>

#include "magsphere/dynamics.hpp"
#include "magsphere/errors.hpp"

namespace magsphere {

struct ErgodicAction {
    double A = 0; // Birkhoff average of h over the invariant torus
    double u = 0; // first passage time t_lo -> t_hi
};

// Action of the ergodic measure on the invariant torus {I_{m} = I}: average
// of h = m^2 - m beta_theta sin(phi)/gamma + f over the first half
// oscillation t_lo -> t_hi (equal to the full average by the reflection
// symmetry of the reduced orbit).
inline ErgodicAction ergodic_action_on_band(const Flow& flow, const MomentumBand& band,
                                            double s_max = 1e5) {
    // reduced system (t, phi, accumulated h)
    auto rhs = [&flow](double, const double* y, double* dy) {
        const Jet4 j = flow.profile().jet(y[0]);
        const double f = flow.strength().f(y[0]);
        const double sp = std::sin(y[1]), cp = std::cos(y[1]);
        dy[0] = flow.m() * cp;
        dy[1] = f - flow.m() * j.d1 * sp / j.g;
        dy[2] = flow.h(y[0], sp);
    };

    std::vector<double> y = {band.t_lo, band.binding_lo * M_PI / 2.0, 0.0};
    num::Dopri5 solver(3);
    num::OdeOptions opts;
    opts.rtol = 1e-11;
    opts.atol = 1e-13;

    double prev_c = std::cos(y[1]);
    bool found = false;
    double result_u = 0.0, result_acc = 0.0;
    auto cb = [&](const num::DenseStep& st, const double* y_end) -> num::StepControl {
        const double c_end = std::cos(y_end[1]);
        if (prev_c != 0.0 && prev_c * c_end < 0.0) {
            // phi crosses +-pi/2; accept only the branch touching t_hi
            const double sx = num::locate_event(
                st, [](double, const double* yy) { return std::cos(yy[1]); }, st.s0,
                st.s0 + st.h, 1e-13);
            std::vector<double> yx(3);
            st.eval(sx, yx.data());
            if (std::sin(yx[1]) * band.binding_hi > 0.0) {
                found = true;
                result_u = sx;
                result_acc = yx[2];
                return num::StepControl::kStop;
            }
        }
        prev_c = c_end;
        return num::StepControl::kContinue;
    };
    solver.run(rhs, 0.0, y, s_max, opts, cb);
    if (!found)
        throw CriticalLevel("passage time exceeds " + std::to_string(s_max) +
                            " (level too close to a latitude momentum)");
    return {result_acc / result_u, result_u};
}

inline ErgodicAction ergodic_action(const Flow& flow, double I) {
    const BandSet bands = turning_latitudes(flow, I);
    return ergodic_action_on_band(flow, bands.bands.front());
}

inline ErgodicAction ergodic_action(double m, const Profile& p, const Strength& f, double I) {
    Flow flow(m, p, f);
    return ergodic_action(flow, I);
}

// ---------------------------------------------------------------------------
// Contact certificates

enum class Verdict { kPositive, kNegative, kIndeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::kPositive: return "Positive";
        case Verdict::kNegative: return "Negative";
        default: return "Indeterminate";
    }
}

struct LevelRecord {
    double I = 0;
    double action = 0;
    double u = 0;          // half-oscillation passage time (0 for latitude records)
    bool from_latitude = false;
    int band = 0;
    std::string note;
};

struct ContactCertificate {
    double m = 0;
    std::vector<LevelRecord> levels;
    std::vector<LatitudeOrbit> latitudes;
    std::vector<std::string> skipped; // critical levels logged, not fatal
    double min_action = 0;
    Verdict verdict = Verdict::kIndeterminate;
    double tol = 1e-6;
    bool km_positive = false;
    double km_margin = 0;
    bool h_positive = true;
    double I_min = 0, I_max = 0;
};

// Samples the action of the rotationally invariant ergodic measures on a
// grid of momentum levels plus the latitude orbits. A Positive verdict is
// numerical evidence for the contact property via McDuff's criterion (every
// invariant measure on SS^2 is null-homologous), not a proof.
inline ContactCertificate certify_contact(double m, const Profile& p, const Strength& f,
                                          int grid_size = 256, double tol = 1e-6) {
    if (!f.normalized()) throw NotNormalized("certify_contact needs a normalized strength");
    Flow flow(m, p, f);
    ContactCertificate cert;
    cert.m = m;
    cert.tol = tol;
    const KmReport km = km_positive(p, f, m);
    cert.km_positive = km.positive;
    cert.km_margin = km.margin;

    // sample h along both extreme fibre angles
    double h_min = 1e300;
    const int hn = flow.scan_nodes();
    for (int i = 0; i <= hn; ++i) {
        const double t = p.ell() * i / hn;
        h_min = std::min(h_min, std::min(flow.h(t, 1.0), flow.h(t, -1.0)));
    }
    cert.h_positive = h_min > 0.0;

    cert.latitudes = latitude_orbits(flow);
    const MomentumRange range = momentum_range(flow);
    cert.I_min = range.I_min;
    cert.I_max = range.I_max;

    double min_action = 1e300;
    for (const auto& o : cert.latitudes) {
        LevelRecord rec;
        rec.I = o.momentum;
        rec.action = o.action;
        rec.from_latitude = true;
        cert.levels.push_back(rec);
        min_action = std::min(min_action, o.action);
    }

    const double span = range.I_max - range.I_min;
    const double guard = 1e-3 * span;
    for (int j = 0; j < grid_size; ++j) {
        const double I = range.I_min + span * (j + 0.5) / grid_size;
        bool near_latitude = false;
        for (const auto& o : cert.latitudes)
            if (std::fabs(I - o.momentum) < guard) near_latitude = true;
        if (near_latitude) continue; // covered by the latitude action itself
        try {
            const BandSet bands = turning_latitudes(flow, I, cert.latitudes, 1e-12);
            for (std::size_t b = 0; b < bands.bands.size(); ++b) {
                const ErgodicAction ea = ergodic_action_on_band(flow, bands.bands[b]);
                LevelRecord rec;
                rec.I = I;
                rec.action = ea.A;
                rec.u = ea.u;
                rec.band = static_cast<int>(b);
                cert.levels.push_back(rec);
                min_action = std::min(min_action, ea.A);
            }
        } catch (const CriticalLevel& e) {
            cert.skipped.push_back("I=" + std::to_string(I) + ": " + e.what());
        }
    }

    cert.min_action = min_action;
    if (min_action < -tol) cert.verdict = Verdict::kNegative;
    else if (min_action > tol && cert.h_positive) cert.verdict = Verdict::kPositive;
    else cert.verdict = Verdict::kIndeterminate;
    return cert;
}

// Action of the normalized Liouville measure: 1 + m^2 for [sigma] = 4 pi
// (the beta term integrates to zero under the fibrewise flip and f averages
// to 1 against the Riemannian area).
inline double liouville_action(double m, const Strength& f) {
    if (!f.normalized()) throw NotNormalized("liouville_action needs a normalized strength");
    return 1.0 + m * m;
}

} // namespace magsphere

#endif
