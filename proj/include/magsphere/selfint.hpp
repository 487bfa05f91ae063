#ifndef MAGSPHERE_SELFINT_HPP
#define MAGSPHERE_SELFINT_HPP

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "magsphere/dynamics.hpp"
#include "magsphere/errors.hpp"

namespace magsphere {

// Self-intersection counting for closed curves on the surface of revolution.
// The curve is handled as a polyline on the (theta, t) cylinder with seam
// duplication; points inside the polar margins are compared in the local
// (x, y) chart instead.

struct CurvePoint {
    double t = 0, theta = 0;
};

struct SelfIntersectionOptions {
    double min_angle = 1e-4;     // radians; rejects near-tangential crossings
    double weld_tol = 1e-9;      // crossings closer than this are merged
    double pole_margin_ratio = 1e-3;
};

struct SelfIntersectionReport {
    int count = 0;
    bool simple() const { return count == 0; }
};

namespace detail_si {

struct Seg {
    double x0, y0, x1, y1;
    int idx;
};

inline bool properly_crossing(const Seg& a, const Seg& b, double min_angle, double& px,
                              double& py) {
    const double rx = a.x1 - a.x0, ry = a.y1 - a.y0;
    const double sx = b.x1 - b.x0, sy = b.y1 - b.y0;
    const double denom = rx * sy - ry * sx;
    const double la = std::hypot(rx, ry), lb = std::hypot(sx, sy);
    if (la == 0 || lb == 0) return false;
    if (std::fabs(denom) < min_angle * la * lb) return false; // near parallel
    const double qx = b.x0 - a.x0, qy = b.y0 - a.y0;
    const double u = (qx * sy - qy * sx) / denom;
    const double v = (qx * ry - qy * rx) / denom;
    const double eps = 1e-12;
    if (u <= eps || u >= 1.0 - eps || v <= eps || v >= 1.0 - eps) return false;
    px = a.x0 + u * rx;
    py = a.y0 + u * ry;
    return true;
}

} // namespace detail_si

// Counts transverse self-intersections of the closed polyline given by
// samples (consecutive points; the last point should coincide with the
// first). Throws NonClosed if it does not, within tol on the cylinder.
inline SelfIntersectionReport count_self_intersections(const std::vector<CurvePoint>& pts,
                                                       double ell,
                                                       const SelfIntersectionOptions& opt = {}) {
    if (pts.size() < 4) return {0};
    const double two_pi = 2.0 * M_PI;
    auto wrap = [&](double th) {
        th = std::fmod(th, two_pi);
        if (th < 0) th += two_pi;
        return th;
    };
    {
        const auto& a = pts.front();
        const auto& b = pts.back();
        const double dth = std::remainder(a.theta - b.theta, two_pi);
        if (std::fabs(a.t - b.t) > 1e-6 * ell || std::fabs(dth) > 1e-5)
            throw NonClosed("endpoints do not match on the cylinder");
    }

    const double margin = opt.pole_margin_ratio * ell;
    std::vector<detail_si::Seg> segs;
    segs.reserve(2 * pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double th0 = wrap(pts[i].theta);
        double th1 = th0 + std::remainder(pts[i + 1].theta - pts[i].theta, two_pi);
        detail_si::Seg s{th0, pts[i].t, th1, pts[i + 1].t, static_cast<int>(i)};
        segs.push_back(s);
        // seam copies so every crossing is seen in a single fundamental domain
        if (std::min(th0, th1) < M_PI)
            segs.push_back({th0 + two_pi, s.y0, th1 + two_pi, s.y1, s.idx});
        else
            segs.push_back({th0 - two_pi, s.y0, th1 - two_pi, s.y1, s.idx});
    }

    // uniform hash grid over (theta, t)
    double max_len = 1e-12;
    for (const auto& s : segs)
        max_len = std::max(max_len, std::max(std::fabs(s.x1 - s.x0), std::fabs(s.y1 - s.y0)));
    const double cell = std::max(max_len, 1e-9);
    std::unordered_map<long long, std::vector<int>> grid;
    auto key = [&](long long cx, long long cy) { return cx * 1000003LL + cy; };
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const auto& s = segs[k];
        const long long cx0 = static_cast<long long>(std::floor(std::min(s.x0, s.x1) / cell));
        const long long cx1 = static_cast<long long>(std::floor(std::max(s.x0, s.x1) / cell));
        const long long cy0 = static_cast<long long>(std::floor(std::min(s.y0, s.y1) / cell));
        const long long cy1 = static_cast<long long>(std::floor(std::max(s.y0, s.y1) / cell));
        for (long long cx = cx0; cx <= cx1; ++cx)
            for (long long cy = cy0; cy <= cy1; ++cy) grid[key(cx, cy)].push_back(static_cast<int>(k));
    }

    const int n_pts = static_cast<int>(pts.size()) - 1;
    std::vector<std::pair<double, double>> found;
    for (const auto& [unused, bucket] : grid) {
        (void)unused;
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            for (std::size_t j = i + 1; j < bucket.size(); ++j) {
                const auto& a = segs[bucket[i]];
                const auto& b = segs[bucket[j]];
                if (a.idx == b.idx) continue;
                const int gap = std::min(std::abs(a.idx - b.idx), n_pts - std::abs(a.idx - b.idx));
                if (gap <= 1) continue; // adjacent along the curve
                // polar caps are handled on the chart, skip cylinder hits there
                if (std::min(a.y0, a.y1) < margin || std::min(b.y0, b.y1) < margin) continue;
                if (std::max(a.y0, a.y1) > ell - margin || std::max(b.y0, b.y1) > ell - margin)
                    continue;
                double px, py;
                if (detail_si::properly_crossing(a, b, opt.min_angle, px, py))
                    found.emplace_back(wrap(px), py);
            }
        }
    }

    // pole caps in the local chart
    for (int pole = 0; pole < 2; ++pole) {
        std::vector<detail_si::Seg> cap;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double t0 = pts[i].t, t1 = pts[i + 1].t;
            const double r0 = pole ? ell - t0 : t0;
            const double r1 = pole ? ell - t1 : t1;
            if (std::min(r0, r1) >= 2 * margin) continue;
            cap.push_back({r0 * std::cos(pts[i].theta), r0 * std::sin(pts[i].theta),
                           r1 * std::cos(pts[i + 1].theta), r1 * std::sin(pts[i + 1].theta),
                           static_cast<int>(i)});
        }
        // only pairs the cylinder pass skipped (at least one sub-margin segment)
        auto sub_margin = [&](const detail_si::Seg& s) {
            return std::min(std::hypot(s.x0, s.y0), std::hypot(s.x1, s.y1)) < margin;
        };
        for (std::size_t i = 0; i < cap.size(); ++i)
            for (std::size_t j = i + 1; j < cap.size(); ++j) {
                const int gap =
                    std::min(std::abs(cap[i].idx - cap[j].idx), n_pts - std::abs(cap[i].idx - cap[j].idx));
                if (gap <= 1) continue;
                if (!sub_margin(cap[i]) && !sub_margin(cap[j])) continue;
                double px, py;
                if (detail_si::properly_crossing(cap[i], cap[j], opt.min_angle, px, py))
                    found.emplace_back(1e6 + pole * 10 + px, py); // distinct namespace per cap
            }
    }

    // weld duplicates (seam copies see the same crossing twice)
    std::sort(found.begin(), found.end());
    int count = 0;
    for (std::size_t i = 0; i < found.size(); ++i) {
        bool dup = false;
        for (std::size_t j = i; j-- > 0;) {
            if (found[i].first - found[j].first > opt.weld_tol) break;
            if (std::fabs(found[i].second - found[j].second) < opt.weld_tol) { dup = true; break; }
        }
        if (!dup) ++count;
    }
    return {count};
}

// Short/long classification per the low-energy dichotomy: short iff simple
// and the projected length sits in [(2 pi - eps) m / max f, (2 pi + eps) m / min f].
struct OrbitClassification {
    bool is_short = false;
    int self_intersections = 0;
    double length = 0;
};

inline OrbitClassification classify_orbit(const Flow& flow, const std::vector<CurvePoint>& pts,
                                          double flow_duration, double eps = 0.5,
                                          const SelfIntersectionOptions& opt = {}) {
    OrbitClassification c;
    c.self_intersections = count_self_intersections(pts, flow.ell(), opt).count;
    c.length = flow.m() * flow_duration;
    double fmin = 1e300, fmax = 0;
    for (int i = 0; i <= 512; ++i) {
        const double f = flow.strength().f(flow.ell() * i / 512.0);
        fmin = std::min(fmin, f);
        fmax = std::max(fmax, f);
    }
    const double lo = (2 * M_PI - eps) * flow.m() / fmax;
    const double hi = (2 * M_PI + eps) * flow.m() / fmin;
    c.is_short = (c.self_intersections == 0) && c.length >= lo && c.length <= hi;
    return c;
}

} // namespace magsphere

#endif
