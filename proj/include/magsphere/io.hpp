#ifndef MAGSPHERE_IO_HPP
#define MAGSPHERE_IO_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "magsphere/action.hpp"
#include "magsphere/dynamics.hpp"
#include "magsphere/errors.hpp"
#include "magsphere/geometry.hpp"
#include "magsphere/index.hpp"
#include "magsphere/profile.hpp"
#include "magsphere/strength.hpp"
#include "magsphere/twist.hpp"

namespace magsphere {

using nlohmann::json;

// Deterministic double formatting for CSV/JSON artifacts.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Profile / strength specification blocks

struct ProfileSpec {
    std::string family; // round_sphere | ellipsoid | stretched_sphere | dip | samples
    double a = 1.0, c = 1.0;
    double delta = 0.1, eps = 0.5;
    double C = -1.0; // stretched sphere: <0 means the auto-normalizing stretch
    bool normalized = true;
    double ell = 0.0;
    std::vector<double> samples;
};

inline ProfileSpec profile_spec_from_json(const json& j) {
    ProfileSpec s;
    if (!j.contains("family")) throw ConfigError("profile spec: missing 'family'");
    s.family = j.at("family").get<std::string>();
    static const std::vector<std::string> known = {"family", "a",   "c",       "delta", "eps",
                                                   "C",      "ell", "samples", "normalized"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("profile spec: unknown key '" + it.key() + "'");
    if (j.contains("a")) s.a = j.at("a").get<double>();
    if (j.contains("c")) {
        if (s.family == "stretched_sphere") s.C = j.at("c").get<double>();
        else s.c = j.at("c").get<double>();
    }
    if (j.contains("C")) {
        if (j.at("C").is_string() && j.at("C").get<std::string>() == "auto") s.C = -1.0;
        else s.C = j.at("C").get<double>();
    }
    if (j.contains("delta")) s.delta = j.at("delta").get<double>();
    if (j.contains("eps")) s.eps = j.at("eps").get<double>();
    if (j.contains("ell")) s.ell = j.at("ell").get<double>();
    if (j.contains("normalized")) s.normalized = j.at("normalized").get<bool>();
    if (j.contains("samples")) s.samples = j.at("samples").get<std::vector<double>>();
    return s;
}

inline json profile_spec_to_json(const ProfileSpec& s) {
    json j;
    j["family"] = s.family;
    if (s.family == "ellipsoid") {
        j["a"] = s.a;
        j["c"] = s.c;
        j["normalized"] = s.normalized;
    } else if (s.family == "stretched_sphere") {
        j["a"] = s.a;
        j["delta"] = s.delta;
        if (s.C < 0) j["C"] = "auto";
        else j["C"] = s.C;
    } else if (s.family == "dip") {
        j["delta"] = s.delta;
        j["eps"] = s.eps;
    } else if (s.family == "samples") {
        j["ell"] = s.ell;
        j["samples"] = s.samples;
    }
    return j;
}

inline Profile build_profile(const ProfileSpec& s) {
    if (s.family == "round_sphere") return make_round_sphere();
    if (s.family == "ellipsoid") return make_ellipsoid(s.a, s.c, s.normalized);
    if (s.family == "stretched_sphere") return make_stretched_sphere(s.a, s.delta, s.C);
    if (s.family == "dip") return make_dip_profile(s.delta, s.eps);
    if (s.family == "samples") {
        if (s.samples.size() < 3 || !(s.ell > 0))
            throw ConfigError("profile spec: 'samples' needs sample values and ell > 0");
        return make_sampled_profile(s.samples, s.ell);
    }
    throw ConfigError("profile spec: unknown family '" + s.family + "'");
}

struct StrengthSpec {
    std::string kind = "constant"; // constant | bump | rigid | samples
    double c = 0.0;
    int mode = 1;
    double k = 0.0, h = 1.0;
    bool renormalize = true;
    std::vector<double> samples;
};

inline StrengthSpec strength_spec_from_json(const json& j) {
    StrengthSpec s;
    if (!j.contains("kind")) throw ConfigError("strength spec: missing 'kind'");
    s.kind = j.at("kind").get<std::string>();
    static const std::vector<std::string> known = {"kind", "c",       "mode",       "k",
                                                   "h",    "samples", "renormalize"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("strength spec: unknown key '" + it.key() + "'");
    if (j.contains("c")) s.c = j.at("c").get<double>();
    if (j.contains("mode")) s.mode = j.at("mode").get<int>();
    if (j.contains("k")) s.k = j.at("k").get<double>();
    if (j.contains("h")) s.h = j.at("h").get<double>();
    if (j.contains("renormalize")) s.renormalize = j.at("renormalize").get<bool>();
    if (j.contains("samples")) s.samples = j.at("samples").get<std::vector<double>>();
    return s;
}

inline json strength_spec_to_json(const StrengthSpec& s) {
    json j;
    j["kind"] = s.kind;
    if (s.kind == "bump") {
        j["c"] = s.c;
        j["mode"] = s.mode;
    } else if (s.kind == "rigid") {
        j["k"] = s.k;
        j["h"] = s.h;
    } else if (s.kind == "samples") {
        j["samples"] = s.samples;
        j["renormalize"] = s.renormalize;
    }
    return j;
}

inline Strength build_strength(const Profile& p, const StrengthSpec& s) {
    if (s.kind == "constant") return make_constant_strength();
    if (s.kind == "bump") return make_bump_strength(p, s.c, s.mode);
    if (s.kind == "rigid") return make_rigid_strength(p, s.k, s.h);
    if (s.kind == "samples") {
        if (s.samples.size() < 3) throw ConfigError("strength spec: 'samples' needs values");
        return make_sampled_strength(p, s.samples, s.renormalize);
    }
    throw ConfigError("strength spec: unknown kind '" + s.kind + "'");
}

// ---------------------------------------------------------------------------
// Report serialization

inline json to_json(const ValidationReport& r) {
    json j;
    j["pass"] = r.pass;
    j["checks"] = json::array();
    for (const auto& c : r.checks)
        j["checks"].push_back({{"name", c.name}, {"residual", c.residual}, {"tol", c.tol},
                               {"pass", c.pass}});
    return j;
}

inline json to_json(const LatitudeOrbit& o) {
    return {{"t0", o.t0},           {"sign", o.sign},
            {"m_t0", o.m_t0},       {"action", o.action},
            {"momentum", o.momentum}, {"xm_period", o.xm_period},
            {"reeb_period", o.reeb_period}};
}

inline json to_json(const ContactCertificate& c) {
    json j;
    j["schema"] = "magsphere.certificate/1";
    j["m"] = c.m;
    j["tol"] = c.tol;
    j["verdict"] = to_string(c.verdict);
    j["min_action"] = c.min_action;
    j["km_positive"] = c.km_positive;
    j["km_margin"] = c.km_margin;
    j["h_positive"] = c.h_positive;
    j["I_min"] = c.I_min;
    j["I_max"] = c.I_max;
    j["latitudes"] = json::array();
    for (const auto& o : c.latitudes) j["latitudes"].push_back(to_json(o));
    j["levels"] = json::array();
    for (const auto& rec : c.levels)
        j["levels"].push_back({{"I", rec.I},
                               {"action", rec.action},
                               {"u", rec.u},
                               {"from_latitude", rec.from_latitude},
                               {"band", rec.band}});
    j["skipped"] = c.skipped;
    return j;
}

inline json to_json(const DynConvexReport& r) {
    json j;
    j["schema"] = "magsphere.dynconvex/1";
    j["m_values"] = r.m_values;
    j["sup_deviation"] = r.sup_deviation;
    j["fit_exponent"] = r.fit_exponent;
    j["C_estimate"] = r.C_estimate;
    j["mu_lower_doubled"] = r.mu_lower_doubled;
    j["mu_ok"] = r.mu_ok;
    j["period_inequality"] = r.period_inequality;
    j["T0_proxy"] = r.T0_proxy;
    return j;
}

inline std::string certificate_csv(const ContactCertificate& c) {
    std::ostringstream os;
    os << "I,action,u,from_latitude,band\n";
    for (const auto& rec : c.levels)
        os << fmt(rec.I) << ',' << fmt(rec.action) << ',' << fmt(rec.u) << ','
           << (rec.from_latitude ? 1 : 0) << ',' << rec.band << '\n';
    return os.str();
}

inline std::string twist_profile_csv(const TwistProfile& tp) {
    std::ostringstream os;
    os << "u,m,theta_m,psi_m,fit\n";
    for (std::size_t i = 0; i < tp.u.size(); ++i)
        os << fmt(tp.u[i]) << ',' << fmt(tp.m) << ',' << fmt(tp.theta[i]) << ','
           << fmt(tp.psi[i]) << ',' << fmt(tp.ratio[i]) << '\n';
    return os.str();
}

// Trajectory export; columns: s, tau_reeb, t, phi, theta, I, h.
inline std::string trajectory_csv(const Trajectory& traj, int n_samples = 1000) {
    const ReebTimes rt = reeb_times(traj);
    std::ostringstream os;
    os << "s,tau_reeb,t,phi,theta,I,h\n";
    for (int i = 0; i <= n_samples; ++i) {
        const double s = traj.s_begin() + traj.duration() * i / n_samples;
        const FullState st = traj.state(s);
        os << fmt(s) << ',' << fmt(rt.tau(s)) << ',' << fmt(st.t) << ',' << fmt(st.phi) << ','
           << fmt(st.theta) << ',' << fmt(traj.flow().momentum(st)) << ','
           << fmt(traj.flow().h(st)) << '\n';
    }
    return os.str();
}

inline std::string path_csv(const SymplecticPath& p) {
    std::ostringstream os;
    os << "t,a,b,c,d\n";
    for (std::size_t i = 0; i < p.samples.size(); ++i)
        os << fmt(p.times[i]) << ',' << fmt(p.samples[i][0]) << ',' << fmt(p.samples[i][1]) << ','
           << fmt(p.samples[i][2]) << ',' << fmt(p.samples[i][3]) << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline void write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw Error("cannot open " + tmp + " for writing");
        os << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("cannot rename " + tmp + " to " + path);
}

} // namespace magsphere

#endif
