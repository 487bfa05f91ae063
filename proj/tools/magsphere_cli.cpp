// Experiment runner: every pipeline of the library behind one command-line
// tool with reproducible, config-driven outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "magsphere/action.hpp"
#include "magsphere/dynamics.hpp"
#include "magsphere/geometry.hpp"
#include "magsphere/index.hpp"
#include "magsphere/io.hpp"
#include "magsphere/twist.hpp"

namespace fs = std::filesystem;
using namespace magsphere;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "magsphere 1.0.0";

struct ExperimentConfig {
    ProfileSpec profile;
    StrengthSpec strength;
    std::vector<double> m_grid{1.0};
    std::vector<double> m_sequence{0.08, 0.04, 0.02};
    std::vector<double> u_grid;
    int i_grid_size = 256;
    int samples = 1000;
    unsigned seed = 12345;
    double action_tol = 1e-6;
    double validate_tol = 1e-8;
    double eps_short = 0.5;
    std::string raw_text;
};

void line_col(const std::string& text, std::size_t byte, int& line, int& col) {
    line = 1;
    col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') { ++line; col = 1; }
        else ++col;
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    cfg.raw_text = text;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 0, col = 0;
        line_col(text, e.byte, line, col);
        throw ConfigError("parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
    }
    static const std::vector<std::string> known = {
        "profile", "strength", "m_grid", "m_sequence", "u_grid", "i_grid_size",
        "samples", "seed",     "tolerances", "eps_short"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown key '" + it.key() + "'");
    if (!j.contains("profile")) throw ConfigError("missing 'profile'");
    cfg.profile = profile_spec_from_json(j.at("profile"));
    if (j.contains("strength")) cfg.strength = strength_spec_from_json(j.at("strength"));
    if (j.contains("m_grid")) {
        cfg.m_grid.clear();
        const auto& g = j.at("m_grid");
        if (g.is_array()) cfg.m_grid = g.get<std::vector<double>>();
        else {
            const double lo = g.at("min").get<double>(), hi = g.at("max").get<double>();
            const int n = g.at("count").get<int>();
            for (int i = 0; i < n; ++i)
                cfg.m_grid.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
        }
        if (cfg.m_grid.empty()) throw ConfigError("'m_grid' must be nonempty");
    }
    if (j.contains("m_sequence")) cfg.m_sequence = j.at("m_sequence").get<std::vector<double>>();
    if (j.contains("u_grid")) cfg.u_grid = j.at("u_grid").get<std::vector<double>>();
    if (j.contains("i_grid_size")) cfg.i_grid_size = j.at("i_grid_size").get<int>();
    if (cfg.i_grid_size <= 0) throw ConfigError("'i_grid_size' must be positive");
    if (j.contains("samples")) cfg.samples = j.at("samples").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<unsigned>();
    if (j.contains("eps_short")) cfg.eps_short = j.at("eps_short").get<double>();
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        static const std::vector<std::string> tk = {"action", "validate"};
        for (auto it = t.begin(); it != t.end(); ++it)
            if (std::find(tk.begin(), tk.end(), it.key()) == tk.end())
                throw ConfigError("unknown key 'tolerances." + it.key() + "'");
        if (t.contains("action")) cfg.action_tol = t.at("action").get<double>();
        if (t.contains("validate")) cfg.validate_tol = t.at("validate").get<double>();
    }
    return cfg;
}

struct Runner {
    ExperimentConfig cfg;
    fs::path out_dir;
    std::string command;
    std::vector<std::string> artifacts;

    void write(const std::string& name, const std::string& content) {
        fs::create_directories(out_dir);
        write_file((out_dir / name).string(), content);
        artifacts.push_back(name);
    }

    void manifest(const json& extra = {}) {
        json m;
        m["version"] = kVersion;
        m["command"] = command;
        m["config_hash"] = fnv1a(cfg.raw_text);
        m["seed"] = cfg.seed;
        m["tolerances"] = {{"action", cfg.action_tol}, {"validate", cfg.validate_tol}};
        m["artifacts"] = artifacts;
        if (!extra.is_null()) m["results"] = extra;
        write("manifest.json", m.dump(2) + "\n");
    }

    int run_validate() {
        Profile p = build_profile(cfg.profile);
        Strength f = build_strength(p, cfg.strength);
        const ValidationReport rep = validate(p, f, cfg.validate_tol);
        write("validation.json", to_json(rep).dump(2) + "\n");
        manifest({{"pass", rep.pass}});
        return rep.pass ? 0 : 3;
    }

    int run_bounds() {
        Profile p = build_profile(cfg.profile);
        const ContactBounds b = contact_bounds(p);
        std::ostringstream os;
        os << "m_gamma,interval,m_minus,m_plus\n";
        os << fmt(b.m_gamma) << ',' << (b.full_ray ? "full-ray" : "gap") << ','
           << (b.full_ray ? "" : fmt(b.m_minus)) << ',' << (b.full_ray ? "" : fmt(b.m_plus))
           << '\n';
        write("bounds.csv", os.str());
        manifest({{"m_gamma", b.m_gamma}, {"full_ray", b.full_ray}});
        return 0;
    }

    int run_certify() {
        Profile p = build_profile(cfg.profile);
        Strength f = build_strength(p, cfg.strength);
        bool any_negative = false;
        json all = json::array();
        for (std::size_t i = 0; i < cfg.m_grid.size(); ++i) {
            const ContactCertificate cert =
                certify_contact(cfg.m_grid[i], p, f, cfg.i_grid_size, cfg.action_tol);
            any_negative = any_negative || cert.verdict == Verdict::kNegative;
            const std::string tag = "m" + std::to_string(i);
            write("certificate_" + tag + ".json", to_json(cert).dump(2) + "\n");
            write("certificate_" + tag + ".csv", certificate_csv(cert));
            all.push_back({{"m", cert.m},
                           {"verdict", to_string(cert.verdict)},
                           {"min_action", cert.min_action}});
        }
        manifest(all);
        return any_negative ? 4 : 0;
    }

    int run_orbits() {
        Profile p = build_profile(cfg.profile);
        Strength f = build_strength(p, cfg.strength);
        json all = json::array();
        for (double m : cfg.m_grid) {
            Flow flow(m, p, f);
            json orbits = json::array();
            for (const auto& o : latitude_orbits(flow)) orbits.push_back(to_json(o));
            all.push_back({{"m", m}, {"orbits", orbits}});
        }
        write("orbits.json", all.dump(2) + "\n");
        manifest();
        return 0;
    }

    int run_twist() {
        Profile p = build_profile(cfg.profile);
        Strength f = build_strength(p, cfg.strength);
        std::vector<double> u_grid = cfg.u_grid;
        if (u_grid.empty())
            for (int i = 1; i <= 5; ++i) u_grid.push_back(-p.ell() * i / 6.0);
        std::ostringstream os;
        os << "u,m,theta_m,psi_m,fit\n";
        auto surf = std::make_shared<const Surface>(p, f);
        for (double m : cfg.m_grid) {
            Flow flow(m, surf);
            const TwistProfile tp = compute_twist_profile(flow, u_grid);
            for (std::size_t i = 0; i < tp.u.size(); ++i)
                os << fmt(tp.u[i]) << ',' << fmt(tp.m) << ',' << fmt(tp.theta[i]) << ','
                   << fmt(tp.psi[i]) << ',' << fmt(tp.ratio[i]) << '\n';
        }
        write("twist.csv", os.str());
        json fits = json::array();
        Flow flow(cfg.m_sequence.front(), surf);
        for (double u : u_grid) {
            const TwistFit tf = twist_fit(flow, u, cfg.m_sequence);
            fits.push_back({{"u", u},
                            {"limit", tf.limit},
                            {"order", tf.order},
                            {"omega_f", omega_f(p, f, std::fabs(u))}});
        }
        write("twist_fits.json", fits.dump(2) + "\n");
        manifest();
        return 0;
    }

    int run_index() {
        Profile p = build_profile(cfg.profile);
        Strength f = build_strength(p, cfg.strength);
        const DynConvexReport rep =
            dynconvex_report(p, f, cfg.m_grid, std::max(4, cfg.samples / 100), cfg.seed);
        write("dynconvex.json", to_json(rep).dump(2) + "\n");
        manifest({{"mu_ok", rep.mu_ok}, {"fit_exponent", rep.fit_exponent}});
        return 0;
    }

    int run_cover() {
        const CoverCheck cc = quaternion_cover_check(cfg.samples, cfg.seed);
        json j;
        j["n_samples"] = cc.n_samples;
        j["max_residual"] = cc.max_residual;
        write("cover.json", j.dump(2) + "\n");
        manifest({{"max_residual", cc.max_residual}});
        return 0;
    }

    int run_profile_gen() {
        Profile p = build_profile(cfg.profile);
        Strength f = build_strength(p, cfg.strength);
        json j;
        j["spec"] = profile_spec_to_json(cfg.profile);
        j["strength_spec"] = strength_spec_to_json(cfg.strength);
        j["ell"] = p.ell();
        j["area"] = p.area();
        j["kind"] = p.kind();
        j["validation"] = to_json(validate(p, f, cfg.validate_tol));
        write("profile.json", j.dump(2) + "\n");
        std::ostringstream os;
        os << "t,gamma,dgamma,ddgamma,dddgamma,K,f\n";
        for (int i = 0; i <= 1024; ++i) {
            const double t = p.ell() * i / 1024;
            const Jet4 g = p.jet(t);
            os << fmt(t) << ',' << fmt(g.g) << ',' << fmt(g.d1) << ',' << fmt(g.d2) << ','
               << fmt(g.d3) << ',' << fmt(p.K(t)) << ',' << fmt(f.f(t)) << '\n';
        }
        write("profile.csv", os.str());
        manifest();
        return 0;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kVersion) +
                 " - rotationally symmetric magnetic systems on the two-sphere"};
    std::string config_path, out_dir = "out", command;
    long long seed_override = -1;
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--command", command,
                   "validate | bounds | certify | orbits | twist | index | cover | profile-gen")
        ->required();
    app.add_option("--seed", seed_override, "override the config seed");
    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        Runner r;
        r.cfg = parse_config(ss.str());
        if (seed_override >= 0) r.cfg.seed = static_cast<unsigned>(seed_override);
        r.out_dir = out_dir;
        r.command = command;
        if (command == "validate") return r.run_validate();
        if (command == "bounds") return r.run_bounds();
        if (command == "certify") return r.run_certify();
        if (command == "orbits") return r.run_orbits();
        if (command == "twist") return r.run_twist();
        if (command == "index") return r.run_index();
        if (command == "cover") return r.run_cover();
        if (command == "profile-gen") return r.run_profile_gen();
        throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
