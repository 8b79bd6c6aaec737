#include "afc/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "afc/coherence_models.hpp"

namespace afc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Sub-seed for the c-th curve of a multi-curve study, so curves do not share
// trajectory streams.
EnsembleConfig curve_ensemble(const EnsembleConfig& ens, std::size_t c) {
    EnsembleConfig e = ens;
    e.seed = point_seed(ens.seed, 0x10000 + c);
    return e;
}

std::string ms_tag(double seconds) {
    std::ostringstream os;
    os << seconds * 1e3;
    return os.str();
}

json curve_json(const DecayCurve& c) {
    json pts = json::array();
    for (const auto& p : c.points) pts.push_back({p.t_spin, p.eta, p.sigma_eta});
    return pts;
}

json constraints_json(const ConstraintReport& r) {
    auto one = [](const ConstraintCheck& c) { return json{{"pass", c.pass}, {"margin", c.margin}}; };
    return {{"inhomogeneous", one(r.inhomogeneous)}, {"rabi", one(r.rabi)}, {"bandwidth", one(r.bandwidth)},
            {"all_pass", r.all_pass()}};
}

std::vector<std::string> failed_constraints(const ConstraintReport& r) {
    std::vector<std::string> out;
    if (!r.inhomogeneous.pass) out.push_back("delta > gamma_inh violated");
    if (!r.rabi.pass) out.push_back("delta > rabi violated");
    if (!r.bandwidth.pass) out.push_back("delta_e > gamma_afc violated");
    return out;
}

std::vector<std::string> curve_comments(const RunConfig& cfg, const std::string& what) {
    std::vector<std::string> c = {what};
    c.push_back("seed: " + std::to_string(cfg.seed.value_or(0)) + ", n_traj: " + std::to_string(cfg.n_traj));
    return c;
}

struct Context {
    const RunConfig& cfg;
    SimOptions sim;
    fs::path dir;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    bool fit_failed = false;

    void save_curve(const std::string& name, const DecayCurve& c, const std::vector<std::string>& comments) {
        save_curve_csv((dir / name).string(), c, comments);
        files.push_back(name);
    }
    void save_table(const std::string& name, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows, const std::vector<std::string>& comments = {}) {
        save_table_csv((dir / name).string(), header, rows, comments);
        files.push_back(name);
    }
    json note_fit(const FitResult& f) {
        if (!f.converged) fit_failed = true;
        return to_json(f);
    }
};

json run_simulate(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const DdSequence seq = build_sequence(cfg.kind, cfg.n_s, cfg.tau(), cfg.epsilon_rad);
    const SimResult r = simulate(seq, cfg.ou(), cfg.ensemble(), ctx.sim);
    DecayCurve c;
    c.points.push_back({seq.t_spin, r.eta_spin, r.std_err});
    c.meta.kind = cfg.kind;
    c.meta.fixed_n = seq.pulse_count();
    c.meta.fixed_tau = seq.tau;
    c.meta.sigma_hz = cfg.sigma_hz;
    c.meta.tau_c = cfg.tau_c_ms * 1e-3;
    c.meta.epsilon = cfg.epsilon_rad;
    ctx.save_curve("simulate.csv", c, curve_comments(cfg, "single sequence"));
    return {{"t_spin_s", seq.t_spin},
            {"pulses", seq.pulse_count()},
            {"eta_spin", r.eta_spin},
            {"std_err", r.std_err},
            {"amplitude", {r.amplitude.real(), r.amplitude.imag()}},
            {"n_traj", r.n_traj}};
}

json run_sweep_fixed_n(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const auto taus = cfg.tau_grid();
    const DecayCurve c =
        simulate_decay_fixed_n(cfg.kind, *cfg.n, taus, cfg.ou(), cfg.ensemble(), cfg.epsilon_rad, ctx.sim);
    ctx.save_curve("sweep_fixed_n.csv", c, curve_comments(cfg, "fixed-n decay"));
    return {{"curve", curve_json(c)}};
}

json run_sweep_fixed_tau(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const DecayCurve c =
        simulate_decay_fixed_tau(cfg.kind, cfg.tau(), cfg.n_grid, cfg.ou(), cfg.ensemble(), cfg.epsilon_rad, ctx.sim);
    ctx.save_curve("sweep_fixed_tau.csv", c, curve_comments(cfg, "fixed-tau decay"));
    return {{"curve", curve_json(c)}};
}

json run_fit(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    std::vector<DecayCurve> curves;
    for (const auto& path : cfg.input_csv) curves.push_back(load_curve_csv(path));

    json out = {{"model", to_string(cfg.fit_model)}};
    switch (cfg.fit_model) {
    case FitModel::OU_GLOBAL: out["fit"] = ctx.note_fit(fit_ou_global(curves)); break;
    case FitModel::POWER_LAW:
    case FitModel::PULSE_ERROR: {
        std::vector<T2Point> pts;
        json per_curve = json::array();
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const FitResult f = fit_decay(curves[i], FitModel::STRETCHED);
            per_curve.push_back(ctx.note_fit(f));
            double x = 0.0;
            if (cfg.fit_model == FitModel::POWER_LAW) {
                if (!curves[i].meta.fixed_n) throw FitError(cfg.input_csv[i] + ": power-law fit needs fixed_n metadata");
                x = *curves[i].meta.fixed_n;
            } else {
                if (!curves[i].meta.fixed_tau)
                    throw FitError(cfg.input_csv[i] + ": pulse-error fit needs fixed_tau metadata");
                x = *curves[i].meta.fixed_tau;
            }
            pts.push_back({x, f.value("T2"), f.error("T2")});
        }
        out["curve_fits"] = per_curve;
        const SequenceKind kind = curves.front().meta.kind.value_or(cfg.kind);
        out["fit"] = ctx.note_fit(cfg.fit_model == FitModel::POWER_LAW ? fit_power_law(pts)
                                                                      : fit_epsilon_from_t2(pts, kind));
        break;
    }
    default: {
        json per_curve = json::array();
        for (std::size_t i = 0; i < curves.size(); ++i) {
            json f = ctx.note_fit(fit_decay(curves[i], cfg.fit_model));
            f["input"] = cfg.input_csv[i];
            per_curve.push_back(f);
        }
        out["fits"] = per_curve;
    }
    }
    return out;
}

json reproduce_fig4(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    std::vector<double> taus;
    for (double t : fig4_tspin_grid()) taus.push_back(t / 2.0);
    const DecayCurve c = simulate_decay_fixed_n(SequenceKind::XX, 2, taus, cfg.ou(), cfg.ensemble(), 0.0, ctx.sim);
    ctx.save_curve("fig4.csv", c, curve_comments(cfg, "two-pulse spin-echo decay, ideal pulses"));

    std::vector<std::vector<double>> rows;
    for (const auto& p : c.points) {
        const double tot = total_efficiency({cfg.eta_afc, cfg.eta_ctrl, std::clamp(p.eta, 0.0, 1.0)});
        rows.push_back({p.t_spin, p.eta, p.sigma_eta, tot});
    }
    ctx.save_table("fig4_efficiency.csv", {"t_spin_s", "eta_spin", "sigma_eta", "eta_tot"}, rows,
                   {"eta_tot = eta_afc * eta_ctrl^2 * eta_spin",
                    "eta_afc: " + format_double(cfg.eta_afc) + ", eta_ctrl: " + format_double(cfg.eta_ctrl)});
    return {{"curve", curve_json(c)}, {"fit", ctx.note_fit(fit_decay(c, FitModel::STRETCHED))}};
}

json reproduce_fig5(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const PowerLawStudy s = power_law_study(cfg.ou(), cfg.ensemble(), ctx.sim);
    json fits = json::array();
    for (const auto& cf : s.curves) {
        const int n = *cf.curve.meta.fixed_n;
        ctx.save_curve("fig5_n" + std::to_string(n) + ".csv", cf.curve,
                       curve_comments(cfg, "fixed-n XX decay, ideal pulses"));
        json f = ctx.note_fit(cf.fit);
        f["n"] = n;
        fits.push_back(f);
    }
    const json pl = ctx.note_fit(s.power_law);
    std::ofstream(ctx.dir / "fig5_power_law.json") << pl.dump(2) << '\n';
    ctx.files.push_back("fig5_power_law.json");
    return {{"curve_fits", fits}, {"power_law", pl}};
}

json reproduce_fig6a(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const double eps = cfg.epsilon_rad != 0.0 ? cfg.epsilon_rad : 0.154;
    const OuParams ou = cfg.ou();
    std::vector<std::vector<double>> rows;
    json fits = json::array();
    std::size_t idx = 0;
    for (SequenceKind kind : {SequenceKind::XX, SequenceKind::XY4, SequenceKind::XY8}) {
        const int np = pulses_per_repetition(kind);
        for (double tau : fig6a_tau_grid()) {
            const CurveFit cf =
                fixed_tau_study(kind, tau, eps, ou, curve_ensemble(cfg.ensemble(), idx++), FitModel::STRETCHED, ctx.sim);
            ctx.save_curve("fig6a_" + to_string(kind) + "_tau" + ms_tag(tau) + "ms.csv", cf.curve,
                           curve_comments(cfg, "fixed-tau decay with pulse-area error"));
            json f = ctx.note_fit(cf.fit);
            f["kind"] = to_string(kind);
            f["tau_s"] = tau;
            fits.push_back(f);
            rows.push_back({static_cast<double>(np), tau, cf.fit.value("T2"), cf.fit.error("T2"),
                            t2_pulse_error(kind, eps, np, tau), t2_ou_limit(tau, ou),
                            2.0 * std::sqrt(2.0) * tau / eps, t2_combined(kind, eps, np, tau, ou)});
        }
    }
    ctx.save_table("fig6a_t2.csv",
                   {"n_p", "tau_s", "t2_mc_s", "t2_mc_err_s", "t2_pulse_error_s", "t2_ou_limit_s", "t2_xx_line_s",
                    "t2_combined_s"},
                   rows, {"n_p = 2: XX, 4: XY4, 8: XY8", "epsilon_rad: " + format_double(eps)});
    return {{"epsilon_rad", eps}, {"fits", fits}};
}

json reproduce_fig6b(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const double eps = cfg.epsilon_rad != 0.0 ? cfg.epsilon_rad : 0.154;
    const CurveFit cf = fixed_tau_study(SequenceKind::XY8, 2.5e-3, eps, cfg.ou(), cfg.ensemble(), FitModel::STRETCHED,
                                        ctx.sim);
    ctx.save_curve("fig6b.csv", cf.curve, curve_comments(cfg, "XY8 decay at tau = 2.5 ms"));
    return {{"epsilon_rad", eps}, {"fit", ctx.note_fit(cf.fit)}};
}

json reproduce_appendix_a3(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const double eps = cfg.epsilon_rad != 0.0 ? cfg.epsilon_rad : 0.154;
    const auto studies = stretching_study(eps, cfg.ou(), cfg.ensemble(), ctx.sim);
    std::vector<std::vector<double>> rows;
    json fits = json::array();
    for (const auto& cf : studies) {
        const double tau = *cf.curve.meta.fixed_tau;
        ctx.save_curve("appendixA3_tau" + ms_tag(tau) + "ms.csv", cf.curve,
                       curve_comments(cfg, "XX decay with pulse-area error"));
        json f = ctx.note_fit(cf.fit);
        f["tau_s"] = tau;
        fits.push_back(f);
        rows.push_back({tau, cf.fit.value("T2"), cf.fit.error("T2"), cf.fit.value("alpha"), cf.fit.error("alpha"),
                        cf.fit.value("eta0"), cf.fit.value("c")});
    }
    ctx.save_table("appendixA3_fits.csv", {"tau_s", "t2_s", "t2_err_s", "alpha", "alpha_err", "eta0", "c"}, rows,
                   {"STRETCHED_OFFSET fits, epsilon_rad: " + format_double(eps)});
    return {{"epsilon_rad", eps}, {"fits", fits}};
}

json error_json(const std::string& category, const std::string& message) {
    return {{"category", category}, {"message", message}};
}

} // namespace

std::vector<double> fig4_tspin_grid() {
    return {2e-3, 4e-3, 6e-3, 8e-3, 10e-3, 12e-3, 15e-3, 20e-3, 25e-3, 30e-3, 35e-3, 40e-3, 50e-3, 60e-3};
}

std::vector<double> fixed_n_tau_grid(int n, const OuParams& ou, int points) {
    if (n < 1 || points < 2) throw std::invalid_argument("fixed_n_tau_grid: n >= 1 and points >= 2");
    const double t2 = t2_1_from_ou(ou) * std::pow(static_cast<double>(n), 2.0 / 3.0);
    std::vector<double> taus;
    for (int k = 1; k <= points; ++k) taus.push_back(2.0 * t2 * k / points / n);
    return taus;
}

std::vector<int> fixed_tau_n_grid(SequenceKind kind, double epsilon, double tau, const OuParams& ou, int points,
                                  int n_cap) {
    const int np = pulses_per_repetition(kind);
    const double t2 = t2_combined(kind, epsilon, np, tau, ou);
    double n_max = std::isfinite(t2) ? 2.2 * t2 / tau : n_cap;
    n_max = std::clamp(n_max, static_cast<double>(np * points), static_cast<double>(n_cap));
    std::vector<int> grid;
    for (int k = 1; k <= points; ++k) {
        const int reps = std::max(1, static_cast<int>(std::lround(n_max * k / points / np)));
        if (grid.empty() || reps * np > grid.back()) grid.push_back(reps * np);
    }
    return grid;
}

std::vector<double> fig6a_tau_grid() { return {1e-3, 1.5e-3, 2e-3, 3e-3, 4e-3, 6e-3, 8e-3, 10e-3, 12e-3}; }

std::vector<double> appendix_a3_tau_grid() { return {1.5e-3, 2e-3, 2.5e-3, 3e-3, 4e-3, 6e-3, 8e-3, 10e-3}; }

PowerLawStudy power_law_study(const OuParams& ou, const EnsembleConfig& ens, const SimOptions& sim) {
    PowerLawStudy s;
    std::vector<T2Point> pts;
    const int ns[] = {2, 4, 8, 16};
    for (std::size_t c = 0; c < 4; ++c) {
        const auto taus = fixed_n_tau_grid(ns[c], ou);
        CurveFit cf;
        cf.curve = simulate_decay_fixed_n(SequenceKind::XX, ns[c], taus, ou, curve_ensemble(ens, c), 0.0, sim);
        cf.fit = fit_decay(cf.curve, FitModel::STRETCHED);
        pts.push_back({static_cast<double>(ns[c]), cf.fit.value("T2"), cf.fit.error("T2")});
        s.curves.push_back(std::move(cf));
    }
    s.power_law = fit_power_law(pts);
    return s;
}

CurveFit fixed_tau_study(SequenceKind kind, double tau, double epsilon, const OuParams& ou, const EnsembleConfig& ens,
                         FitModel model, const SimOptions& sim) {
    CurveFit cf;
    const auto grid = fixed_tau_n_grid(kind, epsilon, tau, ou);
    cf.curve = simulate_decay_fixed_tau(kind, tau, grid, ou, ens, epsilon, sim);
    cf.fit = fit_decay(cf.curve, model);
    return cf;
}

std::vector<CurveFit> stretching_study(double epsilon, const OuParams& ou, const EnsembleConfig& ens,
                                       const SimOptions& sim) {
    std::vector<CurveFit> out;
    std::size_t c = 0;
    for (double tau : appendix_a3_tau_grid())
        out.push_back(fixed_tau_study(SequenceKind::XX, tau, epsilon, ou, curve_ensemble(ens, c++),
                                      FitModel::STRETCHED_OFFSET, sim));
    return out;
}

void save_table_csv(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows, const std::vector<std::string>& comments) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write '" + path + "'");
    for (const auto& c : comments) os << "# " << c << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
        os << '\n';
    }
}

RunOutcome run(const RunConfig& cfg, const RunOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutcome out;
    Context ctx{cfg, SimOptions{opts.threads, PulsePath::Auto}, fs::path(cfg.out_dir), {}, {}, false};

    json& s = out.summary;
    s["version"] = kVersion;
    s["config"] = to_json(cfg);
    if (cfg.seed) s["seed"] = *cfg.seed;

    try {
        cfg.validate();
        const ConstraintReport report = check_constraints(compute_splittings(cfg.field()), cfg.envelope());
        s["constraints"] = constraints_json(report);
        for (const auto& w : failed_constraints(report)) ctx.warnings.push_back(w);
        if (opts.strict && !report.all_pass()) {
            out.exit_code = kExitConstraint;
            s["error"] = error_json("constraint", "operating constraints failed under --strict");
        } else {
            fs::create_directories(ctx.dir);
            json results;
            switch (cfg.scenario) {
            case Scenario::CheckConfig: results = {{"splittings", {{"delta_hz", compute_splittings(cfg.field()).delta},
                                                                   {"delta_e_hz", compute_splittings(cfg.field()).delta_e}}}};
                break;
            case Scenario::Simulate: results = run_simulate(ctx); break;
            case Scenario::SweepFixedN: results = run_sweep_fixed_n(ctx); break;
            case Scenario::SweepFixedTau: results = run_sweep_fixed_tau(ctx); break;
            case Scenario::Fit: results = run_fit(ctx); break;
            case Scenario::Reproduce:
                if (cfg.reproduce == "fig4") results = reproduce_fig4(ctx);
                else if (cfg.reproduce == "fig5") results = reproduce_fig5(ctx);
                else if (cfg.reproduce == "fig6a") results = reproduce_fig6a(ctx);
                else if (cfg.reproduce == "fig6b") results = reproduce_fig6b(ctx);
                else results = reproduce_appendix_a3(ctx);
                break;
            }
            s["results"] = results;
            if (ctx.fit_failed) {
                out.exit_code = kExitFit;
                s["error"] = error_json("fit", "one or more fits did not converge");
            }
        }
    } catch (const ConfigError& e) {
        out.exit_code = kExitSchema;
        s["error"] = error_json("schema", e.what());
    } catch (const FitError& e) {
        out.exit_code = kExitFit;
        s["error"] = error_json("fit", e.what());
    } catch (const std::exception& e) {
        out.exit_code = kExitCrash;
        s["error"] = error_json("internal", e.what());
    }

    s["warnings"] = ctx.warnings;
    s["files"] = ctx.files;
    s["exit_code"] = out.exit_code;
    s["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.files = ctx.files;

    if (out.exit_code != kExitSchema) {
        std::error_code ec;
        fs::create_directories(ctx.dir, ec);
        std::ofstream js(ctx.dir / "summary.json");
        if (js) {
            js << s.dump(2) << '\n';
            out.files.push_back("summary.json");
        }
    }
    return out;
}

} // namespace afc
