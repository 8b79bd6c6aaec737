#include "afc/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "afc/coherence_models.hpp"
#include "afc/levmar.hpp"
#include "afc/ou_noise.hpp"

namespace afc {

namespace {

using Eigen::VectorXd;

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double s) { return std::log(s / (1.0 - s)); }

// Maps an unconstrained coordinate to [lo, hi] and back.
struct Bounded {
    double lo, hi;
    double value(double u) const { return lo + (hi - lo) * sigmoid(u); }
    double coord(double v) const { return logit(std::clamp((v - lo) / (hi - lo), 1e-9, 1.0 - 1e-9)); }
    double derivative(double u) const {
        const double s = sigmoid(u);
        return (hi - lo) * s * (1.0 - s);
    }
};

struct DataSet {
    std::vector<double> t, y, w;  // w = 1 / sigma
    bool weighted = true;
};

DataSet prepare(const DecayCurve& curve) {
    curve.validate();
    DataSet d;
    d.weighted = curve.has_errors();
    for (const auto& p : curve.points) {
        d.t.push_back(p.t_spin);
        d.y.push_back(p.eta);
        d.w.push_back(d.weighted ? 1.0 / p.sigma_eta : 1.0);
    }
    return d;
}

int free_param_count(FitModel m) {
    switch (m) {
    case FitModel::EXP:
    case FitModel::GAUSS: return 2;
    case FitModel::STRETCHED: return 3;
    case FitModel::STRETCHED_OFFSET: return 4;
    default: throw std::invalid_argument("fit_decay supports EXP, GAUSS, STRETCHED, STRETCHED_OFFSET");
    }
}

// Natural parameters (A, T2, alpha, c) from optimizer coordinates.
struct DecayParams {
    double amp = 1.0, t2 = 1.0, alpha = 1.0, offset = 0.0;
};

struct DecayModel {
    FitModel model;
    Bounded alpha_map;
    Bounded offset_map;
    double t_ref;

    DecayParams decode(const VectorXd& p) const {
        DecayParams d;
        d.amp = p[0];
        d.t2 = t_ref * std::exp(p[1]);
        switch (model) {
        case FitModel::EXP: d.alpha = 1.0; break;
        case FitModel::GAUSS: d.alpha = 2.0; break;
        case FitModel::STRETCHED: d.alpha = alpha_map.value(p[2]); break;
        case FitModel::STRETCHED_OFFSET:
            d.alpha = alpha_map.value(p[2]);
            d.offset = offset_map.value(p[3]);
            break;
        default: break;
        }
        return d;
    }

    // d(natural)/d(coordinate), diagonal
    VectorXd chain(const VectorXd& p) const {
        VectorXd g(p.size());
        g[0] = 1.0;
        g[1] = t_ref * std::exp(p[1]);
        if (p.size() > 2) g[2] = alpha_map.derivative(p[2]);
        if (p.size() > 3) g[3] = offset_map.derivative(p[3]);
        return g;
    }

    static double eval(const DecayParams& d, double t) {
        return d.amp * std::exp(-2.0 * std::pow(t / d.t2, d.alpha)) + d.offset;
    }
};

double decay_value(FitModel m, const DecayParams& d, double t) {
    (void)m;
    return DecayModel::eval(d, t);
}

std::vector<std::string> decay_param_names(FitModel m) {
    switch (m) {
    case FitModel::EXP:
    case FitModel::GAUSS: return {"A", "T2"};
    case FitModel::STRETCHED: return {"A", "T2", "alpha"};
    case FitModel::STRETCHED_OFFSET: return {"eta0", "T2", "alpha", "c"};
    default: return {};
    }
}

struct BestRun {
    LmResult lm;
    int agreeing = 0;
    int total = 0;
};

BestRun multi_start(const ResidualFn& f, const std::vector<VectorXd>& starts) {
    BestRun best;
    best.lm.cost = std::numeric_limits<double>::infinity();
    std::vector<double> costs;
    for (const auto& s : starts) {
        LmResult r = levenberg_marquardt(f, s);
        costs.push_back(r.cost);
        // ties keep the earlier start so the outcome is order-stable
        if (r.cost < best.lm.cost) best.lm = std::move(r);
    }
    best.total = static_cast<int>(starts.size());
    for (double c : costs)
        if (c <= best.lm.cost * (1.0 + 1e-6) + 1e-24) ++best.agreeing;
    return best;
}

// Covariance of natural parameters from the optimizer Jacobian.
std::vector<double> natural_errors(const LmResult& lm, const VectorXd& chain, double scale, bool& ok) {
    Eigen::MatrixXd cov;
    ok = normal_covariance(lm.jacobian, cov);
    std::vector<double> err(static_cast<std::size_t>(lm.params.size()), std::numeric_limits<double>::quiet_NaN());
    if (!ok) return err;
    for (Eigen::Index j = 0; j < lm.params.size(); ++j)
        err[static_cast<std::size_t>(j)] = std::abs(chain[j]) * std::sqrt(std::max(cov(j, j), 0.0) * scale);
    return err;
}

double covariance_scale(bool weighted, double chi2_red) {
    // weighted: inflate by misfit only; unweighted: residual variance sets the scale
    return weighted ? std::max(1.0, chi2_red) : chi2_red;
}

} // namespace

std::string to_string(FitModel m) {
    switch (m) {
    case FitModel::EXP: return "EXP";
    case FitModel::GAUSS: return "GAUSS";
    case FitModel::STRETCHED: return "STRETCHED";
    case FitModel::STRETCHED_OFFSET: return "STRETCHED_OFFSET";
    case FitModel::POWER_LAW: return "POWER_LAW";
    case FitModel::OU_GLOBAL: return "OU_GLOBAL";
    case FitModel::PULSE_ERROR: return "PULSE_ERROR";
    }
    return "?";
}

FitModel parse_fit_model(std::string_view name) {
    for (FitModel m : {FitModel::EXP, FitModel::GAUSS, FitModel::STRETCHED, FitModel::STRETCHED_OFFSET,
                       FitModel::POWER_LAW, FitModel::OU_GLOBAL, FitModel::PULSE_ERROR})
        if (to_string(m) == name) return m;
    throw std::invalid_argument("unknown fit model '" + std::string(name) + "'");
}

const FitParam& FitResult::get(std::string_view name) const {
    for (const auto& p : params)
        if (p.name == name) return p;
    throw std::out_of_range("fit result has no parameter '" + std::string(name) + "'");
}

FitResult fit_decay(const DecayCurve& curve, FitModel model, const FitOptions& opts) {
    const int k = free_param_count(model);
    const DataSet d = prepare(curve);
    const int n = static_cast<int>(d.t.size());
    if (n < k + 2)
        throw FitError("fit_decay(" + to_string(model) + ") needs at least " + std::to_string(k + 2) +
                       " points, got " + std::to_string(n));

    const double t_ref = *std::max_element(d.t.begin(), d.t.end());
    const double y_max = *std::max_element(d.y.begin(), d.y.end());
    if (!(t_ref > 0.0) || !(y_max > 0.0)) throw FitError("fit_decay: degenerate curve");

    const DecayModel dm{model, Bounded{opts.alpha_min, opts.alpha_max}, Bounded{0.0, y_max}, t_ref};
    const ResidualFn f = [&](const VectorXd& p) {
        const DecayParams dp = dm.decode(p);
        VectorXd r(n);
        for (int i = 0; i < n; ++i) r[i] = (d.y[i] - DecayModel::eval(dp, d.t[i])) * d.w[i];
        return r;
    };

    std::vector<VectorXd> starts;
    const double amp0 = y_max;
    if (k == 2) {
        for (double s : {0.03, 0.1, 0.2, 0.4, 0.7, 1.0, 2.0, 5.0}) {
            VectorXd p(2);
            p << amp0, std::log(s);
            starts.push_back(p);
        }
    } else {
        for (double s : {0.1, 0.3, 1.0, 3.0})
            for (double a : {0.8, 1.5, 2.5}) {
                if (k == 3) {
                    VectorXd p(3);
                    p << amp0, std::log(s), dm.alpha_map.coord(a);
                    starts.push_back(p);
                } else {
                    for (double c : {0.02, 0.3}) {
                        VectorXd p(4);
                        p << amp0 * (1.0 - c), std::log(s), dm.alpha_map.coord(a), dm.offset_map.coord(c * y_max);
                        starts.push_back(p);
                    }
                }
            }
    }

    const BestRun best = multi_start(f, starts);

    FitResult out;
    out.model = model;
    out.weighted = d.weighted;
    out.dof = n - k;
    out.chi2_reduced = best.lm.cost / out.dof;
    out.converged = best.lm.converged && std::isfinite(best.lm.cost);
    out.starts = best.total;
    out.starts_agreeing = best.agreeing;
    if (!d.weighted) out.warnings.push_back("unweighted fit: sigma_eta missing or non-positive");

    const DecayParams dp = dm.decode(best.lm.params);
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = d.y[i] - DecayModel::eval(dp, d.t[i]);
        ss += e * e;
    }
    out.rms_residual = std::sqrt(ss / n);

    bool cov_ok = false;
    const auto err = natural_errors(best.lm, dm.chain(best.lm.params), covariance_scale(d.weighted, out.chi2_reduced),
                                    cov_ok);
    if (!cov_ok) out.warnings.push_back("singular curvature matrix: parameter errors unavailable");

    const auto names = decay_param_names(model);
    const double natural[4] = {dp.amp, dp.t2, dp.alpha, dp.offset};
    for (int j = 0; j < k; ++j) out.params.push_back({names[static_cast<std::size_t>(j)], natural[j], err[static_cast<std::size_t>(j)]});

    if (k >= 3 && (dp.alpha - opts.alpha_min < 1e-3 || opts.alpha_max - dp.alpha < 1e-3))
        out.warnings.push_back("alpha at its bound");
    if (!out.converged) out.warnings.push_back("optimizer did not converge: " + best.lm.message);
    return out;
}

double evaluate_decay(const FitResult& fit, double t) {
    DecayParams d;
    switch (fit.model) {
    case FitModel::EXP: d = {fit.value("A"), fit.value("T2"), 1.0, 0.0}; break;
    case FitModel::GAUSS: d = {fit.value("A"), fit.value("T2"), 2.0, 0.0}; break;
    case FitModel::STRETCHED: d = {fit.value("A"), fit.value("T2"), fit.value("alpha"), 0.0}; break;
    case FitModel::STRETCHED_OFFSET:
        d = {fit.value("eta0"), fit.value("T2"), fit.value("alpha"), fit.value("c")};
        break;
    default: throw std::invalid_argument("evaluate_decay: not a decay model");
    }
    return decay_value(fit.model, d, t);
}

FitResult fit_power_law(const std::vector<T2Point>& pts) {
    if (pts.size() < 3) throw FitError("fit_power_law needs at least 3 points");
    bool weighted = true;
    for (const auto& p : pts) {
        if (!(p.t2 > 0.0)) throw FitError("fit_power_law: T2 values must be > 0");
        if (!(p.x >= 1.0)) throw FitError("fit_power_law: pulse counts must be >= 1");
        if (!(p.sigma > 0.0)) weighted = false;
    }

    // log T2 = a + gamma log n, weights (T2 / sigma_T2)^2
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pts) {
        const double w = weighted ? std::pow(p.t2 / p.sigma, 2) : 1.0;
        const double x = std::log(p.x), y = std::log(p.t2);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    const double det = sw * sxx - sx * sx;
    if (!(std::abs(det) > 1e-300)) throw FitError("fit_power_law: pulse counts must not all coincide");
    const double gamma = (sw * sxy - sx * sy) / det;
    const double a = (sy - gamma * sx) / sw;

    double chi2 = 0.0, ss = 0.0;
    for (const auto& p : pts) {
        const double w = weighted ? std::pow(p.t2 / p.sigma, 2) : 1.0;
        const double r = std::log(p.t2) - a - gamma * std::log(p.x);
        chi2 += w * r * r;
        const double e = p.t2 - std::exp(a) * std::pow(p.x, gamma);
        ss += e * e;
    }

    FitResult out;
    out.model = FitModel::POWER_LAW;
    out.weighted = weighted;
    out.dof = static_cast<int>(pts.size()) - 2;
    out.chi2_reduced = chi2 / out.dof;
    out.rms_residual = std::sqrt(ss / static_cast<double>(pts.size()));
    out.converged = true;
    out.starts = 1;
    out.starts_agreeing = 1;
    const double scale = covariance_scale(weighted, out.chi2_reduced);
    const double var_a = sxx / det * scale;
    const double var_g = sw / det * scale;
    const double t2_1 = std::exp(a);
    out.params.push_back({"T2_1", t2_1, t2_1 * std::sqrt(var_a)});
    out.params.push_back({"gamma", gamma, std::sqrt(var_g)});
    if (!weighted) out.warnings.push_back("unweighted fit: T2 uncertainties missing");
    return out;
}

FitResult fit_ou_global(const std::vector<DecayCurve>& curves) {
    if (curves.empty()) throw FitError("fit_ou_global needs at least one curve");
    bool weighted = true;
    std::vector<int> ns;
    std::size_t n_points = 0;
    for (const auto& c : curves) {
        c.validate();
        if (!c.meta.fixed_n || *c.meta.fixed_n < 1) throw FitError("fit_ou_global: every curve needs fixed_n");
        ns.push_back(*c.meta.fixed_n);
        weighted = weighted && c.has_errors();
        n_points += c.size();
    }
    const int m = static_cast<int>(curves.size());
    const int k = m + 2;
    if (static_cast<int>(n_points) < k + 2) throw FitError("fit_ou_global: too few points");

    constexpr double kSigmaRef = 2.0 * 3.141592653589793 * 10.0;  // rad/s
    constexpr double kTauRef = 10e-3;                              // s
    auto decode = [&](const VectorXd& p) { return OuParams{kSigmaRef * std::exp(p[0]), kTauRef * std::exp(p[1])}; };

    const ResidualFn f = [&](const VectorXd& p) {
        const OuParams ou = decode(p);
        VectorXd r(static_cast<Eigen::Index>(n_points));
        Eigen::Index i = 0;
        for (int c = 0; c < m; ++c) {
            const int n = ns[static_cast<std::size_t>(c)];
            for (const auto& pt : curves[static_cast<std::size_t>(c)].points) {
                const double model = pt.t_spin > 0.0 ? p[2 + c] * eta_ou(n, pt.t_spin / n, ou) : p[2 + c];
                const double w = weighted ? 1.0 / pt.sigma_eta : 1.0;
                r[i++] = (pt.eta - model) * w;
            }
        }
        return r;
    };

    std::vector<VectorXd> starts;
    for (double s_hz : {5.0, 15.0, 40.0})
        for (double tc : {2e-3, 8e-3, 30e-3}) {
            VectorXd p(k);
            p[0] = std::log(2.0 * 3.141592653589793 * s_hz / kSigmaRef);
            p[1] = std::log(tc / kTauRef);
            for (int c = 0; c < m; ++c) {
                const auto& pts = curves[static_cast<std::size_t>(c)].points;
                p[2 + c] = pts.empty() ? 1.0 : std::max_element(pts.begin(), pts.end(), [](auto& a, auto& b) {
                                                     return a.eta < b.eta;
                                                 })->eta;
            }
            starts.push_back(p);
        }
    const BestRun best = multi_start(f, starts);

    FitResult out;
    out.model = FitModel::OU_GLOBAL;
    out.weighted = weighted;
    out.dof = static_cast<int>(n_points) - k;
    out.chi2_reduced = best.lm.cost / out.dof;
    out.converged = best.lm.converged && std::isfinite(best.lm.cost);
    out.starts = best.total;
    out.starts_agreeing = best.agreeing;

    const OuParams ou = decode(best.lm.params);
    VectorXd chain(k);
    chain[0] = ou.sigma_hz();
    chain[1] = ou.tau_c;
    for (int c = 0; c < m; ++c) chain[2 + c] = 1.0;
    bool cov_ok = false;
    const auto err = natural_errors(best.lm, chain, covariance_scale(weighted, out.chi2_reduced), cov_ok);

    const VectorXd res = f(best.lm.params);
    double ss = 0.0;
    Eigen::Index i = 0;
    for (const auto& c : curves)
        for (const auto& pt : c.points) {
            const double e = weighted ? res[i] * pt.sigma_eta : res[i];
            ss += e * e;
            ++i;
        }
    out.rms_residual = std::sqrt(ss / static_cast<double>(n_points));

    out.params.push_back({"sigma_hz", ou.sigma_hz(), err[0]});
    out.params.push_back({"tau_c", ou.tau_c, err[1]});
    for (int c = 0; c < m; ++c)
        out.params.push_back({"A_n" + std::to_string(ns[static_cast<std::size_t>(c)]), best.lm.params[2 + c],
                              err[static_cast<std::size_t>(2 + c)]});
    if (!weighted) out.warnings.push_back("unweighted fit: sigma_eta missing or non-positive");
    if (!cov_ok) out.warnings.push_back("singular curvature matrix: parameter errors unavailable");
    if (!out.converged) out.warnings.push_back("optimizer did not converge: " + best.lm.message);
    return out;
}

FitResult fit_epsilon_from_t2(const std::vector<T2Point>& pts, SequenceKind kind) {
    if (pts.size() < 2) throw FitError("fit_epsilon_from_t2 needs at least 2 points");
    bool weighted = true;
    for (const auto& p : pts) {
        if (!(p.x > 0.0) || !(p.t2 > 0.0)) throw FitError("fit_epsilon_from_t2: tau and T2 must be > 0");
        if (!(p.sigma > 0.0)) weighted = false;
    }
    double stt = 0.0, sty = 0.0;
    for (const auto& p : pts) {
        const double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
        stt += w * p.x * p.x;
        sty += w * p.x * p.t2;
    }
    const double slope = sty / stt;
    double chi2 = 0.0, ss = 0.0;
    for (const auto& p : pts) {
        const double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
        const double e = p.t2 - slope * p.x;
        chi2 += w * e * e;
        ss += e * e;
    }

    FitResult out;
    out.model = FitModel::PULSE_ERROR;
    out.weighted = weighted;
    out.dof = static_cast<int>(pts.size()) - 1;
    out.chi2_reduced = chi2 / out.dof;
    out.rms_residual = std::sqrt(ss / static_cast<double>(pts.size()));
    out.converged = true;
    out.starts = 1;
    out.starts_agreeing = 1;

    const double n_p = pulses_per_repetition(kind);
    auto eps_of = [&](double s) { return epsilon_from_alpha(kind, 2.0 * n_p * n_p / (s * s)); };
    const double slope_err = std::sqrt(covariance_scale(weighted, out.chi2_reduced) / stt);
    const double eps = eps_of(slope);
    const double h = 1e-6 * slope;
    const double deps = (eps_of(slope + h) - eps_of(slope - h)) / (2.0 * h);
    out.params.push_back({"epsilon", eps, std::abs(deps) * slope_err});
    out.params.push_back({"slope", slope, slope_err});
    if (!weighted) out.warnings.push_back("unweighted fit: T2 uncertainties missing");
    return out;
}

ModelComparison compare_models(const DecayCurve& curve) {
    ModelComparison cmp;
    for (FitModel m : {FitModel::EXP, FitModel::GAUSS, FitModel::STRETCHED}) {
        const FitResult r = fit_decay(curve, m);
        cmp.rows.push_back({m, r.value("T2"), r.error("T2"), 0.0, r.converged});
        if (m == FitModel::STRETCHED) cmp.stretched_alpha = r.value("alpha");
    }
    double sum = 0.0;
    for (const auto& r : cmp.rows) sum += r.t2;
    cmp.mean_t2 = sum / static_cast<double>(cmp.rows.size());
    for (auto& r : cmp.rows) {
        r.deviation = (r.t2 - cmp.mean_t2) / cmp.mean_t2;
        cmp.max_abs_deviation = std::max(cmp.max_abs_deviation, std::abs(r.deviation));
    }
    return cmp;
}

nlohmann::json to_json(const FitResult& fit) {
    nlohmann::json j;
    j["model"] = to_string(fit.model);
    j["converged"] = fit.converged;
    j["weighted"] = fit.weighted;
    j["chi2_reduced"] = fit.chi2_reduced;
    j["dof"] = fit.dof;
    j["rms_residual"] = fit.rms_residual;
    j["starts"] = fit.starts;
    j["starts_agreeing"] = fit.starts_agreeing;
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json errors = nlohmann::json::object();
    for (const auto& p : fit.params) {
        params[p.name] = p.value;
        errors[p.name] = std::isfinite(p.error) ? nlohmann::json(p.error) : nlohmann::json(nullptr);
    }
    j["params"] = params;
    j["param_errors"] = errors;
    j["warnings"] = fit.warnings;
    return j;
}

nlohmann::json to_json(const ModelComparison& cmp) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : cmp.rows)
        rows.push_back({{"model", to_string(r.model)},
                        {"T2", r.t2},
                        {"T2_error", r.t2_error},
                        {"deviation", r.deviation},
                        {"converged", r.converged}});
    return {{"rows", rows},
            {"mean_T2", cmp.mean_t2},
            {"max_abs_deviation", cmp.max_abs_deviation},
            {"stretched_alpha", cmp.stretched_alpha}};
}

} // namespace afc
