#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "afc/dd_sequence.hpp"
#include "afc/decay_curve.hpp"

namespace afc {

enum class FitModel { EXP, GAUSS, STRETCHED, STRETCHED_OFFSET, POWER_LAW, OU_GLOBAL, PULSE_ERROR };

std::string to_string(FitModel m);
FitModel parse_fit_model(std::string_view name);

/// Raised for inputs that cannot be fitted at all (too few points, degenerate data).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FitParam {
    std::string name;
    double value = 0.0;
    double error = 0.0;  // one standard deviation
};

struct FitResult {
    FitModel model = FitModel::EXP;
    std::vector<FitParam> params;
    double chi2_reduced = 0.0;
    int dof = 0;
    double rms_residual = 0.0;  // unweighted, in data units
    bool converged = false;     // false: params are not usable
    bool weighted = true;
    int starts = 0;             // multi-start grid size
    int starts_agreeing = 0;    // starts that reached the best cost
    std::vector<std::string> warnings;

    const FitParam& get(std::string_view name) const;
    double value(std::string_view name) const { return get(name).value; }
    double error(std::string_view name) const { return get(name).error; }
};

struct FitOptions {
    double alpha_min = 0.3;
    double alpha_max = 3.0;
};

/// Model forms, t = storage time:
///   EXP               A exp(-2 t / T2)
///   GAUSS             A exp(-2 (t / T2)^2)
///   STRETCHED         A exp(-2 (t / T2)^alpha)
///   STRETCHED_OFFSET  eta0 exp(-2 (t / T2)^alpha) + c
/// Weighted by sigma_eta when every point carries one, otherwise unweighted
/// with a warning. Deterministic multi-start grid; the best optimum wins.
FitResult fit_decay(const DecayCurve& curve, FitModel model, const FitOptions& opts = {});

/// Model prediction for a fitted decay model at time t.
double evaluate_decay(const FitResult& fit, double t);

struct T2Point {
    double x = 0.0;      // n (power law) or tau in seconds (pulse-error fit)
    double t2 = 0.0;     // s
    double sigma = 0.0;  // s; <= 0 means unavailable
};

/// T2(n) = T2(1) n^gamma by weighted least squares in log space.
FitResult fit_power_law(const std::vector<T2Point>& t2_vs_n);

/// Shared (sigma, tau_c) over fixed-n curves with a free amplitude per curve:
/// eta = A_n exp(-2 Gamma(n, t / n)). Each curve must carry meta.fixed_n.
FitResult fit_ou_global(const std::vector<DecayCurve>& curves);

/// Origin-constrained line T2 = n_p sqrt(2 / alpha(eps)) tau, solved for eps.
FitResult fit_epsilon_from_t2(const std::vector<T2Point>& t2_vs_tau, SequenceKind kind);

struct ModelComparisonRow {
    FitModel model = FitModel::EXP;
    double t2 = 0.0;
    double t2_error = 0.0;
    double deviation = 0.0;  // (T2 - mean T2) / mean T2
    bool converged = false;
};

struct ModelComparison {
    std::vector<ModelComparisonRow> rows;
    double mean_t2 = 0.0;
    double max_abs_deviation = 0.0;
    double stretched_alpha = 0.0;
};

/// Fits EXP, GAUSS and STRETCHED and reports the spread of T2.
ModelComparison compare_models(const DecayCurve& curve);

nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const ModelComparison& cmp);

} // namespace afc
