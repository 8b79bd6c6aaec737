#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "afc/fitkit.hpp"
#include "afc/run_config.hpp"
#include "afc/spin_sim.hpp"

namespace afc {

inline constexpr const char* kVersion = "0.3.0";

enum ExitCode : int { kExitOk = 0, kExitCrash = 1, kExitSchema = 2, kExitConstraint = 3, kExitFit = 4 };

struct RunOptions {
    unsigned threads = 0;
    bool strict = false;
};

struct RunOutcome {
    int exit_code = kExitOk;
    nlohmann::json summary;
    std::vector<std::string> files;  // written, relative to out_dir
};

/// Executes one scenario and writes its CSV files plus summary.json into
/// cfg.out_dir. Errors are reported through exit_code and summary["error"].
RunOutcome run(const RunConfig& cfg, const RunOptions& opts = {});

// Scenario library. The grids below are reconstructions chosen to cover each
// decay down to well below e^-2; they are not the measured grids.

struct CurveFit {
    DecayCurve curve;
    FitResult fit;
};

/// Storage times for the two-pulse decay (s).
std::vector<double> fig4_tspin_grid();

/// tau grid (s) for a fixed-n decay, spanning t_spin up to ~2 T2 predicted by
/// the OU power law.
std::vector<double> fixed_n_tau_grid(int n, const OuParams& ou, int points = 16);

/// Pulse counts for a fixed-tau decay out to ~2.2 t2_combined, in multiples
/// of the repetition length, capped at n_cap.
std::vector<int> fixed_tau_n_grid(SequenceKind kind, double epsilon, double tau, const OuParams& ou,
                                  int points = 14, int n_cap = 12000);

std::vector<double> fig6a_tau_grid();        // s
std::vector<double> appendix_a3_tau_grid();  // s

struct PowerLawStudy {
    std::vector<CurveFit> curves;  // n = 2, 4, 8, 16
    FitResult power_law;
};

/// Ideal-pulse XX decays at n = 2, 4, 8, 16, STRETCHED fits, power-law fit.
PowerLawStudy power_law_study(const OuParams& ou, const EnsembleConfig& ens, const SimOptions& sim = {});

/// Fixed-tau decay with pulse errors and a fit of the given model.
CurveFit fixed_tau_study(SequenceKind kind, double tau, double epsilon, const OuParams& ou,
                         const EnsembleConfig& ens, FitModel model, const SimOptions& sim = {});

/// XX fixed-tau decays over the appendix tau grid with STRETCHED_OFFSET fits.
std::vector<CurveFit> stretching_study(double epsilon, const OuParams& ou, const EnsembleConfig& ens,
                                       const SimOptions& sim = {});

/// CSV with a single header row and '#' comment lines.
void save_table_csv(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows, const std::vector<std::string>& comments = {});

} // namespace afc
