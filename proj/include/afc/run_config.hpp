#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "afc/dd_sequence.hpp"
#include "afc/fitkit.hpp"
#include "afc/model_core.hpp"
#include "afc/ou_noise.hpp"
#include "afc/spin_sim.hpp"

namespace afc {

enum class Scenario { Simulate, SweepFixedN, SweepFixedTau, Fit, CheckConfig, Reproduce };

std::string to_string(Scenario s);
Scenario parse_scenario(std::string_view name);
bool needs_seed(Scenario s);

/// Schema violations in a run config.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Values are kept in the file's units (ms, mT, Hz) so the echo round-trips
// exactly; the accessors convert to SI for the library.
struct RunConfig {
    Scenario scenario = Scenario::CheckConfig;

    double field_mt = 15.0;
    double field_angle_deg = 65.0;
    double ground_gradient_hz_per_t = 14e6;
    double excited_gradient_hz_per_t = 20e6;
    double s1_gradient_hz_per_t = 17e6;
    double gamma_inh_hz = 30e3;
    double rabi_hz = 23e3;
    double gamma_afc_hz = 160e3;
    double sigma_hz = 15.1;
    double tau_c_ms = 9.5;
    double epsilon_rad = 0.0;
    double eta_afc = 0.102;
    double eta_ctrl = 0.61;

    SequenceKind kind = SequenceKind::XX;
    int n_s = 1;
    std::optional<double> tau_ms;
    std::optional<int> n;  // total pulses for sweep-fixed-n
    std::vector<double> tau_grid_ms;
    std::vector<int> n_grid;

    int n_traj = 20000;
    std::optional<int> batch_size;  // default: about 40 batches
    std::optional<std::uint64_t> seed;

    std::vector<std::string> input_csv;
    FitModel fit_model = FitModel::STRETCHED;

    std::string reproduce;

    std::string out_dir = "out";

    FieldConfig field() const;
    OperatingEnvelope envelope() const;
    OuParams ou() const;
    EnsembleConfig ensemble() const;  // seed must be set
    double tau() const;               // s
    std::vector<double> tau_grid() const;

    void validate() const;  // throws ConfigError

    bool operator==(const RunConfig&) const = default;
};

/// Unknown keys, wrong types and out-of-range values raise ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Fully resolved echo; parse_run_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& c);

} // namespace afc
