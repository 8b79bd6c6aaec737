#include "afc/model_core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace afc {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

ConstraintCheck compare(double lhs, double rhs) {
    ConstraintCheck c;
    c.pass = lhs > rhs;
    c.margin = rhs > 0.0 ? lhs / rhs : 0.0;
    return c;
}

} // namespace

void FieldConfig::validate() const {
    require(std::isfinite(magnitude) && magnitude >= 0.0, "field magnitude must be >= 0");
    require(ground_gradient > 0.0 && excited_gradient > 0.0 && s1_gradient > 0.0,
            "field gradients must be > 0");
    require(angle_deg >= 0.0 && angle_deg < 360.0, "field angle must be in [0, 360)");
}

void OperatingEnvelope::validate() const {
    require(gamma_inh > 0.0 && rabi_hz > 0.0 && gamma_afc > 0.0,
            "operating envelope values must be > 0");
}

void EfficiencyBudget::validate() const {
    for (double v : {eta_afc, eta_ctrl, eta_spin})
        require(v >= 0.0 && v <= 1.0, "efficiencies must lie in [0, 1]");
}

void CombSpec::validate() const {
    require(period > 0.0, "comb period must be > 0");
    require(tooth_count >= 2, "comb needs at least two teeth");
    require(tooth_width > 0.0 && tooth_width < period, "tooth width must be in (0, period)");
    require(std::abs(bandwidth - tooth_count * period) <= 1e-6 * bandwidth,
            "comb bandwidth must equal tooth_count * period");
}

Splittings compute_splittings(const FieldConfig& field) {
    field.validate();
    return {field.ground_gradient * field.magnitude, field.excited_gradient * field.magnitude};
}

ConstraintReport check_constraints(const Splittings& s, const OperatingEnvelope& env) {
    env.validate();
    ConstraintReport r;
    r.inhomogeneous = compare(s.delta, env.gamma_inh);
    r.rabi = compare(s.delta, env.rabi_hz);
    r.bandwidth = compare(s.delta_e, env.gamma_afc);
    return r;
}

double total_efficiency(const EfficiencyBudget& b) {
    b.validate();
    return b.eta_afc * b.eta_ctrl * b.eta_ctrl * b.eta_spin;
}

std::complex<double> afc_rephasing_amplitude(std::span<const double> tooth_detunings,
                                             std::span<const double> weights, double t) {
    require(!tooth_detunings.empty(), "rephasing amplitude needs at least one frequency");
    require(weights.size() == tooth_detunings.size(), "weights and detunings differ in length");
    double wsum = 0.0;
    for (double w : weights) {
        require(w >= 0.0, "weights must be non-negative");
        wsum += w;
    }
    require(wsum > 0.0, "weights sum to zero");

    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double phase = -2.0 * std::numbers::pi * tooth_detunings[j] * t;
        acc += weights[j] * std::polar(1.0, phase);
    }
    return acc / wsum;
}

double field_fluctuation_equivalent(double sigma_hz, double s1) {
    require(s1 > 0.0, "S1 gradient must be > 0");
    return sigma_hz / s1;
}

double fwhm_to_sigma(double fwhm) {
    return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

} // namespace afc
