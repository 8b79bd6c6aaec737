#pragma once

#include <complex>
#include <span>

namespace afc {

// Physical configuration of the memory: bias field, Zeeman splittings,
// operating envelope and the atomic frequency comb.

struct FieldConfig {
    double magnitude = 0.0;           // T
    double angle_deg = 65.0;          // relative to D1 in the D1-D2 plane
    double ground_gradient = 14e6;    // Hz/T, B -> delta
    double excited_gradient = 20e6;   // Hz/T, B -> delta_e
    double s1_gradient = 17e6;        // Hz/T, spin-frequency sensitivity

    void validate() const;
};

struct Splittings {
    double delta = 0.0;    // Hz, ground/storage splitting
    double delta_e = 0.0;  // Hz, excited-state splitting
};

struct OperatingEnvelope {
    double gamma_inh = 30e3;   // Hz, FWHM of the spin inhomogeneous line
    double rabi_hz = 23e3;     // Hz, Omega_RF / 2pi
    double gamma_afc = 160e3;  // Hz, comb bandwidth

    void validate() const;
};

struct EfficiencyBudget {
    double eta_afc = 1.0;
    double eta_ctrl = 1.0;
    double eta_spin = 1.0;

    void validate() const;
};

struct CombSpec {
    double period = 0.0;      // Hz, tooth spacing
    double bandwidth = 0.0;   // Hz
    int tooth_count = 0;
    double tooth_width = 0.0; // Hz

    void validate() const;
};

struct ConstraintCheck {
    bool pass = false;
    double margin = 0.0;  // lhs / rhs
};

/// Selectivity constraints: delta > gamma_inh, delta > rabi, delta_e > gamma_afc.
struct ConstraintReport {
    ConstraintCheck inhomogeneous;
    ConstraintCheck rabi;
    ConstraintCheck bandwidth;

    bool all_pass() const { return inhomogeneous.pass && rabi.pass && bandwidth.pass; }
};

Splittings compute_splittings(const FieldConfig& field);

/// Strict inequalities; margins are left/right ratios (0 when the left side is 0).
ConstraintReport check_constraints(const Splittings& s, const OperatingEnvelope& env);

/// eta_afc * eta_ctrl^2 * eta_spin. The control pulse enters twice (write and read).
double total_efficiency(const EfficiencyBudget& b);

/// Normalized comb echo amplitude sum_j w_j exp(-i 2 pi f_j t).
/// Weights are renormalized to unit sum; throws on empty or mismatched input.
std::complex<double> afc_rephasing_amplitude(std::span<const double> tooth_detunings,
                                             std::span<const double> weights, double t);

/// Magnetic-field noise equivalent of a spectral width, in tesla.
double field_fluctuation_equivalent(double sigma_hz, double s1);

/// Gaussian FWHM to standard deviation.
double fwhm_to_sigma(double fwhm);

} // namespace afc
