#pragma once

#include "afc/dd_sequence.hpp"
#include "afc/ou_noise.hpp"

namespace afc {

// Closed-form coherence models for OU spectral diffusion and pulse-area
// errors. Unbounded coherence times (sigma = 0, epsilon = 0) come back as +inf.

/// Pulse-error parameter: eps^2 (XX), eps^4/2 (XY4), eps^6/4 (XY8).
double pulse_error_alpha(SequenceKind kind, double epsilon);

/// Inverse of pulse_error_alpha for epsilon >= 0.
double epsilon_from_alpha(SequenceKind kind, double alpha);

struct PowerLawParams {
    double t2_1 = 0.0;   // s
    double gamma = 0.0;
};

/// Dephasing exponent Gamma(n, tau) of the OU model; eta = exp(-2 Gamma).
double gamma_ou(int n, double tau, const OuParams& ou);

double eta_ou(int n, double tau, const OuParams& ou);

/// tau << tau_c limit: exp(-sigma^2 tau^3 n / (6 tau_c)).
double eta_ou_simplified(int n, double tau, const OuParams& ou);

/// exp(-2 (t / t2)^alpha)
double eta_stretched(double t, double t2, double alpha_exp);

double t2_power_law(int n, const PowerLawParams& p);

/// cbrt(12 tau_c / sigma^2)
double t2_1_from_ou(const OuParams& ou);

/// sqrt(2 / alpha(eps)) * n_p * tau
double t2_pulse_error(SequenceKind kind, double epsilon, int n_p, double tau);

/// 12 tau_c / (sigma^2 tau^2)
double t2_ou_limit(double tau, const OuParams& ou);

/// Harmonic combination of the two asymptotic limits. A visualization aid for
/// the crossover; not accurate where both mechanisms matter.
double t2_combined(SequenceKind kind, double epsilon, int n_p, double tau, const OuParams& ou);

} // namespace afc
