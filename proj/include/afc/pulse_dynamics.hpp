#pragma once

#include <array>
#include <span>
#include <vector>

namespace afc {

/// Hyperbolic-secant adiabatic inversion pulse:
///   Omega(t) = rabi_peak * sech(t / T0),  T0 = fwhm / (2 acosh 2)
///   sweep(t) = 2 pi * (chirp / 2) * tanh(t / T0)
/// evaluated on t in [-window_fwhm * fwhm, +window_fwhm * fwhm].
struct HsPulse {
    double rabi_peak = 0.0;           // rad/s
    double fwhm = 80e-6;              // s, amplitude FWHM
    double chirp = 60e3;              // Hz, total frequency sweep
    double center_freq_offset = 0.0;  // Hz
    double window_fwhm = 5.0;         // truncation half-width in units of fwhm

    double sech_time() const;
    void validate() const;
};

using BlochVector = std::array<double, 3>;

/// RK4 integration of dM/dt = W(t) x M without relaxation, from M = (0, 0, -1).
/// Refuses steps coarser than fwhm / 200.
BlochVector integrate_bloch(const HsPulse& pulse, double detuning_hz, double dt);

/// Final w component; +1 is a perfect inversion.
double integrate_inversion(const HsPulse& pulse, double detuning_hz, double dt);

std::vector<double> inversion_profile(const HsPulse& pulse, std::span<const double> detuning_grid,
                                      double dt);

/// Population left behind: (1 - w) / 2.
double transfer_error(double inversion);

} // namespace afc
