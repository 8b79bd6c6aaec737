#include "afc/pulse_dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace afc {

namespace {

struct Field {
    double wx, wy, wz;
};

BlochVector cross(const Field& w, const BlochVector& m) {
    return {w.wy * m[2] - w.wz * m[1], w.wz * m[0] - w.wx * m[2], w.wx * m[1] - w.wy * m[0]};
}

BlochVector axpy(const BlochVector& m, double h, const BlochVector& k) {
    return {m[0] + h * k[0], m[1] + h * k[1], m[2] + h * k[2]};
}

} // namespace

double HsPulse::sech_time() const { return fwhm / (2.0 * std::acosh(2.0)); }

void HsPulse::validate() const {
    if (!(rabi_peak >= 0.0)) throw std::invalid_argument("HS pulse: rabi_peak must be >= 0");
    if (!(fwhm > 0.0)) throw std::invalid_argument("HS pulse: fwhm must be > 0");
    if (!(chirp > 0.0)) throw std::invalid_argument("HS pulse: chirp must be > 0");
    if (!(window_fwhm > 0.0)) throw std::invalid_argument("HS pulse: window must be > 0");
}

BlochVector integrate_bloch(const HsPulse& pulse, double detuning_hz, double dt) {
    pulse.validate();
    if (!(dt > 0.0) || dt > pulse.fwhm / 200.0)
        throw std::invalid_argument("HS pulse: dt must be in (0, fwhm/200]");

    const double t0 = pulse.sech_time();
    const double half_window = pulse.window_fwhm * pulse.fwhm;
    const long steps = static_cast<long>(std::ceil(2.0 * half_window / dt - 1e-9));
    const double h = 2.0 * half_window / static_cast<double>(steps);
    const double offset = 2.0 * std::numbers::pi * (detuning_hz - pulse.center_freq_offset);
    const double sweep_amp = std::numbers::pi * pulse.chirp;

    // rotating frame following the instantaneous carrier
    auto field = [&](double t) {
        const double x = t / t0;
        return Field{pulse.rabi_peak / std::cosh(x), 0.0, offset - sweep_amp * std::tanh(x)};
    };

    BlochVector m{0.0, 0.0, -1.0};
    double t = -half_window;
    for (long i = 0; i < steps; ++i) {
        const Field f0 = field(t);
        const Field fh = field(t + 0.5 * h);
        const Field f1 = field(t + h);
        const BlochVector k1 = cross(f0, m);
        const BlochVector k2 = cross(fh, axpy(m, 0.5 * h, k1));
        const BlochVector k3 = cross(fh, axpy(m, 0.5 * h, k2));
        const BlochVector k4 = cross(f1, axpy(m, h, k3));
        for (int j = 0; j < 3; ++j) m[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        t = -half_window + (i + 1) * h;
    }
    return m;
}

double integrate_inversion(const HsPulse& pulse, double detuning_hz, double dt) {
    return integrate_bloch(pulse, detuning_hz, dt)[2];
}

std::vector<double> inversion_profile(const HsPulse& pulse, std::span<const double> detuning_grid,
                                      double dt) {
    std::vector<double> out;
    out.reserve(detuning_grid.size());
    for (double d : detuning_grid) out.push_back(integrate_inversion(pulse, d, dt));
    return out;
}

double transfer_error(double inversion) { return 0.5 * (1.0 - inversion); }

} // namespace afc
