#include "afc/ou_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace afc {

namespace {

// 2u - 3 + 4e^{-u} - e^{-2u}, which is O(u^3) and cancels badly near 0.
double integral_variance_shape(double u) {
    if (u < 0.5) {
        // sum_{k>=3} (-1)^k (4 - 2^k) u^k / k!
        double term = u * u / 2.0;  // u^k / k! at k = 2
        double pow2 = 4.0;
        double sum = 0.0;
        for (int k = 3; k < 40; ++k) {
            term *= u / k;
            pow2 *= 2.0;
            const double c = ((k % 2) ? -1.0 : 1.0) * (4.0 - pow2) * term;
            sum += c;
            if (std::abs(c) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    const double e = std::exp(-u);
    return 2.0 * u - 3.0 + 4.0 * e - e * e;
}

} // namespace

OuParams OuParams::from_hz(double sigma_hz, double tau_c) {
    return {2.0 * std::numbers::pi * sigma_hz, tau_c};
}

double OuParams::sigma_hz() const { return sigma / (2.0 * std::numbers::pi); }

void OuParams::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("OU sigma must be >= 0");
    if (!(tau_c > 0.0) || !std::isfinite(tau_c)) throw std::invalid_argument("OU tau_c must be > 0");
}

SegmentMoments segment_moments(const OuParams& p, double x0, double duration) {
    if (duration < 0.0) throw std::invalid_argument("segment duration must be >= 0");
    const double u = duration / p.tau_c;
    const double one_minus_e = -std::expm1(-u);
    const double s2 = p.sigma * p.sigma;

    SegmentMoments m;
    m.mean_x = x0 * (1.0 - one_minus_e);
    m.mean_integral = x0 * p.tau_c * one_minus_e;
    m.var_x = -s2 * std::expm1(-2.0 * u);
    m.var_integral = s2 * p.tau_c * p.tau_c * integral_variance_shape(u);
    m.cov = s2 * p.tau_c * one_minus_e * one_minus_e;
    return m;
}

double sample_stationary(const OuParams& params, RngStream& rng) {
    return params.sigma * rng.normal();
}

std::vector<double> ou_path(const OuParams& params, double x0, double dt, int steps, RngStream& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("ou_path: dt must be > 0");
    if (steps < 0) throw std::invalid_argument("ou_path: steps must be >= 0");
    const double decay = std::exp(-dt / params.tau_c);
    const double kick = params.sigma * std::sqrt(-std::expm1(-2.0 * dt / params.tau_c));
    std::vector<double> path(static_cast<std::size_t>(steps) + 1);
    path[0] = x0;
    for (int k = 0; k < steps; ++k) path[k + 1] = path[k] * decay + kick * rng.normal();
    return path;
}

SegmentKernel make_segment_kernel(const OuParams& params, double duration) {
    const SegmentMoments m = segment_moments(params, 1.0, duration);
    SegmentKernel k;
    k.duration = duration;
    k.decay = m.mean_x;
    k.integral_gain = m.mean_integral;
    if (m.var_x > 0.0) {
        k.sd_x = std::sqrt(m.var_x);
        k.slope = m.cov / k.sd_x;
        k.cond_sd = std::sqrt(std::max(m.var_integral - k.slope * k.slope, 0.0));
    }
    return k;
}

SegmentSample SegmentKernel::sample(double x0, RngStream& rng) const {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    return {x0 * decay + sd_x * z1, x0 * integral_gain + slope * z1 + cond_sd * z2};
}

SegmentSample segment_joint_sample(const OuParams& params, double x0, double duration,
                                   RngStream& rng) {
    if (duration < 0.0) throw std::invalid_argument("segment duration must be >= 0");
    if (duration == 0.0) return {x0, 0.0};
    return make_segment_kernel(params, duration).sample(x0, rng);
}

} // namespace afc
