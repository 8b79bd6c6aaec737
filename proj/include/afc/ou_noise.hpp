#pragma once

#include <vector>

#include "afc/rng.hpp"

namespace afc {

/// Ornstein-Uhlenbeck spectral diffusion. sigma is the stationary standard
/// deviation in rad/s; user-facing code converts from sigma/2pi in Hz.
struct OuParams {
    double sigma = 0.0;  // rad/s
    double tau_c = 1.0;  // s

    static OuParams from_hz(double sigma_hz, double tau_c);
    double sigma_hz() const;
    void validate() const;
};

/// First and second moments of (x_T, integral_0^T x dt) given x_0.
struct SegmentMoments {
    double mean_x = 0.0;
    double mean_integral = 0.0;
    double var_x = 0.0;
    double var_integral = 0.0;
    double cov = 0.0;
};

struct SegmentSample {
    double x_end = 0.0;     // rad/s
    double integral = 0.0;  // rad
};

SegmentMoments segment_moments(const OuParams& params, double x0, double duration);

double sample_stationary(const OuParams& params, RngStream& rng);

/// Exact-discretization path x_0..x_steps (steps + 1 values).
std::vector<double> ou_path(const OuParams& params, double x0, double dt, int steps, RngStream& rng);

/// Precomputed conditional law for one segment length; sample() is what
/// segment_joint_sample does, without recomputing the moments.
struct SegmentKernel {
    double duration = 0.0;
    double decay = 1.0;       // e^{-T / tau_c}
    double integral_gain = 0.0;  // tau_c (1 - e^{-T / tau_c})
    double sd_x = 0.0;
    double slope = 0.0;       // cov / sd_x
    double cond_sd = 0.0;

    SegmentSample sample(double x0, RngStream& rng) const;
};

SegmentKernel make_segment_kernel(const OuParams& params, double duration);

/// Draws (x_T, phase integral) from the exact conditional bivariate Gaussian.
/// Consumes exactly two normals unless duration == 0.
SegmentSample segment_joint_sample(const OuParams& params, double x0, double duration,
                                   RngStream& rng);

} // namespace afc
