#include "afc/coherence_models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace afc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_n_tau(int n, double tau) {
    if (n < 1) throw std::invalid_argument("pulse count must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
}
} // namespace

double pulse_error_alpha(SequenceKind kind, double epsilon) {
    const double e2 = epsilon * epsilon;
    switch (kind) {
    case SequenceKind::XX: return e2;
    case SequenceKind::XY4: return e2 * e2 / 2.0;
    case SequenceKind::XY8: return e2 * e2 * e2 / 4.0;
    }
    return 0.0;
}

double epsilon_from_alpha(SequenceKind kind, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    switch (kind) {
    case SequenceKind::XX: return std::sqrt(alpha);
    case SequenceKind::XY4: return std::pow(2.0 * alpha, 0.25);
    case SequenceKind::XY8: return std::pow(4.0 * alpha, 1.0 / 6.0);
    }
    return 0.0;
}

double gamma_ou(int n, double tau, const OuParams& ou) {
    check_n_tau(n, tau);
    const double tc = ou.tau_c;
    const double x = tau / (2.0 * tc);
    // 1 - tanh(x)/x and 1 - sech(x), both evaluated without cancellation
    double one_minus_tanhc;
    if (x < 0.05) {
        const double x2 = x * x;
        one_minus_tanhc = x2 * (1.0 / 3.0 - x2 * (2.0 / 15.0 - x2 * (17.0 / 315.0 - x2 * 62.0 / 2835.0)));
    } else {
        one_minus_tanhc = 1.0 - std::tanh(x) / x;
    }
    const double linear = one_minus_tanhc / tc * n * tau;
    const double sh = std::sinh(0.5 * x);
    const double edge = 2.0 * sh * sh / std::cosh(x);
    const double st = ou.sigma * tc;
    return st * st * (linear - edge * edge);
}

double eta_ou(int n, double tau, const OuParams& ou) { return std::exp(-2.0 * gamma_ou(n, tau, ou)); }

double eta_ou_simplified(int n, double tau, const OuParams& ou) {
    check_n_tau(n, tau);
    return std::exp(-ou.sigma * ou.sigma * tau * tau * tau * n / (6.0 * ou.tau_c));
}

double eta_stretched(double t, double t2, double alpha_exp) {
    if (!(t2 > 0.0) || !(alpha_exp > 0.0)) throw std::invalid_argument("t2 and alpha must be > 0");
    return std::exp(-2.0 * std::pow(t / t2, alpha_exp));
}

double t2_power_law(int n, const PowerLawParams& p) {
    if (n < 1) throw std::invalid_argument("pulse count must be >= 1");
    return p.t2_1 * std::pow(static_cast<double>(n), p.gamma);
}

double t2_1_from_ou(const OuParams& ou) {
    if (ou.sigma == 0.0) return kInf;
    return std::cbrt(12.0 * ou.tau_c / (ou.sigma * ou.sigma));
}

double t2_pulse_error(SequenceKind kind, double epsilon, int n_p, double tau) {
    if (n_p < 1 || !(tau > 0.0)) throw std::invalid_argument("n_p and tau must be positive");
    const double alpha = pulse_error_alpha(kind, epsilon);
    if (alpha == 0.0) return kInf;
    return std::sqrt(2.0 / alpha) * n_p * tau;
}

double t2_ou_limit(double tau, const OuParams& ou) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
    if (ou.sigma == 0.0) return kInf;
    return 12.0 * ou.tau_c / (ou.sigma * ou.sigma * tau * tau);
}

double t2_combined(SequenceKind kind, double epsilon, int n_p, double tau, const OuParams& ou) {
    const double rate = 1.0 / t2_pulse_error(kind, epsilon, n_p, tau) + 1.0 / t2_ou_limit(tau, ou);
    return rate > 0.0 ? 1.0 / rate : kInf;
}

} // namespace afc
