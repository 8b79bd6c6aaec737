#include "afc/dd_sequence.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace afc {

namespace {
constexpr double kX = 0.0;
constexpr double kY = std::numbers::pi / 2.0;
} // namespace

std::string to_string(SequenceKind kind) {
    switch (kind) {
    case SequenceKind::XX: return "XX";
    case SequenceKind::XY4: return "XY4";
    case SequenceKind::XY8: return "XY8";
    }
    return "?";
}

SequenceKind parse_sequence_kind(std::string_view name) {
    if (name == "XX" || name == "CP") return SequenceKind::XX;
    if (name == "XY4" || name == "XY-4") return SequenceKind::XY4;
    if (name == "XY8" || name == "XY-8") return SequenceKind::XY8;
    throw std::invalid_argument("unknown sequence kind '" + std::string(name) + "'");
}

int pulses_per_repetition(SequenceKind kind) {
    switch (kind) {
    case SequenceKind::XX: return 2;
    case SequenceKind::XY4: return 4;
    case SequenceKind::XY8: return 8;
    }
    return 0;
}

std::vector<double> phase_pattern(SequenceKind kind) {
    switch (kind) {
    case SequenceKind::XX: return {kX, kX};
    case SequenceKind::XY4: return {kX, kY, kX, kY};
    case SequenceKind::XY8: return {kX, kY, kX, kY, kY, kX, kY, kX};
    }
    return {};
}

std::vector<double> DdSequence::gaps() const {
    if (pulses.empty()) return {t_spin};
    std::vector<double> out;
    out.reserve(pulses.size() + 1);
    double prev = 0.0;
    for (const auto& p : pulses) {
        out.push_back(p.time - prev);
        prev = p.time;
    }
    out.push_back(t_spin - prev);
    return out;
}

void DdSequence::validate() const {
    if (n_p % 2 != 0) throw std::invalid_argument("pulses per repetition must be even");
    if (static_cast<int>(pulses.size()) != n_s * n_p)
        throw std::invalid_argument("pulse count does not match n_s * n_p");
    double prev = -1.0;
    for (const auto& p : pulses) {
        if (!(p.time > prev) || p.time < 0.0) throw std::invalid_argument("pulse times must increase");
        if (!(p.area > 0.0)) throw std::invalid_argument("pulse area must be > 0");
        prev = p.time;
    }
    if (!pulses.empty() && !(t_spin > pulses.back().time))
        throw std::invalid_argument("readout must follow the last pulse");
}

DdSequence sequence_with_pulses(SequenceKind kind, int n, double tau, double epsilon) {
    const int n_p = pulses_per_repetition(kind);
    if (n < 0 || n % n_p != 0)
        throw std::invalid_argument("pulse count " + std::to_string(n) + " is not a multiple of " +
                                    std::to_string(n_p) + " for " + to_string(kind));
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be > 0");
    if (!(std::numbers::pi + epsilon > 0.0)) throw std::invalid_argument("pulse area must be > 0");

    DdSequence seq;
    seq.kind = kind;
    seq.n_p = n_p;
    seq.n_s = n / n_p;
    seq.tau = tau;
    seq.t_spin = n * tau;

    const auto phases = phase_pattern(kind);
    seq.pulses.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        PulseEvent p;
        p.time = (k + 0.5) * tau;
        p.phase = phases[static_cast<std::size_t>(k % n_p)];
        p.area = std::numbers::pi + epsilon;
        seq.pulses.push_back(p);
    }
    return seq;
}

DdSequence build_sequence(SequenceKind kind, int n_s, double tau, double epsilon) {
    if (n_s < 1) throw std::invalid_argument("n_s must be >= 1");
    return sequence_with_pulses(kind, n_s * pulses_per_repetition(kind), tau, epsilon);
}

DdSequence two_pulse_echo(double tau, double epsilon) {
    return build_sequence(SequenceKind::XX, 1, tau, epsilon);
}

} // namespace afc
