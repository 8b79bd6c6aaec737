#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace afc {

enum class SequenceKind { XX, XY4, XY8 };

std::string to_string(SequenceKind kind);
SequenceKind parse_sequence_kind(std::string_view name);

/// Pulses per repetition: XX 2, XY4 4, XY8 8.
int pulses_per_repetition(SequenceKind kind);

/// Rotation-axis phases (radians) for one repetition.
std::vector<double> phase_pattern(SequenceKind kind);

/// Instantaneous pulse: rotation by `area` about the equatorial axis at `phase`.
struct PulseEvent {
    double time = 0.0;   // s
    double phase = 0.0;  // rad, X = 0, Y = pi/2
    double area = 0.0;   // rad, pi + epsilon
};

struct DdSequence {
    SequenceKind kind = SequenceKind::XX;
    int n_s = 0;
    int n_p = 0;
    double tau = 0.0;     // s
    double t_spin = 0.0;  // s, n * tau
    std::vector<PulseEvent> pulses;

    int pulse_count() const { return static_cast<int>(pulses.size()); }

    /// Free-evolution intervals: tau/2, tau, ..., tau, tau/2 (a single t_spin when empty).
    std::vector<double> gaps() const;

    void validate() const;
};

/// CPMG-timed schedule: first pulse at tau/2, spacing tau, readout at n * tau.
DdSequence build_sequence(SequenceKind kind, int n_s, double tau, double epsilon);

DdSequence two_pulse_echo(double tau, double epsilon);

/// Sequence with `n` total pulses (a multiple of the kind's repetition size).
/// n == 0 yields an empty schedule of zero length.
DdSequence sequence_with_pulses(SequenceKind kind, int n, double tau, double epsilon);

} // namespace afc
