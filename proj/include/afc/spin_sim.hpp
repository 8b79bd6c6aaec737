#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "afc/dd_sequence.hpp"
#include "afc/decay_curve.hpp"
#include "afc/ou_noise.hpp"

namespace afc {

struct EnsembleConfig {
    int n_traj = 20000;
    double gamma_inh = 30e3;  // Hz, FWHM of the static Gaussian detuning
    std::uint64_t seed = 1;
    int batch_size = 500;

    int batch_count() const { return n_traj / batch_size; }
    void validate() const;
};

struct SimResult {
    double eta_spin = 0.0;
    double std_err = 0.0;
    std::complex<double> amplitude{0.0, 0.0};  // ensemble-mean coherence, 1 when perfectly preserved
    int n_traj = 0;
};

enum class PulsePath { Auto, Full, Fast };

struct SimOptions {
    unsigned threads = 0;  // 0: AFC_THREADS env var, else hardware concurrency
    PulsePath path = PulsePath::Auto;
};

unsigned resolve_thread_count(unsigned requested);

/// True when every pulse is an exact pi rotation.
bool has_ideal_pulses(const DdSequence& seq);

/// Accumulated precession phase (rad) for each free-evolution gap of one
/// trajectory: static detuning drawn from the inhomogeneous line plus the
/// exact OU phase integral, with the OU start drawn from its stationary law.
std::vector<double> trajectory_phases(const DdSequence& seq, const OuParams& ou, double gamma_inh_fwhm,
                                      RngStream& rng);

/// Final transverse coherence relative to the initial one. The spin starts on
/// the equator along +y, orthogonal to the X pulse axis (Carr-Purcell
/// condition), and each pulse is the SU(2) rotation by its area about its
/// equatorial axis.
std::complex<double> propagate_full(const DdSequence& seq, std::span<const double> phases);

/// Same result for ideal pi pulses via sign-toggled phase accumulation.
std::complex<double> propagate_fast(const DdSequence& seq, std::span<const double> phases);

SimResult simulate(const DdSequence& seq, const OuParams& ou, const EnsembleConfig& ens,
                   const SimOptions& opts = {});

/// Stream seed for the i-th point of a sweep.
std::uint64_t point_seed(std::uint64_t master_seed, std::size_t point_index);

DecayCurve simulate_decay_fixed_n(SequenceKind kind, int n, std::span<const double> tau_grid,
                                  const OuParams& ou, const EnsembleConfig& ens, double epsilon = 0.0,
                                  const SimOptions& opts = {});

DecayCurve simulate_decay_fixed_tau(SequenceKind kind, double tau, std::span<const int> n_grid,
                                    const OuParams& ou, const EnsembleConfig& ens, double epsilon = 0.0,
                                    const SimOptions& opts = {});

/// Pairwise summation; the result depends only on the order of `values`.
std::complex<double> pairwise_sum(std::span<const std::complex<double>> values);

} // namespace afc
