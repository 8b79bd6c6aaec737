#include "afc/spin_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "afc/model_core.hpp"

namespace afc {

namespace {

using cplx = std::complex<double>;

constexpr cplx kInitialCoherence{0.0, 1.0};

// Batch-means error of |mean|^2. Delta-method term along the mean direction
// plus the second-order term that dominates when the mean is near zero.
double eta_std_err(std::span<const cplx> batch_means, cplx mean) {
    const std::size_t nb = batch_means.size();
    if (nb < 2) return 0.0;
    const double mag = std::abs(mean);
    const cplx dir = mag > 0.0 ? mean / mag : cplx{1.0, 0.0};
    double ss_par = 0.0;
    double ss_tot = 0.0;
    for (const cplx& m : batch_means) {
        const cplx d = m - mean;
        const double par = (std::conj(dir) * d).real();
        ss_par += par * par;
        ss_tot += std::norm(d);
    }
    const double denom = static_cast<double>(nb) * static_cast<double>(nb - 1);
    const double var_par = ss_par / denom;
    const double var_tot = ss_tot / denom;
    return std::sqrt(4.0 * mag * mag * var_par + var_tot * var_tot);
}

} // namespace

void EnsembleConfig::validate() const {
    if (n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
    if (!(gamma_inh >= 0.0) || !std::isfinite(gamma_inh)) throw std::invalid_argument("gamma_inh must be >= 0");
    if (batch_size < 1 || n_traj % batch_size != 0)
        throw std::invalid_argument("batch_size must divide n_traj");
    if (batch_count() < std::min(20, n_traj))
        throw std::invalid_argument("need at least 20 batches for the batch-means error");
}

unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("AFC_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

bool has_ideal_pulses(const DdSequence& seq) {
    for (const auto& p : seq.pulses)
        if (p.area != std::numbers::pi) return false;
    return true;
}

std::vector<double> trajectory_phases(const DdSequence& seq, const OuParams& ou, double gamma_inh_fwhm,
                                      RngStream& rng) {
    const double detuning_hz = fwhm_to_sigma(gamma_inh_fwhm) * rng.normal();
    double x = sample_stationary(ou, rng);
    const auto gaps = seq.gaps();
    // gaps take at most a few distinct lengths (tau/2, tau)
    std::vector<SegmentKernel> kernels;
    std::vector<double> phases(gaps.size());
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        if (gaps[k] == 0.0) continue;
        auto it = std::find_if(kernels.begin(), kernels.end(), [&](const SegmentKernel& s) { return s.duration == gaps[k]; });
        if (it == kernels.end()) it = kernels.insert(kernels.end(), make_segment_kernel(ou, gaps[k]));
        const SegmentSample s = it->sample(x, rng);
        phases[k] = 2.0 * std::numbers::pi * detuning_hz * gaps[k] + s.integral;
        x = s.x_end;
    }
    return phases;
}

namespace {

// Pulse k as the SU(2) matrix [[c, m01], [m10, c]].
struct PulseRotation {
    double c;
    cplx m01;
    cplx m10;
};

std::vector<PulseRotation> pulse_rotations(const DdSequence& seq) {
    std::vector<PulseRotation> out;
    out.reserve(seq.pulses.size());
    const cplx minus_i{0.0, -1.0};
    for (const auto& p : seq.pulses) {
        const double s = std::sin(0.5 * p.area);
        const cplx axis = std::polar(1.0, p.phase);
        out.push_back({std::cos(0.5 * p.area), minus_i * s * std::conj(axis), minus_i * s * axis});
    }
    return out;
}

cplx propagate_rotations(std::span<const PulseRotation> rots, std::span<const double> phases) {
    // spinor with coherence 2 conj(a) b = i
    cplx a{1.0 / std::numbers::sqrt2, 0.0};
    cplx b{0.0, 1.0 / std::numbers::sqrt2};
    for (std::size_t k = 0; k < phases.size(); ++k) {
        const cplx half = std::polar(1.0, 0.5 * phases[k]);
        a *= std::conj(half);
        b *= half;
        if (k < rots.size()) {
            const auto& r = rots[k];
            const cplx a2 = r.c * a + r.m01 * b;
            b = r.m10 * a + r.c * b;
            a = a2;
        }
    }
    return 2.0 * std::conj(a) * b / kInitialCoherence;
}

} // namespace

std::complex<double> propagate_full(const DdSequence& seq, std::span<const double> phases) {
    if (phases.size() != seq.pulses.size() + 1)
        throw std::invalid_argument("one phase per free-evolution gap expected");
    const auto rots = pulse_rotations(seq);
    return propagate_rotations(rots, phases);
}

std::complex<double> propagate_fast(const DdSequence& seq, std::span<const double> phases) {
    if (phases.size() != seq.pulses.size() + 1)
        throw std::invalid_argument("one phase per free-evolution gap expected");
    // coherence = exp(i psi) * (flipped ? conj(c0) : c0); an ideal pi pulse about
    // axis phi maps c -> exp(2 i phi) conj(c)
    double psi = 0.0;
    bool flipped = false;
    for (std::size_t k = 0; k < phases.size(); ++k) {
        psi += phases[k];
        if (k < seq.pulses.size()) {
            psi = 2.0 * seq.pulses[k].phase - psi;
            flipped = !flipped;
        }
    }
    const cplx c0 = flipped ? std::conj(kInitialCoherence) : kInitialCoherence;
    return std::polar(1.0, psi) * c0 / kInitialCoherence;
}

std::complex<double> pairwise_sum(std::span<const cplx> v) {
    if (v.size() <= 8) {
        cplx s{0.0, 0.0};
        for (const auto& x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

SimResult simulate(const DdSequence& seq, const OuParams& ou, const EnsembleConfig& ens,
                   const SimOptions& opts) {
    seq.validate();
    ou.validate();
    ens.validate();

    bool fast = false;
    switch (opts.path) {
    case PulsePath::Auto: fast = has_ideal_pulses(seq); break;
    case PulsePath::Fast:
        if (!has_ideal_pulses(seq)) throw std::invalid_argument("fast path requires ideal pi pulses");
        fast = true;
        break;
    case PulsePath::Full: fast = false; break;
    }

    const std::size_t n = static_cast<std::size_t>(ens.n_traj);
    std::vector<cplx> coherence(n);
    const auto rots = pulse_rotations(seq);
    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            RngStream rng(ens.seed, k);
            const auto phases = trajectory_phases(seq, ou, ens.gamma_inh, rng);
            coherence[k] = fast ? propagate_fast(seq, phases) : propagate_rotations(rots, phases);
        }
    };

    const unsigned threads = std::min<unsigned>(resolve_thread_count(opts.threads),
                                                static_cast<unsigned>(std::max<std::size_t>(1, n / 64)));
    if (threads <= 1) {
        run_range(0, n);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t b = t * chunk;
            const std::size_t e = std::min(n, b + chunk);
            if (b < e) pool.emplace_back(run_range, b, e);
        }
    }

    const std::size_t bs = static_cast<std::size_t>(ens.batch_size);
    const std::size_t nb = n / bs;
    std::vector<cplx> batch_means(nb);
    for (std::size_t b = 0; b < nb; ++b)
        batch_means[b] = pairwise_sum(std::span<const cplx>(coherence).subspan(b * bs, bs)) /
                         static_cast<double>(bs);
    const cplx mean = pairwise_sum(batch_means) / static_cast<double>(nb);

    SimResult r;
    r.amplitude = mean;
    r.eta_spin = std::min(1.0, std::norm(mean));
    r.std_err = eta_std_err(batch_means, mean);
    r.n_traj = ens.n_traj;
    return r;
}

std::uint64_t point_seed(std::uint64_t master_seed, std::size_t point_index) {
    return splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(point_index) + 1));
}

DecayCurve simulate_decay_fixed_n(SequenceKind kind, int n, std::span<const double> tau_grid,
                                  const OuParams& ou, const EnsembleConfig& ens, double epsilon,
                                  const SimOptions& opts) {
    if (n < 0 || n % 2 != 0) throw std::invalid_argument("fixed-n sweep needs an even pulse count");
    if (tau_grid.empty()) throw std::invalid_argument("tau grid is empty");
    DecayCurve curve;
    curve.meta.kind = kind;
    curve.meta.fixed_n = n;
    curve.meta.sigma_hz = ou.sigma_hz();
    curve.meta.tau_c = ou.tau_c;
    curve.meta.epsilon = epsilon;
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        const DdSequence seq = sequence_with_pulses(kind, n, tau_grid[i], epsilon);
        EnsembleConfig point = ens;
        point.seed = point_seed(ens.seed, i);
        const SimResult r = simulate(seq, ou, point, opts);
        curve.points.push_back({seq.t_spin, r.eta_spin, r.std_err});
    }
    curve.validate();
    return curve;
}

DecayCurve simulate_decay_fixed_tau(SequenceKind kind, double tau, std::span<const int> n_grid,
                                    const OuParams& ou, const EnsembleConfig& ens, double epsilon,
                                    const SimOptions& opts) {
    if (n_grid.empty()) throw std::invalid_argument("n grid is empty");
    DecayCurve curve;
    curve.meta.kind = kind;
    curve.meta.fixed_tau = tau;
    curve.meta.sigma_hz = ou.sigma_hz();
    curve.meta.tau_c = ou.tau_c;
    curve.meta.epsilon = epsilon;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const DdSequence seq = sequence_with_pulses(kind, n_grid[i], tau, epsilon);
        EnsembleConfig point = ens;
        point.seed = point_seed(ens.seed, i);
        const SimResult r = simulate(seq, ou, point, opts);
        curve.points.push_back({seq.t_spin, r.eta_spin, r.std_err});
    }
    curve.validate();
    return curve;
}

} // namespace afc
