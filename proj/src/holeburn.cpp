#include "afc/holeburn.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "afc/decay_curve.hpp"

namespace afc {

namespace {

long grid_shift(double delta_e, double spacing) {
    const double steps = delta_e / spacing;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, std::abs(steps)))
        throw std::invalid_argument("delta_e is not a whole number of grid steps");
    return static_cast<long>(rounded);
}

// Position of grid point i relative to the band start, in grid steps.
long band_offset(const AbsorptionProfile& grid, std::size_t i) {
    return static_cast<long>(std::llround(grid.f0 / grid.spacing)) + static_cast<long>(i);
}

enum class Cell { OutOfBand, Tooth, AntiTooth };

Cell classify(const AbsorptionProfile& grid, const CombSpec& comb, std::size_t i) {
    const long per = std::lround(comb.period / grid.spacing);
    const long j = band_offset(grid, i);
    if (j < 0 || j >= per * comb.tooth_count) return Cell::OutOfBand;
    const double within = static_cast<double>(j % per) - 0.5 * static_cast<double>(per);
    const double half_width = 0.5 * comb.tooth_width / grid.spacing;
    return std::abs(within) <= half_width + 1e-9 ? Cell::Tooth : Cell::AntiTooth;
}

double tooth_od(const AbsorptionProfile& p, const std::vector<bool>& teeth) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (teeth[i]) s += p.alpha[i];
    return s;
}

} // namespace

void AbsorptionProfile::validate() const {
    if (!(spacing > 0.0)) throw std::invalid_argument("profile spacing must be > 0");
    for (double a : alpha)
        if (!(a >= 0.0)) throw std::invalid_argument("optical depth must be >= 0");
}

void PumpPattern::validate(std::size_t grid_size) const {
    if (pump_mask.size() != grid_size) throw std::invalid_argument("pump mask size mismatch");
    for (double p : pump_mask)
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("pump weights must be in [0, 1]");
    if (!(side_hole_weight >= 0.0 && side_hole_weight <= 1.0))
        throw std::invalid_argument("side-hole weight must be in [0, 1]");
    if (!(removal_per_cycle >= 0.0 && removal_per_cycle <= 1.0))
        throw std::invalid_argument("removal fraction must be in [0, 1]");
}

AbsorptionProfile apply_pumping(const AbsorptionProfile& profile, const PumpPattern& pattern,
                                double delta_e, int cycles) {
    profile.validate();
    pattern.validate(profile.size());
    if (cycles < 0) throw std::invalid_argument("cycles must be >= 0");
    const long shift = grid_shift(delta_e, profile.spacing);
    const long n = static_cast<long>(profile.size());

    std::vector<double> factor(profile.size());
    for (long i = 0; i < n; ++i) {
        double w = pattern.pump_mask[static_cast<std::size_t>(i)];
        if (i - shift >= 0) w += pattern.side_hole_weight * pattern.pump_mask[static_cast<std::size_t>(i - shift)];
        if (i + shift < n) w += pattern.side_hole_weight * pattern.pump_mask[static_cast<std::size_t>(i + shift)];
        factor[static_cast<std::size_t>(i)] = 1.0 - pattern.removal_per_cycle * w;
    }

    AbsorptionProfile out = profile;
    for (int c = 0; c < cycles; ++c)
        for (std::size_t i = 0; i < out.size(); ++i)
            out.alpha[i] = std::max(0.0, out.alpha[i] * factor[i]);
    return out;
}

AbsorptionProfile comb_grid(const CombSpec& comb, double delta_e, int grid_per_period) {
    comb.validate();
    if (grid_per_period < 2 || grid_per_period % 2 != 0)
        throw std::invalid_argument("grid_per_period must be even and >= 2");
    if (delta_e < 0.0) throw std::invalid_argument("delta_e must be >= 0");
    const double spacing = comb.period / grid_per_period;
    const long margin = static_cast<long>(std::ceil((delta_e + comb.period) / spacing));
    const long band = static_cast<long>(grid_per_period) * comb.tooth_count;

    AbsorptionProfile p;
    p.spacing = spacing;
    p.f0 = -static_cast<double>(margin) * spacing;
    p.alpha.assign(static_cast<std::size_t>(band + 2 * margin), 1.0);
    return p;
}

std::vector<double> comb_pump_mask(const AbsorptionProfile& grid, const CombSpec& comb) {
    std::vector<double> mask(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (classify(grid, comb, i) == Cell::AntiTooth) mask[i] = 1.0;
    return mask;
}

std::vector<bool> comb_tooth_mask(const AbsorptionProfile& grid, const CombSpec& comb) {
    std::vector<bool> mask(grid.size(), false);
    for (std::size_t i = 0; i < grid.size(); ++i) mask[i] = classify(grid, comb, i) == Cell::Tooth;
    return mask;
}

double comb_od_loss(const CombSpec& comb, double delta_e, double side_hole_weight, int cycles,
                    const CombLossOptions& opts) {
    const AbsorptionProfile grid = comb_grid(comb, delta_e, opts.grid_per_period);
    const auto teeth = comb_tooth_mask(grid, comb);

    PumpPattern pattern;
    pattern.pump_mask = comb_pump_mask(grid, comb);
    pattern.removal_per_cycle = opts.removal_per_cycle;

    pattern.side_hole_weight = 0.0;
    const double reference = tooth_od(apply_pumping(grid, pattern, delta_e, cycles), teeth);
    pattern.side_hole_weight = side_hole_weight;
    const double degraded = tooth_od(apply_pumping(grid, pattern, delta_e, cycles), teeth);
    if (!(reference > 0.0)) throw std::runtime_error("comb has no tooth OD to compare");
    return 1.0 - degraded / reference;
}

void write_profile_csv(std::ostream& os, const AbsorptionProfile& profile) {
    os << "freq_hz,od\n";
    for (std::size_t i = 0; i < profile.size(); ++i)
        os << format_double(profile.freq(i)) << ',' << format_double(profile.alpha[i]) << '\n';
}

} // namespace afc
