#pragma once

#include <iosfwd>
#include <vector>

#include "afc/model_core.hpp"

namespace afc {

/// Optical depth sampled on a uniform grid f_i = f0 + i * spacing.
struct AbsorptionProfile {
    double f0 = 0.0;       // Hz
    double spacing = 1.0;  // Hz
    std::vector<double> alpha;

    double freq(std::size_t i) const { return f0 + static_cast<double>(i) * spacing; }
    std::size_t size() const { return alpha.size(); }
    void validate() const;
};

struct PumpPattern {
    std::vector<double> pump_mask;   // per grid point, in [0, 1]
    double side_hole_weight = 0.1;   // relative strength of the weak transition
    double removal_per_cycle = 0.2;  // fraction r removed per unit pump weight and cycle

    void validate(std::size_t grid_size) const;
};

/// Rate-equation comb preparation. Each cycle multiplies the OD at f by
///   1 - r * (pump(f) + w pump(f - delta_e) + w pump(f + delta_e)),
/// clamped at zero. delta_e must be a whole number of grid steps.
AbsorptionProfile apply_pumping(const AbsorptionProfile& profile, const PumpPattern& pattern,
                                double delta_e, int cycles);

struct CombLossOptions {
    double removal_per_cycle = 0.2;
    int grid_per_period = 50;  // grid spacing = period / grid_per_period
};

/// Grid used for comb preparation: the band [0, bandwidth) plus a margin of
/// delta_e (and one period) on each side, flat unit OD.
AbsorptionProfile comb_grid(const CombSpec& comb, double delta_e, int grid_per_period);

/// Pump mask for ideal comb preparation: every in-band point outside a tooth.
/// Teeth are centred at (k + 1/2) * period, k = 0 .. tooth_count - 1.
std::vector<double> comb_pump_mask(const AbsorptionProfile& grid, const CombSpec& comb);
std::vector<bool> comb_tooth_mask(const AbsorptionProfile& grid, const CombSpec& comb);

/// Fraction of tooth OD lost to side-holes:
///   1 - (tooth OD with side-holes) / (tooth OD with w = 0).
double comb_od_loss(const CombSpec& comb, double delta_e, double side_hole_weight, int cycles,
                    const CombLossOptions& opts = {});

/// Two-column CSV: freq_hz,od
void write_profile_csv(std::ostream& os, const AbsorptionProfile& profile);

} // namespace afc
