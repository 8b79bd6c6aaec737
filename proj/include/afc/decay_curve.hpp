#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "afc/dd_sequence.hpp"

namespace afc {

struct DecayPoint {
    double t_spin = 0.0;     // s
    double eta = 0.0;
    double sigma_eta = 0.0;  // <= 0 means "not available"
};

struct DecayCurveMeta {
    std::optional<SequenceKind> kind;
    std::optional<int> fixed_n;        // pulses, for fixed-n sweeps
    std::optional<double> fixed_tau;   // s, for fixed-tau sweeps
    std::optional<double> sigma_hz;    // OU provenance
    std::optional<double> tau_c;       // s
    std::optional<double> epsilon;    // rad
};

struct DecayCurve {
    std::vector<DecayPoint> points;
    DecayCurveMeta meta;

    std::size_t size() const { return points.size(); }
    bool has_errors() const;
    void validate() const;
};

/// Two-column header "t_spin_s,eta,sigma_eta" plus '#' comment lines carrying
/// the metadata. Floats are written with 17 significant digits.
void write_curve_csv(std::ostream& os, const DecayCurve& curve,
                     const std::vector<std::string>& comments = {});
DecayCurve read_curve_csv(std::istream& is);

DecayCurve load_curve_csv(const std::string& path);
void save_curve_csv(const std::string& path, const DecayCurve& curve,
                    const std::vector<std::string>& comments = {});

std::string format_double(double v);

} // namespace afc
