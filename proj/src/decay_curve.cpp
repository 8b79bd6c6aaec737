#include "afc/decay_curve.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace afc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, int line_no) {
    const std::string t = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw std::runtime_error("curve csv line " + std::to_string(line_no) + ": bad number '" + t + "'");
    return v;
}

// "# key: value" metadata comments written by write_curve_csv
void parse_meta(const std::string& line, DecayCurveMeta& meta) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) return;
    const std::string key = trim(line.substr(1, colon - 1));
    const std::string value = trim(line.substr(colon + 1));
    try {
        if (key == "kind") meta.kind = parse_sequence_kind(value);
        else if (key == "fixed_n") meta.fixed_n = std::stoi(value);
        else if (key == "fixed_tau_s") meta.fixed_tau = std::stod(value);
        else if (key == "sigma_hz") meta.sigma_hz = std::stod(value);
        else if (key == "tau_c_s") meta.tau_c = std::stod(value);
        else if (key == "epsilon_rad") meta.epsilon = std::stod(value);
    } catch (const std::exception&) {
        // free-form comment that happens to contain a colon
    }
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool DecayCurve::has_errors() const {
    if (points.empty()) return false;
    for (const auto& p : points)
        if (!(p.sigma_eta > 0.0)) return false;
    return true;
}

void DecayCurve::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!std::isfinite(p.t_spin) || !std::isfinite(p.eta))
            throw std::invalid_argument("decay curve contains non-finite values");
        if (p.eta < 0.0) throw std::invalid_argument("decay curve efficiency must be >= 0");
        if (i > 0 && !(p.t_spin > points[i - 1].t_spin))
            throw std::invalid_argument("decay curve times must be strictly increasing");
    }
}

void write_curve_csv(std::ostream& os, const DecayCurve& c, const std::vector<std::string>& comments) {
    for (const auto& line : comments) os << "# " << line << '\n';
    if (c.meta.kind) os << "# kind: " << to_string(*c.meta.kind) << '\n';
    if (c.meta.fixed_n) os << "# fixed_n: " << *c.meta.fixed_n << '\n';
    if (c.meta.fixed_tau) os << "# fixed_tau_s: " << format_double(*c.meta.fixed_tau) << '\n';
    if (c.meta.sigma_hz) os << "# sigma_hz: " << format_double(*c.meta.sigma_hz) << '\n';
    if (c.meta.tau_c) os << "# tau_c_s: " << format_double(*c.meta.tau_c) << '\n';
    if (c.meta.epsilon) os << "# epsilon_rad: " << format_double(*c.meta.epsilon) << '\n';
    os << "t_spin_s,eta,sigma_eta\n";
    for (const auto& p : c.points)
        os << format_double(p.t_spin) << ',' << format_double(p.eta) << ',' << format_double(p.sigma_eta)
           << '\n';
}

DecayCurve read_curve_csv(std::istream& is) {
    DecayCurve curve;
    std::string line;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            parse_meta(t, curve.meta);
            continue;
        }
        if (!header_seen) {
            if (t.rfind("t_spin_s", 0) != 0)
                throw std::runtime_error("curve csv: expected header 't_spin_s,eta,sigma_eta'");
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(t);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() < 2)
            throw std::runtime_error("curve csv line " + std::to_string(line_no) + ": expected >= 2 columns");
        DecayPoint p;
        p.t_spin = parse_double(fields[0], line_no);
        p.eta = parse_double(fields[1], line_no);
        p.sigma_eta = fields.size() > 2 ? parse_double(fields[2], line_no) : 0.0;
        curve.points.push_back(p);
    }
    if (!header_seen) throw std::runtime_error("curve csv: missing header");
    curve.validate();
    return curve;
}

DecayCurve load_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_curve_csv(in);
}

void save_curve_csv(const std::string& path, const DecayCurve& curve,
                    const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_curve_csv(out, curve, comments);
}

} // namespace afc
