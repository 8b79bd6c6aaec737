#include <doctest.h>

#include "approx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "afc/ou_noise.hpp"
#include "afc/rng.hpp"

using namespace afc;

namespace {

const OuParams kOu = OuParams::from_hz(15.1, 9.5e-3);

// Sample moments of (x, I) pairs with rough standard errors.
struct PairStats {
    std::vector<double> x, i;

    void add(double a, double b) {
        x.push_back(a);
        i.push_back(b);
    }
    double n() const { return static_cast<double>(x.size()); }
    double mean(const std::vector<double>& v) const {
        double s = 0;
        for (double a : v) s += a;
        return s / n();
    }
    double cov(const std::vector<double>& a, const std::vector<double>& b) const {
        const double ma = mean(a), mb = mean(b);
        double s = 0;
        for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - ma) * (b[k] - mb);
        return s / (n() - 1);
    }
    double mx() const { return mean(x); }
    double mi() const { return mean(i); }
    double vx() const { return cov(x, x); }
    double vi() const { return cov(i, i); }
    double cxi() const { return cov(x, i); }
    double se_mx() const { return std::sqrt(vx() / n()); }
    double se_mi() const { return std::sqrt(vi() / n()); }
    double se_vx() const { return vx() * std::sqrt(2.0 / n()); }
    double se_vi() const { return vi() * std::sqrt(2.0 / n()); }
    double se_cxi() const { return std::sqrt((vx() * vi() + cxi() * cxi()) / n()); }
};

// Fine-step exact path plus trapezoid integration.
PairStats fine_step_oracle(const OuParams& p, double x0, double T, int steps, int paths, std::uint64_t seed) {
    PairStats s;
    for (int k = 0; k < paths; ++k) {
        RngStream rng(seed, static_cast<std::uint64_t>(k));
        const auto path = ou_path(p, x0, T / steps, steps, rng);
        double integral = 0.0;
        for (int j = 0; j < steps; ++j) integral += 0.5 * (path[j] + path[j + 1]) * (T / steps);
        s.add(path.back(), integral);
    }
    return s;
}

PairStats joint_samples(const OuParams& p, double x0, double T, int draws, std::uint64_t seed) {
    PairStats s;
    RngStream rng(seed, 0);
    for (int k = 0; k < draws; ++k) {
        const SegmentSample d = segment_joint_sample(p, x0, T, rng);
        s.add(d.x_end, d.integral);
    }
    return s;
}

bool within(double a, double b, double se) { return std::abs(a - b) <= 3.0 * se; }

} // namespace

TEST_CASE("OuParams units and validation") {
    CHECK(kOu.sigma == rel(2 * std::numbers::pi * 15.1));
    CHECK(kOu.sigma_hz() == rel(15.1));
    CHECK_THROWS_AS((OuParams{-1.0, 1e-3}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((OuParams{1.0, 0.0}).validate(), std::invalid_argument);
}

TEST_CASE("sample_stationary") {
    RngStream z(1, 0);
    for (int i = 0; i < 10; ++i) CHECK(sample_stationary({0.0, 1e-3}, z) == 0.0);

    RngStream r(2, 0);
    const int n = 100000;
    double s2 = 0;
    for (int i = 0; i < n; ++i) s2 += std::pow(sample_stationary(kOu, r), 2);
    const double var = s2 / n, s = kOu.sigma * kOu.sigma;
    CHECK(std::abs(var - s) < 3.0 * s * std::sqrt(2.0 / n));

    RngStream a(3, 4), b(3, 4);
    CHECK(sample_stationary(kOu, a) == sample_stationary(kOu, b));
}

TEST_CASE("ou_path deterministic decay when sigma = 0") {
    RngStream r(1, 1);
    const double dt = 1e-3, tc = 9.5e-3;
    const auto path = ou_path({0.0, tc}, 5.0, dt, 20, r);
    REQUIRE(path.size() == 21);
    for (int k = 0; k <= 20; ++k) CHECK(path[k] == rel(5.0 * std::exp(-k * dt / tc)).epsilon(1e-12));
    CHECK_THROWS_AS(ou_path(kOu, 0.0, 0.0, 3, r), std::invalid_argument);
}

TEST_CASE("ou_path lag-tau_c autocorrelation is sigma^2 / e") {
    const int paths = 100000, steps = 10;
    double s = 0, s2 = 0;
    for (int k = 0; k < paths; ++k) {
        RngStream r(11, static_cast<std::uint64_t>(k));
        const double x0 = sample_stationary(kOu, r);
        const auto path = ou_path(kOu, x0, kOu.tau_c / steps, steps, r);
        const double prod = path.front() * path.back();
        s += prod;
        s2 += prod * prod;
    }
    const double mean = s / paths, se = std::sqrt((s2 / paths - mean * mean) / paths);
    CHECK(within(mean, kOu.sigma * kOu.sigma / std::numbers::e, se));
}

TEST_CASE("ou_path statistics at a fixed horizon do not depend on dt") {
    const double T = 2.0 * kOu.tau_c, x0 = 0.5 * kOu.sigma;
    const int paths = 20000;
    std::vector<double> coarse, fine;
    for (int k = 0; k < paths; ++k) {
        RngStream a(21, static_cast<std::uint64_t>(k)), b(22, static_cast<std::uint64_t>(k));
        coarse.push_back(ou_path(kOu, x0, T / 4, 4, a).back());
        fine.push_back(ou_path(kOu, x0, T / 40, 40, b).back());
    }
    // two-sample Kolmogorov-Smirnov at the 1% level
    std::sort(coarse.begin(), coarse.end());
    std::sort(fine.begin(), fine.end());
    double d = 0;
    std::size_t i = 0, j = 0;
    while (i < coarse.size() && j < fine.size()) {
        if (coarse[i] <= fine[j]) ++i;
        else ++j;
        d = std::max(d, std::abs(static_cast<double>(i) - static_cast<double>(j)) / paths);
    }
    CHECK(d < 1.63 * std::sqrt(2.0 / paths));
}

TEST_CASE("segment_joint_sample edge cases") {
    RngStream r(5, 5), untouched(5, 5);
    const SegmentSample s = segment_joint_sample(kOu, 3.0, 0.0, r);
    CHECK(s.x_end == 3.0);
    CHECK(s.integral == 0.0);
    CHECK(r.normal() == untouched.normal());  // no draws consumed

    const double T = 4e-3, tc = 9.5e-3;
    const SegmentSample q = segment_joint_sample({0.0, tc}, 7.0, T, r);
    CHECK(q.x_end == rel(7.0 * std::exp(-T / tc)).epsilon(1e-14));
    CHECK(q.integral == rel(7.0 * tc * (1.0 - std::exp(-T / tc))).epsilon(1e-14));

    CHECK_THROWS_AS(segment_joint_sample(kOu, 0.0, -1e-3, r), std::invalid_argument);
}

TEST_CASE("closed-form segment moments against the fine-step path oracle") {
    const double x0 = 0.8 * kOu.sigma;
    int seed = 100;
    for (double T : {kOu.tau_c / 10, kOu.tau_c, 10 * kOu.tau_c}) {
        CAPTURE(T);
        const PairStats oracle = fine_step_oracle(kOu, x0, T, 400, 20000, seed++);
        const SegmentMoments m = segment_moments(kOu, x0, T);
        CHECK(within(oracle.mx(), m.mean_x, oracle.se_mx()));
        CHECK(within(oracle.mi(), m.mean_integral, oracle.se_mi()));
        CHECK(within(oracle.vx(), m.var_x, oracle.se_vx()));
        CHECK(within(oracle.vi(), m.var_integral, oracle.se_vi()));
        CHECK(within(oracle.cxi(), m.cov, oracle.se_cxi()));

        const PairStats drawn = joint_samples(kOu, x0, T, 100000, seed++);
        auto both = [](double se1, double se2) { return std::hypot(se1, se2); };
        CHECK(within(drawn.mx(), oracle.mx(), both(drawn.se_mx(), oracle.se_mx())));
        CHECK(within(drawn.mi(), oracle.mi(), both(drawn.se_mi(), oracle.se_mi())));
        CHECK(within(drawn.vx(), oracle.vx(), both(drawn.se_vx(), oracle.se_vx())));
        CHECK(within(drawn.vi(), oracle.vi(), both(drawn.se_vi(), oracle.se_vi())));
        CHECK(within(drawn.cxi(), oracle.cxi(), both(drawn.se_cxi(), oracle.se_cxi())));
    }
}

TEST_CASE("integral variance is smooth across the series switch") {
    const OuParams p{1.0, 1.0};
    // long double reference of 2u - 3 + 4e^-u - e^-2u
    auto ref = [](long double u) { return 2 * u - 3 + 4 * std::exp(-u) - std::exp(-2 * u); };
    for (double u : {0.3, 0.4999, 0.5, 0.5001, 0.8}) {
        const double v = segment_moments(p, 0.0, u).var_integral;
        CHECK(v == rel(static_cast<double>(ref(u))).epsilon(1e-9));
    }
    // tiny u: 2u^3/3 - u^4/2 + O(u^5)
    for (double u : {1e-6, 1e-4, 1e-2}) {
        const double v = segment_moments(p, 0.0, u).var_integral;
        CHECK(v == rel(2.0 * u * u * u / 3.0 - u * u * u * u / 2.0).epsilon(1e-4));
        CHECK(v > 0.0);
    }
}

TEST_CASE("stationary start stays stationary") {
    const int n = 100000;
    for (double T : {1e-3, 20e-3}) {
        double s2 = 0;
        for (int k = 0; k < n; ++k) {
            RngStream r(31, static_cast<std::uint64_t>(k));
            const double x0 = sample_stationary(kOu, r);
            s2 += std::pow(segment_joint_sample(kOu, x0, T, r).x_end, 2);
        }
        const double s = kOu.sigma * kOu.sigma;
        CHECK(std::abs(s2 / n - s) < 3.0 * s * std::sqrt(2.0 / n));
    }
}

TEST_CASE("one segment of T matches two chained segments of T/2") {
    const double T = 6e-3, x0 = kOu.sigma;
    const PairStats single = joint_samples(kOu, x0, T, 100000, 41);
    PairStats chained;
    RngStream r(42, 0);
    for (int k = 0; k < 100000; ++k) {
        const SegmentSample a = segment_joint_sample(kOu, x0, T / 2, r);
        const SegmentSample b = segment_joint_sample(kOu, a.x_end, T / 2, r);
        chained.add(b.x_end, a.integral + b.integral);
    }
    auto both = [](double a, double b) { return std::hypot(a, b); };
    CHECK(within(single.mx(), chained.mx(), both(single.se_mx(), chained.se_mx())));
    CHECK(within(single.mi(), chained.mi(), both(single.se_mi(), chained.se_mi())));
    CHECK(within(single.vx(), chained.vx(), both(single.se_vx(), chained.se_vx())));
    CHECK(within(single.vi(), chained.vi(), both(single.se_vi(), chained.se_vi())));
    CHECK(within(single.cxi(), chained.cxi(), both(single.se_cxi(), chained.se_cxi())));
}

TEST_CASE("segment kernel reproduces segment_joint_sample draw for draw") {
    const SegmentKernel k = make_segment_kernel(kOu, 2.5e-3);
    RngStream a(8, 8), b(8, 8);
    double x = 0.3 * kOu.sigma, y = x;
    for (int i = 0; i < 50; ++i) {
        const SegmentSample s = k.sample(x, a);
        const SegmentSample t = segment_joint_sample(kOu, y, 2.5e-3, b);
        CHECK(s.x_end == t.x_end);
        CHECK(s.integral == t.integral);
        x = s.x_end;
        y = t.x_end;
    }
}
