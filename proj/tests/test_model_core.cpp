#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "afc/model_core.hpp"

using namespace afc;

TEST_CASE("splittings follow the linear Zeeman model") {
    const Splittings s = compute_splittings(FieldConfig{0.015});
    CHECK(s.delta == rel(210e3).epsilon(1e-12));
    CHECK(s.delta_e == rel(300e3).epsilon(1e-12));

    const Splittings z = compute_splittings(FieldConfig{0.0});
    CHECK(z.delta == 0.0);
    CHECK(z.delta_e == 0.0);

    const Splittings big = compute_splittings(FieldConfig{0.1});
    CHECK(big.delta == rel(1.4e6));
    CHECK(big.delta_e == rel(2.0e6));
}

TEST_CASE("splittings are exactly linear in B") {
    for (double b : {1e-4, 3.3e-3, 0.015, 0.71}) {
        const Splittings a = compute_splittings(FieldConfig{b});
        const Splittings d = compute_splittings(FieldConfig{2.0 * b});
        CHECK(d.delta == 2.0 * a.delta);
        CHECK(d.delta_e == 2.0 * a.delta_e);
    }
}

TEST_CASE("field config validation") {
    CHECK_THROWS_AS(compute_splittings(FieldConfig{-1e-3}), std::invalid_argument);
    FieldConfig f{0.01};
    f.angle_deg = 360.0;
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
    f.angle_deg = 10.0;
    f.ground_gradient = 0.0;
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

TEST_CASE("operating constraints at the reference operating point") {
    const ConstraintReport r = check_constraints({210e3, 300e3}, OperatingEnvelope{});
    CHECK(r.all_pass());
    CHECK(r.inhomogeneous.margin == rel(7.0));
    CHECK(r.rabi.margin == rel(9.1304).epsilon(1e-4));
    CHECK(r.bandwidth.margin == rel(1.875));
}

TEST_CASE("operating constraints fail at zero and low field") {
    const ConstraintReport zero = check_constraints({0.0, 0.0}, OperatingEnvelope{});
    CHECK_FALSE(zero.inhomogeneous.pass);
    CHECK_FALSE(zero.rabi.pass);
    CHECK_FALSE(zero.bandwidth.pass);

    const ConstraintReport low = check_constraints(compute_splittings(FieldConfig{0.002}), OperatingEnvelope{});
    CHECK(compute_splittings(FieldConfig{0.002}).delta == rel(28e3));
    CHECK_FALSE(low.inhomogeneous.pass);
    CHECK_FALSE(low.all_pass());
}

TEST_CASE("constraint margins scale with B") {
    const OperatingEnvelope env;
    for (double b : {0.004, 0.015, 0.05}) {
        const ConstraintReport r1 = check_constraints(compute_splittings(FieldConfig{b}), env);
        const ConstraintReport r2 = check_constraints(compute_splittings(FieldConfig{2 * b}), env);
        CHECK(r2.inhomogeneous.margin == rel(2 * r1.inhomogeneous.margin));
        CHECK(r2.rabi.margin == rel(2 * r1.rabi.margin));
        CHECK(r2.bandwidth.margin == rel(2 * r1.bandwidth.margin));
    }
}

TEST_CASE("total efficiency") {
    CHECK(total_efficiency({0.102, 0.61, 1.0}) == rel(0.0379542).epsilon(1e-6));
    CHECK(total_efficiency({0.37, 1.0, 1.0}) == 0.37);
    CHECK(total_efficiency({0.102, 0.61, 0.5}) == rel(0.0189771).epsilon(1e-6));
    CHECK_THROWS_AS(total_efficiency({1.2, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("total efficiency is monotone and bounded") {
    const std::vector<double> grid = {0.0, 0.1, 0.35, 0.7, 1.0};
    for (double a : grid)
        for (double c : grid)
            for (double s : grid) {
                const double e = total_efficiency({a, c, s});
                CHECK(e <= std::min(a, s) + 1e-15);
                for (double bump : {0.05, 0.2}) {
                    CHECK(total_efficiency({std::min(1.0, a + bump), c, s}) >= e);
                    CHECK(total_efficiency({a, std::min(1.0, c + bump), s}) >= e);
                    CHECK(total_efficiency({a, c, std::min(1.0, s + bump)}) >= e);
                }
            }
}

TEST_CASE("ideal comb rephases at t = k / Delta") {
    const double delta = 100e3;
    const std::vector<double> f = {0.0, delta, 2 * delta, 3 * delta};
    const std::vector<double> w(4, 1.0);
    CHECK(std::abs(afc_rephasing_amplitude(f, w, 1.0 / delta)) == rel(1.0).epsilon(1e-12));
    CHECK(std::abs(afc_rephasing_amplitude(f, w, 1.0 / (2 * delta))) < 1e-12);
    for (int k = 1; k <= 5; ++k)
        CHECK(std::abs(afc_rephasing_amplitude(f, w, k / delta)) == rel(1.0).epsilon(1e-10));
    for (double t : {0.13e-5, 0.7e-5, 2.9e-5, 1.1e-4})
        CHECK(std::abs(afc_rephasing_amplitude(f, w, t)) <= 1.0 + 1e-12);
}

TEST_CASE("broadened teeth: quadrature against sampled frequencies") {
    const double delta = 100e3, width = delta / 10.0;
    // library call with Gaussian quadrature weights on a fine grid
    std::vector<double> f, w;
    for (int j = 0; j < 4; ++j)
        for (int k = -200; k <= 200; ++k) {
            const double x = k * 5.0 * width / 200.0;
            f.push_back(j * delta + x);
            w.push_back(std::exp(-0.5 * x * x / (width * width)));
        }
    const double quad = std::abs(afc_rephasing_amplitude(f, w, 1.0 / delta));

    // direct sum over 10^4 sampled frequencies
    std::mt19937_64 gen(12345);
    std::normal_distribution<double> nd(0.0, width);
    double re = 0.0, im = 0.0;
    const int samples = 10000;
    for (int i = 0; i < samples; ++i) {
        const double fi = (i % 4) * delta + nd(gen);
        re += std::cos(2 * std::numbers::pi * fi / delta);
        im -= std::sin(2 * std::numbers::pi * fi / delta);
    }
    const double sampled = std::hypot(re, im) / samples;

    CHECK(quad < 1.0);
    CHECK(quad == rel(std::exp(-0.5 * std::pow(2 * std::numbers::pi / 10.0, 2))).epsilon(1e-5));
    CHECK(std::abs(quad - sampled) < 0.02);
}

TEST_CASE("rephasing amplitude input errors") {
    const std::vector<double> none;
    CHECK_THROWS_AS(afc_rephasing_amplitude(none, none, 1e-5), std::invalid_argument);
    const std::vector<double> f = {0.0, 1.0}, w = {1.0};
    CHECK_THROWS_AS(afc_rephasing_amplitude(f, w, 1e-5), std::invalid_argument);
}

TEST_CASE("field fluctuation equivalent") {
    CHECK(field_fluctuation_equivalent(15.1, 17e6) == rel(0.888e-6).epsilon(1e-3));
    CHECK(field_fluctuation_equivalent(0.0, 17e6) == 0.0);
    CHECK(field_fluctuation_equivalent(34.0, 17e6) == rel(2.0e-6));
    CHECK_THROWS_AS(field_fluctuation_equivalent(15.1, 0.0), std::invalid_argument);
}

TEST_CASE("comb geometry validation") {
    CHECK_NOTHROW(CombSpec({40e3, 160e3, 4, 10e3}).validate());
    CHECK_THROWS_AS(CombSpec({40e3, 170e3, 4, 10e3}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(CombSpec({40e3, 40e3, 1, 10e3}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(CombSpec({40e3, 160e3, 4, 40e3}).validate(), std::invalid_argument);
}

TEST_CASE("fwhm to sigma") {
    CHECK(fwhm_to_sigma(2.0 * std::sqrt(2.0 * std::log(2.0))) == rel(1.0));
}
