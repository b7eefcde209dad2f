#include "fbarcirc/errors.hpp"
#include "fbarcirc/transient.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace fbarcirc;

namespace {

const ResonatorSpecs kScaled{2.65e6, 700.0, 0.09, 1e-9};  // 1e-3 replica of the FBAR

Complex tail_phasor(const TransientResult& r, NodeId node, double f) {
    const auto v = r.node(node);
    const std::size_t start = v.size() - v.size() / 4;
    std::vector<double> t;
    for (std::size_t i = start; i < v.size(); ++i) t.push_back(r.time(i));
    return fit_phasors(t, v.subspan(start), f, 1.0, 0).at(0);
}

}  // namespace

TEST_SUITE("transient") {

TEST_CASE("rc divider steady state") {
    const double z0 = 50.0, c = 2e-9, f = 1e6;
    Netlist n;
    const NodeId p = n.node("p");
    n.add_port(1, p, z0);
    n.add_capacitor("C", p, kGround, c);
    const double dt = 1.0 / (200.0 * f);
    const TransientResult r = simulate(n, {1, f, 0.5}, 40.0 / f, dt);
    CHECK(r.sample_count() == static_cast<std::size_t>(std::llround(40.0 / f / dt)) + 1);
    const oracle::C emf = 2.0 * 0.5 * std::sqrt(z0);
    const oracle::C expected = emf / (1.0 + oracle::C(0.0, 2.0 * oracle::pi * f * c * z0));
    CHECK(std::abs(tail_phasor(r, p, f) - expected) < 1e-3 * std::abs(expected));
}

TEST_CASE("static BVD one-port near series resonance") {
    const Netlist n = oracle_single_branch(kScaled, 0.0, 23.2e3, 50.0);
    const oracle::Branch br = oracle::from_specs(kScaled.f_s, kScaled.q, kScaled.k_sq, kScaled.c0);
    const double f = 1.002 * kScaled.f_s;
    const double tau = kScaled.q / (oracle::pi * f);
    const TransientResult r = simulate(n, {1, f, 1.0}, 12.0 * tau, 1.0 / (800.0 * f));
    const oracle::C y = oracle::C(0.0, 2.0 * oracle::pi * f * kScaled.c0) + 1.0 / oracle::branch_z(br, f);
    const oracle::C expected = 2.0 * std::sqrt(50.0) / (1.0 + 50.0 * y);
    CHECK(std::abs(tail_phasor(r, 1, f) - expected) < 5e-3 * std::abs(expected));
}

TEST_CASE("sidebands appear only with modulation") {
    const double f = 1.002 * kScaled.f_s, fm = 23.2e3;
    for (double depth : {0.0, 0.05}) {
        const Netlist n = oracle_single_branch(kScaled, depth, fm, 50.0);
        const TransientResult r = simulate(n, {1, f, 1.0}, 20.0 / fm + 12.0 * 700.0 / (kPi * kScaled.f_s), 1.0 / (200.0 * f));
        const PhasorSet ph = extract_phasors(r, 1, f, fm, 2);
        const double side = std::abs(ph.at(1)) + std::abs(ph.at(-1));
        if (depth == 0.0) {
            CHECK(side < 1e-4 * std::abs(ph.at(0)));
        } else {
            CHECK(side > 1e-2 * std::abs(ph.at(0)));
        }
        CHECK(ph.residual >= 0.0);
    }
}

TEST_CASE("phasor fit recovers exact tones") {
    const double f = 1.0e6, fm = 2.3e4;
    std::vector<double> t, v;
    const Complex a0 = std::polar(0.7, 0.3), a1 = std::polar(0.2, -1.1);
    for (int i = 0; i < 20000; ++i) {
        const double ti = 1e-3 + i * 2e-8;
        t.push_back(ti);
        v.push_back((a0 * std::polar(1.0, kTwoPi * f * ti)).real() + (a1 * std::polar(1.0, kTwoPi * (f + fm) * ti)).real());
    }
    const PhasorSet ph = fit_phasors(t, v, f, fm, 2);
    REQUIRE(ph.entries.size() == 5);
    CHECK(std::abs(ph.at(0) - a0) < 1e-6 * std::abs(a0));
    CHECK(std::abs(ph.at(1) - a1) < 1e-6 * std::abs(a1));
    CHECK(std::abs(ph.at(-1)) < 1e-9);
    CHECK(std::abs(ph.at(2)) < 1e-9);
    CHECK(ph.residual < 1e-9);
}

TEST_CASE("colliding basis frequencies are rejected") {
    std::vector<double> t, v;
    for (int i = 0; i < 1000; ++i) {
        t.push_back(i * 1e-7);
        v.push_back(std::cos(kTwoPi * 1e6 * t.back()));
    }
    // Window 1e-4 s: f_mod = 5 kHz puts neighbouring bins 0.5 / window apart.
    CHECK_THROWS_AS(fit_phasors(t, v, 1e6, 5e3, 1), IllConditionedBasis);
    // f - 2 f_mod lands on DC.
    CHECK_THROWS_AS(fit_phasors(t, v, 1e6, 5e5, 2), IllConditionedBasis);
}

TEST_CASE("step and cancellation guards") {
    const Netlist n = oracle_single_branch(kScaled, 0.0, 23.2e3, 50.0);
    CHECK_THROWS_AS(simulate(n, {1, kScaled.f_s, 1.0}, 1e-4, 1.0 / (40.0 * kScaled.f_s)), StepTooLarge);
    CHECK_THROWS_AS(simulate(n, {2, kScaled.f_s, 1.0}, 1e-4, 1e-9), InvalidArgument);
    CancellationToken token;
    token.cancel();
    CHECK_THROWS_AS(simulate(n, {1, kScaled.f_s, 1.0}, 2e-5, 1e-9, &token), Cancelled);
}

TEST_CASE("halving dt moves the carrier phasor by at most 0.2 percent") {
    const Netlist n = oracle_single_branch(kScaled, 0.05, 23.2e3, 50.0);
    const double f = 1.002 * kScaled.f_s, fm = 23.2e3;
    const double duration = 20.0 / fm + 12.0 * 700.0 / (kPi * kScaled.f_s);
    const PhasorSet coarse = extract_phasors(simulate(n, {1, f, 1.0}, duration, 1.0 / (400.0 * f)), 1, f, fm, 2);
    const PhasorSet fine = extract_phasors(simulate(n, {1, f, 1.0}, duration, 1.0 / (800.0 * f)), 1, f, fm, 2);
    CHECK(std::abs(fine.at(0) - coarse.at(0)) <= 2e-3 * std::abs(fine.at(0)));
}

TEST_CASE("passive one-port absorbs power on average") {
    const Netlist n = oracle_single_branch(kScaled, 0.05, 23.2e3, 50.0);
    const double f = 0.998 * kScaled.f_s, z0 = 50.0;
    const double dt = 1.0 / (200.0 * f);
    const TransientResult r = simulate(n, {1, f, 1.0}, 1.2e-3, dt);
    const auto v = r.node(1);
    // Average over the last 10 modulation periods.
    const auto span = static_cast<std::size_t>(std::llround(10.0 / 23.2e3 / dt));
    double energy = 0.0, incident = 0.0;
    for (std::size_t i = v.size() - span; i < v.size(); ++i) {
        const double emf = 2.0 * std::sqrt(z0) * std::cos(kTwoPi * f * r.time(i));
        energy += v[i] * (emf - v[i]) / z0;
        incident += emf * emf / (4.0 * z0);
    }
    CHECK(energy >= -0.01 * incident);
}

TEST_CASE("unmodulated cross-validation") {
    CrossValidationOptions opt;
    opt.points_per_cycle = 800.0;
    const CrossValidation cv =
        cross_validate(oracle_single_branch(kScaled, 0.0, 23.2e3, 50.0), {23.2e3, 3}, 1.002 * kScaled.f_s, 1, 1, opt);
    CHECK(cv.max_error <= 1e-3);
    CHECK(cv.dt == doctest::Approx(1.0 / (800.0 * (1.002 * kScaled.f_s + 23.2e3))));
}

TEST_CASE("waveform csv") {
    Netlist n;
    const NodeId p = n.node("p");
    n.add_port(1, p, 50.0);
    n.add_resistor("R", p, kGround, 50.0);
    const TransientResult r = simulate(n, {1, 1e6, 1.0}, 1e-6, 1e-8);
    std::ostringstream s;
    write_waveform_csv(s, r, 10);
    std::istringstream in(s.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t_s,p");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 11);
}

}  // TEST_SUITE
