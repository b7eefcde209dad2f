#include "fbarcirc/errors.hpp"
#include "fbarcirc/netlist.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace fbarcirc;

namespace {

MotionalBranch fbar() { return bvd_from_specs({2.65e9, 700.0, 0.09, 1e-12}).branches.front(); }

Netlist sample() {
    Netlist n;
    const NodeId a = n.node("in"), b = n.node("mid");
    n.add_port(1, a, 50.0);
    n.add_resistor("R1", a, b, 12.5);
    n.add_inductor("L1", b, kGround, 3.3e-9);
    n.add_capacitor("C1", a, kGround, 0.1 + 0.2);
    n.add_modulated_rlc("M1", b, kGround, fbar(), ModulationSpec{0.035, 23.2e6, 2.0943951023931953});
    n.add_modulated_rlc("M2", a, b, fbar(), std::nullopt);
    return n;
}

}  // namespace

TEST_SUITE("netlist") {

TEST_CASE("nodes are created once and ground is node 0") {
    Netlist n;
    CHECK(n.node_count() == 1);
    CHECK(n.node_name(kGround) == "0");
    CHECK(n.node("0") == kGround);
    const NodeId a = n.node("a");
    CHECK(n.node("a") == a);
    CHECK(n.find_node("a") == a);
    CHECK_FALSE(n.find_node("b").has_value());
    CHECK(n.node_count() == 2);
}

TEST_CASE("text format round-trips byte for byte") {
    const std::string text = netlist_to_string(sample());
    const Netlist back = netlist_from_string(text);
    CHECK(netlist_to_string(back) == text);
    CHECK(back.elements().size() == 6);
    CHECK(back.port_count() == 1);
    CHECK(back.modulated_branch_count() == 2);

    const CirculatorDesign d{Topology::Differential, {}, 0.035, 23.2e6, 50.0, PhaseSequence::Forward,
                             PlatePlacement::PortToGround};
    const std::string circ = netlist_to_string(build_circulator(d));
    CHECK(netlist_to_string(netlist_from_string(circ)) == circ);
}

TEST_CASE("text format errors carry line numbers") {
    try {
        netlist_from_string("* header\nR r1 a 0 10\nQ bad a 0 1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
    CHECK_THROWS_AS(netlist_from_string("R r1 a 0 notanumber\n"), ParseError);
    CHECK_THROWS_AS(netlist_from_string("X m a 0 1 1e-9\n"), ParseError);
}

TEST_CASE("validation") {
    Netlist floating;
    const NodeId a = floating.node("a"), b = floating.node("b");
    floating.add_port(1, a, 50.0);
    floating.add_capacitor("C1", b, floating.node("c"), 1e-12);
    CHECK_THROWS_AS(floating.validate(), SingularStructure);

    Netlist bad_value;
    bad_value.add_port(1, bad_value.node("a"), 50.0);
    bad_value.add_resistor("R", bad_value.node("a"), kGround, -1.0);
    CHECK_THROWS_AS(bad_value.validate(), InvalidArgument);

    Netlist gap;
    gap.add_port(1, gap.node("a"), 50.0);
    gap.add_port(3, gap.node("b"), 50.0);
    gap.add_resistor("R", gap.node("a"), gap.node("b"), 1.0);
    CHECK_THROWS_AS(gap.validate(), InvalidArgument);

    Netlist mixed;
    const NodeId m = mixed.node("m");
    mixed.add_port(1, m, 50.0);
    mixed.add_modulated_rlc("M1", m, kGround, fbar(), ModulationSpec{0.01, 1e6, 0.0});
    mixed.add_modulated_rlc("M2", m, kGround, fbar(), ModulationSpec{0.01, 2e6, 0.0});
    CHECK_THROWS_AS(mixed.validate(), InvalidArgument);

    CHECK_THROWS_AS((ModulationSpec{1.0, 1e6, 0.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((ModulationSpec{0.1, 0.0, 0.0}.validate()), InvalidArgument);
    CHECK_NOTHROW(sample().validate());
}

TEST_CASE("elastance fourier coefficients") {
    const MotionalBranch b = fbar();
    const ModulationSpec mod{0.04, 23.2e6, 0.7};
    const auto g = elastance_fourier(b, mod, 3);
    REQUIRE(g.size() == 7);
    const double s = 1.0 / b.c_m;
    CHECK(std::abs(g[3] - Complex(s, 0.0)) < 1e-12 * s);
    CHECK(std::abs(g[4] - 0.02 * s * std::polar(1.0, 0.7)) < 1e-12 * s);
    CHECK(std::abs(g[2] - 0.02 * s * std::polar(1.0, -0.7)) < 1e-12 * s);
    for (std::size_t i : {0u, 1u, 5u, 6u}) CHECK(std::abs(g[i]) == 0.0);

    // Time-domain check: the series reproduces 1/C(t).
    for (double t : {0.0, 3e-9, 17e-9}) {
        Complex sum = 0.0;
        for (int n = -3; n <= 3; ++n) sum += g[static_cast<std::size_t>(n + 3)] * std::polar(1.0, kTwoPi * n * mod.f_mod * t);
        const double direct = s * (1.0 + mod.depth * std::cos(kTwoPi * mod.f_mod * t + mod.phase));
        CHECK(sum.real() == doctest::Approx(direct).epsilon(1e-12));
        CHECK(std::abs(sum.imag()) < 1e-9 * direct);
    }
}

TEST_CASE("frequency scaling preserves reactances") {
    const Netlist n = sample();
    const Netlist s = scale_frequency(n, 1e-3);
    REQUIRE(s.elements().size() == n.elements().size());
    const auto& m0 = std::get<ModulatedRlc>(n.elements()[4].value);
    const auto& m1 = std::get<ModulatedRlc>(s.elements()[4].value);
    CHECK(m1.branch.series_frequency() == doctest::Approx(m0.branch.series_frequency() * 1e-3).epsilon(1e-13));
    const Complex z0 = m0.branch.impedance(2.66e9), z1 = m1.branch.impedance(2.66e6);
    CHECK(std::abs(z1 - z0) < 1e-9 * std::abs(z0));
    CHECK(m1.modulation->f_mod == doctest::Approx(23.2e3));
    CHECK(m1.modulation->depth == m0.modulation->depth);
    CHECK(std::get<Capacitor>(s.elements()[3].value).farad == doctest::Approx(0.3 * 1e3));
    CHECK_THROWS_AS(scale_frequency(n, 0.0), InvalidArgument);
}

TEST_CASE("circulator builders") {
    CirculatorDesign d;
    d.depth = 0.02;
    d.topology = Topology::SingleEnded;
    const Netlist se = build_circulator(d);
    CHECK(se.port_count() == 3);
    CHECK(se.modulated_branch_count() == 3);
    CHECK(se.node_count() == 5);  // ground, p1..p3, x

    d.topology = Topology::Differential;
    const Netlist diff = build_circulator(d);
    CHECK(diff.port_count() == 3);
    CHECK(diff.modulated_branch_count() == 6);
    CHECK(diff.node_count() == 6);  // ground, p1..p3, xa, xb
    CHECK(diff.modulation_frequency() == doctest::Approx(23.2e6));
    CHECK(diff.is_modulated());

    d.depth = 0.0;
    CHECK_FALSE(build_circulator(d).is_modulated());

    d.topology = Topology::SingleEnded;
    CHECK_THROWS_AS(build_differential(d), InvalidArgument);
}

TEST_CASE("modulation phases") {
    const double third = kTwoPi / 3.0;
    CHECK(modulation_phase(PhaseSequence::Forward, 0, 0) == 0.0);
    CHECK(modulation_phase(PhaseSequence::Forward, 1, 0) == doctest::Approx(third));
    CHECK(modulation_phase(PhaseSequence::Forward, 2, 0) == doctest::Approx(2.0 * third));
    CHECK(modulation_phase(PhaseSequence::Reverse, 1, 0) == doctest::Approx(-third));
    CHECK(modulation_phase(PhaseSequence::Forward, 1, 1) == doctest::Approx(third + kPi));

    CirculatorDesign d;
    d.depth = 0.01;
    std::set<long> phases;
    for (const auto& e : build_differential(d).elements()) {
        if (const auto* m = std::get_if<ModulatedRlc>(&e.value)) {
            phases.insert(std::lround(std::fmod(m->modulation->phase + 4.0 * kTwoPi, kTwoPi) * 1e6));
        }
    }
    CHECK(phases.size() == 6);  // 0, 60, 120, 180, 240, 300 degrees
}

}  // TEST_SUITE
