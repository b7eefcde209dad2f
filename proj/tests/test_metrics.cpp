#include "fbarcirc/errors.hpp"
#include "fbarcirc/metrics.hpp"

#include <doctest.h>

#include <cmath>

using namespace fbarcirc;

namespace {

// Three-port grid with isolation 60 - ((f - f0) / a)^2 dB, IL 1 dB, RL 20 dB.
SParamGrid notch(double f0, double a, double step, int half) {
    std::vector<double> fs;
    for (int i = -half; i <= half; ++i) fs.push_back(f0 + i * step);
    SParamGrid g(fs, 3, 1, 1e6, {50.0, 50.0, 50.0});
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const double x = (fs[i] - f0) / a;
        g.s(i, 0, 3, 1) = std::pow(10.0, -(60.0 - x * x) / 20.0);
        g.s(i, 0, 2, 1) = std::pow(10.0, -1.0 / 20.0);
        g.s(i, 0, 1, 1) = 0.1;
    }
    return g;
}

CirculatorDesign design(Topology t) {
    CirculatorDesign d;
    d.topology = t;
    d.resonator = {2.65e9, 700.0, 0.09, 0.5e-12};
    d.depth = 0.035;
    d.f_mod = 23.52e6;
    return d;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("loss in dB") {
    CHECK(loss_db(1e-3) == doctest::Approx(60.0));
    CHECK(loss_db(Complex(0.0, -1e-3)) == doctest::Approx(60.0));
    CHECK(loss_db(1.0) == 0.0);
    CHECK(loss_db(0.0) == kLossCapDb);
    CHECK(loss_db(1e-20) == kLossCapDb);
}

TEST_CASE("port metrics at a grid frequency") {
    const SParamGrid g = notch(2.68e9, 1e6, 0.5e6, 40);
    const PortMetrics m = metrics_at(g, 2.68e9, {});
    CHECK(m.ix_db == doctest::Approx(60.0));
    CHECK(m.il_db == doctest::Approx(1.0));
    CHECK(m.rl_db == doctest::Approx(20.0));
    CHECK_NOTHROW(metrics_at(g, 2.68e9 + 0.2e6, {}));
    CHECK_THROWS_AS(metrics_at(g, 2.5e9, {}), FrequencyOffGrid);
    CHECK_THROWS_AS(metrics_at(g, 2.68e9, Direction{1, 2, 4}), InvalidArgument);
}

TEST_CASE("bandwidth of a synthetic notch") {
    const double a = 1e6, step = 0.25e6;
    const SParamGrid g = notch(2.68e9, a, step, 80);
    const double exact = 2.0 * a * std::sqrt(35.0);
    const auto bw = bandwidth_at(g, 25.0, {});
    REQUIRE(bw.has_value());
    CHECK(std::abs(*bw - exact) <= step);

    CHECK_FALSE(bandwidth_at(g, 61.0, {}).has_value());
    double previous = 1e300;
    for (double th : {10.0, 20.0, 30.0, 40.0, 50.0, 59.0}) {
        const auto b = bandwidth_at(g, th, {});
        REQUIRE(b.has_value());
        CHECK(*b <= previous);
        previous = *b;
    }
}

TEST_CASE("metrics ignore a common phase rotation") {
    SParamGrid g = notch(2.68e9, 1e6, 0.5e6, 20);
    const CirculatorMetrics before = compute_metrics(g, {});
    for (auto& v : g.data) v *= std::polar(1.0, 1.234);
    const CirculatorMetrics after = compute_metrics(g, {});
    CHECK(after.ix_db == doctest::Approx(before.ix_db).epsilon(1e-12));
    CHECK(after.il_db == doctest::Approx(before.il_db).epsilon(1e-12));
    CHECK(after.f_op == before.f_op);
    REQUIRE(after.bw_hz.has_value());
    CHECK(*after.bw_hz == doctest::Approx(*before.bw_hz).epsilon(1e-9));
}

TEST_CASE("best isolation ties go to the lowest frequency") {
    SParamGrid g(std::vector<double>{1e9, 2e9, 3e9, 4e9}, 3, 0, 1e6, {50.0, 50.0, 50.0});
    for (std::size_t i = 0; i < 4; ++i) g.s(i, 0, 3, 1) = 1e-2;
    g.s(1, 0, 3, 1) = 1e-3;
    g.s(3, 0, 3, 1) = Complex(0.0, 1e-3);
    CHECK(best_isolation_index(g, {}) == 1);
}

TEST_CASE("unmodulated networks report the sideband floor") {
    CirculatorDesign d = design(Topology::Differential);
    d.depth = 0.0;
    const auto fs = linspace(2.66e9, 2.67e9, 3);
    const SParamGrid g = sparams_serial(build_circulator(d), {d.f_mod, 3}, fs);
    const SidebandScan scan = sideband_scan(g, {});
    CHECK(scan.worst_dbc == kSidebandFloorDbc);
    CHECK(scan.table.size() == 6 * 3);
}

TEST_CASE("differential drive suppresses sidebands at the ports") {
    const auto fs = linspace(2.660e9, 2.668e9, 5);
    const Direction dir;
    const SParamGrid diff = sparams_serial(build_circulator(design(Topology::Differential)), {23.52e6, 5}, fs);
    const SParamGrid se = sparams_serial(build_circulator(design(Topology::SingleEnded)), {23.52e6, 5}, fs);
    const double d = sideband_scan(diff, dir).worst_dbc;
    const double s = sideband_scan(se, dir).worst_dbc;
    CHECK(d <= -180.0);
    CHECK(d <= s - 20.0);
}

TEST_CASE("circulation sense follows the direction") {
    const auto fs = linspace(2.655e9, 2.675e9, 41);
    const SParamGrid g = sparams_serial(build_circulator(design(Topology::Differential)), {23.52e6, 5}, fs);
    const CirculatorMetrics fwd = compute_metrics(g, Direction{1, 2, 3});
    CHECK(fwd.il_db < fwd.ix_db);
    CHECK(fwd.ix_db > 20.0);
}

TEST_CASE("json record round trip") {
    CirculatorMetrics m;
    m.f_op = 2664145021.27;
    m.ix_db = 41.234567890123;
    m.il_db = 1.3087;
    m.rl_db = 14.13;
    m.bw_hz = 2.3875e6;
    m.sideband_worst_db = -217.3;
    const CirculatorMetrics back = metrics_from_json(metrics_json(m));
    CHECK(back.f_op == m.f_op);
    CHECK(back.ix_db == m.ix_db);
    CHECK(back.il_db == m.il_db);
    CHECK(back.rl_db == m.rl_db);
    CHECK(back.bw_hz == m.bw_hz);
    CHECK(back.sideband_worst_db == m.sideband_worst_db);

    m.bw_hz.reset();
    CHECK(metrics_json(m).find("\"bw_hz\":null") != std::string::npos);
    CHECK_FALSE(metrics_from_json(metrics_json(m)).bw_hz.has_value());
    CHECK_THROWS_AS(metrics_from_json("{\"ix_db\":1}"), ParseError);
    CHECK_THROWS_AS(metrics_from_json("not json"), ParseError);
    CHECK(metrics_table(m).find("n/a") != std::string::npos);
}

}  // TEST_SUITE
