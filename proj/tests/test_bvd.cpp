#include "fbarcirc/bvd.hpp"
#include "fbarcirc/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace fbarcirc;

namespace {

std::vector<AdmittanceSample> bending_samples(double f0, double q, double c0, double cm, std::size_t count) {
    const double w = kTwoPi * f0;
    const double lm = 1.0 / (w * w * cm);
    const BvdParams bvd{c0, {{w * lm / q, lm, cm, ModeLabel::BendingMode}}};
    std::vector<AdmittanceSample> s;
    for (std::size_t i = 0; i < count; ++i) {
        const double f = f0 * (1.0 - 0.05 + 0.1 * static_cast<double>(i) / static_cast<double>(count - 1));
        s.push_back({f, admittance(bvd, f)});
    }
    return s;
}

}  // namespace

TEST_SUITE("bvd") {

TEST_CASE("closed forms match an independent evaluation") {
    const ResonatorSpecs specs{2.65e9, 700.0, 0.09, 1e-12};
    const BvdParams bvd = bvd_from_specs(specs);
    const oracle::Branch ref = oracle::from_specs(2.65e9, 700.0, 0.09, 1e-12);
    REQUIRE(bvd.branches.size() == 1);
    const auto& b = bvd.branches.front();
    CHECK(b.c_m == doctest::Approx(ref.c).epsilon(1e-14));
    CHECK(b.l_m == doctest::Approx(ref.l).epsilon(1e-14));
    CHECK(b.r_m == doctest::Approx(ref.r).epsilon(1e-14));
    CHECK(b.c_m == doctest::Approx(0.0802e-12).epsilon(1e-3));
    CHECK(b.l_m == doctest::Approx(45.0e-9).epsilon(2e-3));
    CHECK(b.r_m == doctest::Approx(1.07).epsilon(2e-3));
    CHECK(b.series_frequency() == doctest::Approx(2.65e9).epsilon(1e-14));
    CHECK(b.quality_factor() == doctest::Approx(700.0).epsilon(1e-12));
    CHECK(b.label == ModeLabel::FbarMode);
}

TEST_CASE("small coupling limit") {
    const double eps = 1e-9;
    const BvdParams bvd = bvd_from_specs({1.0, 1.0, eps, 1.0});
    CHECK(bvd.branches.front().c_m == doctest::Approx(8.0 / (kPi * kPi) * eps).epsilon(1e-8));
}

TEST_CASE("round trip over random specs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const ResonatorSpecs s{1e6 * std::pow(1e4, u(rng)), 10.0 + 5000.0 * u(rng), 0.001 + 0.9 * u(rng),
                               1e-14 * std::pow(1e4, u(rng))};
        const ResonatorSpecs back = specs_from_bvd(bvd_from_specs(s));
        CHECK(back.f_s == doctest::Approx(s.f_s).epsilon(1e-10));
        CHECK(back.q == doctest::Approx(s.q).epsilon(1e-10));
        CHECK(back.k_sq == doctest::Approx(s.k_sq).epsilon(1e-10));
        CHECK(back.c0 == doctest::Approx(s.c0).epsilon(1e-10));
    }
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(bvd_from_specs({2.65e9, 700.0, 1.0, 1e-12}), InvalidArgument);
    CHECK_THROWS_AS(bvd_from_specs({2.65e9, 700.0, 0.0, 1e-12}), InvalidArgument);
    CHECK_THROWS_AS(bvd_from_specs({-1.0, 700.0, 0.09, 1e-12}), InvalidArgument);
    CHECK_THROWS_AS(bvd_from_specs({2.65e9, 0.0, 0.09, 1e-12}), InvalidArgument);
    CHECK_THROWS_AS(bvd_from_specs({2.65e9, 700.0, 0.09, 0.0}), InvalidArgument);
    CHECK_THROWS_AS((MotionalBranch{-1.0, 1e-9, 1e-12}.validate()), InvalidArgument);
    CHECK_THROWS_AS((BvdParams{1e-12, {}}.validate()), InvalidArgument);
}

TEST_CASE("admittance at series resonance and in the open limit") {
    const BvdParams bvd = bvd_from_specs({2.65e9, 700.0, 0.09, 1e-12});
    const auto& b = bvd.branches.front();
    const Complex y = admittance(bvd, 2.65e9);
    CHECK(y.real() == doctest::Approx(1.0 / b.r_m).epsilon(1e-9));
    CHECK(y.imag() == doctest::Approx(kTwoPi * 2.65e9 * 1e-12).epsilon(1e-6));
    for (double df : {-1e6, -1e5, 1e5, 1e6}) CHECK(std::abs(admittance(bvd, 2.65e9 + df)) < std::abs(y));

    BvdParams open = bvd;
    open.branches.front().r_m = 1e300;
    const double f = 2.7e9;
    CHECK(std::abs(admittance(open, f) - Complex(0.0, kTwoPi * f * 1e-12)) < 1e-15);
}

TEST_CASE("admittance is passive") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const BvdParams bvd{1e-12 * (0.1 + u(rng)),
                            {{10.0 * u(rng), 1e-8 * (0.1 + u(rng)), 1e-13 * (0.1 + u(rng))},
                             {100.0 * u(rng), 1e-3 * (0.1 + u(rng)), 1e-13 * (0.1 + u(rng)), ModeLabel::BendingMode}}};
        const double f = 1e6 * std::pow(1e4, u(rng));
        CHECK(admittance(bvd, f).real() >= -1e-15);
    }
}

TEST_CASE("parallel resonance") {
    const BvdParams bvd = bvd_from_specs({2.65e9, 700.0, 0.09, 1e-12});
    const double fp = parallel_resonance(bvd);
    CHECK(fp == doctest::Approx(2.754e9).epsilon(1e-3));

    // |Y| has its anti-resonance minimum at fp on a fine grid.
    double best_f = 0.0, best = 1e300;
    for (int i = -2000; i <= 2000; ++i) {
        const double f = fp + i * 5e3;
        if (const double m = std::abs(admittance(bvd, f)); m < best) {
            best = m;
            best_f = f;
        }
    }
    // Loss pulls the |Y| minimum slightly off the lossless anti-resonance.
    CHECK(std::abs(best_f - fp) < 2e-5 * fp);
    BvdParams lossless = bvd;
    lossless.branches.front().r_m *= 1e-6;
    best = 1e300;
    for (int i = -2000; i <= 2000; ++i) {
        const double f = fp + i * 5e3;
        if (const double m = std::abs(admittance(lossless, f)); m < best) {
            best = m;
            best_f = f;
        }
    }
    CHECK(std::abs(best_f - fp) <= 2.5e3);

    BvdParams three = bvd;
    three.branches.front().c_m = 3.0 * bvd.c0;
    CHECK(parallel_resonance(three) == doctest::Approx(2.0 * three.branches.front().series_frequency()).epsilon(1e-14));

    BvdParams weak = bvd;
    weak.branches.front().c_m = 1e-30;
    CHECK(parallel_resonance(weak) == doctest::Approx(weak.branches.front().series_frequency()).epsilon(1e-14));

    BvdParams two = bvd;
    two.branches.push_back(two.branches.front());
    CHECK_THROWS_AS(parallel_resonance(two), InvalidArgument);
}

TEST_CASE("lorentzian recovers the bending mode") {
    const auto samples = bending_samples(11.6e6, 100.0, 1e-15, 0.2e-12, 201);
    const LorentzianFit fit = fit_lorentzian(samples);
    CHECK(std::abs(fit.f0 / 11.6e6 - 1.0) < 1e-4);
    CHECK(std::abs(fit.q / 100.0 - 1.0) < 1e-2);
    CHECK(fit.residual >= 0.0);
}

TEST_CASE("lorentzian under 1 percent noise") {
    const auto clean = bending_samples(11.6e6, 100.0, 1e-15, 0.2e-12, 201);
    double peak = 0.0;
    for (const auto& s : clean) peak = std::max(peak, std::abs(s.y));
    std::vector<double> errors;
    for (int seed = 0; seed < 25; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        std::normal_distribution<double> n(0.0, 0.01 * peak);
        auto noisy = clean;
        for (auto& s : noisy) s.y = Complex(std::abs(s.y) + n(rng), 0.0);
        errors.push_back(std::abs(fit_lorentzian(noisy).q / 100.0 - 1.0));
    }
    std::nth_element(errors.begin(), errors.begin() + 12, errors.end());
    CHECK(errors[12] < 0.10);
}

TEST_CASE("lorentzian is scale equivariant") {
    const auto samples = bending_samples(11.6e6, 100.0, 0.05e-12, 0.2e-12, 101);
    auto scaled = samples;
    for (auto& s : scaled) s.y *= 3.7;
    const LorentzianFit a = fit_lorentzian(samples), b = fit_lorentzian(scaled);
    CHECK(b.f0 == doctest::Approx(a.f0).epsilon(1e-9));
    CHECK(b.q == doctest::Approx(a.q).epsilon(1e-9));
    CHECK(b.peak == doctest::Approx(3.7 * a.peak).epsilon(1e-9));
    CHECK(b.baseline == doctest::Approx(3.7 * a.baseline).epsilon(1e-9));
}

TEST_CASE("lorentzian input errors") {
    std::vector<AdmittanceSample> flat;
    for (int i = 0; i < 20; ++i) flat.push_back({1e6 + i * 1e3, Complex(1e-3, 0.0)});
    CHECK_THROWS_AS(fit_lorentzian(flat), DegenerateData);
    flat.resize(5);
    CHECK_THROWS_AS(fit_lorentzian(flat), InvalidArgument);
    auto unordered = bending_samples(11.6e6, 100.0, 1e-15, 0.2e-12, 20);
    std::swap(unordered[3], unordered[4]);
    CHECK_THROWS_AS(fit_lorentzian(unordered), InvalidArgument);
}

TEST_CASE("specs extraction from a broadband sweep") {
    const ResonatorSpecs truth{2.65e9, 700.0, 0.09, 1e-12};
    const BvdParams bvd = bvd_from_specs(truth);
    std::vector<AdmittanceSample> s;
    for (int i = 0; i <= 40000; ++i) {
        const double f = 1.0e9 + i * 50e3;
        s.push_back({f, admittance(bvd, f)});
    }
    const ResonatorSpecs got = extract_specs(s);
    CHECK(std::abs(got.f_s - truth.f_s) <= 50e3);  // one grid step
    CHECK(got.q == doctest::Approx(truth.q).epsilon(0.05));
    CHECK(got.k_sq == doctest::Approx(truth.k_sq).epsilon(0.02));
    CHECK(got.c0 == doctest::Approx(truth.c0).epsilon(0.02));
}

TEST_CASE("admittance csv") {
    std::istringstream three("# measured\nf_Hz,ReY_S,ImY_S\n1e6,0.5,-0.25\n2e6, 0.75 ,1e-3\n");
    const auto s = read_admittance_csv(three);
    REQUIRE(s.size() == 2);
    CHECK(s[0].f == 1e6);
    CHECK(s[0].y == Complex(0.5, -0.25));
    CHECK(s[1].y == Complex(0.75, 1e-3));

    std::istringstream two("1e6,0.5\n2e6,0.6\n");
    const auto t = read_admittance_csv(two);
    REQUIRE(t.size() == 2);
    CHECK(t[1].y == Complex(0.6, 0.0));

    std::istringstream bad("f,re\n1e6,0.5\n2e6,abc\n");
    try {
        read_admittance_csv(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    std::istringstream empty("");
    CHECK_THROWS_AS(read_admittance_csv(empty), ParseError);
}

}  // TEST_SUITE
