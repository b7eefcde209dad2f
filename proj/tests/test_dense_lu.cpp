#include "fbarcirc/dense_lu.hpp"
#include "fbarcirc/errors.hpp"

#include <doctest.h>

#include <random>

using namespace fbarcirc;

TEST_SUITE("dense_lu") {

TEST_CASE("solves a random well-conditioned system") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    const std::size_t size = 40;
    ComplexMatrix a(size);
    for (std::size_t r = 0; r < size; ++r) {
        for (std::size_t c = 0; c < size; ++c) a(r, c) = Complex(n(rng), n(rng));
        a(r, r) += 10.0;
    }
    std::vector<Complex> x(size);
    for (auto& v : x) v = Complex(n(rng), n(rng));
    const auto b = a.multiply(x);
    const DenseLu lu(a);
    const auto got = lu.solve(b);
    for (std::size_t i = 0; i < size; ++i) CHECK(std::abs(got[i] - x[i]) < 1e-12);
    CHECK(relative_residual(a, got, b) < 1e-14);
}

TEST_CASE("pivoting handles a zero leading entry") {
    ComplexMatrix a(2);
    a(0, 0) = 0.0;
    a(0, 1) = 1.0;
    a(1, 0) = Complex(0.0, 2.0);
    a(1, 1) = 1.0;
    const std::vector<Complex> b = {3.0, Complex(1.0, 4.0)};
    const auto x = DenseLu(a).solve(b);
    CHECK(std::abs(x[1] - 3.0) < 1e-15);
    CHECK(std::abs(x[0] - Complex(2.0, 1.0)) < 1e-15);
}

TEST_CASE("singular matrices are reported") {
    ComplexMatrix a(3);
    for (std::size_t c = 0; c < 3; ++c) {
        a(0, c) = Complex(1.0 + c, 0.5);
        a(1, c) = 2.0 * a(0, c);
        a(2, c) = Complex(0.0, 1.0 + c * c);
    }
    CHECK_THROWS_AS(DenseLu{a}, NumericallySingular);

    ComplexMatrix zero_row(2);
    zero_row(0, 0) = 1.0;
    CHECK_THROWS_AS(DenseLu{zero_row}, NumericallySingular);
}

TEST_CASE("refined solve meets the residual tolerance") {
    ComplexMatrix a(3);
    a(0, 0) = 4.0;
    a(0, 1) = Complex(1.0, 1.0);
    a(1, 0) = Complex(1.0, -1.0);
    a(1, 1) = 3.0;
    a(1, 2) = 0.5;
    a(2, 1) = 0.5;
    a(2, 2) = Complex(2.0, 0.1);
    const std::vector<Complex> b = {1.0, Complex(0.0, 1.0), 2.0};
    const DenseLu lu(a);
    const RefinedSolution s = solve_refined(a, lu, b);
    CHECK(s.residual < 1e-12);
    CHECK(relative_residual(a, s.x, b) == doctest::Approx(s.residual));
}

}  // TEST_SUITE
