#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fbarcirc {

using Complex = std::complex<double>;

/// Square row-major complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(std::size_t n) : n_(n), data_(n * n) {}

    std::size_t size() const { return n_; }
    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
    std::span<Complex> row(std::size_t r) { return {data_.data() + r * n_, n_}; }
    std::span<const Complex> row(std::size_t r) const { return {data_.data() + r * n_, n_}; }

    std::vector<Complex> multiply(std::span<const Complex> x) const;

private:
    std::size_t n_ = 0;
    std::vector<Complex> data_;
};

/// LU factorization with partial pivoting. Zero multipliers are skipped,
/// which keeps the cost low for the block-banded harmonic systems.
class DenseLu {
public:
    /// Throws NumericallySingular when a pivot falls below 1e-14 of the
    /// largest magnitude in its original row.
    explicit DenseLu(ComplexMatrix a);

    std::size_t size() const { return lu_.size(); }
    std::vector<Complex> solve(std::span<const Complex> b) const;

private:
    ComplexMatrix lu_;
    std::vector<std::size_t> perm_;
};

/// ||A x - b||_inf / ||b||_inf (or ||A x||_inf when b is zero).
double relative_residual(const ComplexMatrix& a, std::span<const Complex> x, std::span<const Complex> b);

struct RefinedSolution {
    std::vector<Complex> x;
    double residual = 0.0;
};

/// Solve with one step of iterative refinement when the residual exceeds
/// 1e-12. Throws NumericallySingular when it stays above `tolerance`.
RefinedSolution solve_refined(const ComplexMatrix& a, const DenseLu& lu, std::span<const Complex> b,
                              double tolerance = 1e-9);

}  // namespace fbarcirc
