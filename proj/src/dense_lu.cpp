#include "fbarcirc/dense_lu.hpp"

#include "fbarcirc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fbarcirc {

std::vector<Complex> ComplexMatrix::multiply(std::span<const Complex> x) const {
    std::vector<Complex> y(n_);
    for (std::size_t r = 0; r < n_; ++r) {
        Complex s{};
        const auto rr = row(r);
        for (std::size_t c = 0; c < n_; ++c) s += rr[c] * x[c];
        y[r] = s;
    }
    return y;
}

DenseLu::DenseLu(ComplexMatrix a) : lu_(std::move(a)), perm_(lu_.size()) {
    const std::size_t n = lu_.size();
    std::vector<double> scale(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        perm_[r] = r;
        for (const auto& v : lu_.row(r)) scale[r] = std::max(scale[r], std::abs(v));
        if (scale[r] == 0.0) throw NumericallySingular("matrix row " + std::to_string(r) + " is zero");
    }

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            const double m = std::abs(lu_(r, k));
            if (m > best) {
                best = m;
                piv = r;
            }
        }
        if (piv != k) {
            std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(piv).begin());
            std::swap(perm_[k], perm_[piv]);
            std::swap(scale[k], scale[piv]);
        }
        if (!(best >= 1e-14 * scale[k])) {
            throw NumericallySingular("pivot " + std::to_string(k) + " below 1e-14 of its row scale");
        }
        const Complex inv = 1.0 / lu_(k, k);
        const auto pivot_row = lu_.row(k);
        for (std::size_t r = k + 1; r < n; ++r) {
            Complex& l = lu_(r, k);
            if (l == Complex{}) continue;
            l *= inv;
            const Complex f = l;
            auto target = lu_.row(r);
            for (std::size_t c = k + 1; c < n; ++c) {
                if (pivot_row[c] != Complex{}) target[c] -= f * pivot_row[c];
            }
        }
    }
}

std::vector<Complex> DenseLu::solve(std::span<const Complex> b) const {
    const std::size_t n = lu_.size();
    std::vector<Complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
        Complex s = x[i];
        const auto r = lu_.row(i);
        for (std::size_t j = 0; j < i; ++j) {
            if (r[j] != Complex{}) s -= r[j] * x[j];
        }
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        Complex s = x[i];
        const auto r = lu_.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            if (r[j] != Complex{}) s -= r[j] * x[j];
        }
        x[i] = s / r[i];
    }
    return x;
}

double relative_residual(const ComplexMatrix& a, std::span<const Complex> x, std::span<const Complex> b) {
    const auto ax = a.multiply(x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
        num = std::max(num, std::abs(ax[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    if (den == 0.0) return num;
    return num / den;
}

RefinedSolution solve_refined(const ComplexMatrix& a, const DenseLu& lu, std::span<const Complex> b,
                              double tolerance) {
    RefinedSolution out;
    out.x = lu.solve(b);
    out.residual = relative_residual(a, out.x, b);
    if (out.residual > 1e-12) {
        const auto ax = a.multiply(out.x);
        std::vector<Complex> r(ax.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - ax[i];
        const auto dx = lu.solve(r);
        for (std::size_t i = 0; i < r.size(); ++i) out.x[i] += dx[i];
        out.residual = relative_residual(a, out.x, b);
    }
    if (!(out.residual <= tolerance)) {
        throw NumericallySingular("relative residual " + std::to_string(out.residual) + " exceeds tolerance");
    }
    return out;
}

}  // namespace fbarcirc
