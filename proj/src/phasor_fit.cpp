#include "fbarcirc/errors.hpp"
#include "fbarcirc/transient.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace fbarcirc {

Complex PhasorSet::at(int n) const {
    for (const auto& [k, p] : entries) {
        if (k == n) return p;
    }
    throw InvalidArgument("no phasor for harmonic " + std::to_string(n));
}

PhasorSet fit_phasors(std::span<const double> t, std::span<const double> v, double f, double f_mod, int order) {
    if (t.size() != v.size() || t.size() < 2) throw InvalidArgument("phasor fit needs matching sample spans");
    if (order < 0) throw InvalidArgument("phasor order must be >= 0");
    const double window = t.back() - t.front();
    const auto count = static_cast<Eigen::Index>(2 * order + 1);

    std::vector<double> freqs;
    for (int n = -order; n <= order; ++n) freqs.push_back(f + n * f_mod);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        if (std::abs(freqs[i]) * window < 1.0) {
            throw IllConditionedBasis("basis frequency " + std::to_string(freqs[i]) + " Hz is within 1/window of DC");
        }
        for (std::size_t j = i + 1; j < freqs.size(); ++j) {
            if (std::abs(std::abs(freqs[i]) - std::abs(freqs[j])) * window < 1.0) {
                throw IllConditionedBasis("basis frequencies collide within 1/window");
            }
        }
    }

    const auto rows = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd basis(rows, 2 * count);
    Eigen::VectorXd y(rows);
    const double t0 = t.front();
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto i = static_cast<std::size_t>(r);
        y[r] = v[i];
        for (Eigen::Index k = 0; k < count; ++k) {
            // Phase is referenced to absolute time; the shift only improves conditioning.
            const double wt = kTwoPi * freqs[static_cast<std::size_t>(k)] * (t[i] - t0);
            basis(r, 2 * k) = std::cos(wt);
            basis(r, 2 * k + 1) = std::sin(wt);
        }
    }
    const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd fitted = basis * coef;

    PhasorSet out;
    for (Eigen::Index k = 0; k < count; ++k) {
        // a cos + b sin = Re((a - j b) e^{j w (t - t0)}); rotate to t = 0.
        const Complex local(coef[2 * k], -coef[2 * k + 1]);
        const Complex p = local * std::polar(1.0, -kTwoPi * freqs[static_cast<std::size_t>(k)] * t0);
        out.entries.emplace_back(static_cast<int>(k) - order, p);
    }
    const double signal = y.norm();
    out.residual = signal > 0.0 ? (y - fitted).norm() / signal : 0.0;
    return out;
}

PhasorSet extract_phasors(const TransientResult& res, NodeId node, double f, double f_mod, int order) {
    const auto samples = res.node(node);
    const std::size_t total = samples.size();
    const std::size_t start = total - total / 4;
    std::vector<double> t(total - start);
    for (std::size_t i = start; i < total; ++i) t[i - start] = res.time(i);
    if (f_mod > 0.0 && (t.back() - t.front()) * f_mod < 5.0 - 1e-9) {
        throw InvalidArgument("tail window must hold at least 5 modulation periods");
    }
    return fit_phasors(t, samples.subspan(start), f, f_mod, order);
}

}  // namespace fbarcirc
