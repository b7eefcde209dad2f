#include "fbarcirc/bvd.hpp"

#include "fbarcirc/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fbarcirc {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void MotionalBranch::validate() const {
    require(std::isfinite(r_m) && r_m >= 0.0, "motional resistance must be >= 0");
    require(positive_finite(l_m), "motional inductance must be > 0");
    require(positive_finite(c_m), "motional capacitance must be > 0");
    require(positive_finite(series_frequency()), "series frequency must be finite");
}

double MotionalBranch::series_frequency() const {
    return 1.0 / (kTwoPi * std::sqrt(l_m * c_m));
}

double MotionalBranch::quality_factor() const {
    if (r_m == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(l_m / c_m) / r_m;
}

Complex MotionalBranch::impedance(double f) const {
    const double w = kTwoPi * f;
    return {r_m, w * l_m - 1.0 / (w * c_m)};
}

void BvdParams::validate() const {
    require(positive_finite(c0), "plate capacitance c0 must be > 0");
    require(!branches.empty() && branches.size() <= 2, "a BVD model has one or two motional branches");
    for (const auto& b : branches) b.validate();
}

void ResonatorSpecs::validate() const {
    require(positive_finite(f_s), "f_s must be > 0");
    require(positive_finite(q), "Q must be > 0");
    require(positive_finite(c0), "c0 must be > 0");
    require(std::isfinite(k_sq) && k_sq > 0.0 && k_sq < 1.0, "k_sq must lie in (0, 1)");
}

double capacitance_ratio_from_coupling(double k_sq) {
    return (8.0 / (kPi * kPi)) * k_sq / (1.0 - k_sq);
}

double coupling_from_capacitance_ratio(double ratio) {
    const double x = ratio * kPi * kPi / 8.0;
    return x / (1.0 + x);
}

BvdParams bvd_from_specs(const ResonatorSpecs& specs) {
    specs.validate();
    const double ws = kTwoPi * specs.f_s;
    MotionalBranch branch;
    branch.c_m = specs.c0 * capacitance_ratio_from_coupling(specs.k_sq);
    branch.l_m = 1.0 / (ws * ws * branch.c_m);
    branch.r_m = ws * branch.l_m / specs.q;
    branch.label = ModeLabel::FbarMode;
    return BvdParams{specs.c0, {branch}};
}

ResonatorSpecs specs_from_bvd(const BvdParams& bvd) {
    bvd.validate();
    const auto& b = bvd.branches.front();
    ResonatorSpecs s;
    s.f_s = b.series_frequency();
    s.q = b.quality_factor();
    s.k_sq = coupling_from_capacitance_ratio(b.c_m / bvd.c0);
    s.c0 = bvd.c0;
    return s;
}

Complex admittance(const BvdParams& bvd, double f) {
    require(positive_finite(f), "admittance needs f > 0");
    const double w = kTwoPi * f;
    Complex y{0.0, w * bvd.c0};
    for (const auto& b : bvd.branches) {
        if (std::isinf(b.r_m)) continue;
        y += 1.0 / b.impedance(f);
    }
    return y;
}

double parallel_resonance(const BvdParams& bvd) {
    require(bvd.branches.size() == 1, "parallel resonance is defined for a single-branch resonator");
    bvd.validate();
    const auto& b = bvd.branches.front();
    return b.series_frequency() * std::sqrt(1.0 + b.c_m / bvd.c0);
}

double lorentzian_magnitude(double f, double f0, double q, double peak, double baseline) {
    const double g = f0 / (2.0 * q);
    const double d = f - f0;
    return baseline + peak * g / std::sqrt(d * d + g * g);
}

namespace {

// Parameters are carried in normalized form: frequency offset and width in
// units of the initial half width, magnitudes in units of the largest sample.
struct NormalizedModel {
    double center;
    double unit;

    // p = {offset, width, peak, baseline}
    double value(double x, const Eigen::Vector4d& p) const {
        const double d = x - p[0];
        return p[3] + p[2] * p[1] / std::sqrt(d * d + p[1] * p[1]);
    }

    Eigen::Vector4d gradient(double x, const Eigen::Vector4d& p) const {
        const double d = x - p[0];
        const double g = p[1];
        const double r2 = d * d + g * g;
        const double r = std::sqrt(r2);
        const double r3 = r2 * r;
        Eigen::Vector4d j;
        j[0] = p[2] * g * d / r3;
        j[1] = p[2] * (d * d) / r3;
        j[2] = g / r;
        j[3] = 1.0;
        return j;
    }
};

}  // namespace

LorentzianFit fit_lorentzian(std::span<const AdmittanceSample> samples) {
    if (samples.size() < 8) throw InvalidArgument("Lorentzian fit needs at least 8 samples");
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i].f > samples[i - 1].f)) {
            throw InvalidArgument("sample frequencies must be strictly increasing");
        }
    }

    const std::size_t n = samples.size();
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(samples[i].y);

    const auto [min_it, max_it] = std::minmax_element(mag.begin(), mag.end());
    const double max_mag = *max_it;
    const double min_mag = *min_it;
    if (!(max_mag > 0.0) || max_mag - min_mag <= 1e-12 * max_mag) {
        throw DegenerateData("admittance samples are constant");
    }

    // Initial guess: peak location and half-power width above the floor.
    const std::size_t ipk = static_cast<std::size_t>(max_it - mag.begin());
    const double f_peak = samples[ipk].f;
    const double height = max_mag - min_mag;
    const double half = min_mag + height / std::sqrt(2.0);
    auto crossing = [&](std::size_t from, int step) {
        std::size_t i = from;
        while (true) {
            if (step < 0 && i == 0) return samples.front().f;
            if (step > 0 && i + 1 == n) return samples.back().f;
            const std::size_t j = step > 0 ? i + 1 : i - 1;
            if (mag[j] < half) {
                const double t = (mag[i] - half) / (mag[i] - mag[j]);
                return samples[i].f + t * (samples[j].f - samples[i].f);
            }
            i = j;
        }
    };
    double width = crossing(ipk, +1) - crossing(ipk, -1);
    if (!(width > 0.0)) width = (samples.back().f - samples.front().f) / 10.0;

    const NormalizedModel model{f_peak, width / 2.0};
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = (samples[i].f - model.center) / model.unit;
        y[i] = mag[i] / max_mag;
    }

    Eigen::Vector4d p(0.0, 1.0, height / max_mag, min_mag / max_mag);
    auto cost = [&](const Eigen::Vector4d& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - model.value(x[i], q);
            s += r * r;
        }
        return s;
    };

    constexpr int kBudget = 200;
    constexpr double kStepTol = 1e-10;
    double lambda = 1e-3;
    double current = cost(p);
    int iter = 0;
    bool converged = false;
    for (; iter < kBudget && !converged; ++iter) {
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Vector4d g = model.gradient(x[i], p);
            const double r = y[i] - model.value(x[i], p);
            jtj.noalias() += g * g.transpose();
            jtr += g * r;
        }
        bool accepted = false;
        while (!accepted) {
            Eigen::Matrix4d damped = jtj;
            for (int k = 0; k < 4; ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-300);
            const Eigen::Vector4d step = damped.ldlt().solve(jtr);
            Eigen::Vector4d trial = p + step;
            if (!step.allFinite()) {
                lambda *= 10.0;
            } else {
                if (trial[1] <= 0.0) trial[1] = 0.5 * p[1];
                const double c = cost(trial);
                if (c <= current) {
                    const double rel = step.norm() / std::max(p.norm(), 1e-300);
                    p = trial;
                    current = c;
                    lambda = std::max(lambda / 10.0, 1e-12);
                    accepted = true;
                    converged = rel < kStepTol;
                } else {
                    lambda *= 10.0;
                }
            }
            if (lambda > 1e12) {
                // No descent direction left: the current point is a minimum.
                accepted = true;
                converged = true;
            }
        }
    }
    if (!converged) throw FitDiverged("Lorentzian fit did not reach tolerance in 200 iterations");

    LorentzianFit fit;
    fit.f0 = model.center + p[0] * model.unit;
    const double g = std::abs(p[1]) * model.unit;
    fit.q = fit.f0 / (2.0 * g);
    fit.peak = p[2] * max_mag;
    fit.baseline = p[3] * max_mag;
    fit.residual = std::sqrt(current / static_cast<double>(n)) * max_mag;
    fit.iterations = iter;
    if (!(fit.f0 > 0.0) || !(fit.q > 0.0) || !std::isfinite(fit.q)) {
        throw FitDiverged("Lorentzian fit left the admissible region");
    }
    return fit;
}

ResonatorSpecs extract_specs(std::span<const AdmittanceSample> samples) {
    if (samples.size() < 8) throw InvalidArgument("extraction needs at least 8 samples");
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i].f > samples[i - 1].f)) {
            throw InvalidArgument("sample frequencies must be strictly increasing");
        }
    }
    const std::size_t n = samples.size();
    std::size_t is = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(samples[i].y) > std::abs(samples[is].y)) is = i;
    }
    if (is == 0 || is + 1 == n) throw DegenerateData("series resonance is not inside the sweep");

    // Parabolic refinement of the |Y| maximum.
    auto refine = [&](std::size_t i) {
        const double y0 = std::abs(samples[i - 1].y), y1 = std::abs(samples[i].y),
                     y2 = std::abs(samples[i + 1].y);
        const double denom = y0 - 2.0 * y1 + y2;
        const double h = 0.5 * (samples[i + 1].f - samples[i - 1].f);
        if (denom == 0.0) return samples[i].f;
        return samples[i].f + 0.5 * (y0 - y2) / denom * h;
    };
    const double f_s = refine(is);

    std::size_t ip = is + 1;
    for (std::size_t i = is + 1; i < n; ++i) {
        if (std::abs(samples[i].y) < std::abs(samples[ip].y)) ip = i;
    }
    if (ip + 1 == n) throw DegenerateData("parallel resonance is not inside the sweep");
    const double f_p = refine(ip);
    const double ratio = (f_p / f_s) * (f_p / f_s) - 1.0;

    // Conductance half-maximum width around f_s gives the unloaded Q.
    const double g_pk = samples[is].y.real();
    auto edge = [&](int step) {
        std::size_t i = is;
        while (true) {
            if ((step < 0 && i == 0) || (step > 0 && i + 1 == n)) {
                throw DegenerateData("conductance peak is not resolved by the sweep");
            }
            const std::size_t j = step > 0 ? i + 1 : i - 1;
            if (samples[j].y.real() < 0.5 * g_pk) {
                const double t = (samples[i].y.real() - 0.5 * g_pk) /
                                 (samples[i].y.real() - samples[j].y.real());
                return samples[i].f + t * (samples[j].f - samples[i].f);
            }
            i = j;
        }
    };
    const double fwhm = edge(+1) - edge(-1);

    const double f_lo = samples.front().f;
    const double c_total = samples.front().y.imag() / (kTwoPi * f_lo);
    const double detune = 1.0 - (f_lo / f_s) * (f_lo / f_s);

    ResonatorSpecs specs;
    specs.f_s = f_s;
    specs.q = f_s / fwhm;
    specs.k_sq = coupling_from_capacitance_ratio(ratio);
    specs.c0 = c_total / (1.0 + ratio / detune);
    specs.validate();
    return specs;
}

}  // namespace fbarcirc
