#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

namespace fbarcirc {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class ModeLabel { FbarMode, BendingMode };

/// Series R-L-C branch of a Butterworth-Van-Dyke resonator; one per
/// mechanical mode.
struct MotionalBranch {
    double r_m = 0.0;  // ohm
    double l_m = 0.0;  // henry
    double c_m = 0.0;  // farad
    ModeLabel label = ModeLabel::FbarMode;

    /// Throws InvalidArgument unless r_m >= 0, l_m > 0, c_m > 0.
    void validate() const;
    double series_frequency() const;
    /// (1/r_m) sqrt(l_m/c_m); infinite for a lossless branch.
    double quality_factor() const;
    Complex impedance(double f) const;
};

/// Plate capacitance c0 in parallel with one (FBAR mode) or two (FBAR and
/// bending mode) motional branches.
struct BvdParams {
    double c0 = 0.0;
    std::vector<MotionalBranch> branches;

    void validate() const;
};

/// Figures a resonator is usually specified by.
struct ResonatorSpecs {
    double f_s = 2.65e9;
    double q = 700.0;
    double k_sq = 0.09;
    double c0 = 1.0e-12;

    void validate() const;
};

struct AdmittanceSample {
    double f = 0.0;
    Complex y;
};

struct LorentzianFit {
    double f0 = 0.0;
    double q = 0.0;
    double peak = 0.0;
    double baseline = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// c_m/c0 ratio implied by an effective coupling coefficient,
/// (8/pi^2) k^2 / (1 - k^2).
double capacitance_ratio_from_coupling(double k_sq);
double coupling_from_capacitance_ratio(double ratio);

/// Single FbarMode-branch BVD reproducing f_s, Q and k^2 exactly.
BvdParams bvd_from_specs(const ResonatorSpecs& specs);

/// Inverse of bvd_from_specs, using the first branch.
ResonatorSpecs specs_from_bvd(const BvdParams& bvd);

/// Y(f) = j w c0 + sum 1/(r + j w l + 1/(j w c)).
Complex admittance(const BvdParams& bvd, double f);

/// f_s sqrt(1 + c_m/c0) of a single-branch resonator.
double parallel_resonance(const BvdParams& bvd);

/// Amplitude Lorentzian used by fit_lorentzian:
/// baseline + peak * g / sqrt((f - f0)^2 + g^2), g = f0 / (2 q).
double lorentzian_magnitude(double f, double f0, double q, double peak, double baseline);

/// Damped least-squares fit of the Lorentzian above to |Y|. Requires at
/// least eight samples with strictly increasing frequency.
LorentzianFit fit_lorentzian(std::span<const AdmittanceSample> samples);

/// Estimate f_s, Q, k^2 and c0 from a broadband admittance sweep that
/// covers the series and parallel resonances and starts well below them.
ResonatorSpecs extract_specs(std::span<const AdmittanceSample> samples);

/// Reads `f_Hz, ReY_S[, ImY_S]` rows. A non-numeric first row is taken as
/// a header; `#` starts a comment. Throws ParseError with the line number.
std::vector<AdmittanceSample> read_admittance_csv(std::istream& in);

}  // namespace fbarcirc
