#pragma once

#include "fbarcirc/metrics.hpp"
#include "fbarcirc/netlist.hpp"
#include "fbarcirc/tuner.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fbarcirc {

struct SweepConfig {
    double f_start = 2.5e9;
    double f_stop = 2.9e9;
    int points = 201;
    std::optional<double> anchor;  // places one grid point exactly here

    std::vector<double> frequencies() const;
};

struct OutputConfig {
    std::string dir = ".";
    std::string prefix = "run";
    bool touchstone = true;
    bool harmonic_csv = true;
    bool waveforms = false;  // verify only
};

/// Oracle suite run by `verify`: a static branch, a modulated branch and
/// a two-resonator wye, all on a frequency-scaled replica.
struct VerifyConfig {
    double scale = 1e-3;
    double f_rel = 1.002;  // stimulus / f_s
    double points_per_cycle = 800.0;
    double depth_branch = 0.05;
    double depth_wye = 0.02;
    double gate_static = 1e-3;
    double gate_branch = 1e-2;
    double gate_wye = 2e-2;
};

struct TunerConfig {
    double delta_max = 0.1;
    double f_mod_rel_span = 0.1;
    double f_op_lo = 0.0;
    double f_op_hi = 0.0;
    double il_cap_db = 3.0;
    int budget = 300;
    int starts = 1;
    double bw_span = 100e6;
    int bw_points = 401;
};

struct RunConfig {
    CirculatorDesign design;
    SweepConfig sweep;
    int n_harm = 5;
    std::optional<double> basis_f_mod;  // defaults to design.f_mod
    Direction direction;
    double bw_threshold_db = 25.0;
    OutputConfig output;
    std::optional<TunerConfig> tuner;
    VerifyConfig verify;

    double modulation_frequency() const { return basis_f_mod.value_or(design.f_mod); }
    HarmonicBasis basis() const { return {modulation_frequency(), n_harm}; }
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Flat `key = value` lines; `#` starts a comment. Unknown or repeated keys
/// and malformed values raise ConfigError with the key path.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_string(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical text: every key in a fixed order, numbers with 17 significant
/// digits, so parse_config(format_config(c)) reproduces c exactly.
std::string format_config(const RunConfig& config);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_fingerprint(const RunConfig& config);

TuneProblem tune_problem(const RunConfig& config);
/// Config that re-simulates a tuning result: tuned depth and f_mod, and a
/// sweep anchored on f_op with the tuner's metrics grid.
RunConfig tuned_config(const RunConfig& base, const TuneProblem& problem, const TuneParams& best);

}  // namespace fbarcirc
