#pragma once

#include "fbarcirc/metrics.hpp"
#include "fbarcirc/netlist.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fbarcirc {

// ---------------------------------------------------------------------------
// Bounded Nelder-Mead simplex search.
//
// The search runs in coordinates normalized to the unit box. Every trial
// point is clipped into the box before it is evaluated, so evaluations never
// leave the bounds. When the simplex collapses before the budget is spent the
// search restarts around the best point with a smaller simplex.
// ---------------------------------------------------------------------------

struct SimplexOptions {
    int budget = 200;
    double initial_step = 0.1;  // fraction of each bound range
    double x_tol = 1e-10;       // simplex diameter, normalized units
    double f_tol = 1e-14;       // spread of vertex values
};

struct Evaluation {
    std::vector<double> x;
    double value = 0.0;
    std::string note;  // reason for a non-finite value
};

struct SimplexResult {
    std::vector<double> best_x;
    double best_value = 0.0;
    std::vector<Evaluation> trace;
    bool budget_exhausted = false;
};

/// Objective returns a value and may set the note (e.g. a solver failure).
using Objective = std::function<double(std::span<const double> x, std::string& note)>;

SimplexResult minimize_simplex(const Objective& objective, std::span<const double> lower,
                               std::span<const double> upper, std::span<const double> start,
                               const SimplexOptions& options);

// ---------------------------------------------------------------------------
// Circulator tuning over (modulation depth, modulation frequency, stimulus
// frequency).
// ---------------------------------------------------------------------------

struct TuneParams {
    double depth = 0.0;
    double f_mod = 0.0;
    double f_op = 0.0;
};

struct TuneProblem {
    CirculatorDesign design;
    double delta_max = 0.1;
    double f_mod_rel_span = 0.1;  // f_mod in f_mod0 (1 -+ span)
    double f_op_lo = 0.0;         // 0 selects f_s (1 - 2 %)
    double f_op_hi = 0.0;         // 0 selects f_s (1 + 2 %)
    double il_cap_db = 3.0;
    int budget = 300;
    int n_harm = 5;
    int starts = 1;  // > 1 adds seeded low-discrepancy starting points
    Direction direction;
    double bw_threshold_db = 25.0;
    double bw_span = 100e6;  // metrics sweep centred on f_op
    int bw_points = 401;

    void validate() const;
    std::array<double, 3> lower() const;
    std::array<double, 3> upper() const;
};

struct TuneResult {
    TuneParams best;
    double best_objective = 0.0;
    CirculatorMetrics metrics;
    std::vector<Evaluation> trace;
    bool budget_exhausted = false;
};

/// -ix_db + 100 max(0, il_db - il_cap_db).
double penalized_objective(double ix_db, double il_db, double il_cap_db);

/// penalized_objective at the given parameters; +inf (with `note` set)
/// when the solver fails.
double tuning_objective(const TuneParams& params, const TuneProblem& problem, std::string& note);

/// Metrics sweep of `bw_points` over f_op -+ bw_span / 2, anchored on f_op.
std::vector<double> tuned_sweep(const TuneProblem& problem, const TuneParams& params);

/// Design with the tuned depth and modulation frequency applied.
CirculatorDesign tuned_design(const TuneProblem& problem, const TuneParams& params);

/// Full metrics (including bandwidth and sidebands) at tuned parameters.
CirculatorMetrics evaluate_tuned(const TuneProblem& problem, const TuneParams& params);

TuneResult tune(const TuneProblem& problem, std::uint64_t seed);

/// CSV `eval_index,delta,f_mod_Hz,f_op_Hz,objective`.
void write_trace_csv(std::ostream& out, const std::vector<Evaluation>& trace,
                     const std::vector<std::string>& comments = {});

}  // namespace fbarcirc
