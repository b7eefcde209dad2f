#include "fbarcirc/tuner.hpp"

#include "fbarcirc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace fbarcirc {

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base), scale = inv, r = 0.0;
    while (i > 0) {
        r += static_cast<double>(i % base) * scale;
        i /= base;
        scale *= inv;
    }
    return r;
}

TuneParams from_vector(std::span<const double> x) { return {x[0], x[1], x[2]}; }

}  // namespace

void TuneProblem::validate() const {
    design.validate();
    if (!(delta_max > 0.0 && delta_max < 1.0)) throw InvalidArgument("tuner delta_max must lie in (0, 1)");
    if (!(f_mod_rel_span > 0.0 && f_mod_rel_span < 1.0)) throw InvalidArgument("tuner f_mod span must lie in (0, 1)");
    const auto lo = lower(), hi = upper();
    if (!(hi[2] > lo[2]) || !(lo[2] > 0.0)) throw InvalidArgument("tuner f_op window is empty or non-positive");
    if (!(il_cap_db > 0.0)) throw InvalidArgument("tuner il cap must be > 0 dB");
    if (budget < 10) throw InvalidArgument("tuner budget must be >= 10");
    if (n_harm < 1) throw InvalidArgument("tuner harmonic order must be >= 1");
    if (starts < 1) throw InvalidArgument("tuner starts must be >= 1");
    if (budget / starts < 4) throw InvalidArgument("tuner budget too small for the number of starts");
    if (!(bw_span > 0.0) || bw_points < 3) throw InvalidArgument("tuner metrics sweep needs a positive span and >= 3 points");
}

std::array<double, 3> TuneProblem::lower() const {
    const double fs = design.resonator.f_s;
    return {0.0, design.f_mod * (1.0 - f_mod_rel_span), f_op_lo > 0.0 ? f_op_lo : fs * 0.98};
}

std::array<double, 3> TuneProblem::upper() const {
    const double fs = design.resonator.f_s;
    return {delta_max, design.f_mod * (1.0 + f_mod_rel_span), f_op_hi > 0.0 ? f_op_hi : fs * 1.02};
}

CirculatorDesign tuned_design(const TuneProblem& problem, const TuneParams& params) {
    CirculatorDesign d = problem.design;
    d.depth = params.depth;
    d.f_mod = params.f_mod;
    return d;
}

double penalized_objective(double ix_db, double il_db, double il_cap_db) {
    return -ix_db + 100.0 * std::max(0.0, il_db - il_cap_db);
}

double tuning_objective(const TuneParams& params, const TuneProblem& problem, std::string& note) {
    try {
        const Netlist net = build_circulator(tuned_design(problem, params));
        const double freqs[] = {params.f_op};
        const SParamGrid grid = sparams_serial(net, HarmonicBasis{params.f_mod, problem.n_harm}, freqs);
        const PortMetrics m = metrics_at_index(grid, 0, problem.direction);
        return penalized_objective(m.ix_db, m.il_db, problem.il_cap_db);
    } catch (const Error& e) {
        note = std::string(e.kind()) + ": " + e.what();
        return std::numeric_limits<double>::infinity();
    }
}

std::vector<double> tuned_sweep(const TuneProblem& problem, const TuneParams& params) {
    const double half = 0.5 * problem.bw_span;
    return anchored_linspace(params.f_op - half, params.f_op + half, static_cast<std::size_t>(problem.bw_points),
                             params.f_op);
}

CirculatorMetrics evaluate_tuned(const TuneProblem& problem, const TuneParams& params) {
    const Netlist net = build_circulator(tuned_design(problem, params));
    const auto freqs = tuned_sweep(problem, params);
    const SParamGrid grid = sparams(net, HarmonicBasis{params.f_mod, problem.n_harm}, freqs);
    return compute_metrics(grid, problem.direction, problem.bw_threshold_db);
}

TuneResult tune(const TuneProblem& problem, std::uint64_t seed) {
    problem.validate();
    const auto lo = problem.lower(), hi = problem.upper();

    const Objective objective = [&](std::span<const double> x, std::string& note) {
        return tuning_objective(from_vector(x), problem, note);
    };

    TuneResult result;
    result.best_objective = std::numeric_limits<double>::infinity();
    int remaining = problem.budget;
    for (int s = 0; s < problem.starts; ++s) {
        std::array<double, 3> start{};
        if (s == 0) {
            start = {0.5 * (lo[0] + hi[0]), problem.design.f_mod, 0.5 * (lo[2] + hi[2])};
            start[1] = std::clamp(start[1], lo[1], hi[1]);
        } else {
            const auto index = seed + static_cast<std::uint64_t>(s);
            const std::uint64_t bases[3] = {2, 3, 5};
            for (int i = 0; i < 3; ++i) start[i] = lo[i] + radical_inverse(index, bases[i]) * (hi[i] - lo[i]);
        }
        SimplexOptions opt;
        opt.budget = remaining / (problem.starts - s);
        remaining -= opt.budget;

        SimplexResult run = minimize_simplex(objective, lo, hi, start, opt);
        result.budget_exhausted = result.budget_exhausted || run.budget_exhausted;
        if (run.best_value < result.best_objective || result.trace.empty()) {
            result.best_objective = run.best_value;
            result.best = from_vector(run.best_x);
        }
        for (auto& e : run.trace) result.trace.push_back(std::move(e));
    }
    result.metrics = evaluate_tuned(problem, result.best);
    return result;
}

void write_trace_csv(std::ostream& out, const std::vector<Evaluation>& trace, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "eval_index,delta,f_mod_Hz,f_op_Hz,objective\n";
    char buf[160];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& x = trace[i].x;
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g", i, x[0], x[1], x[2], trace[i].value);
        out << buf << '\n';
    }
}

}  // namespace fbarcirc
