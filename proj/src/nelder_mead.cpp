#include "fbarcirc/errors.hpp"
#include "fbarcirc/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fbarcirc {

namespace {

using Point = std::vector<double>;

class BudgetSpent {};

// Evaluates in normalized coordinates and keeps the trace and best-so-far.
class Evaluator {
public:
    Evaluator(const Objective& f, std::span<const double> lo, std::span<const double> hi, int budget,
              SimplexResult& out)
        : f_(f), lo_(lo), hi_(hi), budget_(budget), out_(out) {}

    double operator()(Point& u) {
        if (static_cast<int>(out_.trace.size()) >= budget_) throw BudgetSpent{};
        for (double& v : u) v = std::clamp(v, 0.0, 1.0);
        Evaluation e;
        e.x.resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) e.x[i] = lo_[i] + u[i] * (hi_[i] - lo_[i]);
        e.value = f_(e.x, e.note);
        if (std::isnan(e.value)) e.value = std::numeric_limits<double>::infinity();
        if (out_.trace.empty() || e.value < out_.best_value) {
            out_.best_value = e.value;
            out_.best_x = e.x;
            best_u_ = u;
        }
        out_.trace.push_back(std::move(e));
        return out_.trace.back().value;
    }

    const Point& best_u() const { return best_u_; }

private:
    const Objective& f_;
    std::span<const double> lo_, hi_;
    int budget_;
    SimplexResult& out_;
    Point best_u_;
};

Point combine(const Point& a, const Point& b, double t) {
    // a + t (b - a)
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
}

// One simplex run; returns when the simplex collapses.
void run_simplex(Evaluator& eval, const Point& start, double step, const SimplexOptions& opt) {
    const std::size_t dim = start.size();
    std::vector<Point> simplex;
    std::vector<double> values;
    Point s = start;
    simplex.push_back(s);
    values.push_back(eval(simplex.back()));
    for (std::size_t i = 0; i < dim; ++i) {
        Point v = s;
        v[i] += v[i] + step <= 1.0 ? step : -step;
        simplex.push_back(v);
        values.push_back(eval(simplex.back()));
    }

    std::vector<std::size_t> order(dim + 1);
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[dim - 1];

        double diameter = 0.0;
        for (const auto& p : simplex) {
            for (std::size_t i = 0; i < dim; ++i) diameter = std::max(diameter, std::abs(p[i] - simplex[best][i]));
        }
        const double spread = values[worst] - values[best];
        if (diameter < opt.x_tol || (std::isfinite(spread) && spread <= opt.f_tol * (1.0 + std::abs(values[best])))) {
            return;
        }

        Point centroid(dim, 0.0);
        for (std::size_t k = 0; k <= dim; ++k) {
            if (k == worst) continue;
            for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[k][i] / static_cast<double>(dim);
        }

        Point reflected = combine(centroid, simplex[worst], -1.0);
        const double fr = eval(reflected);
        if (fr < values[best]) {
            Point expanded = combine(centroid, simplex[worst], -2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        Point contracted = outside ? combine(centroid, reflected, 0.5) : combine(centroid, simplex[worst], 0.5);
        const double fc = eval(contracted);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        for (std::size_t k = 0; k <= dim; ++k) {
            if (k == best) continue;
            simplex[k] = combine(simplex[best], simplex[k], 0.5);
            values[k] = eval(simplex[k]);
        }
    }
}

}  // namespace

SimplexResult minimize_simplex(const Objective& objective, std::span<const double> lower,
                               std::span<const double> upper, std::span<const double> start,
                               const SimplexOptions& options) {
    const std::size_t dim = start.size();
    if (dim == 0 || lower.size() != dim || upper.size() != dim) throw InvalidArgument("bounds and start must match");
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(upper[i] > lower[i])) throw InvalidArgument("bounds must be non-degenerate");
    }
    if (options.budget < static_cast<int>(dim) + 1) throw InvalidArgument("budget too small for one simplex");

    SimplexResult out;
    Evaluator eval(objective, lower, upper, options.budget, out);
    Point u(dim);
    for (std::size_t i = 0; i < dim; ++i) u[i] = std::clamp((start[i] - lower[i]) / (upper[i] - lower[i]), 0.0, 1.0);

    double step = options.initial_step;
    try {
        run_simplex(eval, u, step, options);
        // Restart around the incumbent with a shrinking simplex until the budget runs out.
        while (true) {
            step = std::max(step * 0.5, 1e3 * options.x_tol);
            run_simplex(eval, eval.best_u(), step, options);
            if (step <= 1e3 * options.x_tol) break;
        }
    } catch (const BudgetSpent&) {
        out.budget_exhausted = true;
    }
    return out;
}

}  // namespace fbarcirc
