#include "fbarcirc/errors.hpp"
#include "fbarcirc/htm.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

namespace fbarcirc {

SParamGrid::SParamGrid(std::vector<double> freqs, int port_count, int harmonics, double modulation_frequency,
                       std::vector<double> reference_impedances)
    : frequencies(std::move(freqs)),
      ports(port_count),
      n_harm(harmonics),
      f_mod(modulation_frequency),
      z0(std::move(reference_impedances)),
      data(frequencies.size() * static_cast<std::size_t>(2 * harmonics + 1) *
           static_cast<std::size_t>(port_count * port_count)) {}

std::vector<double> linspace(double start, double stop, std::size_t points) {
    if (points < 2) throw InvalidArgument("linspace needs at least two points");
    std::vector<double> out(points);
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) out[i] = start + step * static_cast<double>(i);
    out.back() = stop;
    return out;
}

std::vector<double> anchored_linspace(double start, double stop, std::size_t points, double anchor) {
    if (points < 2) throw InvalidArgument("linspace needs at least two points");
    if (!(anchor >= start && anchor <= stop)) throw InvalidArgument("sweep anchor lies outside the sweep");
    const double step = (stop - start) / static_cast<double>(points - 1);
    const auto k = static_cast<long long>(std::llround((anchor - start) / step));
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i) out[i] = anchor + step * static_cast<double>(static_cast<long long>(i) - k);
    return out;
}

namespace {

std::string context(double f, int port) {
    std::ostringstream os;
    os.precision(12);
    os << "f=" << f << " Hz, port " << port << ": ";
    return os.str();
}

template <class E>
[[noreturn]] void retag(const E& e, double f, int port) {
    throw E(context(f, port) + e.what());
}

SParamGrid empty_grid(const Netlist& net, const HarmonicBasis& basis, std::span<const double> freqs) {
    basis.validate();
    std::vector<double> z0;
    for (const Element* p : net.ports()) z0.push_back(std::get<Port>(p->value).z0);
    if (z0.empty()) throw InvalidArgument("netlist has no ports");
    for (double f : freqs) {
        if (!(std::isfinite(f) && f > 0.0)) throw InvalidArgument("sweep frequencies must be > 0");
    }
    const auto count = static_cast<int>(z0.size());
    return SParamGrid({freqs.begin(), freqs.end()}, count, basis.n_harm, basis.f_mod, std::move(z0));
}

}  // namespace

void sparams_point(const Netlist& net, const HarmonicBasis& basis, double f, SParamGrid& grid, std::size_t fi) {
    const auto ports = net.ports();
    int port = 1;
    try {
        HarmonicSystem sys = assemble(net, basis, f, 1);
        const DenseLu lu(sys.matrix);
        std::vector<Complex> rhs(sys.dimension());
        for (const Element* pe : ports) {
            const Port& pp = std::get<Port>(pe->value);
            port = pp.index;
            std::fill(rhs.begin(), rhs.end(), Complex{});
            rhs[sys.row(static_cast<std::size_t>(pe->node_a - 1), 0)] = 2.0 / std::sqrt(pp.z0);
            const auto sol = solve_refined(sys.matrix, lu, rhs);
            for (int n = -basis.n_harm; n <= basis.n_harm; ++n) {
                for (const Element* qe : ports) {
                    const Port& qp = std::get<Port>(qe->value);
                    const Complex v = sol.x[sys.row(static_cast<std::size_t>(qe->node_a - 1), n)];
                    // b = (V - z0 I) / (2 sqrt z0) with I = (E - V) / z0.
                    Complex b = v / std::sqrt(qp.z0);
                    if (qp.index == pp.index && n == 0) b -= 1.0;
                    grid.s(fi, n, qp.index, pp.index) = b;
                }
            }
        }
    } catch (const NumericallySingular& e) {
        retag(e, f, port);
    } catch (const SingularStructure& e) {
        retag(e, f, port);
    } catch (const InvalidArgument& e) {
        retag(e, f, port);
    }
}

SParamGrid sparams_serial(const Netlist& net, const HarmonicBasis& basis, std::span<const double> freqs) {
    SParamGrid grid = empty_grid(net, basis, freqs);
    for (std::size_t i = 0; i < freqs.size(); ++i) sparams_point(net, basis, freqs[i], grid, i);
    return grid;
}

SParamGrid sparams(const Netlist& net, const HarmonicBasis& basis, std::span<const double> freqs) {
    SParamGrid grid = empty_grid(net, basis, freqs);
    net.validate();
    const auto count = static_cast<std::ptrdiff_t>(freqs.size());
    std::vector<std::exception_ptr> failures(freqs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto fi = static_cast<std::size_t>(i);
        try {
            sparams_point(net, basis, freqs[fi], grid, fi);
        } catch (...) {
            failures[fi] = std::current_exception();
        }
    }
    for (const auto& ep : failures) {
        if (ep) std::rethrow_exception(ep);
    }
    return grid;
}

double convergence_check(const Netlist& net, double f, double f_mod, int n_small) {
    if (n_small < 1) throw InvalidArgument("convergence check needs N >= 1");
    const double freqs[] = {f};
    const auto small = sparams_serial(net, HarmonicBasis{f_mod, n_small}, freqs);
    const auto large = sparams_serial(net, HarmonicBasis{f_mod, n_small + 2}, freqs);
    double worst = 0.0;
    for (int q = 1; q <= small.ports; ++q) {
        for (int p = 1; p <= small.ports; ++p) {
            worst = std::max(worst, std::abs(small.s(0, 0, q, p) - large.s(0, 0, q, p)));
        }
    }
    return worst;
}

}  // namespace fbarcirc
