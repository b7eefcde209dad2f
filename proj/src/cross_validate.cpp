#include "fbarcirc/errors.hpp"
#include "fbarcirc/transient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbarcirc {

CrossValidation cross_validate(const Netlist& net, const HarmonicBasis& basis, double f, int q, int p,
                               const CrossValidationOptions& options) {
    const auto ports = net.ports();
    const Element* out_port = nullptr;
    const Element* in_port = nullptr;
    for (const Element* e : ports) {
        const int idx = std::get<Port>(e->value).index;
        if (idx == q) out_port = e;
        if (idx == p) in_port = e;
    }
    if (!out_port || !in_port) throw InvalidArgument("cross-validation port pair does not exist");

    CrossValidation cv;
    const double freqs[] = {f};
    const SParamGrid grid = sparams_serial(net, basis, freqs);
    for (int n = -1; n <= 1; ++n) cv.htm[static_cast<std::size_t>(n + 1)] = grid.s(0, n, q, p);

    // Slowest resonator sets the ring-up allowance.
    double tau = 0.0;
    for (const auto& el : net.elements()) {
        if (const auto* m = std::get_if<ModulatedRlc>(&el.value)) {
            const double qf = m->branch.quality_factor();
            const double fs = m->branch.series_frequency();
            if (std::isfinite(qf)) tau = std::max(tau, qf / (kPi * fs));
        }
    }
    if (tau == 0.0) tau = 100.0 / f;
    cv.duration = options.modulation_periods / basis.f_mod + options.ring_up_time_constants * tau;
    cv.dt = 1.0 / (options.points_per_cycle * (f + basis.f_mod));

    const Tone tone{p, f, 1.0};
    TransientResult res = simulate(net, tone, cv.duration, cv.dt, options.cancel);
    const PhasorSet phasors = extract_phasors(res, out_port->node_a, f, basis.f_mod, basis.n_harm);
    if (options.keep_waveform) cv.waveform = std::move(res);

    const double z0 = std::get<Port>(out_port->value).z0;
    for (int n = -1; n <= 1; ++n) {
        Complex b = 2.0 * phasors.at(n);
        if (q == p && n == 0) b -= 2.0 * tone.amplitude * std::sqrt(z0);
        cv.transient[static_cast<std::size_t>(n + 1)] = b / (2.0 * std::sqrt(z0) * tone.amplitude);
    }

    const double carrier = std::abs(cv.htm[1]);
    for (std::size_t k = 0; k < 3; ++k) {
        const double ref = std::abs(cv.htm[k]) >= 1e-6 * carrier ? std::abs(cv.htm[k]) : carrier;
        cv.error[k] = ref > 0.0 ? std::abs(cv.transient[k] - cv.htm[k]) / ref
                                : std::numeric_limits<double>::infinity();
        cv.max_error = std::max(cv.max_error, cv.error[k]);
    }
    return cv;
}

Netlist oracle_single_branch(const ResonatorSpecs& specs, double depth, double f_mod, double z0) {
    const BvdParams bvd = bvd_from_specs(specs);
    Netlist net;
    const NodeId p1 = net.node("p1");
    net.add_port(1, p1, z0);
    net.add_capacitor("C1", p1, kGround, bvd.c0);
    net.add_modulated_rlc("M1", p1, kGround, bvd.branches.front(), ModulationSpec{depth, f_mod, 0.0});
    net.validate();
    return net;
}

Netlist oracle_toy_wye(const ResonatorSpecs& specs, double depth, double f_mod, double z0) {
    const BvdParams bvd = bvd_from_specs(specs);
    Netlist net;
    const NodeId ports[2] = {net.node("p1"), net.node("p2")};
    const NodeId x = net.node("x");
    for (int k = 0; k < 2; ++k) {
        const std::string idx = std::to_string(k + 1);
        net.add_port(k + 1, ports[k], z0);
        net.add_capacitor("C" + idx, ports[k], kGround, bvd.c0);
        net.add_modulated_rlc("M" + idx, ports[k], x, bvd.branches.front(),
                              ModulationSpec{depth, f_mod, k * kTwoPi / 3.0});
    }
    net.validate();
    return net;
}

}  // namespace fbarcirc
