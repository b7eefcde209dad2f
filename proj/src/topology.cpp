#include "fbarcirc/errors.hpp"
#include "fbarcirc/netlist.hpp"

#include <cmath>
#include <string>

namespace fbarcirc {

void CirculatorDesign::validate() const {
    resonator.validate();
    ModulationSpec{depth, f_mod, 0.0}.validate();
    if (!(std::isfinite(z0) && z0 > 0.0)) throw InvalidArgument("port reference impedance must be > 0");
}

double modulation_phase(PhaseSequence seq, int k, int chip) {
    const double sign = seq == PhaseSequence::Forward ? 1.0 : -1.0;
    return sign * k * kTwoPi / 3.0 + chip * kPi;
}

namespace {

// One chip: three resonators from the port nodes to a common node.
void add_chip(Netlist& net, const CirculatorDesign& d, const BvdParams& bvd, const NodeId (&ports)[3],
              const std::string& common, const std::string& suffix, int chip) {
    const NodeId x = net.node(common);
    for (int k = 0; k < 3; ++k) {
        const std::string idx = std::to_string(k + 1);
        const NodeId plate_b = d.plate == PlatePlacement::PortToGround ? kGround : x;
        net.add_capacitor("C" + idx + suffix, ports[k], plate_b, bvd.c0);
        net.add_modulated_rlc("M" + idx + suffix, ports[k], x, bvd.branches.front(),
                              ModulationSpec{d.depth, d.f_mod, modulation_phase(d.phase_sequence, k, chip)});
    }
}

Netlist build(const CirculatorDesign& design, int chips) {
    design.validate();
    const BvdParams bvd = bvd_from_specs(design.resonator);
    Netlist net;
    const NodeId ports[3] = {net.node("p1"), net.node("p2"), net.node("p3")};
    for (int k = 0; k < 3; ++k) net.add_port(k + 1, ports[k], design.z0);
    if (chips == 1) {
        add_chip(net, design, bvd, ports, "x", "", 0);
    } else {
        add_chip(net, design, bvd, ports, "xa", "a", 0);
        add_chip(net, design, bvd, ports, "xb", "b", 1);
    }
    net.validate();
    return net;
}

}  // namespace

Netlist build_single_ended(const CirculatorDesign& design) {
    if (design.topology != Topology::SingleEnded) throw InvalidArgument("design topology is not single-ended");
    return build(design, 1);
}

Netlist build_differential(const CirculatorDesign& design) {
    if (design.topology != Topology::Differential) throw InvalidArgument("design topology is not differential");
    return build(design, 2);
}

Netlist build_circulator(const CirculatorDesign& design) {
    return design.topology == Topology::SingleEnded ? build_single_ended(design) : build_differential(design);
}

}  // namespace fbarcirc
