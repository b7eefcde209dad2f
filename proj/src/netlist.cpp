#include "fbarcirc/netlist.hpp"

#include "fbarcirc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fbarcirc {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void ModulationSpec::validate() const {
    if (!(std::isfinite(depth) && depth >= 0.0 && depth < 1.0)) {
        throw InvalidArgument("modulation depth must lie in [0, 1)");
    }
    if (!positive_finite(f_mod)) throw InvalidArgument("modulation frequency must be > 0");
    if (!std::isfinite(phase)) throw InvalidArgument("modulation phase must be finite");
}

Netlist::Netlist() { nodes_.emplace_back("0"); }

NodeId Netlist::node(std::string_view name) {
    if (auto id = find_node(name)) return *id;
    if (name.empty() || name.find_first_of(" \t\r\n") != std::string_view::npos) {
        throw InvalidArgument("node names must be non-empty and contain no whitespace");
    }
    nodes_.emplace_back(name);
    return static_cast<NodeId>(nodes_.size() - 1);
}

std::optional<NodeId> Netlist::find_node(std::string_view name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i] == name) return static_cast<NodeId>(i);
    }
    return std::nullopt;
}

void Netlist::check_node(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
        throw InvalidArgument("unknown node id " + std::to_string(id));
    }
}

void Netlist::add_resistor(std::string name, NodeId a, NodeId b, double ohms) {
    check_node(a);
    check_node(b);
    elements_.push_back({std::move(name), a, b, Resistor{ohms}});
}

void Netlist::add_inductor(std::string name, NodeId a, NodeId b, double henry) {
    check_node(a);
    check_node(b);
    elements_.push_back({std::move(name), a, b, Inductor{henry}});
}

void Netlist::add_capacitor(std::string name, NodeId a, NodeId b, double farad) {
    check_node(a);
    check_node(b);
    elements_.push_back({std::move(name), a, b, Capacitor{farad}});
}

void Netlist::add_modulated_rlc(std::string name, NodeId a, NodeId b, const MotionalBranch& branch,
                                std::optional<ModulationSpec> modulation) {
    check_node(a);
    check_node(b);
    elements_.push_back({std::move(name), a, b, ModulatedRlc{branch, modulation}});
}

void Netlist::add_port(int index, NodeId node, double z0) {
    check_node(node);
    elements_.push_back({"P" + std::to_string(index), node, kGround, Port{index, z0}});
}

std::vector<const Element*> Netlist::ports() const {
    std::vector<const Element*> out;
    for (const auto& e : elements_) {
        if (std::holds_alternative<Port>(e.value)) out.push_back(&e);
    }
    std::sort(out.begin(), out.end(), [](const Element* x, const Element* y) {
        return std::get<Port>(x->value).index < std::get<Port>(y->value).index;
    });
    return out;
}

std::size_t Netlist::port_count() const {
    return static_cast<std::size_t>(std::count_if(elements_.begin(), elements_.end(), [](const Element& e) {
        return std::holds_alternative<Port>(e.value);
    }));
}

std::size_t Netlist::modulated_branch_count() const {
    return static_cast<std::size_t>(std::count_if(elements_.begin(), elements_.end(), [](const Element& e) {
        return std::holds_alternative<ModulatedRlc>(e.value);
    }));
}

std::optional<double> Netlist::modulation_frequency() const {
    for (const auto& e : elements_) {
        if (const auto* m = std::get_if<ModulatedRlc>(&e.value); m && m->modulation) {
            return m->modulation->f_mod;
        }
    }
    return std::nullopt;
}

bool Netlist::is_modulated() const {
    return std::any_of(elements_.begin(), elements_.end(), [](const Element& e) {
        const auto* m = std::get_if<ModulatedRlc>(&e.value);
        return m && m->modulation && m->modulation->depth > 0.0;
    });
}

void Netlist::validate() const {
    std::optional<double> f_mod;
    std::vector<int> port_indices;
    for (const auto& e : elements_) {
        check_node(e.node_a);
        check_node(e.node_b);
        std::visit(overloaded{
                       [&](const Resistor& r) {
                           if (!positive_finite(r.ohms)) throw InvalidArgument(e.name + ": resistance must be > 0");
                       },
                       [&](const Inductor& l) {
                           if (!positive_finite(l.henry)) throw InvalidArgument(e.name + ": inductance must be > 0");
                       },
                       [&](const Capacitor& c) {
                           if (!positive_finite(c.farad)) throw InvalidArgument(e.name + ": capacitance must be > 0");
                       },
                       [&](const ModulatedRlc& m) {
                           m.branch.validate();
                           if (m.modulation) {
                               m.modulation->validate();
                               if (f_mod && *f_mod != m.modulation->f_mod) {
                                   throw InvalidArgument(e.name + ": all modulated branches must share one f_mod");
                               }
                               f_mod = m.modulation->f_mod;
                           }
                       },
                       [&](const Port& p) {
                           if (!positive_finite(p.z0)) throw InvalidArgument(e.name + ": port z0 must be > 0");
                           if (e.node_b != kGround) throw InvalidArgument(e.name + ": ports are referenced to ground");
                           port_indices.push_back(p.index);
                       },
                   },
                   e.value);
        if (e.node_a == e.node_b) throw InvalidArgument(e.name + ": element is shorted on itself");
    }
    std::sort(port_indices.begin(), port_indices.end());
    for (std::size_t i = 0; i < port_indices.size(); ++i) {
        if (port_indices[i] != static_cast<int>(i) + 1) {
            throw InvalidArgument("port indices must be unique and contiguous from 1");
        }
    }

    // Union-find over element connectivity.
    std::vector<int> parent(nodes_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (const auto& e : elements_) parent[static_cast<std::size_t>(find(e.node_a))] = find(e.node_b);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (find(static_cast<int>(i)) != find(kGround)) {
            throw SingularStructure("node '" + nodes_[i] + "' has no path to ground");
        }
    }
}

Netlist scale_frequency(const Netlist& net, double factor) {
    if (!positive_finite(factor)) throw InvalidArgument("frequency scale factor must be > 0");
    Netlist out;
    for (std::size_t i = 1; i < net.node_count(); ++i) out.node(net.node_name(static_cast<NodeId>(i)));
    for (const auto& e : net.elements()) {
        std::visit(overloaded{
                       [&](const Resistor& r) { out.add_resistor(e.name, e.node_a, e.node_b, r.ohms); },
                       [&](const Inductor& l) { out.add_inductor(e.name, e.node_a, e.node_b, l.henry / factor); },
                       [&](const Capacitor& c) { out.add_capacitor(e.name, e.node_a, e.node_b, c.farad / factor); },
                       [&](const ModulatedRlc& m) {
                           MotionalBranch b = m.branch;
                           b.l_m /= factor;
                           b.c_m /= factor;
                           auto mod = m.modulation;
                           if (mod) mod->f_mod *= factor;
                           out.add_modulated_rlc(e.name, e.node_a, e.node_b, b, mod);
                       },
                       [&](const Port& p) { out.add_port(p.index, e.node_a, p.z0); },
                   },
                   e.value);
    }
    return out;
}

std::vector<Complex> elastance_fourier(const MotionalBranch& branch, const ModulationSpec& mod, int order) {
    if (order < 1) throw InvalidArgument("elastance expansion order must be >= 1");
    std::vector<Complex> gamma(static_cast<std::size_t>(2 * order + 1), Complex{});
    const double g0 = 1.0 / branch.c_m;
    const auto centre = static_cast<std::size_t>(order);
    gamma[centre] = g0;
    const Complex side = 0.5 * mod.depth * g0 * std::polar(1.0, mod.phase);
    gamma[centre + 1] = side;
    gamma[centre - 1] = std::conj(side);
    return gamma;
}

}  // namespace fbarcirc
