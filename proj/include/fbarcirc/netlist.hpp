#pragma once

#include "fbarcirc/bvd.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fbarcirc {

/// Node index inside a Netlist; 0 is always ground ("0").
using NodeId = int;
inline constexpr NodeId kGround = 0;

/// Periodic elastance modulation 1/C(t) = (1/c)(1 + depth cos(2 pi f_mod t + phase)).
struct ModulationSpec {
    double depth = 0.0;
    double f_mod = 0.0;
    double phase = 0.0;

    void validate() const;
};

struct Resistor {
    double ohms;
};
struct Inductor {
    double henry;
};
struct Capacitor {
    double farad;
};
/// Series R-L-C whose capacitor elastance may be modulated.
struct ModulatedRlc {
    MotionalBranch branch;
    std::optional<ModulationSpec> modulation;
};
/// Port from node_a to ground with reference impedance z0.
struct Port {
    int index;
    double z0;
};

using ElementValue = std::variant<Resistor, Inductor, Capacitor, ModulatedRlc, Port>;

struct Element {
    std::string name;
    NodeId node_a = kGround;
    NodeId node_b = kGround;
    ElementValue value;
};

class Netlist {
public:
    Netlist();

    /// Returns the id of `name`, creating the node if needed.
    NodeId node(std::string_view name);
    std::optional<NodeId> find_node(std::string_view name) const;
    const std::string& node_name(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    /// Number of nodes including ground.
    std::size_t node_count() const { return nodes_.size(); }

    void add_resistor(std::string name, NodeId a, NodeId b, double ohms);
    void add_inductor(std::string name, NodeId a, NodeId b, double henry);
    void add_capacitor(std::string name, NodeId a, NodeId b, double farad);
    void add_modulated_rlc(std::string name, NodeId a, NodeId b, const MotionalBranch& branch,
                           std::optional<ModulationSpec> modulation);
    void add_port(int index, NodeId node, double z0);

    const std::vector<Element>& elements() const { return elements_; }

    /// Port elements ordered by port index.
    std::vector<const Element*> ports() const;
    std::size_t port_count() const;
    std::size_t modulated_branch_count() const;

    /// Shared modulation frequency of all modulated branches, if any carry a
    /// modulation spec.
    std::optional<double> modulation_frequency() const;
    /// True when at least one branch has a non-zero modulation depth.
    bool is_modulated() const;

    /// Throws InvalidArgument on bad element values, duplicate or
    /// non-contiguous port indices and mixed modulation frequencies;
    /// SingularStructure when a node has no path to ground.
    void validate() const;

private:
    void check_node(NodeId id) const;

    std::vector<std::string> nodes_;
    std::vector<Element> elements_;
};

/// Writes the line-oriented text format:
///   R name a b value | L ... | C ... | X name a b r l c [depth f_mod phase] | P index node z0
void write_netlist(std::ostream& out, const Netlist& net);
std::string netlist_to_string(const Netlist& net);
/// Parses the text format; `*` starts a comment line. Throws ParseError.
Netlist read_netlist(std::istream& in);
Netlist netlist_from_string(std::string_view text);

/// Replica whose every reactance is unchanged at frequencies multiplied by
/// `factor` (L and C divided by factor, f_mod multiplied).
Netlist scale_frequency(const Netlist& net, double factor);

/// Fourier coefficients Gamma_n, n in [-order, order], of the branch
/// elastance; element n + order holds Gamma_n.
std::vector<Complex> elastance_fourier(const MotionalBranch& branch, const ModulationSpec& mod, int order);

enum class Topology { SingleEnded, Differential };
enum class PhaseSequence { Forward, Reverse };
/// Where each resonator's plate capacitance sits: from the port node to
/// ground, or across the motional branch to the common node.
enum class PlatePlacement { PortToGround, AcrossBranch };

struct CirculatorDesign {
    Topology topology = Topology::Differential;
    ResonatorSpecs resonator;
    double depth = 0.0;
    double f_mod = 23.2e6;
    double z0 = 50.0;
    PhaseSequence phase_sequence = PhaseSequence::Forward;
    PlatePlacement plate = PlatePlacement::PortToGround;

    void validate() const;
};

/// Three resonators in wye: port k+1 -> common node "x", phase s k 2pi/3.
Netlist build_single_ended(const CirculatorDesign& design);
/// Two wyes on the same port nodes with common nodes "xa"/"xb"; chip B runs
/// in anti-phase with chip A.
Netlist build_differential(const CirculatorDesign& design);
Netlist build_circulator(const CirculatorDesign& design);

/// Modulation phase of resonator `k` (0, 1, 2) on chip `chip` (0, 1).
double modulation_phase(PhaseSequence seq, int k, int chip);

}  // namespace fbarcirc
