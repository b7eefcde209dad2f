#include "fbarcirc/errors.hpp"
#include "fbarcirc/htm.hpp"

#include <cmath>
#include <string>

namespace fbarcirc {

void HarmonicBasis::validate() const {
    if (!(std::isfinite(f_mod) && f_mod > 0.0)) throw InvalidArgument("basis f_mod must be > 0");
    if (n_harm < 1) throw InvalidArgument("harmonic truncation order must be >= 1");
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

HarmonicSystem assemble(const Netlist& net, const HarmonicBasis& basis, double f, int excited_port,
                        int excitation_harmonic) {
    basis.validate();
    net.validate();
    if (!std::isfinite(f) || f == 0.0) throw InvalidArgument("stimulus frequency must be finite and non-zero");
    if (std::abs(excitation_harmonic) > basis.n_harm) throw InvalidArgument("excitation harmonic outside the basis");
    if (excited_port < 1 || static_cast<std::size_t>(excited_port) > net.port_count()) {
        throw InvalidArgument("excited port " + std::to_string(excited_port) + " does not exist");
    }
    if (net.is_modulated()) {
        const double fm = *net.modulation_frequency();
        if (std::abs(fm - basis.f_mod) > 1e-12 * fm) {
            throw InvalidArgument("harmonic basis f_mod differs from the netlist modulation frequency");
        }
    }
    for (int n = -basis.n_harm; n <= basis.n_harm; ++n) {
        if (std::abs(basis.mixing_frequency(f, n)) < 1e-6 * std::abs(f)) {
            throw InvalidArgument("stimulus " + std::to_string(f) + " Hz mixes down to DC at harmonic " +
                                  std::to_string(n));
        }
    }

    HarmonicSystem sys;
    sys.basis = basis;
    sys.f = f;
    sys.excited_port = excited_port;
    sys.excitation_harmonic = excitation_harmonic;

    for (std::size_t i = 1; i < net.node_count(); ++i) {
        sys.unknowns.push_back({UnknownKind::NodeVoltage, static_cast<int>(i)});
    }
    std::vector<std::size_t> current_var(net.elements().size(), 0);
    for (std::size_t e = 0; e < net.elements().size(); ++e) {
        if (std::holds_alternative<ModulatedRlc>(net.elements()[e].value)) {
            current_var[e] = sys.unknowns.size();
            sys.unknowns.push_back({UnknownKind::BranchCurrent, static_cast<int>(e)});
            sys.unknowns.push_back({UnknownKind::BranchCharge, static_cast<int>(e)});
        }
    }
    sys.block = sys.unknowns.size();
    const std::size_t dim = sys.block * static_cast<std::size_t>(basis.size());
    sys.matrix = ComplexMatrix(dim);
    sys.rhs.assign(dim, Complex{});
    auto& A = sys.matrix;

    for (int m = -basis.n_harm; m <= basis.n_harm; ++m) {
        const double w = kTwoPi * basis.mixing_frequency(f, m);
        auto vrow = [&](NodeId node) { return sys.row(static_cast<std::size_t>(node - 1), m); };
        auto stamp = [&](NodeId a, NodeId b, Complex y) {
            if (a != kGround) A(vrow(a), vrow(a)) += y;
            if (b != kGround) A(vrow(b), vrow(b)) += y;
            if (a != kGround && b != kGround) {
                A(vrow(a), vrow(b)) -= y;
                A(vrow(b), vrow(a)) -= y;
            }
        };
        for (std::size_t e = 0; e < net.elements().size(); ++e) {
            const Element& el = net.elements()[e];
            std::visit(overloaded{
                           [&](const Resistor& r) { stamp(el.node_a, el.node_b, 1.0 / r.ohms); },
                           [&](const Capacitor& c) { stamp(el.node_a, el.node_b, Complex(0.0, w * c.farad)); },
                           [&](const Inductor& l) { stamp(el.node_a, el.node_b, 1.0 / Complex(0.0, w * l.henry)); },
                           [&](const Port& p) {
                               stamp(el.node_a, kGround, 1.0 / p.z0);
                               if (p.index == excited_port && m == excitation_harmonic) {
                                   // Norton equivalent of a unit incident wave: E = 2 sqrt(z0).
                                   sys.rhs[vrow(el.node_a)] += 2.0 / std::sqrt(p.z0);
                               }
                           },
                           [&](const ModulatedRlc& mr) {
                               const auto& br = mr.branch;
                               const std::size_t ci = sys.row(current_var[e], m);
                               const std::size_t qi = sys.row(current_var[e] + 1, m);
                               if (el.node_a != kGround) {
                                   A(vrow(el.node_a), ci) += 1.0;
                                   A(ci, vrow(el.node_a)) += 1.0;
                               }
                               if (el.node_b != kGround) {
                                   A(vrow(el.node_b), ci) -= 1.0;
                                   A(ci, vrow(el.node_b)) -= 1.0;
                               }
                               // v_a - v_b - (r + j w l) i - sum_n (Gamma_{m-n} / Gamma_0) u_n = 0
                               A(ci, ci) -= Complex(br.r_m, w * br.l_m);
                               A(ci, qi) -= 1.0;
                               if (mr.modulation && mr.modulation->depth > 0.0) {
                                   const Complex side =
                                       0.5 * mr.modulation->depth * std::polar(1.0, mr.modulation->phase);
                                   if (m - 1 >= -basis.n_harm) A(ci, sys.row(current_var[e] + 1, m - 1)) -= side;
                                   if (m + 1 <= basis.n_harm) A(ci, sys.row(current_var[e] + 1, m + 1)) -= std::conj(side);
                               }
                               // j w c u - i = 0
                               A(qi, qi) += Complex(0.0, w * br.c_m);
                               A(qi, ci) -= 1.0;
                           },
                       },
                       el.value);
        }
    }
    return sys;
}

HarmonicSolution solve(const HarmonicSystem& sys) {
    const DenseLu lu(sys.matrix);
    HarmonicSolution sol;
    sol.block = sys.block;
    sol.n_harm = sys.basis.n_harm;
    sol.unknowns = sys.unknowns;
    auto refined = solve_refined(sys.matrix, lu, sys.rhs);
    sol.x = std::move(refined.x);
    sol.residual = refined.residual;
    return sol;
}

Complex HarmonicSolution::value(UnknownKind kind, int ref, int n) const {
    if (n < -n_harm || n > n_harm) throw InvalidArgument("harmonic index outside the basis");
    for (std::size_t v = 0; v < unknowns.size(); ++v) {
        if (unknowns[v].kind == kind && unknowns[v].ref == ref) {
            return x[static_cast<std::size_t>(n + n_harm) * block + v];
        }
    }
    throw InvalidArgument("no such unknown in the solution");
}

Complex HarmonicSolution::node_voltage(NodeId node, int n) const {
    if (node == kGround) return {};
    return value(UnknownKind::NodeVoltage, node, n);
}

Complex HarmonicSolution::branch_current(int element, int n) const {
    return value(UnknownKind::BranchCurrent, element, n);
}

Complex HarmonicSolution::branch_charge(const Netlist& net, int element, int n) const {
    const auto& mr = std::get<ModulatedRlc>(net.elements().at(static_cast<std::size_t>(element)).value);
    return mr.branch.c_m * value(UnknownKind::BranchCharge, element, n);
}

}  // namespace fbarcirc
