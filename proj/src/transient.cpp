#include "fbarcirc/transient.hpp"

#include "fbarcirc/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace fbarcirc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Modulated {
    Eigen::Index current_row;
    Eigen::Index voltage_col;
    double depth;
    double w_mod;
    double phase;
};

// Linear time-varying descriptor system E x' = A(t) x + b(t), where A(t)
// is A0 plus the elastance ripple of each modulated branch.
struct Descriptor {
    Eigen::MatrixXd e;
    Eigen::MatrixXd a0;
    std::vector<Modulated> ripple;
    std::vector<bool> algebraic;
    Eigen::Index source_row = -1;
    double source_gain = 0.0;  // EMF / z0 per unit cos

    void a_times(double t, const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
        out.noalias() = a0 * x;
        for (const auto& m : ripple) {
            out[m.current_row] -= m.depth * std::cos(m.w_mod * t + m.phase) * x[m.voltage_col];
        }
    }
};

}  // namespace

TransientResult simulate(const Netlist& net, const Tone& tone, double duration, double dt,
                         const CancellationToken* cancel) {
    net.validate();
    if (!(tone.f > 0.0) || !std::isfinite(tone.f)) throw InvalidArgument("tone frequency must be > 0");
    if (!(dt > 0.0) || !(duration > 0.0)) throw InvalidArgument("dt and duration must be > 0");
    if (dt > 1.0 / (50.0 * tone.f)) throw StepTooLarge("dt exceeds 1/(50 f): fewer than 50 points per carrier cycle");

    const auto ports = net.ports();
    const Element* source = nullptr;
    for (const Element* p : ports) {
        if (std::get<Port>(p->value).index == tone.port) source = p;
    }
    if (!source) throw InvalidArgument("tone port " + std::to_string(tone.port) + " does not exist");

    const auto n_nodes = static_cast<Eigen::Index>(net.node_count() - 1);
    Eigen::Index n = n_nodes;
    std::vector<Eigen::Index> var(net.elements().size(), -1);
    for (std::size_t i = 0; i < net.elements().size(); ++i) {
        const auto& v = net.elements()[i].value;
        if (std::holds_alternative<Inductor>(v)) {
            var[i] = n;
            n += 1;
        } else if (std::holds_alternative<ModulatedRlc>(v)) {
            var[i] = n;
            n += 2;
        }
    }

    Descriptor sys;
    sys.e = Eigen::MatrixXd::Zero(n, n);
    sys.a0 = Eigen::MatrixXd::Zero(n, n);
    auto vi = [](NodeId id) { return static_cast<Eigen::Index>(id - 1); };

    for (std::size_t i = 0; i < net.elements().size(); ++i) {
        const Element& el = net.elements()[i];
        const NodeId a = el.node_a, b = el.node_b;
        auto stamp = [&](Eigen::MatrixXd& m, double y) {
            if (a != kGround) m(vi(a), vi(a)) += y;
            if (b != kGround) m(vi(b), vi(b)) += y;
            if (a != kGround && b != kGround) {
                m(vi(a), vi(b)) -= y;
                m(vi(b), vi(a)) -= y;
            }
        };
        // Branch current variable k flows from a to b.
        auto couple_current = [&](Eigen::Index k) {
            if (a != kGround) {
                sys.a0(vi(a), k) -= 1.0;
                sys.a0(k, vi(a)) += 1.0;
            }
            if (b != kGround) {
                sys.a0(vi(b), k) += 1.0;
                sys.a0(k, vi(b)) -= 1.0;
            }
        };
        std::visit(overloaded{
                       [&](const Resistor& r) { stamp(sys.a0, -1.0 / r.ohms); },
                       [&](const Capacitor& c) { stamp(sys.e, c.farad); },
                       [&](const Port& p) {
                           stamp(sys.a0, -1.0 / p.z0);
                           if (&el == source) {
                               sys.source_row = vi(a);
                               sys.source_gain = 2.0 * tone.amplitude * std::sqrt(p.z0) / p.z0;
                           }
                       },
                       [&](const Inductor& l) {
                           const Eigen::Index k = var[i];
                           sys.e(k, k) = l.henry;
                           couple_current(k);
                       },
                       [&](const ModulatedRlc& m) {
                           const Eigen::Index k = var[i];
                           const Eigen::Index u = k + 1;
                           couple_current(k);
                           sys.e(k, k) = m.branch.l_m;
                           sys.a0(k, k) -= m.branch.r_m;
                           sys.a0(k, u) -= 1.0;
                           // c du/dt = i, u = q / c
                           sys.e(u, u) = m.branch.c_m;
                           sys.a0(u, k) += 1.0;
                           if (m.modulation && m.modulation->depth > 0.0) {
                               sys.ripple.push_back({k, u, m.modulation->depth, kTwoPi * m.modulation->f_mod,
                                                     m.modulation->phase});
                           }
                       },
                   },
                   el.value);
    }
    sys.algebraic.resize(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) sys.algebraic[static_cast<std::size_t>(r)] = sys.e.row(r).isZero(0.0);

    const double emf = 2.0 * tone.amplitude * std::sqrt(std::get<Port>(source->value).z0);
    const double w = kTwoPi * tone.f;
    auto source_at = [&](double t) { return sys.source_gain * std::cos(w * t); };

    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
    TransientResult res;
    res.dt = dt;
    res.duration = duration;
    res.tone = tone;
    for (Eigen::Index k = 0; k < n_nodes; ++k) res.node_names.push_back(net.node_name(static_cast<NodeId>(k + 1)));
    res.voltages.assign(static_cast<std::size_t>(n_nodes), std::vector<double>(steps + 1, 0.0));

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd ax(n), rhs(n);
    Eigen::MatrixXd lhs(n, n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(n);
    const double h2 = 0.5 * dt;
    const double limit = 1e6 * emf;

    for (std::size_t s = 1; s <= steps; ++s) {
        if (cancel && s % 10000 == 0 && cancel->cancelled()) throw Cancelled("transient simulation cancelled");
        const double t0 = static_cast<double>(s - 1) * dt;
        const double t1 = static_cast<double>(s) * dt;

        // Left side: E - h/2 A(t1) on differential rows, -A(t1) on algebraic rows.
        lhs = sys.e - h2 * sys.a0;
        for (const auto& m : sys.ripple) {
            lhs(m.current_row, m.voltage_col) += h2 * m.depth * std::cos(m.w_mod * t1 + m.phase);
        }
        sys.a_times(t0, x, ax);
        rhs.noalias() = sys.e * x + h2 * ax;
        if (sys.source_row >= 0) rhs[sys.source_row] += h2 * (source_at(t0) + source_at(t1));
        for (Eigen::Index r = 0; r < n; ++r) {
            if (!sys.algebraic[static_cast<std::size_t>(r)]) continue;
            lhs.row(r) = -sys.a0.row(r);
            rhs[r] = 0.0;
            for (const auto& m : sys.ripple) {
                if (m.current_row == r) lhs(r, m.voltage_col) += m.depth * std::cos(m.w_mod * t1 + m.phase);
            }
            if (r == sys.source_row) rhs[r] = source_at(t1);
        }
        lu.compute(lhs);
        x = lu.solve(rhs);

        for (Eigen::Index k = 0; k < n_nodes; ++k) {
            const double v = x[k];
            if (!(std::abs(v) <= limit)) {
                throw Diverged("node '" + res.node_names[static_cast<std::size_t>(k)] + "' exceeded 1e6 x source EMF at t=" +
                               std::to_string(t1));
            }
            res.voltages[static_cast<std::size_t>(k)][s] = v;
        }
    }
    return res;
}

void write_waveform_csv(std::ostream& out, const TransientResult& res, std::size_t stride) {
    if (stride == 0) throw InvalidArgument("waveform stride must be >= 1");
    out << "t_s";
    for (const auto& name : res.node_names) out << ',' << name;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < res.sample_count(); i += stride) {
        std::snprintf(buf, sizeof buf, "%.12g", res.time(i));
        out << buf;
        for (const auto& v : res.voltages) {
            std::snprintf(buf, sizeof buf, "%.12g", v[i]);
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace fbarcirc
