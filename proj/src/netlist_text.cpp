#include "fbarcirc/errors.hpp"
#include "fbarcirc/netlist.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace fbarcirc {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

}  // namespace

void write_netlist(std::ostream& out, const Netlist& net) {
    out << "* fbarcirc netlist\n";
    for (const auto& e : net.elements()) {
        const auto& a = net.node_name(e.node_a);
        const auto& b = net.node_name(e.node_b);
        std::visit(overloaded{
                       [&](const Resistor& r) { out << "R " << e.name << ' ' << a << ' ' << b << ' ' << num(r.ohms) << '\n'; },
                       [&](const Inductor& l) { out << "L " << e.name << ' ' << a << ' ' << b << ' ' << num(l.henry) << '\n'; },
                       [&](const Capacitor& c) { out << "C " << e.name << ' ' << a << ' ' << b << ' ' << num(c.farad) << '\n'; },
                       [&](const ModulatedRlc& m) {
                           out << "X " << e.name << ' ' << a << ' ' << b << ' ' << num(m.branch.r_m) << ' '
                               << num(m.branch.l_m) << ' ' << num(m.branch.c_m);
                           if (m.modulation) {
                               out << ' ' << num(m.modulation->depth) << ' ' << num(m.modulation->f_mod) << ' '
                                   << num(m.modulation->phase);
                           }
                           out << '\n';
                       },
                       [&](const Port& p) { out << "P " << p.index << ' ' << a << ' ' << num(p.z0) << '\n'; },
                   },
                   e.value);
    }
}

std::string netlist_to_string(const Netlist& net) {
    std::ostringstream os;
    write_netlist(os, net);
    return os.str();
}

Netlist read_netlist(std::istream& in) {
    Netlist net;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fail = [&](const std::string& msg) -> ParseError {
            return ParseError("netlist line " + std::to_string(lineno) + ": " + msg);
        };
        auto number = [&](const std::string& tok) {
            double v = 0.0;
            const char* first = tok.data();
            if (!tok.empty() && tok.front() == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size()) throw fail("bad number '" + tok + "'");
            return v;
        };
        const auto toks = split_ws(line);
        if (toks.empty() || toks.front().front() == '*') continue;
        const std::string& kind = toks.front();
        try {
            if (kind == "R" || kind == "L" || kind == "C") {
                if (toks.size() != 5) throw fail("expected '" + kind + " name nodeA nodeB value'");
                const NodeId a = net.node(toks[2]);
                const NodeId b = net.node(toks[3]);
                const double v = number(toks[4]);
                if (kind == "R") net.add_resistor(toks[1], a, b, v);
                if (kind == "L") net.add_inductor(toks[1], a, b, v);
                if (kind == "C") net.add_capacitor(toks[1], a, b, v);
            } else if (kind == "X") {
                if (toks.size() != 7 && toks.size() != 10) {
                    throw fail("expected 'X name nodeA nodeB r l c [depth f_mod phase]'");
                }
                const NodeId a = net.node(toks[2]);
                const NodeId b = net.node(toks[3]);
                MotionalBranch br{number(toks[4]), number(toks[5]), number(toks[6]), ModeLabel::FbarMode};
                std::optional<ModulationSpec> mod;
                if (toks.size() == 10) mod = ModulationSpec{number(toks[7]), number(toks[8]), number(toks[9])};
                net.add_modulated_rlc(toks[1], a, b, br, mod);
            } else if (kind == "P") {
                if (toks.size() != 4) throw fail("expected 'P index node z0'");
                int index = 0;
                const auto& t = toks[1];
                const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), index);
                if (ec != std::errc() || ptr != t.data() + t.size()) throw fail("bad port index '" + t + "'");
                net.add_port(index, net.node(toks[2]), number(toks[3]));
            } else {
                throw fail("unknown element kind '" + kind + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw fail(e.what());
        }
    }
    return net;
}

Netlist netlist_from_string(std::string_view text) {
    std::istringstream is{std::string(text)};
    return read_netlist(is);
}

}  // namespace fbarcirc
