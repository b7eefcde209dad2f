#include "fbarcirc/sparam_io.hpp"

#include "fbarcirc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace fbarcirc {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

void write_touchstone(std::ostream& out, const SParamGrid& grid, const std::vector<std::string>& comments) {
    if (grid.z0.empty()) throw InvalidArgument("grid has no ports");
    for (double z : grid.z0) {
        if (z != grid.z0.front()) throw InvalidArgument("Touchstone v1 needs one reference impedance for all ports");
    }
    for (const auto& c : comments) out << "! " << c << '\n';
    out << "# Hz S RI R " << fmt("%.9g", grid.z0.front()) << '\n';
    for (std::size_t fi = 0; fi < grid.frequencies.size(); ++fi) {
        out << fmt("%.12g", grid.frequencies[fi]);
        for (int q = 1; q <= grid.ports; ++q) {
            for (int p = 1; p <= grid.ports; ++p) {
                const Complex s = grid.s(fi, 0, q, p);
                out << ' ' << fmt("%.9g", s.real()) << ' ' << fmt("%.9g", s.imag());
            }
        }
        out << '\n';
    }
}

SParamGrid read_touchstone(std::istream& in, int ports) {
    if (ports < 1) throw InvalidArgument("port count must be >= 1");
    std::string line;
    int lineno = 0;
    double z0 = 0.0;
    bool have_header = false;
    std::vector<double> freqs;
    std::vector<Complex> values;
    const std::size_t per_line = static_cast<std::size_t>(ports * ports);
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto bang = line.find('!'); bang != std::string::npos) line.resize(bang);
        std::istringstream is(line);
        std::string first;
        if (!(is >> first)) continue;
        if (first == "#") {
            std::string unit, kind, format, r;
            if (!(is >> unit >> kind >> format >> r >> z0) || unit != "Hz" || kind != "S" || format != "RI" ||
                r != "R") {
                throw ParseError("touchstone line " + std::to_string(lineno) + ": expected '# Hz S RI R <z0>'");
            }
            have_header = true;
            continue;
        }
        if (!have_header) throw ParseError("touchstone line " + std::to_string(lineno) + ": data before option line");
        std::istringstream row(line);
        double f = 0.0;
        if (!(row >> f)) throw ParseError("touchstone line " + std::to_string(lineno) + ": bad frequency");
        std::vector<double> nums;
        for (double v; row >> v;) nums.push_back(v);
        if (!row.eof() || nums.size() != 2 * per_line) {
            throw ParseError("touchstone line " + std::to_string(lineno) + ": expected " +
                             std::to_string(2 * per_line) + " values");
        }
        freqs.push_back(f);
        for (std::size_t k = 0; k < per_line; ++k) values.emplace_back(nums[2 * k], nums[2 * k + 1]);
    }
    if (!have_header) throw ParseError("touchstone: missing option line");
    SParamGrid grid(freqs, ports, 0, 0.0, std::vector<double>(static_cast<std::size_t>(ports), z0));
    for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
        for (int q = 1; q <= ports; ++q) {
            for (int p = 1; p <= ports; ++p) {
                grid.s(fi, 0, q, p) = values[fi * per_line + static_cast<std::size_t>((q - 1) * ports + (p - 1))];
            }
        }
    }
    return grid;
}

void write_harmonic_csv(std::ostream& out, const SParamGrid& grid, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "f_Hz,n,q,p,ReS,ImS\n";
    for (std::size_t fi = 0; fi < grid.frequencies.size(); ++fi) {
        for (int n = -grid.n_harm; n <= grid.n_harm; ++n) {
            for (int q = 1; q <= grid.ports; ++q) {
                for (int p = 1; p <= grid.ports; ++p) {
                    const Complex s = grid.s(fi, n, q, p);
                    out << fmt("%.17g", grid.frequencies[fi]) << ',' << n << ',' << q << ',' << p << ','
                        << fmt("%.17g", s.real()) << ',' << fmt("%.17g", s.imag()) << '\n';
                }
            }
        }
    }
}

}  // namespace fbarcirc
