#pragma once

#include "fbarcirc/dense_lu.hpp"
#include "fbarcirc/netlist.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace fbarcirc {

/// Mixing frequencies f + n f_mod for n in [-n_harm, n_harm].
struct HarmonicBasis {
    double f_mod = 23.2e6;
    int n_harm = 5;

    int size() const { return 2 * n_harm + 1; }
    double mixing_frequency(double f, int n) const { return f + n * f_mod; }
    void validate() const;
};

enum class UnknownKind { NodeVoltage, BranchCurrent, BranchCharge };

/// One unknown of a harmonic block. `ref` is the node id for voltages and
/// the element index for branch variables.
struct Unknown {
    UnknownKind kind;
    int ref;
};

/// Harmonic-domain MNA system. Rows are harmonic-major: unknown `v` of
/// harmonic `n` lives at (n + n_harm) * block + v. Branch charges are
/// carried as capacitor voltages q / c_m so that every column has
/// admittance-like magnitude.
struct HarmonicSystem {
    HarmonicBasis basis;
    double f = 0.0;
    int excited_port = 0;
    int excitation_harmonic = 0;
    std::size_t block = 0;
    std::vector<Unknown> unknowns;
    ComplexMatrix matrix;
    std::vector<Complex> rhs;

    std::size_t dimension() const { return matrix.size(); }
    std::size_t row(std::size_t var, int n) const {
        return static_cast<std::size_t>(n + basis.n_harm) * block + var;
    }
};

/// Stamps the netlist for stimulus frequency `f`. The excited port carries
/// a unit incident wave at `excitation_harmonic`; every port is terminated
/// in its z0. A negative `f` assembles the mirrored (conjugate) problem.
/// Throws SingularStructure for floating nodes and InvalidArgument when a
/// mixing frequency is within 1e-6 of DC relative to |f|.
HarmonicSystem assemble(const Netlist& net, const HarmonicBasis& basis, double f, int excited_port,
                        int excitation_harmonic = 0);

struct HarmonicSolution {
    std::size_t block = 0;
    int n_harm = 0;
    std::vector<Unknown> unknowns;
    std::vector<Complex> x;
    double residual = 0.0;

    Complex node_voltage(NodeId node, int n) const;
    Complex branch_current(int element, int n) const;
    /// Charge in coulomb (rescaled from the stored capacitor voltage).
    Complex branch_charge(const Netlist& net, int element, int n) const;

private:
    Complex value(UnknownKind kind, int ref, int n) const;
};

/// Dense LU solve with one step of iterative refinement. Throws
/// NumericallySingular on a tiny pivot or when the relative residual stays
/// above 1e-9.
HarmonicSolution solve(const HarmonicSystem& sys);

/// S^(n)_{qp} over a frequency list; ports are 1-based in the accessors.
struct SParamGrid {
    std::vector<double> frequencies;
    int ports = 0;
    int n_harm = 0;
    double f_mod = 0.0;
    std::vector<double> z0;  // per port
    std::vector<Complex> data;

    SParamGrid() = default;
    SParamGrid(std::vector<double> freqs, int port_count, int harmonics, double modulation_frequency,
               std::vector<double> reference_impedances);

    std::size_t index(std::size_t fi, int n, int q, int p) const {
        const auto P = static_cast<std::size_t>(ports);
        return ((fi * static_cast<std::size_t>(2 * n_harm + 1) + static_cast<std::size_t>(n + n_harm)) * P +
                static_cast<std::size_t>(q - 1)) * P + static_cast<std::size_t>(p - 1);
    }
    Complex& s(std::size_t fi, int n, int q, int p) { return data[index(fi, n, q, p)]; }
    const Complex& s(std::size_t fi, int n, int q, int p) const { return data[index(fi, n, q, p)]; }
};

/// All S^(n)_{qp} at one stimulus frequency, written into `grid` at `fi`.
/// One factorization is shared by every excited port.
void sparams_point(const Netlist& net, const HarmonicBasis& basis, double f, SParamGrid& grid, std::size_t fi);

/// Serial reference sweep.
SParamGrid sparams_serial(const Netlist& net, const HarmonicBasis& basis, std::span<const double> freqs);
/// OpenMP sweep over frequency points; results are identical to the serial
/// sweep bit for bit. Solver errors are rethrown for the lowest failing
/// frequency index, tagged with (f, port).
SParamGrid sparams(const Netlist& net, const HarmonicBasis& basis, std::span<const double> freqs);

/// max over (q, p) of |S^(0)_qp(N) - S^(0)_qp(N + 2)| at stimulus f.
double convergence_check(const Netlist& net, double f, double f_mod, int n_small);

/// Evenly spaced frequencies including both ends.
std::vector<double> linspace(double start, double stop, std::size_t points);
/// Same spacing as linspace, shifted so that one point equals `anchor` exactly.
std::vector<double> anchored_linspace(double start, double stop, std::size_t points, double anchor);

}  // namespace fbarcirc
