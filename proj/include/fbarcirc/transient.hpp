#pragma once

#include "fbarcirc/htm.hpp"
#include "fbarcirc/netlist.hpp"

#include <array>
#include <atomic>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fbarcirc {

/// Cooperative cancellation flag, polled by long simulations every 10^4
/// steps.
class CancellationToken {
public:
    void cancel() noexcept { flag_.store(true, std::memory_order_relaxed); }
    bool cancelled() const noexcept { return flag_.load(std::memory_order_relaxed); }

private:
    std::atomic<bool> flag_{false};
};

/// Sinusoidal incident wave a cos(2 pi f t) applied at one port; the port
/// source EMF is 2 a sqrt(z0).
struct Tone {
    int port = 1;
    double f = 0.0;
    double amplitude = 1.0;
};

struct TransientResult {
    double dt = 0.0;
    double duration = 0.0;
    Tone tone;
    std::vector<std::string> node_names;         // non-ground nodes, id - 1
    std::vector<std::vector<double>> voltages;   // [node id - 1][sample]

    std::size_t sample_count() const { return voltages.empty() ? 0 : voltages.front().size(); }
    double time(std::size_t i) const { return static_cast<double>(i) * dt; }
    std::span<const double> node(NodeId id) const { return voltages.at(static_cast<std::size_t>(id - 1)); }
};

/// Fixed-step trapezoidal integration from a zero state. The modulated
/// branch integrates dq/dt = i with capacitor voltage q Gamma(t).
/// Throws StepTooLarge when dt > 1/(50 f), Diverged when any node voltage
/// exceeds 10^6 times the source EMF, Cancelled when `cancel` fires.
TransientResult simulate(const Netlist& net, const Tone& tone, double duration, double dt,
                         const CancellationToken* cancel = nullptr);

struct PhasorSet {
    std::vector<std::pair<int, Complex>> entries;  // (n, phasor at f + n f_mod)
    double residual = 0.0;                         // rms misfit / rms signal

    Complex at(int n) const;
};

/// Least-squares fit of samples v(t_i) to sum_n Re(P_n exp(j 2 pi (f + n f_mod) t)).
/// Throws IllConditionedBasis when two basis frequencies (or one and DC)
/// are closer than 1 / window length.
PhasorSet fit_phasors(std::span<const double> t, std::span<const double> v, double f, double f_mod, int order);

/// fit_phasors over the last 25 % of a node's samples.
PhasorSet extract_phasors(const TransientResult& res, NodeId node, double f, double f_mod, int order);

struct CrossValidationOptions {
    double points_per_cycle = 400.0;
    /// Ring-up allowance in units of Q / (pi f_s) of the slowest branch.
    double ring_up_time_constants = 12.0;
    int modulation_periods = 20;
    bool keep_waveform = false;
    const CancellationToken* cancel = nullptr;
};

struct CrossValidation {
    std::array<Complex, 3> htm{};        // S^(n), n = -1, 0, 1
    std::array<Complex, 3> transient{};
    std::array<double, 3> error{};
    double max_error = 0.0;
    double duration = 0.0;
    double dt = 0.0;
    std::optional<TransientResult> waveform;  // when keep_waveform is set
};

/// Runs both engines on `net` and compares S^(n)_{q p} for n in {-1, 0, 1}.
/// Errors are relative to |S^(n)|, or to |S^(0)| when S^(n) is below
/// 1e-6 of it (unmodulated sidebands).
CrossValidation cross_validate(const Netlist& net, const HarmonicBasis& basis, double f, int q, int p,
                               const CrossValidationOptions& options = {});

/// One port: plate capacitor and one modulated branch from port node to ground.
Netlist oracle_single_branch(const ResonatorSpecs& specs, double depth, double f_mod, double z0);
/// Two resonators from ports 1 and 2 to a common node, phases 0 and 2pi/3.
Netlist oracle_toy_wye(const ResonatorSpecs& specs, double depth, double f_mod, double z0);

/// `t_s,<node>...` rows, every `stride`-th sample.
void write_waveform_csv(std::ostream& out, const TransientResult& res, std::size_t stride = 1);

}  // namespace fbarcirc
