#pragma once

#include "fbarcirc/htm.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fbarcirc {

/// Which ports play the input, through and isolated roles. The default
/// is the 1 -> 2 circulation sense with port 3 isolated.
struct Direction {
    int in = 1;
    int through = 2;
    int isolated = 3;
};

/// Losses are positive dB magnitudes; |S| = 0 is capped at 200 dB.
inline constexpr double kLossCapDb = 200.0;
/// Sideband levels never report below this floor.
inline constexpr double kSidebandFloorDbc = -240.0;

double loss_db(Complex s);

struct PortMetrics {
    double ix_db = 0.0;
    double il_db = 0.0;
    double rl_db = 0.0;
};

struct SidebandEntry {
    int n = 0;
    int q = 0;
    double dbc = kSidebandFloorDbc;
};

struct SidebandScan {
    double worst_dbc = kSidebandFloorDbc;
    std::vector<SidebandEntry> table;  // worst level per (n, q) over the grid
};

struct CirculatorMetrics {
    double f_op = 0.0;
    double ix_db = 0.0;
    double il_db = 0.0;
    double rl_db = 0.0;
    std::optional<double> bw_hz;
    double sideband_worst_db = kSidebandFloorDbc;
};

/// Nearest grid point within half a grid step of `f`; throws FrequencyOffGrid.
std::size_t grid_index(const SParamGrid& grid, double f);

PortMetrics metrics_at(const SParamGrid& grid, double f, const Direction& dir);
PortMetrics metrics_at_index(const SParamGrid& grid, std::size_t fi, const Direction& dir);

/// Grid index of maximum isolation; ties go to the lowest frequency.
std::size_t best_isolation_index(const SParamGrid& grid, const Direction& dir);

/// Width of the interval around the best-isolation point where isolation
/// stays at or above `threshold_db`, with band edges interpolated linearly
/// in (dB, Hz). Empty when the threshold is never reached.
std::optional<double> bandwidth_at(const SParamGrid& grid, double threshold_db, const Direction& dir);

/// Conversion products S^(n)_{q,in}, n != 0, in dB relative to the
/// transmitted S^(0)_{through,in} at the same stimulus frequency.
SidebandScan sideband_scan(const SParamGrid& grid, const Direction& dir);

CirculatorMetrics compute_metrics(const SParamGrid& grid, const Direction& dir, double bw_threshold_db = 25.0);

/// Single-line record with keys f_op_hz, ix_db, il_db, rl_db, bw_hz,
/// sideband_dbc (bw_hz is null when the threshold is never met).
std::string metrics_json(const CirculatorMetrics& m);
CirculatorMetrics metrics_from_json(const std::string& line);
std::string metrics_table(const CirculatorMetrics& m);

}  // namespace fbarcirc
