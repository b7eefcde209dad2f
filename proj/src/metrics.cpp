#include "fbarcirc/metrics.hpp"

#include "fbarcirc/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fbarcirc {

double loss_db(Complex s) {
    const double m = std::abs(s);
    if (m == 0.0) return kLossCapDb;
    return std::min(kLossCapDb, -20.0 * std::log10(m));
}

std::size_t grid_index(const SParamGrid& grid, double f) {
    const auto& fs = grid.frequencies;
    if (fs.empty()) throw FrequencyOffGrid("empty grid");
    std::size_t best = 0;
    for (std::size_t i = 1; i < fs.size(); ++i) {
        if (std::abs(fs[i] - f) < std::abs(fs[best] - f)) best = i;
    }
    double step = 0.0;
    if (best > 0) step = std::max(step, fs[best] - fs[best - 1]);
    if (best + 1 < fs.size()) step = std::max(step, fs[best + 1] - fs[best]);
    const double tol = fs.size() == 1 ? 1e-9 * std::abs(fs[0]) : 0.5 * std::abs(step);
    if (std::abs(fs[best] - f) > tol) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.9g Hz is not on the frequency grid", f);
        throw FrequencyOffGrid(buf);
    }
    return best;
}

namespace {

void check_direction(const SParamGrid& grid, const Direction& dir) {
    for (int p : {dir.in, dir.through, dir.isolated}) {
        if (p < 1 || p > grid.ports) throw InvalidArgument("direction names a port outside the grid");
    }
}

std::vector<double> isolation_curve(const SParamGrid& grid, const Direction& dir) {
    std::vector<double> ix(grid.frequencies.size());
    for (std::size_t i = 0; i < ix.size(); ++i) ix[i] = loss_db(grid.s(i, 0, dir.isolated, dir.in));
    return ix;
}

}  // namespace

PortMetrics metrics_at_index(const SParamGrid& grid, std::size_t fi, const Direction& dir) {
    check_direction(grid, dir);
    PortMetrics m;
    m.ix_db = loss_db(grid.s(fi, 0, dir.isolated, dir.in));
    m.il_db = loss_db(grid.s(fi, 0, dir.through, dir.in));
    m.rl_db = loss_db(grid.s(fi, 0, dir.in, dir.in));
    return m;
}

PortMetrics metrics_at(const SParamGrid& grid, double f, const Direction& dir) {
    return metrics_at_index(grid, grid_index(grid, f), dir);
}

std::size_t best_isolation_index(const SParamGrid& grid, const Direction& dir) {
    check_direction(grid, dir);
    const auto ix = isolation_curve(grid, dir);
    if (ix.empty()) throw InvalidArgument("empty grid");
    return static_cast<std::size_t>(std::max_element(ix.begin(), ix.end()) - ix.begin());
}

std::optional<double> bandwidth_at(const SParamGrid& grid, double threshold_db, const Direction& dir) {
    if (grid.frequencies.size() < 3) throw InvalidArgument("bandwidth needs at least three grid points");
    if (!(threshold_db > 0.0)) throw InvalidArgument("bandwidth threshold must be > 0 dB");
    const auto ix = isolation_curve(grid, dir);
    const std::size_t op = best_isolation_index(grid, dir);
    if (ix[op] < threshold_db) return std::nullopt;
    const auto& fs = grid.frequencies;

    auto edge = [&](std::size_t inside, std::size_t outside) {
        const double t = (ix[inside] - threshold_db) / (ix[inside] - ix[outside]);
        return fs[inside] + t * (fs[outside] - fs[inside]);
    };
    std::size_t lo = op;
    while (lo > 0 && ix[lo - 1] >= threshold_db) --lo;
    std::size_t hi = op;
    while (hi + 1 < fs.size() && ix[hi + 1] >= threshold_db) ++hi;
    const double f_lo = lo > 0 ? edge(lo, lo - 1) : fs.front();
    const double f_hi = hi + 1 < fs.size() ? edge(hi, hi + 1) : fs.back();
    return f_hi - f_lo;
}

SidebandScan sideband_scan(const SParamGrid& grid, const Direction& dir) {
    check_direction(grid, dir);
    SidebandScan scan;
    for (int n = -grid.n_harm; n <= grid.n_harm; ++n) {
        if (n == 0) continue;
        for (int q = 1; q <= grid.ports; ++q) scan.table.push_back({n, q, kSidebandFloorDbc});
    }
    for (std::size_t fi = 0; fi < grid.frequencies.size(); ++fi) {
        const double ref = std::abs(grid.s(fi, 0, dir.through, dir.in));
        for (auto& entry : scan.table) {
            const double m = std::abs(grid.s(fi, entry.n, entry.q, dir.in));
            double dbc = kSidebandFloorDbc;
            if (m > 0.0 && ref > 0.0) dbc = std::max(kSidebandFloorDbc, 20.0 * std::log10(m / ref));
            else if (m > 0.0) dbc = -kSidebandFloorDbc;
            entry.dbc = std::max(entry.dbc, dbc);
        }
    }
    for (const auto& entry : scan.table) scan.worst_dbc = std::max(scan.worst_dbc, entry.dbc);
    return scan;
}

CirculatorMetrics compute_metrics(const SParamGrid& grid, const Direction& dir, double bw_threshold_db) {
    const std::size_t op = best_isolation_index(grid, dir);
    const PortMetrics pm = metrics_at_index(grid, op, dir);
    CirculatorMetrics m;
    m.f_op = grid.frequencies[op];
    m.ix_db = pm.ix_db;
    m.il_db = pm.il_db;
    m.rl_db = pm.rl_db;
    if (grid.frequencies.size() >= 3) m.bw_hz = bandwidth_at(grid, bw_threshold_db, dir);
    m.sideband_worst_db = sideband_scan(grid, dir).worst_dbc;
    return m;
}

std::string metrics_json(const CirculatorMetrics& m) {
    nlohmann::ordered_json j;
    j["f_op_hz"] = m.f_op;
    j["ix_db"] = m.ix_db;
    j["il_db"] = m.il_db;
    j["rl_db"] = m.rl_db;
    j["bw_hz"] = m.bw_hz ? nlohmann::ordered_json(*m.bw_hz) : nlohmann::ordered_json(nullptr);
    j["sideband_dbc"] = m.sideband_worst_db;
    return j.dump();
}

CirculatorMetrics metrics_from_json(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("metrics record: ") + e.what());
    }
    CirculatorMetrics m;
    try {
        m.f_op = j.at("f_op_hz").get<double>();
        m.ix_db = j.at("ix_db").get<double>();
        m.il_db = j.at("il_db").get<double>();
        m.rl_db = j.at("rl_db").get<double>();
        if (!j.at("bw_hz").is_null()) m.bw_hz = j.at("bw_hz").get<double>();
        m.sideband_worst_db = j.at("sideband_dbc").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("metrics record: ") + e.what());
    }
    return m;
}

std::string metrics_table(const CirculatorMetrics& m) {
    char buf[512];
    const std::string bw = m.bw_hz ? std::to_string(*m.bw_hz / 1e6) : std::string("n/a");
    std::snprintf(buf, sizeof buf,
                  "  f_op      %12.6f MHz\n"
                  "  IX        %12.3f dB\n"
                  "  IL        %12.3f dB\n"
                  "  RL        %12.3f dB\n"
                  "  BW        %12s MHz\n"
                  "  sideband  %12.3f dBc\n",
                  m.f_op / 1e6, m.ix_db, m.il_db, m.rl_db, bw.c_str(), m.sideband_worst_db);
    return buf;
}

}  // namespace fbarcirc
