#include "fbarcirc/config.hpp"

#include "fbarcirc/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fbarcirc {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
        throw ConfigError(key + ": expected a finite number, got '" + v + "'");
    }
    return x;
}

int parse_int(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE || x < -1000000000L || x > 1000000000L) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

template <class E>
E parse_enum(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> names) {
    std::string allowed;
    for (const auto& [name, value] : names) {
        if (v == name) return value;
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(key + ": expected one of " + allowed + ", got '" + v + "'");
}

using Getter = std::function<std::optional<std::string>(const RunConfig&)>;
using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

struct Field {
    std::string key;
    Getter get;
    Setter set;
};

template <class Acc>
Field number(const char* key, Acc acc) {
    return {key, [acc](const RunConfig& c) -> std::optional<std::string> { return fmt17(acc(c)); },
            [acc](RunConfig& c, const std::string& k, const std::string& v) { acc(c) = parse_number(k, v); }};
}

template <class Acc>
Field integer(const char* key, Acc acc) {
    return {key, [acc](const RunConfig& c) -> std::optional<std::string> { return std::to_string(acc(c)); },
            [acc](RunConfig& c, const std::string& k, const std::string& v) { acc(c) = parse_int(k, v); }};
}

template <class Acc>
Field boolean(const char* key, Acc acc) {
    return {key, [acc](const RunConfig& c) -> std::optional<std::string> { return acc(c) ? "true" : "false"; },
            [acc](RunConfig& c, const std::string& k, const std::string& v) { acc(c) = parse_bool(k, v); }};
}

template <class Acc>
Field text(const char* key, Acc acc) {
    return {key, [acc](const RunConfig& c) -> std::optional<std::string> { return acc(c); },
            [acc](RunConfig& c, const std::string&, const std::string& v) { acc(c) = v; }};
}

template <class Acc>
Field optional_number(const char* key, Acc acc) {
    return {key,
            [acc](const RunConfig& c) -> std::optional<std::string> {
                const auto& v = acc(c);
                if (!v) return std::nullopt;
                return fmt17(*v);
            },
            [acc](RunConfig& c, const std::string& k, const std::string& v) { acc(c) = parse_number(k, v); }};
}

// Tuner keys create the optional section on first use and are omitted
// from the canonical text when the section is absent.
Field tuner_field(Field base) {
    Getter get = [g = base.get](const RunConfig& c) -> std::optional<std::string> {
        if (!c.tuner) return std::nullopt;
        return g(c);
    };
    Setter set = [s = base.set](RunConfig& c, const std::string& k, const std::string& v) {
        if (!c.tuner) c.tuner.emplace();
        s(c, k, v);
    };
    return {base.key, get, set};
}

#define TUNER_NUMBER(key, member) tuner_field(number(key, [](auto& c) -> auto& { return c.tuner->member; }))
#define TUNER_INT(key, member) tuner_field(integer(key, [](auto& c) -> auto& { return c.tuner->member; }))

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"design.topology",
         [](const RunConfig& c) -> std::optional<std::string> {
             return c.design.topology == Topology::SingleEnded ? "single_ended" : "differential";
         },
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.design.topology = parse_enum<Topology>(
                 k, v, {{"single_ended", Topology::SingleEnded}, {"differential", Topology::Differential}});
         }},
        number("design.f_s", [](auto& c) -> auto& { return c.design.resonator.f_s; }),
        number("design.q", [](auto& c) -> auto& { return c.design.resonator.q; }),
        number("design.k_sq", [](auto& c) -> auto& { return c.design.resonator.k_sq; }),
        number("design.c0", [](auto& c) -> auto& { return c.design.resonator.c0; }),
        number("design.depth", [](auto& c) -> auto& { return c.design.depth; }),
        number("design.f_mod", [](auto& c) -> auto& { return c.design.f_mod; }),
        number("design.z0", [](auto& c) -> auto& { return c.design.z0; }),
        {"design.phase_sequence",
         [](const RunConfig& c) -> std::optional<std::string> {
             return c.design.phase_sequence == PhaseSequence::Forward ? "forward" : "reverse";
         },
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.design.phase_sequence = parse_enum<PhaseSequence>(
                 k, v, {{"forward", PhaseSequence::Forward}, {"reverse", PhaseSequence::Reverse}});
         }},
        {"design.plate",
         [](const RunConfig& c) -> std::optional<std::string> {
             return c.design.plate == PlatePlacement::PortToGround ? "port_to_ground" : "across_branch";
         },
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.design.plate = parse_enum<PlatePlacement>(
                 k, v, {{"port_to_ground", PlatePlacement::PortToGround}, {"across_branch", PlatePlacement::AcrossBranch}});
         }},
        number("sweep.f_start", [](auto& c) -> auto& { return c.sweep.f_start; }),
        number("sweep.f_stop", [](auto& c) -> auto& { return c.sweep.f_stop; }),
        integer("sweep.points", [](auto& c) -> auto& { return c.sweep.points; }),
        optional_number("sweep.anchor", [](auto& c) -> auto& { return c.sweep.anchor; }),
        integer("basis.n_harm", [](auto& c) -> auto& { return c.n_harm; }),
        optional_number("basis.f_mod", [](auto& c) -> auto& { return c.basis_f_mod; }),
        integer("metrics.in_port", [](auto& c) -> auto& { return c.direction.in; }),
        integer("metrics.through_port", [](auto& c) -> auto& { return c.direction.through; }),
        integer("metrics.isolated_port", [](auto& c) -> auto& { return c.direction.isolated; }),
        number("metrics.bw_threshold_db", [](auto& c) -> auto& { return c.bw_threshold_db; }),
        text("output.dir", [](auto& c) -> auto& { return c.output.dir; }),
        text("output.prefix", [](auto& c) -> auto& { return c.output.prefix; }),
        boolean("output.touchstone", [](auto& c) -> auto& { return c.output.touchstone; }),
        boolean("output.harmonic_csv", [](auto& c) -> auto& { return c.output.harmonic_csv; }),
        boolean("output.waveforms", [](auto& c) -> auto& { return c.output.waveforms; }),
        number("verify.scale", [](auto& c) -> auto& { return c.verify.scale; }),
        number("verify.f_rel", [](auto& c) -> auto& { return c.verify.f_rel; }),
        number("verify.points_per_cycle", [](auto& c) -> auto& { return c.verify.points_per_cycle; }),
        number("verify.depth_branch", [](auto& c) -> auto& { return c.verify.depth_branch; }),
        number("verify.depth_wye", [](auto& c) -> auto& { return c.verify.depth_wye; }),
        number("verify.gate_static", [](auto& c) -> auto& { return c.verify.gate_static; }),
        number("verify.gate_branch", [](auto& c) -> auto& { return c.verify.gate_branch; }),
        number("verify.gate_wye", [](auto& c) -> auto& { return c.verify.gate_wye; }),
        TUNER_NUMBER("tuner.delta_max", delta_max),
        TUNER_NUMBER("tuner.f_mod_rel_span", f_mod_rel_span),
        TUNER_NUMBER("tuner.f_op_lo", f_op_lo),
        TUNER_NUMBER("tuner.f_op_hi", f_op_hi),
        TUNER_NUMBER("tuner.il_cap_db", il_cap_db),
        TUNER_INT("tuner.budget", budget),
        TUNER_INT("tuner.starts", starts),
        TUNER_NUMBER("tuner.bw_span", bw_span),
        TUNER_INT("tuner.bw_points", bw_points),
    };
    return table;
}

#undef TUNER_NUMBER
#undef TUNER_INT

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

std::vector<double> SweepConfig::frequencies() const {
    const auto n = static_cast<std::size_t>(points);
    return anchor ? anchored_linspace(f_start, f_stop, n, *anchor) : linspace(f_start, f_stop, n);
}

void RunConfig::validate() const {
    const auto& r = design.resonator;
    require(r.f_s > 0.0, "design.f_s", "must be > 0");
    require(r.q > 0.0, "design.q", "must be > 0");
    require(r.k_sq > 0.0 && r.k_sq < 1.0, "design.k_sq", "must lie in (0, 1)");
    require(r.c0 > 0.0, "design.c0", "must be > 0");
    require(design.depth >= 0.0 && design.depth < 1.0, "design.depth", "must lie in [0, 1)");
    require(design.f_mod > 0.0, "design.f_mod", "must be > 0");
    require(design.z0 > 0.0, "design.z0", "must be > 0");
    try {
        design.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("design: ") + e.what());
    }

    require(sweep.f_start > 0.0, "sweep.f_start", "must be > 0");
    require(sweep.f_start < sweep.f_stop, "sweep.f_stop", "must exceed sweep.f_start");
    require(sweep.points >= 2, "sweep.points", "must be >= 2");
    if (sweep.anchor) {
        require(*sweep.anchor >= sweep.f_start && *sweep.anchor <= sweep.f_stop, "sweep.anchor",
                "must lie within [sweep.f_start, sweep.f_stop]");
    }

    require(n_harm >= 1 && n_harm <= 64, "basis.n_harm", "must lie in [1, 64]");
    if (basis_f_mod) {
        require(*basis_f_mod > 0.0, "basis.f_mod", "must be > 0");
        require(design.depth == 0.0 || *basis_f_mod == design.f_mod, "basis.f_mod",
                "must equal design.f_mod for a modulated design");
    }

    const int ports[3] = {direction.in, direction.through, direction.isolated};
    const char* keys[3] = {"metrics.in_port", "metrics.through_port", "metrics.isolated_port"};
    for (int i = 0; i < 3; ++i) {
        require(ports[i] >= 1 && ports[i] <= 3, keys[i], "must be 1, 2 or 3");
        for (int j = 0; j < i; ++j) require(ports[i] != ports[j], keys[i], "ports must be distinct");
    }
    require(bw_threshold_db > 0.0, "metrics.bw_threshold_db", "must be > 0");

    require(!output.dir.empty(), "output.dir", "must not be empty");
    require(!output.prefix.empty() && output.prefix.find('/') == std::string::npos, "output.prefix",
            "must be a non-empty file name stem");

    require(verify.scale > 0.0 && verify.scale <= 1.0, "verify.scale", "must lie in (0, 1]");
    require(verify.f_rel > 0.0, "verify.f_rel", "must be > 0");
    require(verify.points_per_cycle >= 50.0, "verify.points_per_cycle", "must be >= 50");
    require(verify.depth_branch >= 0.0 && verify.depth_branch < 1.0, "verify.depth_branch", "must lie in [0, 1)");
    require(verify.depth_wye >= 0.0 && verify.depth_wye < 1.0, "verify.depth_wye", "must lie in [0, 1)");
    require(verify.gate_static >= 0.0, "verify.gate_static", "must be >= 0");
    require(verify.gate_branch >= 0.0, "verify.gate_branch", "must be >= 0");
    require(verify.gate_wye >= 0.0, "verify.gate_wye", "must be >= 0");

    if (tuner) {
        try {
            tune_problem(*this).validate();
        } catch (const Error& e) {
            throw ConfigError(std::string("tuner: ") + e.what());
        }
    }
}

RunConfig parse_config(std::istream& in) {
    std::map<std::string, const Field*> by_key;
    for (const auto& f : fields()) by_key[f.key] = &f;

    RunConfig c;
    std::map<std::string, int> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end()) throw ConfigError(key + ": unknown key (line " + std::to_string(lineno) + ")");
        if (const auto prev = seen.find(key); prev != seen.end()) {
            throw ConfigError(key + ": repeated (lines " + std::to_string(prev->second) + " and " +
                              std::to_string(lineno) + ")");
        }
        seen[key] = lineno;
        if (value.empty()) throw ConfigError(key + ": missing value");
        it->second->set(c, key, value);
    }
    c.validate();
    return c;
}

RunConfig parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_config(in);
}

std::string format_config(const RunConfig& config) {
    std::string out;
    for (const auto& f : fields()) {
        if (const auto v = f.get(config)) out += f.key + " = " + *v + "\n";
    }
    return out;
}

std::string config_fingerprint(const RunConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : format_config(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

TuneProblem tune_problem(const RunConfig& config) {
    const TunerConfig t = config.tuner.value_or(TunerConfig{});
    TuneProblem p;
    p.design = config.design;
    p.delta_max = t.delta_max;
    p.f_mod_rel_span = t.f_mod_rel_span;
    p.f_op_lo = t.f_op_lo;
    p.f_op_hi = t.f_op_hi;
    p.il_cap_db = t.il_cap_db;
    p.budget = t.budget;
    p.starts = t.starts;
    p.n_harm = config.n_harm;
    p.direction = config.direction;
    p.bw_threshold_db = config.bw_threshold_db;
    p.bw_span = t.bw_span;
    p.bw_points = t.bw_points;
    return p;
}

RunConfig tuned_config(const RunConfig& base, const TuneProblem& problem, const TuneParams& best) {
    RunConfig c = base;
    c.design = tuned_design(problem, best);
    c.basis_f_mod.reset();
    const double half = 0.5 * problem.bw_span;
    c.sweep.f_start = best.f_op - half;
    c.sweep.f_stop = best.f_op + half;
    c.sweep.points = problem.bw_points;
    c.sweep.anchor = best.f_op;
    c.tuner.reset();
    c.output.prefix = base.output.prefix + "_tuned";
    return c;
}

}  // namespace fbarcirc
