#include "fbarcirc/cli.hpp"

#include "fbarcirc/bvd.hpp"
#include "fbarcirc/config.hpp"
#include "fbarcirc/errors.hpp"
#include "fbarcirc/metrics.hpp"
#include "fbarcirc/sparam_io.hpp"
#include "fbarcirc/transient.hpp"
#include "fbarcirc/tuner.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace fbarcirc {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;
    int n_harm = 0;  // 0 keeps the config value
};

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void apply_threads(int threads) {
    if (threads < 0) throw ConfigError("--threads: must be >= 0");
    if (threads > 0) omp_set_num_threads(threads);
}

RunConfig load_with_overrides(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (!c.out.empty()) cfg.output.dir = c.out;
    if (c.n_harm != 0) cfg.n_harm = c.n_harm;
    cfg.validate();
    return cfg;
}

void prepare_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("output.dir: cannot create '" + dir + "'");
    if (::access(dir.c_str(), W_OK) != 0) throw ConfigError("output.dir: '" + dir + "' is not writable");
}

// Timestamps live only in the sidecar log so data files stay reproducible.
void append_log(const RunConfig& cfg, const std::string& command, const std::string& detail) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    std::ofstream log(join(cfg.output.dir, cfg.output.prefix + ".log"), std::ios::app);
    log << stamp << ' ' << command << " config=" << config_fingerprint(cfg) << ' ' << detail << '\n';
}

Json metrics_object(const CirculatorMetrics& m) { return Json::parse(metrics_json(m)); }

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string mode = "specs";
    std::string input;
    std::string netlist;
    ResonatorSpecs specs;
};

Netlist one_port(const BvdParams& bvd, double z0) {
    Netlist net;
    const NodeId p = net.node("p1");
    net.add_port(1, p, z0);
    net.add_capacitor("C0", p, kGround, bvd.c0);
    for (std::size_t i = 0; i < bvd.branches.size(); ++i) {
        net.add_modulated_rlc("M" + std::to_string(i + 1), p, kGround, bvd.branches[i], std::nullopt);
    }
    net.validate();
    return net;
}

std::vector<AdmittanceSample> read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_admittance_csv(in);
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
    Json j;
    if (a.mode == "lorentzian") {
        if (a.input.empty()) throw ConfigError("--input: required in lorentzian mode");
        const auto samples = read_samples(a.input);
        const LorentzianFit fit = fit_lorentzian(samples);
        out << "lorentzian fit of " << a.input << "\n"
            << "  f0        " << fmt("%.9g", fit.f0) << " Hz\n"
            << "  Q         " << fmt("%.6g", fit.q) << "\n"
            << "  peak      " << fmt("%.6g", fit.peak) << " S\n"
            << "  baseline  " << fmt("%.6g", fit.baseline) << " S\n"
            << "  residual  " << fmt("%.3g", fit.residual) << "\n";
        j["mode"] = "lorentzian";
        j["f0_hz"] = fit.f0;
        j["q"] = fit.q;
        j["peak_s"] = fit.peak;
        j["baseline_s"] = fit.baseline;
        j["residual"] = fit.residual;
        j["iterations"] = fit.iterations;
    } else {
        const ResonatorSpecs specs = a.input.empty() ? a.specs : extract_specs(read_samples(a.input));
        specs.validate();
        const BvdParams bvd = bvd_from_specs(specs);
        const MotionalBranch& m = bvd.branches.front();
        const double fp = parallel_resonance(bvd);
        out << "BVD parameters" << (a.input.empty() ? "" : " extracted from " + a.input) << "\n"
            << "  f_s  " << fmt("%.9g", specs.f_s) << " Hz\n"
            << "  Q    " << fmt("%.6g", specs.q) << "\n"
            << "  k2   " << fmt("%.6g", specs.k_sq) << "\n"
            << "  c0   " << fmt("%.6g", bvd.c0) << " F\n"
            << "  r_m  " << fmt("%.6g", m.r_m) << " ohm\n"
            << "  l_m  " << fmt("%.6g", m.l_m) << " H\n"
            << "  c_m  " << fmt("%.6g", m.c_m) << " F\n"
            << "  f_p  " << fmt("%.9g", fp) << " Hz\n";
        j["mode"] = "specs";
        j["f_s_hz"] = specs.f_s;
        j["q"] = specs.q;
        j["k_sq"] = specs.k_sq;
        j["c0_f"] = bvd.c0;
        j["r_m_ohm"] = m.r_m;
        j["l_m_h"] = m.l_m;
        j["c_m_f"] = m.c_m;
        j["f_p_hz"] = fp;
        if (!a.netlist.empty()) {
            write_file_atomic(a.netlist, netlist_to_string(one_port(bvd, 50.0)));
            j["netlist"] = a.netlist;
        }
    }
    out << j.dump() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Common& c, std::ostream& out) {
    apply_threads(c.threads);
    const RunConfig cfg = load_with_overrides(c);
    prepare_output_dir(cfg.output.dir);
    const std::string fp = config_fingerprint(cfg);

    const Netlist net = build_circulator(cfg.design);
    const auto freqs = cfg.sweep.frequencies();
    const SParamGrid grid = sparams(net, cfg.basis(), freqs);
    const CirculatorMetrics m = compute_metrics(grid, cfg.direction, cfg.bw_threshold_db);

    const std::string stem = join(cfg.output.dir, cfg.output.prefix);
    const std::vector<std::string> comments = {"fbarcirc simulate", "config " + fp};
    Json files = Json::array();
    if (cfg.output.touchstone) {
        std::ostringstream s;
        write_touchstone(s, grid, comments);
        write_file_atomic(stem + ".s3p", s.str());
        files.push_back(stem + ".s3p");
    }
    if (cfg.output.harmonic_csv) {
        std::ostringstream s;
        write_harmonic_csv(s, grid, comments);
        write_file_atomic(stem + "_harmonics.csv", s.str());
        files.push_back(stem + "_harmonics.csv");
    }
    write_file_atomic(stem + "_metrics.json", metrics_json(m) + "\n");
    files.push_back(stem + "_metrics.json");
    write_file_atomic(stem + ".net", netlist_to_string(net));
    append_log(cfg, "simulate", std::to_string(freqs.size()) + " frequencies");

    out << "simulated " << freqs.size() << " frequencies, N=" << cfg.n_harm << ", config " << fp << "\n"
        << metrics_table(m);
    Json j;
    j["command"] = "simulate";
    j["config"] = fp;
    j["metrics"] = metrics_object(m);
    j["files"] = files;
    out << j.dump() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct VerifyCase {
    std::string name;
    Netlist net;
    int q;
    int p;
    double gate;
};

int cmd_verify(const Common& c, std::ostream& out) {
    apply_threads(c.threads);
    const RunConfig cfg = load_with_overrides(c);
    const VerifyConfig& v = cfg.verify;
    if (cfg.output.waveforms) prepare_output_dir(cfg.output.dir);

    const ResonatorSpecs& specs = cfg.design.resonator;
    const double z0 = cfg.design.z0;
    const double f_mod = cfg.design.f_mod;
    std::vector<VerifyCase> cases;
    cases.push_back({"static_branch", scale_frequency(oracle_single_branch(specs, 0.0, f_mod, z0), v.scale), 1, 1,
                     v.gate_static});
    cases.push_back({"modulated_branch", scale_frequency(oracle_single_branch(specs, v.depth_branch, f_mod, z0), v.scale),
                     1, 1, v.gate_branch});
    cases.push_back({"toy_wye", scale_frequency(oracle_toy_wye(specs, v.depth_wye, f_mod, z0), v.scale), 2, 1,
                     v.gate_wye});

    const HarmonicBasis basis{f_mod * v.scale, cfg.n_harm};
    const double f = v.f_rel * specs.f_s * v.scale;
    CrossValidationOptions opt;
    opt.points_per_cycle = v.points_per_cycle;
    opt.keep_waveform = cfg.output.waveforms;

    bool all_pass = true;
    Json list = Json::array();
    out << "oracle cross-check at " << fmt("%.9g", f) << " Hz (scale " << fmt("%g", v.scale) << ")\n";
    for (const auto& vc : cases) {
        const CrossValidation cv = cross_validate(vc.net, basis, f, vc.q, vc.p, opt);
        const bool pass = cv.max_error <= vc.gate;
        all_pass = all_pass && pass;
        out << "  " << (pass ? "PASS " : "FAIL ") << vc.name << "  S" << vc.q << vc.p
            << "  max rel error " << fmt("%.3e", cv.max_error) << "  gate " << fmt("%.3e", vc.gate) << "\n";
        Json e;
        e["name"] = vc.name;
        e["q"] = vc.q;
        e["p"] = vc.p;
        e["error"] = {cv.error[0], cv.error[1], cv.error[2]};
        e["max_error"] = cv.max_error;
        e["gate"] = vc.gate;
        e["pass"] = pass;
        list.push_back(e);
        if (cv.waveform) {
            // Keep dumps to about 20k rows.
            const std::size_t stride = std::max<std::size_t>(1, cv.waveform->sample_count() / 20000);
            std::ostringstream s;
            write_waveform_csv(s, *cv.waveform, stride);
            write_file_atomic(join(cfg.output.dir, cfg.output.prefix + "_" + vc.name + "_waveform.csv"), s.str());
        }
    }
    if (cfg.output.waveforms) append_log(cfg, "verify", all_pass ? "pass" : "fail");
    Json j;
    j["command"] = "verify";
    j["cases"] = list;
    j["pass"] = all_pass;
    out << j.dump() << '\n';
    return all_pass ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------

int cmd_tune(const Common& c, std::ostream& out) {
    apply_threads(c.threads);
    const RunConfig cfg = load_with_overrides(c);
    prepare_output_dir(cfg.output.dir);
    const std::string fp = config_fingerprint(cfg);

    const TuneProblem problem = tune_problem(cfg);
    const TuneResult r = tune(problem, c.seed);
    const RunConfig emitted = tuned_config(cfg, problem, r.best);

    const std::string stem = join(cfg.output.dir, cfg.output.prefix);
    std::ostringstream trace;
    write_trace_csv(trace, r.trace, {"fbarcirc tune", "config " + fp, "seed " + std::to_string(c.seed)});
    write_file_atomic(stem + "_trace.csv", trace.str());
    const std::string cfg_path = join(cfg.output.dir, emitted.output.prefix + ".cfg");
    write_file_atomic(cfg_path, format_config(emitted));

    Json j;
    j["command"] = "tune";
    j["config"] = fp;
    j["seed"] = c.seed;
    j["delta"] = r.best.depth;
    j["f_mod_hz"] = r.best.f_mod;
    j["f_op_hz"] = r.best.f_op;
    j["objective"] = r.best_objective;
    j["evaluations"] = r.trace.size();
    j["budget_exhausted"] = r.budget_exhausted;
    j["metrics"] = metrics_object(r.metrics);
    j["files"] = {stem + "_trace.csv", cfg_path};
    write_file_atomic(stem + "_tune.json", j.dump() + "\n");
    append_log(cfg, "tune", "seed=" + std::to_string(c.seed) + " evaluations=" + std::to_string(r.trace.size()));

    out << "tuned in " << r.trace.size() << " evaluations" << (r.budget_exhausted ? " (budget exhausted)" : "") << "\n"
        << "  delta     " << fmt("%.9g", r.best.depth) << "\n"
        << "  f_mod     " << fmt("%.9g", r.best.f_mod) << " Hz\n"
        << "  f_op      " << fmt("%.12g", r.best.f_op) << " Hz\n"
        << "  objective " << fmt("%.6g", r.best_objective) << "\n"
        << metrics_table(r.metrics);
    out << j.dump() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct Record {
    std::string name;
    CirculatorMetrics m;
};

std::string last_line(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open metrics record '" + path + "'");
    std::string line, last;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) last = line;
    }
    if (last.empty()) throw ParseError("metrics record '" + path + "' is empty");
    return last;
}

int cmd_report(const std::vector<std::string>& paths, std::ostream& out) {
    if (paths.empty()) throw ConfigError("report: at least one metrics record is required");
    std::vector<Record> records;
    for (const auto& p : paths) {
        std::string name = fs::path(p).stem().string();
        if (name.size() > 8 && name.ends_with("_metrics")) name.resize(name.size() - 8);
        records.push_back({name, metrics_from_json(last_line(p))});
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const Record& a, const Record& b) { return a.m.ix_db > b.m.ix_db; });

    // Published hardware figures for the same device class.
    const double ref_f = 2680.0, ref_ix = 61.5, ref_il = 1.8, ref_bw = 4.7;

    std::size_t longest = 0;
    for (const auto& r : records) longest = std::max(longest, r.name.size());
    const int width = static_cast<int>(std::max<std::size_t>(12, longest + 2));
    auto cell = [&](const std::string& s) {
        return std::string(static_cast<std::size_t>(width) - std::min(s.size(), static_cast<std::size_t>(width - 1)), ' ') + s;
    };
    std::ostringstream t;
    t << std::string(20, ' ');
    for (const auto& r : records) t << cell(r.name);
    t << cell("published") << '\n';
    auto row = [&](const char* label, auto value, const std::string& ref) {
        std::string l = label;
        t << l << std::string(20 - l.size(), ' ');
        for (const auto& r : records) t << cell(value(r.m));
        t << cell(ref) << '\n';
    };
    row("f (MHz)", [](const CirculatorMetrics& m) { return fmt("%.3f", m.f_op / 1e6); }, fmt("%.0f", ref_f));
    row("IX (dB)", [](const CirculatorMetrics& m) { return fmt("%.2f", m.ix_db); }, fmt("%.1f", ref_ix));
    row("IL (dB)", [](const CirculatorMetrics& m) { return fmt("%.2f", m.il_db); }, fmt("%.1f", ref_il));
    row("RL (dB)", [](const CirculatorMetrics& m) { return fmt("%.2f", m.rl_db); }, "-");
    row("BW@25dB IX (MHz)",
        [](const CirculatorMetrics& m) { return m.bw_hz ? fmt("%.3f", *m.bw_hz / 1e6) : std::string("-"); },
        fmt("%.1f", ref_bw));
    row("sideband (dBc)", [](const CirculatorMetrics& m) { return fmt("%.1f", m.sideband_worst_db); }, "-");
    out << t.str();

    Json j;
    j["command"] = "report";
    Json list = Json::array();
    for (const auto& r : records) {
        Json e = metrics_object(r.m);
        e["name"] = r.name;
        list.push_back(e);
    }
    j["records"] = list;
    j["reference"] = {{"f_op_hz", ref_f * 1e6}, {"ix_db", ref_ix}, {"il_db", ref_il}, {"bw_hz", ref_bw * 1e6}};
    out << j.dump() << '\n';
    return kExitOk;
}

int exit_code_for(const Error& e) {
    const std::string k = e.kind();
    if (k == "ParseError" || k == "ConfigError" || k == "InvalidArgument") return kExitUsage;
    return kExitFailure;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("output: cannot write '" + tmp + "'");
        f << content;
        f.flush();
        if (!f) throw ConfigError("output: write to '" + tmp + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("output: cannot rename into '" + path + "'");
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulator and design toolkit for modulated-FBAR circulators", "fbarcirc"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("--config", common.config, "Run configuration file");
        sub->add_option("--out", common.out, "Output directory (overrides output.dir)");
        sub->add_option("--threads", common.threads, "Worker threads, 0 = auto");
        sub->add_option("--n-harm", common.n_harm, "Harmonic truncation override")->check(CLI::Range(1, 64));
        if (with_seed) sub->add_option("--seed", common.seed, "Seed for multi-start points");
    };

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit BVD parameters or a Lorentzian");
    fit_cmd->add_option("--mode", fit.mode, "specs or lorentzian")->check(CLI::IsMember({"specs", "lorentzian"}));
    fit_cmd->add_option("--input", fit.input, "Admittance CSV (f_Hz, ReY_S[, ImY_S])");
    fit_cmd->add_option("--netlist", fit.netlist, "Write the one-port BVD netlist here");
    fit_cmd->add_option("--f-s", fit.specs.f_s, "Series resonance (Hz)");
    fit_cmd->add_option("--q", fit.specs.q, "Quality factor");
    fit_cmd->add_option("--k-sq", fit.specs.k_sq, "Effective coupling k^2");
    fit_cmd->add_option("--c0", fit.specs.c0, "Plate capacitance (F)");

    auto* sim_cmd = app.add_subcommand("simulate", "Sweep S-parameters of a circulator design");
    add_common(sim_cmd, false);
    sim_cmd->get_option("--config")->required();
    auto* verify_cmd = app.add_subcommand("verify", "Cross-check the harmonic solver against the transient oracle");
    add_common(verify_cmd, false);
    auto* tune_cmd = app.add_subcommand("tune", "Tune modulation depth, modulation frequency and f_op");
    add_common(tune_cmd, true);
    tune_cmd->get_option("--config")->required();
    std::vector<std::string> records;
    auto* report_cmd = app.add_subcommand("report", "Tabulate metrics records beside the published figures");
    report_cmd->add_option("records", records, "Metrics record files");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit, out);
        if (sim_cmd->parsed()) return cmd_simulate(common, out);
        if (verify_cmd->parsed()) return cmd_verify(common, out);
        if (tune_cmd->parsed()) return cmd_tune(common, out);
        return cmd_report(records, out);
    } catch (const Error& e) {
        err << e.kind() << ": " << e.what() << '\n';
        Json j;
        j["error"] = e.kind();
        j["message"] = e.what();
        out << j.dump() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        Json j;
        j["error"] = "Error";
        j["message"] = e.what();
        out << j.dump() << '\n';
        return kExitFailure;
    }
}

}  // namespace fbarcirc
