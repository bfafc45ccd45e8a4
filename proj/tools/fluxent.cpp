#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fluxent/config.hpp"
#include "fluxent/dynamics.hpp"
#include "fluxent/io.hpp"
#include "fluxent/sweep.hpp"
#include "fluxent/verify.hpp"

namespace fs = std::filesystem;
using namespace fluxent;

namespace {

RunConfig default_config() {
    RunConfig c;
    c.params.q1 = {0.1, 3.331, 1e-4, 0.0, 0.0};
    c.params.q2 = {0.15, 6.662, 1e-4, 0.0, 0.0};
    c.params.g = 0.15;
    c.params.drive = {5.0, 1.0, 0.0};
    c.params.temperature_mk = 30.0;
    return c;
}

int cmd_dynamics(const RunConfig& cfg, const std::string& config_path, const fs::path& out, int workers) {
    Stopwatch clock;
    const auto runs = run_dynamics(cfg, workers);
    std::vector<std::string> files;
    nlohmann::json jr = nlohmann::json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string name = fmt::format("{}_{}.csv", cfg.dynamics.output, i);
        write_text(out / name, dynamics_csv(runs[i], cfg.dynamics.full_state));
        files.push_back(name);
        const auto& r = runs[i];
        jr.push_back({{"gamma", r.gamma},
                      {"periods", r.periods},
                      {"entry_period", r.entry_period},
                      {"entry_time", std::isfinite(r.entry_time) ? nlohmann::json(r.entry_time) : nlohmann::json()},
                      {"steady_cbar", std::isfinite(r.steady_cbar) ? nlohmann::json(r.steady_cbar) : nlohmann::json()},
                      {"periodicity_error", r.periodicity_error},
                      {"max_trace_error", r.max_trace_error},
                      {"min_eigenvalue", r.min_eigenvalue},
                      {"file", name}});
        fmt::print("gamma {:<8g} entry period {:>7} (t = {:.6g})  steady cbar {:.6f}\n", r.gamma, r.entry_period,
                   r.entry_time, r.steady_cbar);
    }
    const std::string summary = cfg.dynamics.output + "_summary.csv";
    write_text(out / summary, dynamics_summary_csv(runs, files));
    files.push_back(summary);
    nlohmann::json m;
    m["command"] = "dynamics";
    m["config"] = config_path;
    m["config_sha256"] = sha256_hex(cfg.text);
    m["versions"] = library_versions();
    m["workers"] = workers;
    m["horizon"] = default_horizon(cfg.dynamics);
    m["runs"] = jr;
    m["outputs"] = files;
    m["wall_seconds"] = clock.seconds();
    write_json(out / (cfg.dynamics.output + "_manifest.json"), m);
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& config_path, const fs::path& out, int workers,
              const std::string& method) {
    if (!cfg.sweep) throw ConfigError(0, "sweep", "config has no [sweep] section");
    SweepOptions opt;
    opt.workers = workers;
    if (!method.empty()) opt.method = parse_method(method);
    const auto res = run_sweep(cfg, *cfg.sweep, opt);
    write_text(out / cfg.sweep->output, sweep_csv(res));
    const std::string stem = fs::path(cfg.sweep->output).stem().string();
    const std::string lines = stem + "_resonances.csv";
    write_text(out / lines, resonance_lines_csv(resonance_lines(cfg, *cfg.sweep)));
    auto m = sweep_manifest(cfg, res, config_path, cfg.sweep->output);
    m["outputs"].push_back(lines);
    write_json(out / (stem + "_manifest.json"), m);
    fmt::print("{} points in {:.2f} s -> {}\n", res.points.size(), res.seconds, (out / cfg.sweep->output).string());
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& config_path, const fs::path& out, const std::string& inject) {
    VerifyOptions opt;
    if (inject == "h14-sign") opt.flip_h14_sign = true;
    else if (inject == "trace-leak") opt.trace_leak = 1e-6;
    else if (!inject.empty()) throw ParameterError("unknown injection '" + inject + "'");
    const auto rep = run_verify(cfg.point(), cfg.integrator, cfg.series, opt);
    for (const auto& c : rep.checks)
        fmt::print("{:<4} {:<40} {:.3e} (bound {:.1e})\n", c.pass ? "ok" : "FAIL", c.name, c.value, c.bound);
    nlohmann::json m;
    m["command"] = "verify";
    m["config"] = config_path;
    m["config_sha256"] = sha256_hex(cfg.text);
    m["versions"] = library_versions();
    m["inject"] = inject;
    m["checks"] = rep.to_json();
    m["passed"] = rep.passed();
    write_json(out / "verify_report.json", m);
    return rep.passed() ? 0 : 1;
}

int cmd_resonances(const RunConfig& cfg, const fs::path& out) {
    const SystemParams p = cfg.point();
    const auto qe = quasienergies_zeroth(p);
    fmt::print("zeroth-order quasienergies: {:.6g} {:.6g} {:.6g} {:.6g}\n", qe[0], qe[1], qe[2], qe[3]);
    const auto det = select_K12(p);
    fmt::print("two-qubit order K12 = {}, detuning = {:.6g}\n", det.k, det.delta);
    for (const auto& r : classify_resonances(p, cfg.series))
        fmt::print("{:<12} k = {:>4}  detuning = {:>12.6g}{}\n", r.label(), r.k, r.detuning,
                   r.extended() ? "  (mirror branch)" : "");
    if (cfg.sweep) {
        const std::string name = fs::path(cfg.sweep->output).stem().string() + "_resonances.csv";
        write_text(out / name, resonance_lines_csv(resonance_lines(cfg, *cfg.sweep)));
        fmt::print("resonance lines -> {}\n", (out / name).string());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven coupled flux qubits: dissipative entanglement simulator"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir = "out";
    int workers = default_workers();
    std::string method;
    std::string inject;

    auto* dyn = app.add_subcommand("dynamics", "time evolution of the concurrence for several relaxation rates");
    auto* sw = app.add_subcommand("sweep", "period-averaged steady-state concurrence over a parameter grid");
    auto* ver = app.add_subcommand("verify", "internal consistency checks");
    auto* res = app.add_subcommand("resonances", "resonance classification and overlay lines");
    for (auto* s : {dyn, sw, res}) s->add_option("--config", config_path, "INI configuration")->required()->check(CLI::ExistingFile);
    ver->add_option("--config", config_path, "INI configuration")->check(CLI::ExistingFile);
    for (auto* s : {dyn, sw, ver, res}) s->add_option("--out", out_dir, "output directory");
    for (auto* s : {dyn, sw}) s->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sw->add_option("--method", method, "numeric, analytic or both")->check(CLI::IsMember({"numeric", "analytic", "both"}));
    ver->add_option("--inject", inject, "deliberate fault for testing the checks")->check(CLI::IsMember({"h14-sign", "trace-leak"}));

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
        const fs::path out(out_dir);
        if (*dyn) return cmd_dynamics(cfg, config_path, out, workers);
        if (*sw) return cmd_sweep(cfg, config_path, out, workers, method);
        if (*ver) return cmd_verify(cfg, config_path, out, inject);
        if (*res) return cmd_resonances(cfg, out);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 3;
    }
    return 0;
}
