#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fluxent/concurrence.hpp"
#include "fluxent/config.hpp"
#include "fluxent/floquet.hpp"
#include "fluxent/io.hpp"
#include "fluxent/rwa.hpp"

namespace fluxent {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// Runs f(i) for i in [0, n) on `workers` threads. Results are expected to be
// written to per-index slots, so the outcome does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, int workers, F&& f) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(n, 1))));
    if (w == 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < w; ++i) pool.emplace_back(body);
    }
    if (failure) std::rethrow_exception(failure);
}

struct AnalyticResult {
    double value{nan_value};
    std::string tag;  // nonres, rwa or out_of_theory
    ResonanceInfo resonance;
    double truncation_bound{0.0};
    std::string diagnostic;
};

// Largest incoherent rate; sets the width of the band treated as resonant.
inline double rate_scale(const SystemParams& p) {
    return std::max({p.q1.gamma_relax, p.q1.gamma_excite, p.q1.gamma_phi, p.q2.gamma_relax, p.q2.gamma_excite,
                     p.q2.gamma_phi});
}

// Chooses the analytic branch: the resonant steady state near the two-qubit
// condition, the perturbative series elsewhere, nothing near a single-qubit
// condition.
inline AnalyticResult concurrence_analytic(const SystemParams& p, const SeriesConfig& cfg) {
    AnalyticResult out;
    const ResolvedSeries rs = resolve_series(p, cfg);
    const auto near = classify_resonances(p, cfg);
    out.resonance = near.front();
    const auto single = std::find_if(near.begin(), near.end(), [&](const ResonanceInfo& r) {
        return r.kind == ResonanceKind::SingleQubit && std::fabs(r.detuning) < rs.guard;
    });
    if (single != near.end()) {
        out.tag = "out_of_theory";
        out.resonance = *single;
        out.diagnostic = "single-qubit resonance " + single->describe();
        return out;
    }
    const Detuning det = select_K12(p);
    const bool two_qubit = std::fabs(det.delta) < rs.guard || std::fabs(det.delta) < 10.0 * rate_scale(p);
    try {
        if (two_qubit) {
            out.tag = "rwa";
            out.value = concurrence_resonant(p, cfg);
        } else {
            out.tag = "nonres";
            const NonresonantSeries s(p, cfg);
            out.value = s.averaged_concurrence();
            out.truncation_bound = s.truncation_bound();
        }
    } catch (const ResonantDenominator& e) {
        out.tag = "out_of_theory";
        out.value = nan_value;
        out.resonance = e.info();
        out.diagnostic = e.what();
    } catch (const ParameterError& e) {
        out.tag = "out_of_theory";
        out.value = nan_value;
        out.diagnostic = e.what();
    }
    return out;
}

inline int default_workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct SweepOptions {
    int workers{default_workers()};
    std::optional<Method> method;
};

struct SweepPoint {
    double x{0.0};
    double y{nan_value};
    double numeric{nan_value};
    double fixed_point_residual{nan_value};
    int steps_per_period{0};
    std::string numeric_error;
    AnalyticResult analytic;
};

struct SweepResult {
    SweepSpec spec;
    Method method{Method::Both};
    int workers{1};
    double seconds{0.0};
    std::vector<SweepPoint> points;  // y-major: index = iy * nx + ix

    int nx() const { return spec.x.n; }
    int ny() const { return spec.y ? spec.y->n : 1; }
    const SweepPoint& at(int ix, int iy = 0) const { return points[static_cast<std::size_t>(iy) * nx() + ix]; }
};

inline bool wants_numeric(Method m) { return m != Method::Analytic; }
inline bool wants_analytic(Method m) { return m != Method::Numeric; }

inline SystemParams sweep_point_params(const RunConfig& cfg, const SweepSpec& spec, double x,
                                       std::optional<double> y) {
    std::vector<std::pair<std::string, double>> ov{{spec.x.name, x}};
    if (spec.y && y) ov.emplace_back(spec.y->name, *y);
    return cfg.point(ov, spec.links);
}

inline SweepPoint evaluate_point(const SystemParams& p, const RunConfig& cfg, Method method) {
    SweepPoint pt;
    if (wants_numeric(method)) {
        try {
            const auto r = averaged_concurrence_numeric_detail(p, cfg.integrator, cfg.averaging);
            pt.numeric = r.value;
            pt.fixed_point_residual = r.max_fixed_point_residual;
            pt.steps_per_period = r.steps_per_period;
        } catch (const Error& e) {
            pt.numeric_error = e.what();
        }
    }
    if (wants_analytic(method)) pt.analytic = concurrence_analytic(p, cfg.series);
    return pt;
}

inline SweepResult run_sweep(const RunConfig& cfg, const SweepSpec& spec, const SweepOptions& opt = {}) {
    Stopwatch clock;
    SweepResult res;
    res.spec = spec;
    res.method = opt.method.value_or(spec.method);
    res.workers = std::max(1, opt.workers);
    const int nx = spec.x.n;
    const int ny = spec.y ? spec.y->n : 1;
    res.points.resize(static_cast<std::size_t>(nx) * ny);
    parallel_for(res.points.size(), res.workers, [&](std::size_t i) {
        const int ix = static_cast<int>(i % nx);
        const int iy = static_cast<int>(i / nx);
        const double x = spec.x.value(ix);
        const std::optional<double> y = spec.y ? std::optional<double>(spec.y->value(iy)) : std::nullopt;
        SweepPoint pt = evaluate_point(sweep_point_params(cfg, spec, x, y), cfg, res.method);
        pt.x = x;
        pt.y = y.value_or(nan_value);
        res.points[i] = std::move(pt);
    });
    res.seconds = clock.seconds();
    return res;
}

namespace detail {

inline std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ' ');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

inline std::string point_tag(const SweepPoint& p, Method m) {
    std::string t;
    if (wants_numeric(m)) t = "numeric";
    if (wants_analytic(m)) t += (t.empty() ? "" : "+") + p.analytic.tag;
    return t;
}

}  // namespace detail

// 1D: x, cbar_numeric, cbar_analytic, tag, resonance, detuning, truncation_bound, fixed_point_residual, diagnostics
// 2D: x, y, cbar, tag, cbar_numeric, cbar_analytic, resonance, detuning, diagnostics
// cbar is the numeric value when it was requested, the analytic one otherwise.
inline std::string sweep_csv(const SweepResult& r) {
    std::string out;
    const bool two_d = r.spec.y.has_value();
    if (!two_d)
        out = fmt::format("{},cbar_numeric,cbar_analytic,tag,resonance,detuning,truncation_bound,fixed_point_residual,diagnostics\n",
                          r.spec.x.name);
    else
        out = fmt::format("{},{},cbar,tag,cbar_numeric,cbar_analytic,resonance,detuning,diagnostics\n", r.spec.x.name,
                          r.spec.y->name);
    for (const auto& p : r.points) {
        std::string diag = p.numeric_error;
        if (!p.analytic.diagnostic.empty()) diag += (diag.empty() ? "" : "; ") + p.analytic.diagnostic;
        diag = detail::csv_safe(diag);
        const bool ana = wants_analytic(r.method);
        const std::string res_label = ana ? p.analytic.resonance.label() + "@" + std::to_string(p.analytic.resonance.k) : "";
        const std::string det = ana ? fmt_num(p.analytic.resonance.detuning) : "";
        if (!two_d) {
            out += fmt::format("{},{},{},{},{},{},{},{},{}\n", fmt_num(p.x), fmt_num(p.numeric),
                               fmt_num(p.analytic.value), detail::point_tag(p, r.method), res_label, det,
                               fmt_num(p.analytic.truncation_bound), fmt_num(p.fixed_point_residual), diag);
        } else {
            const double cbar = wants_numeric(r.method) ? p.numeric : p.analytic.value;
            out += fmt::format("{},{},{},{},{},{},{},{},{}\n", fmt_num(p.x), fmt_num(p.y), fmt_num(cbar),
                               detail::point_tag(p, r.method), fmt_num(p.numeric), fmt_num(p.analytic.value),
                               res_label, det, diag);
        }
    }
    return out;
}

struct ResonanceLinePoint {
    ResonanceInfo info;  // detuning is zero on the line
    double x{0.0};
    double y{nan_value};
};

// Positions along x where a resonance condition is met, for every y row of
// the sweep, by linear interpolation of the condition between grid points.
inline std::vector<ResonanceLinePoint> resonance_lines(const RunConfig& cfg, const SweepSpec& spec,
                                                       int refine = 8) {
    std::vector<ResonanceLinePoint> out;
    const int ny = spec.y ? spec.y->n : 1;
    const int nfine = std::max(2, (spec.x.n - 1) * refine + 1);
    const std::vector<ResonanceInfo> families{
        detail::single_qubit(1, CouplingBranch::Plus, 0, 0.0), detail::single_qubit(1, CouplingBranch::Minus, 0, 0.0),
        detail::single_qubit(2, CouplingBranch::Plus, 0, 0.0), detail::single_qubit(2, CouplingBranch::Minus, 0, 0.0),
        detail::two_qubit(0, 0.0)};
    auto base = [](const ResonanceInfo& f, const SystemParams& p) {
        if (f.kind == ResonanceKind::TwoQubit) return (p.q1.eps + p.q2.eps) / p.drive.omega;
        const double sg = f.branch == CouplingBranch::Plus ? 1.0 : -1.0;
        return (p.qubit(f.qubit).eps + sg * p.g) / p.drive.omega;
    };
    for (int iy = 0; iy < ny; ++iy) {
        const std::optional<double> y = spec.y ? std::optional<double>(spec.y->value(iy)) : std::nullopt;
        std::vector<double> xs(nfine);
        std::vector<SystemParams> ps(nfine);
        for (int i = 0; i < nfine; ++i) {
            xs[i] = spec.x.lo + (spec.x.hi - spec.x.lo) * i / (nfine - 1);
            ps[i] = sweep_point_params(cfg, spec, xs[i], y);
        }
        for (const auto& f : families) {
            for (int i = 0; i + 1 < nfine; ++i) {
                const double a = base(f, ps[i]);
                const double b = base(f, ps[i + 1]);
                // residual base + k crosses zero where -k lies between a and b
                if (a == b) continue;
                const double lo = std::min(a, b), hi = std::max(a, b);
                const bool last = i + 2 == nfine;
                for (long m = static_cast<long>(std::ceil(lo)); m <= static_cast<long>(std::floor(hi)); ++m) {
                    const double s = (m - a) / (b - a);
                    if (s < 0.0 || s > 1.0 || (s == 1.0 && !last)) continue;
                    ResonanceLinePoint lp;
                    lp.info = f;
                    lp.info.k = static_cast<int>(-m);
                    lp.info.detuning = 0.0;
                    lp.x = xs[i] + s * (xs[i + 1] - xs[i]);
                    lp.y = y.value_or(nan_value);
                    out.push_back(lp);
                }
            }
        }
    }
    return out;
}

inline std::string resonance_lines_csv(const std::vector<ResonanceLinePoint>& lines) {
    std::string out = "family,qubit,branch,k,extended,y,x\n";
    for (const auto& l : lines) {
        const auto& r = l.info;
        out += fmt::format("{},{},{},{},{},{},{}\n", r.kind == ResonanceKind::TwoQubit ? "two-qubit" : "single-qubit",
                           r.qubit, r.branch == CouplingBranch::Plus ? "+g" : "-g", r.k, r.extended() ? 1 : 0,
                           fmt_num(l.y), fmt_num(l.x));
    }
    return out;
}

inline nlohmann::json sweep_manifest(const RunConfig& cfg, const SweepResult& r, const std::string& config_path,
                                     const std::string& csv_name) {
    nlohmann::json j;
    j["command"] = "sweep";
    j["config"] = config_path;
    j["config_sha256"] = sha256_hex(cfg.text);
    j["versions"] = library_versions();
    j["method"] = to_string(r.method);
    j["workers"] = r.workers;
    j["wall_seconds"] = r.seconds;
    j["x"] = {{"name", r.spec.x.name}, {"lo", r.spec.x.lo}, {"hi", r.spec.x.hi}, {"n", r.spec.x.n}};
    if (r.spec.y) j["y"] = {{"name", r.spec.y->name}, {"lo", r.spec.y->lo}, {"hi", r.spec.y->hi}, {"n", r.spec.y->n}};
    nlohmann::json links = nlohmann::json::array();
    for (const auto& l : r.spec.links)
        links.push_back({{"target", l.target}, {"source", l.source}, {"scale", l.scale}, {"offset", l.offset}});
    j["links"] = links;
    j["points"] = r.points.size();
    std::size_t failures = 0, out_of_theory = 0;
    for (const auto& p : r.points) {
        if (!p.numeric_error.empty()) ++failures;
        if (p.analytic.tag == "out_of_theory") ++out_of_theory;
    }
    j["numeric_failures"] = failures;
    j["out_of_theory_points"] = out_of_theory;
    j["outputs"] = {csv_name};
    return j;
}

}  // namespace fluxent
