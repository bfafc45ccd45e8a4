#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "fluxent/concurrence.hpp"
#include "fluxent/config.hpp"
#include "fluxent/io.hpp"
#include "fluxent/lindblad.hpp"
#include "fluxent/sweep.hpp"

namespace fluxent {

struct DynamicsSample {
    double t{0.0};
    double concurrence{0.0};
    double trace{1.0};
    double min_eigenvalue{0.0};
    std::array<double, 4> populations{};
    Operator rho{Operator::Zero()};  // filled only when the full state is requested
};

struct DynamicsRun {
    double gamma{0.0};
    SystemParams params;
    long periods{0};
    long entry_period{-1};  // first n with ||rho_{n+1} - rho_n||_F below the tolerance
    double entry_time{nan_value};
    double steady_cbar{nan_value};
    double periodicity_error{0.0};  // max |C(t + T) - C(t)| over the last recorded periods
    double max_trace_error{0.0};
    double min_eigenvalue{1.0};
    std::vector<DynamicsSample> samples;
};

inline DensityMatrix initial_state(InitialState s) {
    switch (s) {
        case InitialState::Excited: return DensityMatrix::basis_state(3);
        case InitialState::Mixed: return DensityMatrix::maximally_mixed();
        default: return DensityMatrix::basis_state(0);
    }
}

inline double default_horizon(const DynamicsSpec& d) {
    if (d.horizon > 0.0) return d.horizon;
    return 20.0 / *std::min_element(d.gammas.begin(), d.gammas.end());
}

// Stroboscopic propagation with the one-period map; every recorded period is
// filled in with the partial maps at samples_per_period points.
inline DynamicsRun run_dynamics_single(const SystemParams& p, const IntegratorConfig& icfg, const DynamicsSpec& spec,
                                       double horizon) {
    DynamicsRun run;
    run.params = p;
    run.gamma = p.q1.gamma_relax;
    const Monodromy m = monodromy(p, icfg);
    run.periods = static_cast<long>(std::ceil(horizon / m.period));
    if (run.periods > icfg.max_periods) run.periods = icfg.max_periods;
    const long stride = spec.stride_periods > 0 ? spec.stride_periods : std::max(1L, run.periods / 500);
    const long detail = spec.detail_periods;

    try {
        run.steady_cbar = time_averaged_concurrence(steady_state(m));
    } catch (const Error&) {
        run.steady_cbar = nan_value;
    }

    Coords x = to_coords(initial_state(spec.initial).matrix());
    const int s = m.samples();
    std::vector<double> last_period, this_period;
    long last_n = -2;
    for (long n = 0; n <= run.periods; ++n) {
        const bool record = n < detail || n >= run.periods - detail || n % stride == 0;
        if (record) {
            this_period.clear();
            const int js = n == run.periods ? 1 : s;
            for (int j = 0; j < js; ++j) {
                Operator rho = from_coords(m.partial[j] * x);
                rho = 0.5 * (rho + rho.adjoint()).eval();
                DynamicsSample d;
                d.t = m.sample_time(j) + n * m.period;
                d.trace = rho.trace().real();
                d.min_eigenvalue = fluxent::min_eigenvalue(rho);
                d.concurrence = concurrence_unchecked(rho);
                for (int i = 0; i < 4; ++i) d.populations[i] = rho(i, i).real();
                if (spec.full_state) d.rho = rho;
                run.max_trace_error = std::max(run.max_trace_error, std::fabs(d.trace - 1.0));
                run.min_eigenvalue = std::min(run.min_eigenvalue, d.min_eigenvalue);
                run.samples.push_back(d);
                this_period.push_back(d.concurrence);
            }
            if (n >= run.periods - detail && last_n == n - 1 && last_period.size() == static_cast<std::size_t>(s) &&
                this_period.size() == static_cast<std::size_t>(s))
                for (int j = 0; j < s; ++j)
                    run.periodicity_error = std::max(run.periodicity_error, std::fabs(this_period[j] - last_period[j]));
            last_period = this_period;
            last_n = n;
        }
        if (n == run.periods) break;
        const Coords next = m.map * x;
        if (run.entry_period < 0 && (next - x).norm() < icfg.convergence_tol) {
            run.entry_period = n;
            run.entry_time = m.t0 + n * m.period;
        }
        x = next;
    }
    // Entry detection does not stop at the recorded horizon; the slowest
    // mode can decay at a fraction of the smallest rate.
    for (long n = run.periods; run.entry_period < 0 && n < icfg.max_periods; ++n) {
        const Coords next = m.map * x;
        if ((next - x).norm() < icfg.convergence_tol) {
            run.entry_period = n;
            run.entry_time = m.t0 + n * m.period;
        }
        x = next;
    }
    return run;
}

inline std::vector<DynamicsRun> run_dynamics(const RunConfig& cfg, int workers = default_workers()) {
    const auto& spec = cfg.dynamics;
    const double horizon = default_horizon(spec);
    std::vector<DynamicsRun> runs(spec.gammas.size());
    parallel_for(runs.size(), workers, [&](std::size_t i) {
        const double g = spec.gammas[i];
        const SystemParams p = cfg.point({{"gamma1", g}, {"gamma2", g}});
        runs[i] = run_dynamics_single(p, cfg.integrator, spec, horizon);
    });
    return runs;
}

// t_ns, C, tr, min_eig, pop0..pop3 and, with full_state, re_ij / im_ij for
// every entry in row-major order.
inline std::string dynamics_csv(const DynamicsRun& r, bool full_state = false) {
    std::string out = "t_ns,C,tr,min_eig,pop0,pop1,pop2,pop3";
    if (full_state)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) out += fmt::format(",re_{}{},im_{}{}", i, j, i, j);
    out += "\n";
    for (const auto& s : r.samples) {
        out += fmt::format("{},{},{},{},{},{},{},{}", fmt_num(s.t), fmt_num(s.concurrence), fmt_num(s.trace),
                           fmt_num(s.min_eigenvalue), fmt_num(s.populations[0]), fmt_num(s.populations[1]),
                           fmt_num(s.populations[2]), fmt_num(s.populations[3]));
        if (full_state)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) out += "," + fmt_num(s.rho(i, j).real()) + "," + fmt_num(s.rho(i, j).imag());
        out += "\n";
    }
    return out;
}

inline std::string dynamics_summary_csv(const std::vector<DynamicsRun>& runs, const std::vector<std::string>& files) {
    std::string out =
        "gamma,gamma_excite1,gamma_excite2,periods,entry_period,entry_time,steady_cbar,periodicity_error,max_trace_error,min_eigenvalue,file\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", fmt_num(r.gamma), fmt_num(r.params.q1.gamma_excite),
                           fmt_num(r.params.q2.gamma_excite), r.periods, r.entry_period, fmt_num(r.entry_time),
                           fmt_num(r.steady_cbar), fmt_num(r.periodicity_error), fmt_num(r.max_trace_error),
                           fmt_num(r.min_eigenvalue), files[i]);
    }
    return out;
}

}  // namespace fluxent
