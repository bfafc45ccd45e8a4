#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fluxent/density.hpp"
#include "fluxent/lindblad.hpp"

namespace fluxent {

inline const Operator& sigma_y_y() {
    static const Operator m = pauli::kron(pauli::y(), pauli::y());
    return m;
}

// Wootters concurrence without physicality checks.
inline double concurrence_unchecked(const Operator& rho) {
    const Operator& yy = sigma_y_y();
    const Operator tilde = yy * rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<Operator> es(rho * tilde, false);
    std::array<double, 4> l;
    for (int i = 0; i < 4; ++i) l[i] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
    std::sort(l.begin(), l.end(), std::greater<>());
    return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

inline double concurrence(const DensityMatrix& rho, const PhysicalityTolerance& tol = {}) {
    const Operator& m = rho.matrix();
    const double h = hermiticity_error(m);
    if (h > tol.hermiticity) throw NonPhysicalState(fmt::format("concurrence: non-Hermitian input ({:.3g})", h));
    const double tr = trace_error(m);
    if (tr > tol.trace) throw NonPhysicalState(fmt::format("concurrence: trace error {:.3g}", tr));
    return concurrence_unchecked(m);
}

struct AveragingConfig {
    int n_phase{16};
    int n_time{64};
    // Reuse one steady trajectory for every phi0: H(t; phi0) = H(t - phi0/omega; 0).
    bool reuse_phase_shift{true};
};

inline void validate(const AveragingConfig& a) {
    if (a.n_phase < 16 || a.n_time < 64) throw ParameterError("averaging needs n_phase >= 16 and n_time >= 64");
}

inline double time_averaged_concurrence(const PeriodicSteadyState& ss) {
    double sum = 0.0;
    for (const auto& r : ss.trajectory.states) sum += concurrence(r);
    return sum / static_cast<double>(ss.trajectory.states.size());
}

struct NumericAverage {
    double value{0.0};
    double max_fixed_point_residual{0.0};
    int steps_per_period{0};
};

inline NumericAverage averaged_concurrence_numeric_detail(const SystemParams& p, const IntegratorConfig& icfg,
                                                          const AveragingConfig& acfg) {
    validate(acfg);
    IntegratorConfig cfg = icfg;
    cfg.samples_per_period = acfg.n_time;
    NumericAverage out;
    out.steps_per_period = resolve_steps_per_period(p, cfg);
    if (acfg.reuse_phase_shift) {
        const auto ss = steady_state(p, cfg);
        out.value = time_averaged_concurrence(ss);
        out.max_fixed_point_residual = ss.fixed_point_residual;
        return out;
    }
    double sum = 0.0;
    for (int j = 0; j < acfg.n_phase; ++j) {
        SystemParams q = p;
        q.drive.phi0 = 2.0 * std::numbers::pi * j / acfg.n_phase;
        const auto ss = steady_state(q, cfg);
        sum += time_averaged_concurrence(ss);
        out.max_fixed_point_residual = std::max(out.max_fixed_point_residual, ss.fixed_point_residual);
    }
    out.value = sum / acfg.n_phase;
    return out;
}

// Concurrence of the periodic steady state averaged over one drive period and
// over the initial drive phase.
inline double averaged_concurrence_numeric(const SystemParams& p, const IntegratorConfig& icfg,
                                           const AveragingConfig& acfg) {
    return averaged_concurrence_numeric_detail(p, icfg, acfg).value;
}

}  // namespace fluxent
