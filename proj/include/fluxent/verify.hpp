#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluxent/bessel.hpp"
#include "fluxent/concurrence.hpp"
#include "fluxent/config.hpp"
#include "fluxent/floquet.hpp"
#include "fluxent/lindblad.hpp"
#include "fluxent/rwa.hpp"

namespace fluxent {

struct VerifyOptions {
    bool flip_h14_sign{false};  // corrupts the closed-form resonant steady state
    double trace_leak{0.0};     // scales the one-period map by (1 - leak)
    unsigned seed{20240611};
};

struct Check {
    std::string name;
    double value{0.0};
    double bound{0.0};
    bool pass{false};
};

struct VerifyReport {
    std::vector<Check> checks;
    bool passed() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& c : checks) j.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}});
        return j;
    }
};

namespace detail {

inline Operator random_density(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Operator a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = Complex(n(rng), n(rng));
    Operator r = a * a.adjoint();
    return r / r.trace();
}

inline Eigen::Matrix2cd random_unitary2(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix2cd a;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = Complex(n(rng), n(rng));
    Eigen::HouseholderQR<Eigen::Matrix2cd> qr(a);
    return qr.householderQ();
}

inline SystemParams random_rate_point(const SystemParams& base, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto rate = [&] { return u(rng) * std::pow(10.0, -4.0 + 2.0 * u(rng)); };
    SystemParams p = base;
    p.q1.gamma_relax = rate();
    p.q2.gamma_relax = rate();
    p.q1.gamma_excite = rate();
    p.q2.gamma_excite = rate();
    p.q1.gamma_phi = rate();
    p.q2.gamma_phi = rate();
    return p;
}

}  // namespace detail

inline VerifyReport run_verify(const SystemParams& p, const IntegratorConfig& icfg, const SeriesConfig& scfg,
                               const VerifyOptions& opt = {}) {
    VerifyReport rep;
    auto add = [&](std::string name, double value, double bound) {
        rep.checks.push_back({std::move(name), value, bound, std::isfinite(value) && value <= bound});
    };
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    {
        double err = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double t = 100.0 * unit(rng);
            const Operator h = hamiltonian(t, p);
            err = std::max({err, hermiticity_error(h), (hamiltonian(t + p.period(), p) - h).cwiseAbs().maxCoeff()});
        }
        add("hamiltonian_hermitian_periodic", err, 1e-12);
    }
    {
        double err = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Operator d = dissipator(detail::random_density(rng), p);
            err = std::max({err, std::abs(d.trace()), hermiticity_error(d)});
        }
        add("dissipator_traceless_hermitian", err, 1e-12);
    }
    {
        StateVector bell(1.0, 0.0, 0.0, 1.0);
        const double c_bell = concurrence(DensityMatrix::pure(bell));
        add("concurrence_bell", std::fabs(c_bell - 1.0), 1e-12);
        add("concurrence_product", concurrence(DensityMatrix::basis_state(0)), 1e-12);
        const Operator psi = DensityMatrix::pure(bell).matrix();
        const Operator werner = 0.5 * psi + 0.125 * Operator::Identity();
        add("concurrence_werner", std::fabs(concurrence(DensityMatrix(werner)) - 0.25), 1e-12);
        add("concurrence_maximally_mixed", concurrence(DensityMatrix::maximally_mixed()), 1e-12);
        double err = 0.0;
        for (int i = 0; i < 100; ++i) {
            const Operator rho = detail::random_density(rng);
            const Operator u = pauli::kron(detail::random_unitary2(rng), detail::random_unitary2(rng));
            err = std::max(err, std::fabs(concurrence_unchecked(u * rho * u.adjoint()) - concurrence_unchecked(rho)));
        }
        add("concurrence_local_unitary_invariance", err, 1e-10);
    }
    {
        double residual = 0.0;
        double violation = 0.0;
        for (int i = 0; i < 100; ++i) {
            const SystemParams q = i == 0 ? p : detail::random_rate_point(p, rng);
            RwaElements h = rwa_elements(q, scfg);
            if (i > 0) {
                std::normal_distribution<double> n(0.0, 1e-3);
                h.h11 = n(rng);
                h.h22 = n(rng);
                h.h33 = n(rng);
                h.h44 = n(rng);
                h.h14 = n(rng);
                h.delta12 = n(rng);
            }
            if (q.q1.gamma_relax + q.q1.gamma_excite <= 0.0 || q.q2.gamma_relax + q.q2.gamma_excite <= 0.0) continue;
            RwaElements used = h;
            if (opt.flip_h14_sign) used.h14 = -used.h14;
            const Operator rho = steady_state_rwa(used, q).matrix();
            const double scale = std::max({q.q1.gamma_relax, q.q2.gamma_relax, q.q1.gamma_excite, q.q2.gamma_excite});
            residual = std::max(residual, (rwa_liouvillian(h, q) * superop::vec(rho)).cwiseAbs().maxCoeff() / scale);
            violation = std::max({violation, std::norm(rho(0, 3)) - (rho(0, 0) * rho(3, 3)).real(),
                                  (rho(1, 1) * rho(2, 2) - rho(0, 0) * rho(3, 3)).real()});
        }
        add("rwa_stationarity_residual", residual, 1e-12);
        add("rwa_population_inequalities", std::max(0.0, violation), 1e-15);
    }
    {
        const Monodromy m = monodromy(p, icfg);
        const RealSuperop map = (1.0 - opt.trace_leak) * m.map;
        double drift = 0.0;
        for (int i = 0; i < 20; ++i) {
            const Coords x = to_coords(detail::random_density(rng));
            drift = std::max(drift, std::fabs(2.0 * (map * x)(0) - 1.0));
        }
        add("trace_drift_per_period", drift, 1e-9);

        if (p.q1.gamma_relax + p.q1.gamma_excite + p.q2.gamma_relax + p.q2.gamma_excite > 0.0) {
            const auto ss = steady_state(m);
            IntegratorConfig direct = icfg;
            direct.mode = StepMode::AdaptiveDp45;
            const auto tr = evolve(ss.trajectory.states.front(), m.t0, m.t0 + m.period, p, direct);
            add("fixed_point_vs_direct_integration",
                frobenius_distance(tr.states.back().matrix(), ss.trajectory.states.front().matrix()), 1e-6);
        }
    }
    {
        double err = 0.0;
        for (double x : {0.5, 5.0, 10.0, 17.3}) {
            const BesselTable t(x, 40);
            for (int n = 0; n <= 40; ++n) err = std::max(err, std::fabs(t(n) - std::cyl_bessel_j(n, x)));
        }
        add("bessel_vs_std", err, 1e-12);
    }
    {
        const auto rep_xi = validate_xi_integrals(p, scfg, 4.0 * p.period());
        add("xi_series_vs_quadrature", rep_xi.max_deviation(), 1e-8);
    }
    return rep;
}

}  // namespace fluxent
