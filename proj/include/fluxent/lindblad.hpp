#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "fluxent/density.hpp"
#include "fluxent/errors.hpp"
#include "fluxent/model.hpp"

namespace fluxent {

enum class StepMode { FixedRk4, AdaptiveDp45 };

struct IntegratorConfig {
    int steps_per_period{0};  // 0 selects resolve_steps_per_period
    StepMode mode{StepMode::FixedRk4};
    double rel_tol{1e-10};
    double abs_tol{1e-12};
    long max_periods{1000000};
    double convergence_tol{1e-6};
    int samples_per_period{64};
    double max_phase_per_step{0.05};
};

inline void validate(const IntegratorConfig& c) {
    if (c.steps_per_period != 0 && c.steps_per_period < 64)
        throw ParameterError("steps_per_period must be >= 64");
    if (c.samples_per_period < 1) throw ParameterError("samples_per_period must be >= 1");
    if (!(c.rel_tol > 0.0) || !(c.abs_tol > 0.0)) throw ParameterError("integrator tolerances must be > 0");
    if (!(c.convergence_tol > 0.0)) throw ParameterError("convergence_tol must be > 0");
    if (c.max_periods < 1) throw ParameterError("max_periods must be >= 1");
    if (!(c.max_phase_per_step > 0.0)) throw ParameterError("max_phase_per_step must be > 0");
}

// Bound on the spectral radius of the commutator with H(t).
inline double commutator_bound(const SystemParams& p) {
    return std::fabs(p.q1.eps) + std::fabs(p.q2.eps) + 2.0 * p.drive.amplitude + std::fabs(p.g) + p.q1.delta +
           p.q2.delta;
}

// RK4 steps per drive period. An explicit setting is rounded up to a multiple
// of samples_per_period; the automatic value also keeps the phase advanced
// per step below max_phase_per_step.
inline int resolve_steps_per_period(const SystemParams& p, const IntegratorConfig& c) {
    const int s = c.samples_per_period;
    long n = c.steps_per_period;
    if (n == 0) {
        const double ratio = p.drive.amplitude / p.drive.omega;
        n = std::max(256L, 64L * static_cast<long>(std::ceil(ratio)));
        const double phase = p.period() * commutator_bound(p) / c.max_phase_per_step;
        n = std::max(n, static_cast<long>(std::ceil(phase)));
    }
    n = ((n + s - 1) / s) * s;
    return static_cast<int>(n);
}

namespace detail {

template <class State>
double max_abs(const State& s) {
    return s.cwiseAbs().maxCoeff();
}

template <class State, class F>
State rk4_step(const F& f, double t, const State& y, double h) {
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
    const State k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
    const State k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 5(4) with step control, advancing y from t to t_end.
// h carries the step size between calls.
template <class State, class F>
void dp45_advance(const F& f, double& t, State& y, double t_end, double& h, double h_max, double rtol,
                  double atol) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    while (t < t_end) {
        h = std::min({h, h_max, t_end - t});
        const double h_min = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t));
        if (h < h_min) throw StepSizeUnderflow(t);

        const State k1 = f(t, y);
        const State k2 = f(t + c2 * h, y + h * (a21 * k1));
        const State k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const State k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const State k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const State y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = f(t + h, y5);
        const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const auto scale = (atol + rtol * y.cwiseAbs().cwiseMax(y5.cwiseAbs()).array()).eval();
        const double en = (err.cwiseAbs().array() / scale).maxCoeff();
        if (!std::isfinite(en)) {
            h *= 0.1;
            continue;
        }
        if (en <= 1.0) {
            t = (t_end - t - h <= 1e-15 * std::max(1.0, std::fabs(t_end))) ? t_end : t + h;
            y = y5;
        }
        const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        h *= factor;
    }
}

}  // namespace detail

// Right-hand side of the master equation on 4x4 density matrices with
// the Hamiltonian pieces and channels cached.
class DirectGenerator {
public:
    explicit DirectGenerator(const SystemParams& p)
        : hs_(static_hamiltonian(p)), hd_(drive_operator(p)), omega_(p.drive.omega), phi0_(p.drive.phi0) {
        k_.setZero();
        for (const auto& c : lindblad_channels(p)) {
            if (c.rate == 0.0) continue;
            const Operator a = std::sqrt(c.rate) * c.op;
            jumps_.push_back(a);
            k_ += 0.5 * a.adjoint() * a;
        }
    }

    Operator operator()(double t, const Operator& rho) const {
        const Operator h = hs_ + std::cos(omega_ * t - phi0_) * hd_;
        const Operator eff = Complex(0, 1) * h + k_;
        Operator out = -(eff * rho) - rho * eff.adjoint();
        for (const auto& a : jumps_) out.noalias() += a * rho * a.adjoint();
        return out;
    }

private:
    Operator hs_, hd_, k_;
    std::vector<Operator> jumps_;
    double omega_, phi0_;
};

inline Operator rhs(double t, const Operator& rho, const SystemParams& p) { return DirectGenerator(p)(t, rho); }

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
};

// Orthonormal basis P_a = sigma_i (x) sigma_j / 2, a = 4i + j, i, j in {I, X, Y, Z}.
// Coordinates x_a = tr(P_a rho) are real for Hermitian rho, and tr(rho) = 2 x_0.
using Coords = Eigen::Matrix<double, 16, 1>;
using RealSuperop = Eigen::Matrix<double, 16, 16>;
using ComplexSuperop = Eigen::Matrix<Complex, 16, 16>;

inline const std::array<Operator, 16>& pauli_basis() {
    static const std::array<Operator, 16> basis = [] {
        const std::array<Eigen::Matrix2cd, 4> s{pauli::identity(), pauli::x(), pauli::y(), pauli::z()};
        std::array<Operator, 16> b;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) b[4 * i + j] = 0.5 * pauli::kron(s[i], s[j]);
        return b;
    }();
    return basis;
}

inline Coords to_coords(const Operator& rho) {
    const auto& b = pauli_basis();
    Coords x;
    for (int a = 0; a < 16; ++a) x(a) = (b[a] * rho).trace().real();
    return x;
}

inline Operator from_coords(const Coords& x) {
    const auto& b = pauli_basis();
    Operator rho = Operator::Zero();
    for (int a = 0; a < 16; ++a) rho += x(a) * b[a];
    return rho;
}

// Matrix of a Hermiticity-preserving linear map in the Pauli coordinates.
template <class Map>
RealSuperop real_superop(const Map& map) {
    const auto& b = pauli_basis();
    RealSuperop m;
    for (int c = 0; c < 16; ++c) {
        const Operator y = map(b[c]);
        for (int r = 0; r < 16; ++r) m(r, c) = (b[r] * y).trace().real();
    }
    return m;
}

// Change of basis to row-major vec(rho): vec = B x.
inline ComplexSuperop vec_basis() {
    const auto& b = pauli_basis();
    ComplexSuperop m;
    for (int a = 0; a < 16; ++a)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(4 * i + j, a) = b[a](i, j);
    return m;
}

// Liouvillian L(t) = static_part + cos(omega t - phi0) * drive_part in Pauli coordinates.
struct LiouvilleGenerator {
    RealSuperop static_part;
    RealSuperop drive_part;
    double omega{1.0};
    double phi0{0.0};

    explicit LiouvilleGenerator(const SystemParams& p) : omega(p.drive.omega), phi0(p.drive.phi0) {
        const Operator hs = static_hamiltonian(p);
        const Operator hd = drive_operator(p);
        const Complex mi(0, -1);
        static_part = real_superop([&](const Operator& r) -> Operator {
            return mi * (hs * r - r * hs) + dissipator(r, p);
        });
        drive_part = real_superop([&](const Operator& r) -> Operator { return mi * (hd * r - r * hd); });
    }

    RealSuperop at(double t) const { return static_part + std::cos(omega * t - phi0) * drive_part; }
};

// Direct integration of rho from t0 to t1, sampled every period/samples_per_period.
// The state is stepped in Pauli coordinates, where the generator is a real
// 16x16 matrix.
inline Trajectory evolve(const DensityMatrix& rho0, double t0, double t1, const SystemParams& p,
                         const IntegratorConfig& cfg) {
    validate(p);
    validate(cfg);
    if (!(t1 >= t0)) throw ParameterError("evolve: t1 < t0");
    const LiouvilleGenerator gen(p);
    auto f = [&](double t, const Coords& x) -> Coords {
        return gen.static_part * x + std::cos(gen.omega * t - gen.phi0) * (gen.drive_part * x);
    };
    const double period = p.period();
    const double dt_sample = period / cfg.samples_per_period;
    const double h_nominal = period / resolve_steps_per_period(p, cfg);

    Trajectory tr;
    Coords y = to_coords(rho0.matrix());
    double t = t0;
    tr.times.push_back(t);
    tr.states.push_back(rho0);
    double h_adaptive = h_nominal;
    long m = 0;
    while (t < t1) {
        ++m;
        double next = t0 + m * dt_sample;
        if (next > t1 - 1e-12 * period) next = t1;
        if (cfg.mode == StepMode::FixedRk4) {
            const double span = next - t;
            const long n = std::max(1L, static_cast<long>(std::ceil(span / h_nominal - 1e-9)));
            const double h = span / n;
            for (long i = 0; i < n; ++i) y = detail::rk4_step(f, t + i * h, y, h);
            t = next;
        } else {
            detail::dp45_advance(f, t, y, next, h_adaptive, period / 16.0, cfg.rel_tol, cfg.abs_tol);
        }
        tr.times.push_back(t);
        tr.states.push_back(DensityMatrix::unchecked(from_coords(y)));
    }
    return tr;
}

// One-period propagator starting at the drive phase origin t0 = phi0/omega,
// with the partial maps M(t0 + j*T/S), j = 0..S.
struct Monodromy {
    double t0{0.0};
    double period{0.0};
    int steps_per_period{0};
    RealSuperop map;
    std::vector<RealSuperop> partial;

    int samples() const { return static_cast<int>(partial.size()) - 1; }
    double sample_time(int j) const { return t0 + period * j / samples(); }

    ComplexSuperop complex_map() const {
        const ComplexSuperop b = vec_basis();
        return b * map.cast<Complex>() * b.adjoint();
    }
};

inline Monodromy monodromy(const SystemParams& p, const IntegratorConfig& cfg) {
    validate(p);
    validate(cfg);
    const LiouvilleGenerator gen(p);
    Monodromy m;
    m.period = p.period();
    m.t0 = p.phase_origin();
    m.steps_per_period = resolve_steps_per_period(p, cfg);
    const int s = cfg.samples_per_period;
    m.partial.reserve(s + 1);

    RealSuperop x = RealSuperop::Identity();
    m.partial.push_back(x);
    if (cfg.mode == StepMode::FixedRk4) {
        const int per_sample = m.steps_per_period / s;
        const double h = m.period / m.steps_per_period;
        RealSuperop k1, k2, k3, k4, y;
        for (int j = 0; j < s; ++j) {
            for (int i = 0; i < per_sample; ++i) {
                const double t = m.t0 + (static_cast<long>(j) * per_sample + i) * h;
                const RealSuperop g0 = gen.at(t);
                const RealSuperop gm = gen.at(t + 0.5 * h);
                const RealSuperop g1 = gen.at(t + h);
                k1.noalias() = g0 * x;
                y = x + (0.5 * h) * k1;
                k2.noalias() = gm * y;
                y = x + (0.5 * h) * k2;
                k3.noalias() = gm * y;
                y = x + h * k3;
                k4.noalias() = g1 * y;
                x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            m.partial.push_back(x);
        }
    } else {
        auto f = [&](double t, const RealSuperop& y) -> RealSuperop { return gen.at(t) * y; };
        double t = m.t0;
        double h = m.period / m.steps_per_period;
        for (int j = 1; j <= s; ++j) {
            detail::dp45_advance(f, t, x, m.t0 + m.period * j / s, h, m.period / 16.0, cfg.rel_tol, cfg.abs_tol);
            m.partial.push_back(x);
        }
    }
    m.map = m.partial.back();
    return m;
}

struct PeriodicSteadyState {
    Trajectory trajectory;   // one period, samples_per_period points from t0
    Coords coords;           // fixed point in Pauli coordinates
    double fixed_point_residual{0.0};  // ||rho(t0 + T) - rho(t0)||_F
    double degeneracy_gap{0.0};        // distance of the second eigenvalue from 1
    double spectral_radius_rest{0.0};  // largest |eigenvalue| after the fixed point
};

inline PeriodicSteadyState steady_state(const Monodromy& m) {
    Eigen::EigenSolver<RealSuperop> es(m.map, false);
    const auto ev = es.eigenvalues();
    int best = 0;
    for (int i = 1; i < 16; ++i)
        if (std::abs(ev(i) - 1.0) < std::abs(ev(best) - 1.0)) best = i;
    double second = std::numeric_limits<double>::infinity();
    double rest = 0.0;
    for (int i = 0; i < 16; ++i) {
        if (i == best) continue;
        second = std::min(second, std::abs(ev(i) - 1.0));
        rest = std::max(rest, std::abs(ev(i)));
    }
    if (second <= 1e-8)
        throw DegenerateFixedPoint(fmt::format("monodromy eigenvalue 1 is degenerate (gap {:.3g})", second));

    // Trace preservation makes row 0 of (M - I) vanish; it is replaced by
    // the normalisation x_0 = 1/2.
    RealSuperop a = m.map - RealSuperop::Identity();
    a.row(0).setZero();
    a(0, 0) = 1.0;
    Coords rhs = Coords::Zero();
    rhs(0) = 0.5;
    const Coords x = a.fullPivLu().solve(rhs);

    PeriodicSteadyState ss;
    ss.coords = x;
    ss.fixed_point_residual = (m.map * x - x).norm();
    ss.degeneracy_gap = second;
    ss.spectral_radius_rest = rest;
    const int s = m.samples();
    for (int j = 0; j < s; ++j) {
        ss.trajectory.times.push_back(m.sample_time(j));
        Operator rho = from_coords(m.partial[j] * x);
        rho = 0.5 * (rho + rho.adjoint()).eval();
        ss.trajectory.states.push_back(DensityMatrix::unchecked(rho));
    }
    return ss;
}

inline PeriodicSteadyState steady_state(const SystemParams& p, const IntegratorConfig& cfg) {
    if (p.q1.gamma_relax + p.q1.gamma_excite + p.q2.gamma_relax + p.q2.gamma_excite <= 0.0)
        throw DegenerateFixedPoint("no relaxation channel: the periodic steady state is not unique");
    return steady_state(monodromy(p, cfg));
}

}  // namespace fluxent
