#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "fluxent/bessel.hpp"
#include "fluxent/concurrence.hpp"
#include "fluxent/density.hpp"
#include "fluxent/errors.hpp"
#include "fluxent/floquet.hpp"
#include "fluxent/lindblad.hpp"
#include "fluxent/model.hpp"

namespace fluxent {

struct RwaElements {
    double h11{0.0}, h22{0.0}, h33{0.0}, h44{0.0};
    double h14{0.0};
    int k12{0};
    double delta12{0.0};  // eps1 + eps2 + k12 * omega
};

struct Detuning {
    int k{0};
    double delta{0.0};
};

inline Detuning select_K12(const SystemParams& p) {
    const double base = p.q1.eps + p.q2.eps;
    constexpr int wide = 1 << 20;
    const int k = detail::nearest_order(base, p.drive.omega, -wide, wide);
    return {k, base + k * p.drive.omega};
}

namespace detail {

// The truncated sums without any check on the denominators.
inline RwaElements rwa_sums(const SystemParams& p, int K) {
    const double w = p.drive.omega;
    const double g = p.g;
    const Detuning det = select_K12(p);
    const BesselTable j(p.drive.amplitude / w, K + std::abs(det.k) + 1);
    const double e1 = p.q1.eps, e2 = p.q2.eps;
    const double d1s = p.q1.delta * p.q1.delta, d2s = p.q2.delta * p.q2.delta;
    RwaElements h;
    double s1p = 0, s1m = 0, s2p = 0, s2m = 0, s14 = 0;
    for (int k = -K; k <= K; ++k) {
        const double jk2 = j(k) * j(k);
        s1p += jk2 / (e1 + g + k * w);
        s1m += jk2 / (e1 - g + k * w);
        s2p += jk2 / (e2 + g + k * w);
        s2m += jk2 / (e2 - g + k * w);
        const double a1 = e1 + k * w, a2 = e2 + k * w;
        s14 += j(k) * j(det.k - k) * (1.0 / (a1 * a1 - g * g) + 1.0 / (a2 * a2 - g * g));
    }
    h.h11 = -0.25 * (d1s * s1p + d2s * s2p);
    h.h22 = -0.25 * (d1s * s1m - d2s * s2p);
    h.h33 = 0.25 * (d1s * s1p - d2s * s2m);
    h.h44 = 0.25 * (d1s * s1m + d2s * s2m);
    h.h14 = p.q1.delta * p.q2.delta * 0.25 * g * s14;
    h.k12 = det.k;
    h.delta12 = det.delta;
    return h;
}

}  // namespace detail

inline RwaElements rwa_elements(const SystemParams& p, const SeriesConfig& cfg) {
    validate(p);
    const ResolvedSeries r = resolve_series(p, cfg);
    const int K = r.k_max;
    const double w = p.drive.omega;
    for (int q = 1; q <= 2; ++q)
        for (int k = -K; k <= K; ++k) {
            const double plus = p.qubit(q).eps + p.g + k * w;
            const double minus = p.qubit(q).eps - p.g + k * w;
            if (std::fabs(plus) < r.guard)
                throw ResonantDenominator(detail::single_qubit(q, CouplingBranch::Plus, k, plus));
            if (std::fabs(minus) < r.guard)
                throw ResonantDenominator(detail::single_qubit(q, CouplingBranch::Minus, k, minus));
        }
    return detail::rwa_sums(p, K);
}

struct RwaSteadyState {
    RwaElements elements;
    double r11{0.0}, r22{0.0}, r33{0.0}, r44{0.0};
    Complex r14{0.0};
    Complex hg{0.0};
    double z{0.0};

    Operator matrix() const {
        Operator m = Operator::Zero();
        m(0, 0) = r11;
        m(1, 1) = r22;
        m(2, 2) = r33;
        m(3, 3) = r44;
        m(0, 3) = r14;
        m(3, 0) = std::conj(r14);
        return m;
    }
};

inline RwaSteadyState steady_state_rwa(const RwaElements& h, const SystemParams& p) {
    const double G1 = p.q1.gamma_relax, G2 = p.q2.gamma_relax;
    const double E1 = p.q1.gamma_excite, E2 = p.q2.gamma_excite;
    if (!(G1 + E1 > 0.0) || !(G2 + E2 > 0.0))
        throw ParameterError("resonant steady state needs relaxation or excitation on both qubits");
    const double S = G1 + E1 + G2 + E2;
    RwaSteadyState ss;
    ss.elements = h;
    ss.hg = Complex(2.0 * p.q1.gamma_phi + 0.5 * (G1 + E1) + 2.0 * p.q2.gamma_phi + 0.5 * (G2 + E2),
                    -(h.h11 - h.h44 - h.delta12));
    const double hg2 = std::norm(ss.hg);
    const double coh = 2.0 * h.h14 * h.h14 * ss.hg.real();
    ss.z = (G1 + E1) * (G2 + E2) * hg2 + S * coh;
    ss.r11 = ((E1 + G2) * (G1 + E2) / S * coh + G1 * G2 * hg2) / ss.z;
    ss.r22 = ((G1 + E2) * (G1 + E2) / S * coh + G1 * E2 * hg2) / ss.z;
    ss.r33 = ((E1 + G2) * (E1 + G2) / S * coh + E1 * G2 * hg2) / ss.z;
    ss.r44 = ((E1 + G2) * (G1 + E2) / S * coh + E1 * E2 * hg2) / ss.z;
    ss.r14 = Complex(0, 1) * h.h14 * (G1 * G2 - E1 * E2) * ss.hg / ss.z;
    return ss;
}

inline RwaSteadyState steady_state_rwa(const SystemParams& p, const SeriesConfig& cfg) {
    return steady_state_rwa(rwa_elements(p, cfg), p);
}

// Lab-frame density matrix at time t: only rho_14 carries a phase.
inline DensityMatrix reconstruct_original_frame(const RwaSteadyState& ss, const SystemParams& p, double t) {
    const double w = p.drive.omega;
    const int K = ss.elements.k12;
    const double phase = K * w * t - 2.0 * (p.drive.amplitude / w) * std::sin(w * t - p.drive.phi0) - K * p.drive.phi0;
    Operator m = ss.matrix();
    m(0, 3) = ss.r14 * std::polar(1.0, -phase);
    m(3, 0) = std::conj(m(0, 3));
    return DensityMatrix::unchecked(m);
}

inline double concurrence_resonant(const RwaSteadyState& ss) {
    return std::max(0.0, 2.0 * (std::abs(ss.r14) - std::sqrt(std::max(0.0, ss.r22 * ss.r33))));
}

inline double concurrence_resonant(const SystemParams& p, const SeriesConfig& cfg) {
    return concurrence_resonant(steady_state_rwa(p, cfg));
}

// Width in eps1 of the window around the two-qubit resonance where the
// concurrence vanishes, for eps2 = s * eps1.
inline double dip_width(const SystemParams& p, const SeriesConfig& cfg, double s) {
    if (!(1.0 + s != 0.0)) throw ParameterError("dip_width: s = -1");
    const double h14 = std::fabs(rwa_elements(p, cfg).h14);
    const double gsum = p.q1.gamma_relax + p.q2.gamma_relax;
    const double phisum = p.q1.gamma_phi + p.q2.gamma_phi;
    const double pre = 2.0 / (1.0 + s);
    if (gsum == 0.0) {
        // pure dephasing drives the resonant coherence to zero at every detuning
        if (phisum > 0.0) throw NoEntanglementWindow("Gamma1 + Gamma2 = 0 with dephasing: concurrence vanishes everywhere");
        return pre * h14;
    }
    const double arg = std::pow(2.0 * h14 / gsum, 2) - 1.0;
    if (arg < 0.0)
        throw NoEntanglementWindow(
            fmt::format("2|h14|/(Gamma1+Gamma2) = {:.4g} < 1: no zero-concurrence window", 2.0 * h14 / gsum));
    return pre * (0.5 * gsum + 2.0 * phisum) * std::sqrt(arg);
}

namespace superop {

// Row-major vec: vec(A rho B) = kron(A, B^T) vec(rho).
inline ComplexSuperop kron4(const Operator& a, const Operator& b) {
    ComplexSuperop m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
    return m;
}

inline ComplexSuperop commutator(const Operator& h) {
    const Operator id = Operator::Identity();
    return Complex(0, -1) * (kron4(h, id) - kron4(id, h.transpose()));
}

inline ComplexSuperop lindblad(const Operator& a) {
    const Operator id = Operator::Identity();
    const Operator n = a.adjoint() * a;
    return kron4(a, a.conjugate()) - 0.5 * kron4(n, id) - 0.5 * kron4(id, n.transpose());
}

inline Eigen::Matrix<Complex, 16, 1> vec(const Operator& m) {
    Eigen::Matrix<Complex, 16, 1> v;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) v(4 * i + j) = m(i, j);
    return v;
}

}  // namespace superop

// Time-independent generator of the slow dynamics in the rotating frame.
inline ComplexSuperop rwa_liouvillian(const RwaElements& h, const SystemParams& p) {
    using namespace pauli;
    Operator hbar = Operator::Zero();
    hbar(0, 0) = h.h11 - 0.5 * h.delta12;
    hbar(1, 1) = h.h22;
    hbar(2, 2) = h.h33;
    hbar(3, 3) = h.h44 + 0.5 * h.delta12;
    hbar(0, 3) = hbar(3, 0) = h.h14;
    ComplexSuperop l = superop::commutator(hbar);
    const double G1 = p.q1.gamma_relax, G2 = p.q2.gamma_relax;
    const double E1 = p.q1.gamma_excite, E2 = p.q2.gamma_excite;
    l += p.q1.gamma_phi * superop::lindblad(on_qubit(1, z()));
    l += p.q2.gamma_phi * superop::lindblad(on_qubit(2, z()));
    l += 0.5 * G1 * superop::lindblad(on_qubit(1, lower()));
    l += 0.5 * E1 * superop::lindblad(on_qubit(1, raise()));
    l += 0.5 * G2 * superop::lindblad(on_qubit(2, lower()));
    l += 0.5 * E2 * superop::lindblad(on_qubit(2, raise()));
    l += 0.5 * G1 * superop::lindblad(kron(lower(), z()));
    l += 0.5 * E1 * superop::lindblad(kron(raise(), z()));
    l += 0.5 * G2 * superop::lindblad(kron(z(), lower()));
    l += 0.5 * E2 * superop::lindblad(kron(z(), raise()));
    return l;
}

struct XiOptions {
    int quadrature_nodes{512};   // trapezoid nodes per period for the Fourier coefficients
    int gauss_points{8};         // Gauss-Legendre order per subinterval
    int subintervals_per_period{64};
    int n_times{16};             // sample times in (0, t_max]
};

struct XiValidationReport {
    double max_coefficient_deviation{0.0};
    double max_integral_deviation{0.0};
    double max_secular_term_deviation{0.0};
    double max_element_deviation{0.0};
    RwaElements series;
    RwaElements numeric;
    double max_deviation() const {
        return std::max({max_coefficient_deviation, max_integral_deviation, max_secular_term_deviation,
                         max_element_deviation});
    }
};

namespace detail {

inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            const double dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) {
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
}

}  // namespace detail

// Checks the Fourier expansion of xi_q^{+-}(t) = exp(i[(eps_q +- g) t + (A/omega)(sin(omega t - phi0) + sin phi0)]),
// its integral Xi and the secular sums behind the RWA elements against direct quadrature.
// Diagnostic only: denominators are not guarded, so the deviations grow near a
// resonance collision instead of raising.
inline XiValidationReport validate_xi_integrals(const SystemParams& p, const SeriesConfig& cfg, double t_max,
                                                const XiOptions& opt = {}) {
    if (!(t_max > 0.0)) throw ParameterError("validate_xi_integrals: t_max must be > 0");
    XiValidationReport rep;
    const int K = resolve_series(p, cfg).k_max;
    rep.series = detail::rwa_sums(p, K);
    const double w = p.drive.omega, z = p.drive.amplitude / w, phi0 = p.drive.phi0;
    const double period = p.period();
    const int kk = K + std::abs(rep.series.k12) + 1;
    const BesselTable jt(z, kk);
    const Complex common = std::polar(1.0, z * std::sin(phi0));
    auto periodic = [&](double t) { return std::polar(1.0, z * (std::sin(w * t - phi0) + std::sin(phi0))); };

    const int n = opt.quadrature_nodes;
    std::vector<Complex> cnum(2 * kk + 1), cser(2 * kk + 1);
    for (int k = -kk; k <= kk; ++k) {
        Complex s = 0.0;
        for (int j = 0; j < n; ++j) {
            const double t = period * j / n;
            s += periodic(t) * std::polar(1.0, -k * w * t);
        }
        cnum[k + kk] = s / static_cast<double>(n);
        cser[k + kk] = common * jt(k) * std::polar(1.0, -k * phi0);
        rep.max_coefficient_deviation = std::max(rep.max_coefficient_deviation, std::abs(cnum[k + kk] - cser[k + kk]));
    }

    std::vector<double> gx, gw;
    detail::gauss_legendre(opt.gauss_points, gx, gw);
    const double sub = period / opt.subintervals_per_period;
    for (int q = 1; q <= 2; ++q)
        for (int sgn : {+1, -1}) {
            const double nu = p.qubit(q).eps + sgn * p.g;
            auto xi = [&](double t) { return std::polar(1.0, nu * t) * periodic(t); };
            for (int m = 1; m <= opt.n_times; ++m) {
                const double t = t_max * m / opt.n_times;
                const int pieces = std::max(1, static_cast<int>(std::ceil(t / sub)));
                const double hh = t / pieces;
                Complex num = 0.0;
                for (int s = 0; s < pieces; ++s)
                    for (int i = 0; i < opt.gauss_points; ++i)
                        num += 0.5 * hh * gw[i] * xi(hh * (s + 0.5 * (gx[i] + 1.0)));
                Complex ser = 0.0;
                for (int k = -K; k <= K; ++k) {
                    const double f = nu + k * w;
                    ser += cser[k + kk] * (std::polar(1.0, f * t) - 1.0) / Complex(0, f);
                }
                rep.max_integral_deviation = std::max(rep.max_integral_deviation, std::abs(num - ser));
            }
        }

    const double e1 = p.q1.eps, e2 = p.q2.eps, g = p.g;
    const double d1s = p.q1.delta * p.q1.delta, d2s = p.q2.delta * p.q2.delta;
    double s1p = 0, s1m = 0, s2p = 0, s2m = 0, s14 = 0;
    const int K12 = rep.series.k12;
    const Complex unwind = std::conj(common * common) * std::polar(1.0, K12 * phi0);
    for (int k = -K; k <= K; ++k) {
        const double cn = std::norm(cnum[k + kk]);
        const double cs = jt(k) * jt(k);
        for (double den : {e1 + g + k * w, e1 - g + k * w, e2 + g + k * w, e2 - g + k * w})
            rep.max_secular_term_deviation = std::max(rep.max_secular_term_deviation, std::fabs((cn - cs) / den));
        s1p += cn / (e1 + g + k * w);
        s1m += cn / (e1 - g + k * w);
        s2p += cn / (e2 + g + k * w);
        s2m += cn / (e2 - g + k * w);
        const double a1 = e1 + k * w, a2 = e2 + k * w;
        const double bracket = 1.0 / (a1 * a1 - g * g) + 1.0 / (a2 * a2 - g * g);
        const double pn = (cnum[k + kk] * cnum[K12 - k + kk] * unwind).real();
        const double ps = jt(k) * jt(K12 - k);
        rep.max_secular_term_deviation = std::max(rep.max_secular_term_deviation, std::fabs((pn - ps) * bracket));
        s14 += pn * bracket;
    }
    RwaElements& h = rep.numeric;
    h.h11 = -0.25 * (d1s * s1p + d2s * s2p);
    h.h22 = -0.25 * (d1s * s1m - d2s * s2p);
    h.h33 = 0.25 * (d1s * s1p - d2s * s2m);
    h.h44 = 0.25 * (d1s * s1m + d2s * s2m);
    h.h14 = p.q1.delta * p.q2.delta * 0.25 * g * s14;
    h.k12 = rep.series.k12;
    h.delta12 = rep.series.delta12;
    for (auto [a, b] : {std::pair{h.h11, rep.series.h11}, std::pair{h.h22, rep.series.h22},
                        std::pair{h.h33, rep.series.h33}, std::pair{h.h44, rep.series.h44},
                        std::pair{h.h14, rep.series.h14}})
        rep.max_element_deviation = std::max(rep.max_element_deviation, std::fabs(a - b));
    return rep;
}

}  // namespace fluxent
