#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "fluxent/bessel.hpp"
#include "fluxent/errors.hpp"
#include "fluxent/model.hpp"
#include "fluxent/resonance.hpp"

namespace fluxent {

struct SeriesConfig {
    int k_max{0};              // 0 selects ceil(A/omega) + 20
    double denom_guard{0.0};   // 0 selects 0.05 * omega
    int n_quad{2048};
};

struct ResolvedSeries {
    int k_max{0};
    double guard{0.0};
    int n_quad{0};
};

inline ResolvedSeries resolve_series(const SystemParams& p, const SeriesConfig& c) {
    const int floor_k = static_cast<int>(std::ceil(p.drive.amplitude / p.drive.omega));
    ResolvedSeries r;
    r.k_max = c.k_max == 0 ? floor_k + 20 : c.k_max;
    if (r.k_max < floor_k + 10)
        throw ParameterError(fmt::format("k_max = {} is below ceil(A/omega) + 10 = {}", r.k_max, floor_k + 10));
    r.guard = c.denom_guard > 0.0 ? c.denom_guard : 0.05 * p.drive.omega;
    if (c.denom_guard < 0.0) throw ParameterError("denom_guard must be >= 0");
    if (c.n_quad < 8) throw ParameterError("n_quad must be >= 8");
    r.n_quad = c.n_quad;
    return r;
}

struct SeriesValue {
    double value{0.0};
    double remainder_bound{0.0};
};

namespace detail {

// k in [k_lo, k_hi] minimising |base + k*omega|; ties go to the smaller |k|.
inline int nearest_order(double base, double omega, int k_lo, int k_hi) {
    const double x = -base / omega;
    int best = std::clamp(static_cast<int>(std::floor(x)), k_lo, k_hi);
    for (int k : {best - 1, best + 1, best + 2}) {
        if (k < k_lo || k > k_hi) continue;
        const double a = std::fabs(base + k * omega);
        const double b = std::fabs(base + best * omega);
        if (a < b - 1e-12 * std::max(1.0, b) || (std::fabs(a - b) <= 1e-12 * std::max(1.0, b) && std::abs(k) < std::abs(best)))
            best = k;
    }
    return best;
}

inline ResonanceInfo single_qubit(int q, CouplingBranch b, int k, double residual) {
    return {ResonanceKind::SingleQubit, q, b, k, residual};
}

inline ResonanceInfo two_qubit(int k, double residual) {
    return {ResonanceKind::TwoQubit, 0, CouplingBranch::Plus, k, residual};
}

}  // namespace detail

// Mean over alpha of |sum_j c_j exp(i j alpha)| by the trapezoid rule on n
// nodes. A common phase factor exp(i k0 alpha) does not change the modulus, so
// the index offset of c is irrelevant.
inline double mean_abs_fourier(const std::vector<double>& c, int n) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        const Complex step = std::polar(1.0, 2.0 * std::numbers::pi * j / n);
        Complex s = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * step + *it;
        sum += std::abs(s);
    }
    return sum / n;
}

// Perturbative Floquet mode u1 (the dressed |down,down> state) away from
// every resonance, with its concurrence Fourier coefficients C_k.
class NonresonantSeries {
public:
    NonresonantSeries(const SystemParams& p, const SeriesConfig& cfg)
        : p_(p), r_(resolve_series(p, cfg)), z_(p.drive.amplitude / p.drive.omega),
          j_(z_, 3 * r_.k_max + 2) {
        validate(p);
        const int K = r_.k_max;
        const double w = p.drive.omega;
        for (int q = 1; q <= 2; ++q) {
            auto& lam = q == 1 ? lam1_ : lam2_;
            lam.assign(2 * K + 1, 0.0);
            const double base = p.qubit(q).eps + p.g;
            for (int k = -K; k <= K; ++k) {
                const double d = base + k * w;
                if (std::fabs(d) < r_.guard)
                    throw ResonantDenominator(detail::single_qubit(q, CouplingBranch::Plus, k, d));
                lam[k + K] = j_(k) / (2.0 * d);
            }
        }
        const double e12 = p.q1.eps + p.q2.eps;
        for (int k = -K; k <= K; ++k) {
            const double d = e12 + k * w;
            if (std::fabs(d) < r_.guard) throw ResonantDenominator(detail::two_qubit(k, d));
        }
        coeff_.assign(2 * K + 1, 0.0);
        for (int k = -K; k <= K; ++k) {
            double s = 0.0;
            const double inv = 1.0 / (2.0 * (e12 + k * w));
            for (int n = -K; n <= K; ++n)
                s += (lambda(1, n) + lambda(2, n)) * j_(k - n) * inv - lambda(1, n) * lambda(2, k - n);
            coeff_[k + K] = s;
        }
    }

    const ResolvedSeries& resolved() const { return r_; }
    int k_max() const { return r_.k_max; }
    double bessel(int n) const { return j_(n); }

    // J_k(A/omega) / (2(eps_q + g + k omega)); zero beyond the truncation.
    double lambda(int q, int k) const {
        if (std::abs(k) > r_.k_max) return 0.0;
        return (q == 1 ? lam1_ : lam2_)[k + r_.k_max];
    }

    SeriesValue chi(int q, int k) const {
        const int K = r_.k_max;
        SeriesValue v;
        for (int n = -K; n <= K; ++n) v.value += j_(n + k) * lambda(q, n);
        v.remainder_bound = std::max(std::fabs(j_(K + k) * lambda(q, K)), std::fabs(j_(-K + k) * lambda(q, -K)));
        return v;
    }

    double coeff(int k) const {
        if (std::abs(k) > r_.k_max) return 0.0;
        return coeff_[k + r_.k_max];
    }

    // Fourier component k of |u1(t)> = sum_k exp(ik(omega t - phi0)) |u1k>.
    StateVector mode_coefficient(int k) const {
        const int K = r_.k_max;
        const double w = p_.drive.omega;
        const double d1s = p_.q1.delta * p_.q1.delta;
        const double d2s = p_.q2.delta * p_.q2.delta;
        double norm_sum = 0.0;
        for (int n = -K; n <= K; ++n) norm_sum += d1s * lambda(1, n) * lambda(1, n) + d2s * lambda(2, n) * lambda(2, n);
        double c1 = j_(k) * (1.0 - 0.5 * norm_sum);
        for (int m = -K; m <= K; ++m) {
            if (m == 0) continue;
            c1 += 0.5 * j_(k - m) * (d1s * chi(1, -m).value + d2s * chi(2, -m).value) / (m * w);
        }
        const double e12 = p_.q1.eps + p_.q2.eps;
        double c4 = 0.0;
        for (int m = -K; m <= K; ++m) {
            double inner = 0.0;
            for (int n = -K; n <= K; ++n) inner += (lambda(1, n) + lambda(2, n)) * j_(m - n);
            c4 += inner * j_(m - k) / (e12 + m * w);
        }
        c4 *= 0.5 * p_.q1.delta * p_.q2.delta;
        return StateVector(c1, p_.q2.delta * lambda(2, k), p_.q1.delta * lambda(1, k), c4);
    }

    StateVector mode(double t) const {
        const double a = p_.drive.omega * t - p_.drive.phi0;
        StateVector v = StateVector::Zero();
        for (int k = -r_.k_max; k <= r_.k_max; ++k) v += std::polar(1.0, k * a) * mode_coefficient(k);
        return v;
    }

    double concurrence_at_phase(double alpha) const {
        Complex s = 0.0;
        for (int k = -r_.k_max; k <= r_.k_max; ++k) s += coeff(k) * std::polar(1.0, k * alpha);
        return 2.0 * p_.q1.delta * p_.q2.delta * std::abs(s);
    }

    double concurrence(double t) const { return concurrence_at_phase(p_.drive.omega * t - p_.drive.phi0); }

    double averaged_concurrence() const {
        return 2.0 * p_.q1.delta * p_.q2.delta * mean_abs_fourier(coeff_, r_.n_quad);
    }

    // Bound on the concurrence lost to truncating C_k at |k| = k_max.
    double truncation_bound() const {
        return 2.0 * p_.q1.delta * p_.q2.delta * (std::fabs(coeff(r_.k_max)) + std::fabs(coeff(-r_.k_max)));
    }

private:
    SystemParams p_;
    ResolvedSeries r_;
    double z_;
    BesselTable j_;
    std::vector<double> lam1_, lam2_, coeff_;
};

inline double lambda_qk(const SystemParams& p, const SeriesConfig& c, int q, int k) {
    const ResolvedSeries r = resolve_series(p, c);
    const double d = p.qubit(q).eps + p.g + k * p.drive.omega;
    if (std::fabs(d) < r.guard) throw ResonantDenominator(detail::single_qubit(q, CouplingBranch::Plus, k, d));
    return bessel_j(k, p.drive.amplitude / p.drive.omega) / (2.0 * d);
}

inline SeriesValue chi_qk(const SystemParams& p, const SeriesConfig& c, int q, int k) {
    return NonresonantSeries(p, c).chi(q, k);
}

inline double coeff_Ck(const SystemParams& p, const SeriesConfig& c, int k) { return NonresonantSeries(p, c).coeff(k); }

struct FloquetModeCoeffs {
    int k{0};
    StateVector vector{StateVector::Zero()};
};

inline FloquetModeCoeffs floquet_mode_coeffs(const SystemParams& p, const SeriesConfig& c, int k) {
    return {k, NonresonantSeries(p, c).mode_coefficient(k)};
}

inline StateVector floquet_mode_u1(const SystemParams& p, const SeriesConfig& c, double t) {
    return NonresonantSeries(p, c).mode(t);
}

inline double concurrence_time_nonres(const SystemParams& p, const SeriesConfig& c, double t) {
    return NonresonantSeries(p, c).concurrence(t);
}

inline double averaged_concurrence_nonres(const SystemParams& p, const SeriesConfig& c) {
    return NonresonantSeries(p, c).averaged_concurrence();
}

inline double reduce_quasienergy(double e, double omega) {
    double r = e - omega * std::round(e / omega);
    if (r <= -0.5 * omega) r += omega;
    if (r > 0.5 * omega) r -= omega;
    return r;
}

// Diagonal energies of the undriven, untunnelled Hamiltonian per basis index.
inline std::array<double, 4> diabatic_energies(const SystemParams& p) {
    const double e1 = p.q1.eps, e2 = p.q2.eps, g = p.g;
    return {-0.5 * (e1 + e2 + g), -0.5 * (e1 - e2 - g), -0.5 * (-e1 + e2 - g), 0.5 * (e1 + e2 - g)};
}

inline std::array<double, 4> quasienergies_zeroth(const SystemParams& p) {
    auto e = diabatic_energies(p);
    for (double& x : e) x = reduce_quasienergy(x, p.drive.omega);
    return e;
}

struct OrderWindow {
    int k_min{0};
    int k_max{0};
};

// Resonance conditions in the order window whose residual is below
// scale * guard, plus the overall nearest condition, closest first.
inline std::vector<ResonanceInfo> classify_resonances(const SystemParams& p, const SeriesConfig& c,
                                                      std::optional<OrderWindow> window = std::nullopt,
                                                      double scale = 1.0) {
    const ResolvedSeries r = resolve_series(p, c);
    const OrderWindow win = window.value_or(OrderWindow{-r.k_max, r.k_max});
    const double w = p.drive.omega;
    std::vector<ResonanceInfo> all;
    auto add = [&](ResonanceInfo proto, double base) {
        const int k0 = detail::nearest_order(base, w, win.k_min, win.k_max);
        for (int k = k0 - 1; k <= k0 + 1; ++k) {
            if (k < win.k_min || k > win.k_max) continue;
            const double d = base + k * w;
            if (k == k0 || std::fabs(d) < scale * r.guard) {
                ResonanceInfo info = proto;
                info.k = k;
                info.detuning = d;
                all.push_back(info);
            }
        }
    };
    for (int q = 1; q <= 2; ++q) {
        add(detail::single_qubit(q, CouplingBranch::Plus, 0, 0.0), p.qubit(q).eps + p.g);
        add(detail::single_qubit(q, CouplingBranch::Minus, 0, 0.0), p.qubit(q).eps - p.g);
    }
    add(detail::two_qubit(0, 0.0), p.q1.eps + p.q2.eps);
    std::stable_sort(all.begin(), all.end(),
                     [](const ResonanceInfo& a, const ResonanceInfo& b) {
                         return std::fabs(a.detuning) < std::fabs(b.detuning);
                     });
    std::vector<ResonanceInfo> out;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (i == 0 || std::fabs(all[i].detuning) < scale * r.guard) out.push_back(all[i]);
    return out;
}

}  // namespace fluxent
