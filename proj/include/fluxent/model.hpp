#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "fluxent/errors.hpp"

namespace fluxent {

using Complex = std::complex<double>;
using Operator = Eigen::Matrix4cd;
using StateVector = Eigen::Vector4cd;

// Basis index = 2*b1 + b2 with b = 0 the sigma_z = +1 state of a qubit, which
// is the qubit ground state |down>. Index 0 is |down,down>, index 3 |up,up>.
namespace pauli {

inline Eigen::Matrix2cd identity() { return Eigen::Matrix2cd::Identity(); }

inline Eigen::Matrix2cd x() {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}

inline Eigen::Matrix2cd y() {
    Eigen::Matrix2cd m;
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

inline Eigen::Matrix2cd z() {
    Eigen::Matrix2cd m;
    m << 1, 0, 0, -1;
    return m;
}

// |b=0><b=1|: moves population into the sigma_z = +1 (ground) state.
inline Eigen::Matrix2cd lower() {
    Eigen::Matrix2cd m;
    m << 0, 1, 0, 0;
    return m;
}

inline Eigen::Matrix2cd raise() { return lower().adjoint(); }

inline Operator kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Operator r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) r(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
    return r;
}

inline Operator on_qubit(int q, const Eigen::Matrix2cd& op) {
    return q == 1 ? kron(op, identity()) : kron(identity(), op);
}

}  // namespace pauli

struct QubitParams {
    double delta{0.0};
    double eps{0.0};
    double gamma_relax{0.0};
    double gamma_excite{0.0};
    double gamma_phi{0.0};
};

struct DriveParams {
    double amplitude{0.0};
    double omega{1.0};
    double phi0{0.0};
};

struct SystemParams {
    QubitParams q1;
    QubitParams q2;
    double g{0.0};
    DriveParams drive;
    double temperature_mk{0.0};
    // Converts mK to the energy unit of eps: tau_B = temperature_mk * kb_conversion.
    double kb_conversion{0.020836619};

    const QubitParams& qubit(int q) const { return q == 1 ? q1 : q2; }
    QubitParams& qubit(int q) { return q == 1 ? q1 : q2; }
    double period() const { return 2.0 * std::numbers::pi / drive.omega; }
    double tau_b() const { return temperature_mk * kb_conversion; }
    double energy_gap(int q) const { return std::hypot(qubit(q).eps, qubit(q).delta); }
    // Time at which the drive phase omega*t - phi0 vanishes.
    double phase_origin() const { return drive.phi0 / drive.omega; }
};

inline double thermal_excitation_rate(double gamma, double energy_gap, double tau_b) {
    if (gamma < 0.0) throw ParameterError("thermal_excitation_rate: negative relaxation rate");
    if (tau_b < 0.0) throw ParameterError("thermal_excitation_rate: negative temperature");
    if (tau_b == 0.0 || gamma == 0.0) return 0.0;
    if (!(energy_gap > 0.0)) throw ParameterError("thermal_excitation_rate: energy gap must be positive");
    return gamma * std::exp(-energy_gap / tau_b);
}

// Fills gamma_excite of both qubits from detailed balance at temperature_mk.
inline void derive_excitation_rates(SystemParams& p) {
    for (int q = 1; q <= 2; ++q)
        p.qubit(q).gamma_excite = thermal_excitation_rate(p.qubit(q).gamma_relax, p.energy_gap(q), p.tau_b());
}

inline void validate(const SystemParams& p) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ParameterError(what);
    };
    for (int q = 1; q <= 2; ++q) {
        const auto& s = p.qubit(q);
        require(std::isfinite(s.eps) && std::isfinite(s.delta), "eps and delta must be finite");
        require(s.delta >= 0.0, "delta must be >= 0");
        require(s.gamma_relax >= 0.0 && s.gamma_excite >= 0.0 && s.gamma_phi >= 0.0, "rates must be >= 0");
    }
    require(std::isfinite(p.g), "g must be finite");
    require(p.drive.omega > 0.0, "omega must be > 0");
    require(p.drive.amplitude >= 0.0, "drive amplitude must be >= 0");
    require(p.drive.phi0 >= 0.0 && p.drive.phi0 < 2.0 * std::numbers::pi, "phi0 must lie in [0, 2pi)");
    require(p.temperature_mk >= 0.0 && p.kb_conversion > 0.0, "temperature must be >= 0");
}

// Soft checks of the perturbative regime (delta small against eps and A);
// empty when all hold.
inline std::vector<std::string> perturbative_warnings(const SystemParams& p, double ratio = 0.2) {
    std::vector<std::string> out;
    for (int q = 1; q <= 2; ++q) {
        const auto& s = p.qubit(q);
        if (s.delta > ratio * std::fabs(s.eps))
            out.push_back(fmt::format("delta{} = {} is not small against |eps{}| = {}", q, s.delta, q, std::fabs(s.eps)));
        if (s.delta > ratio * p.drive.amplitude)
            out.push_back(fmt::format("delta{} = {} is not small against A = {}", q, s.delta, p.drive.amplitude));
    }
    return out;
}

inline Operator static_hamiltonian(const SystemParams& p) {
    using namespace pauli;
    return -0.5 * (p.q1.eps * on_qubit(1, z()) + p.q1.delta * on_qubit(1, x()) + p.q2.eps * on_qubit(2, z()) +
                   p.q2.delta * on_qubit(2, x())) -
           0.5 * p.g * kron(z(), z());
}

// H(t) = static_hamiltonian + cos(omega t - phi0) * drive_operator.
inline Operator drive_operator(const SystemParams& p) {
    using namespace pauli;
    return -0.5 * p.drive.amplitude * (on_qubit(1, z()) + on_qubit(2, z()));
}

inline Operator hamiltonian(double t, const SystemParams& p) {
    return static_hamiltonian(p) + std::cos(p.drive.omega * t - p.drive.phi0) * drive_operator(p);
}

struct Channel {
    double rate{0.0};
    Operator op;
};

// Dephasing, relaxation toward |down> and thermal excitation for each qubit.
inline std::array<Channel, 6> lindblad_channels(const SystemParams& p) {
    using namespace pauli;
    return {{{p.q1.gamma_phi, on_qubit(1, z())},
             {p.q1.gamma_relax, on_qubit(1, lower())},
             {p.q1.gamma_excite, on_qubit(1, raise())},
             {p.q2.gamma_phi, on_qubit(2, z())},
             {p.q2.gamma_relax, on_qubit(2, lower())},
             {p.q2.gamma_excite, on_qubit(2, raise())}}};
}

inline Operator lindblad_term(const Operator& a, const Operator& rho) {
    const Operator ad = a.adjoint();
    const Operator ada = ad * a;
    return a * rho * ad - 0.5 * (ada * rho + rho * ada);
}

inline Operator dissipator(const Operator& rho, const SystemParams& p) {
    Operator out = Operator::Zero();
    for (const auto& c : lindblad_channels(p))
        if (c.rate != 0.0) out += c.rate * lindblad_term(c.op, rho);
    return out;
}

}  // namespace fluxent
