#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "fluxent/model.hpp"

using namespace fluxent;

namespace {

// Index i = 2*b1 + b2 with b = 0 the sigma_z = +1 state.
int bit(int i, int q) { return q == 1 ? (i >> 1) & 1 : i & 1; }

Operator op_from(int q, char kind) {
    Operator a = Operator::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const int other = 3 - q;
            if (bit(i, other) != bit(j, other)) continue;
            const int bi = bit(i, q), bj = bit(j, q);
            if (kind == 'z' && i == j) a(i, j) = bi == 0 ? 1.0 : -1.0;
            if (kind == '-' && bi == 0 && bj == 1) a(i, j) = 1.0;
            if (kind == '+' && bi == 1 && bj == 0) a(i, j) = 1.0;
        }
    return a;
}

// a rho a^dag - (a^dag a rho + rho a^dag a)/2, entry by entry.
Operator brute_lindblad(const Operator& a, const Operator& rho) {
    Operator out = Operator::Zero();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Complex v = 0.0;
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) v += a(i, k) * rho(k, l) * std::conj(a(j, l));
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) {
                    v -= 0.5 * std::conj(a(k, i)) * a(k, l) * rho(l, j);
                    v -= 0.5 * rho(i, l) * std::conj(a(k, l)) * a(k, j);
                }
            out(i, j) = v;
        }
    return out;
}

}  // namespace

TEST(Hamiltonian, DecoupledStaticLimitIsDiagonal) {
    SystemParams p;
    p.q1.eps = p.q2.eps = 1.7;
    p.drive.amplitude = 0.0;
    const Operator h = hamiltonian(0.3, p);
    Operator expect = Operator::Zero();
    expect(0, 0) = -1.7;
    expect(3, 3) = 1.7;
    EXPECT_LT((h - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Hamiltonian, CosineAtMaximumAtPhaseOrigin) {
    SystemParams p = fixtures::generic();
    p.q1.delta = p.q2.delta = 0.0;
    p.g = 0.0;
    const Operator h = hamiltonian(p.drive.phi0 / p.drive.omega, p);
    EXPECT_NEAR(h(0, 0).real(), -0.5 * (p.q1.eps + p.q2.eps + 2.0 * p.drive.amplitude), 1e-14);
}

TEST(Hamiltonian, Fig1FirstDiagonalEntry) {
    const SystemParams p = fixtures::fig1();
    // -(eps1 + A + eps2 + A + g) / 2 evaluated by hand
    EXPECT_NEAR(hamiltonian(0.0, p)(0, 0).real(), -10.0715, 1e-12);
    EXPECT_EQ(hamiltonian(0.0, p)(0, 0).imag(), 0.0);
}

TEST(Hamiltonian, MatchesExplicitEntries) {
    const SystemParams p = fixtures::generic();
    const double t = 2.2;
    const double c = std::cos(p.drive.omega * t - p.drive.phi0);
    const double e1 = p.q1.eps + p.drive.amplitude * c, e2 = p.q2.eps + p.drive.amplitude * c;
    Operator h = Operator::Zero();
    for (int i = 0; i < 4; ++i) {
        const double s1 = bit(i, 1) == 0 ? 1.0 : -1.0, s2 = bit(i, 2) == 0 ? 1.0 : -1.0;
        h(i, i) = -0.5 * (e1 * s1 + e2 * s2) - 0.5 * p.g * s1 * s2;
        h(i, i ^ 2) = -0.5 * p.q1.delta;
        h(i, i ^ 1) = -0.5 * p.q2.delta;
    }
    EXPECT_LT((hamiltonian(t, p) - h).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Hamiltonian, PeriodicAndHermitian) {
    const SystemParams p = fixtures::fig1();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 200.0);
    for (int i = 0; i < 100; ++i) {
        const double t = u(rng);
        const Operator h = hamiltonian(t, p);
        EXPECT_LT((hamiltonian(t + p.period(), p) - h).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Dissipator, ZeroRatesGiveZero) {
    SystemParams p = fixtures::generic();
    p.q1.gamma_relax = p.q1.gamma_excite = p.q1.gamma_phi = 0.0;
    p.q2.gamma_relax = p.q2.gamma_excite = p.q2.gamma_phi = 0.0;
    std::mt19937_64 rng(1);
    EXPECT_EQ(dissipator(fixtures::random_density(rng), p).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dissipator, SingleRelaxationChannelMovesOnePopulation) {
    SystemParams p;
    p.q1.gamma_relax = 0.3;
    // both qubits excited; qubit 1 decays, leaving qubit 2 excited (index 1)
    const Operator d = dissipator(Operator(Eigen::Vector4cd(0, 0, 0, 1).asDiagonal()), p);
    EXPECT_NEAR(d(3, 3).real(), -0.3, 1e-15);
    EXPECT_NEAR(d(1, 1).real(), 0.3, 1e-15);
    EXPECT_NEAR(d(0, 0).real(), 0.0, 1e-15);
    EXPECT_NEAR(d(2, 2).real(), 0.0, 1e-15);
}

TEST(Dissipator, MatchesTermByTermEvaluation) {
    const SystemParams p = fixtures::generic();
    std::mt19937_64 rng(11);
    for (int n = 0; n < 100; ++n) {
        const Operator rho = fixtures::random_hermitian(rng);
        Operator expect = Operator::Zero();
        for (int q = 1; q <= 2; ++q) {
            const auto& s = p.qubit(q);
            expect += s.gamma_phi * brute_lindblad(op_from(q, 'z'), rho);
            expect += s.gamma_relax * brute_lindblad(op_from(q, '-'), rho);
            expect += s.gamma_excite * brute_lindblad(op_from(q, '+'), rho);
        }
        const Operator d = dissipator(rho, p);
        EXPECT_LT((d - expect).cwiseAbs().maxCoeff(), 1e-13);
        EXPECT_LT(std::abs(d.trace()), 1e-12);
        EXPECT_LT((d - d.adjoint()).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(ThermalRate, ZeroTemperature) { EXPECT_EQ(thermal_excitation_rate(1e-3, 2.0, 0.0), 0.0); }

TEST(ThermalRate, GapEqualToTemperature) {
    EXPECT_NEAR(thermal_excitation_rate(2e-3, 0.7, 0.7), 2e-3 / std::exp(1.0), 1e-18);
}

TEST(ThermalRate, Fig1QubitOneGolden) {
    const SystemParams p = fixtures::fig1();
    const double tau = 30.0 * p.kb_conversion;
    const double expect = std::exp(-std::sqrt(3.331 * 3.331 + 0.1 * 0.1) / tau);
    EXPECT_NEAR(p.q1.gamma_excite / p.q1.gamma_relax, expect, 1e-15);
    EXPECT_NEAR(expect, 0.0048384524441646235, 1e-15);
}

TEST(EnergyGap, Cases) {
    SystemParams p;
    p.q1 = {0.4, 0.0};
    p.q2 = {0.0, 2.5};
    EXPECT_DOUBLE_EQ(p.energy_gap(1), 0.4);
    EXPECT_DOUBLE_EQ(p.energy_gap(2), 2.5);
    p.q1 = {4.0, 3.0};
    EXPECT_DOUBLE_EQ(p.energy_gap(1), 5.0);
}

TEST(Validate, RejectsBadInput) {
    SystemParams p = fixtures::generic();
    EXPECT_NO_THROW(validate(p));
    auto bad = p;
    bad.q1.delta = -0.1;
    EXPECT_THROW(validate(bad), ParameterError);
    bad = p;
    bad.q2.gamma_phi = -1e-3;
    EXPECT_THROW(validate(bad), ParameterError);
    bad = p;
    bad.drive.omega = 0.0;
    EXPECT_THROW(validate(bad), ParameterError);
    bad = p;
    bad.drive.phi0 = 2.0 * std::numbers::pi;
    EXPECT_THROW(validate(bad), ParameterError);
    bad = p;
    bad.temperature_mk = -1.0;
    EXPECT_THROW(validate(bad), ParameterError);
}

TEST(Validate, PerturbativeWarningsAreSoft) {
    EXPECT_TRUE(perturbative_warnings(fixtures::fig1()).empty());
    SystemParams p = fixtures::fig1();
    p.drive.amplitude = 0.1;
    EXPECT_FALSE(perturbative_warnings(p).empty());
    EXPECT_NO_THROW(validate(p));
}
