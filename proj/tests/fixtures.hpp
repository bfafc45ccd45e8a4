#pragma once

#include <random>

#include <Eigen/QR>

#include "fluxent/model.hpp"

namespace fixtures {

using fluxent::Complex;
using fluxent::Operator;
using fluxent::SystemParams;

// Fig. 1 point: eps1 + eps2 sits 0.007 below the ten-photon two-qubit resonance.
inline SystemParams fig1(double gamma = 1e-4) {
    SystemParams p;
    p.q1 = {0.1, 3.331, gamma, 0.0, 0.0};
    p.q2 = {0.15, 6.662, gamma, 0.0, 0.0};
    p.g = 0.15;
    p.drive = {5.0, 1.0, 0.0};
    p.temperature_mk = 30.0;
    fluxent::derive_excitation_rates(p);
    return p;
}

// Moderate drive and splittings, every channel switched on.
inline SystemParams generic() {
    SystemParams p;
    p.q1 = {0.3, 1.3, 0.02, 0.004, 0.01};
    p.q2 = {0.2, 2.1, 0.03, 0.002, 0.005};
    p.g = 0.15;
    p.drive = {1.5, 1.0, 0.7};
    return p;
}

inline Operator random_hermitian(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Operator a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = Complex(n(rng), n(rng));
    return 0.5 * (a + a.adjoint());
}

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

}  // namespace fixtures
