#pragma once

#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "fluxent/errors.hpp"
#include "fluxent/model.hpp"

namespace fluxent {

struct PhysicalityTolerance {
    double hermiticity{1e-12};
    double trace{1e-10};
    double min_eigenvalue{-1e-10};
};

inline double hermiticity_error(const Operator& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

inline double trace_error(const Operator& m) { return std::abs(m.trace() - 1.0); }

inline Eigen::Vector4d hermitian_eigenvalues(const Operator& m) {
    Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double min_eigenvalue(const Operator& m) { return hermitian_eigenvalues(m).minCoeff(); }

inline double frobenius_distance(const Operator& a, const Operator& b) { return (a - b).norm(); }

// Half the trace norm of a - b for Hermitian a, b.
inline double trace_distance(const Operator& a, const Operator& b) {
    return 0.5 * hermitian_eigenvalues(a - b).cwiseAbs().sum();
}

class DensityMatrix {
public:
    DensityMatrix() : m_(Operator::Zero()) { m_(0, 0) = 1.0; }

    explicit DensityMatrix(const Operator& m, const PhysicalityTolerance& tol = {}) : m_(m) {
        const double h = hermiticity_error(m);
        if (h > tol.hermiticity)
            throw NonPhysicalState(fmt::format("density matrix not Hermitian (error {:.3g})", h));
        const double tr = trace_error(m);
        if (tr > tol.trace) throw NonPhysicalState(fmt::format("density matrix trace error {:.3g}", tr));
        const double lmin = fluxent::min_eigenvalue(m);
        if (lmin < tol.min_eigenvalue)
            throw NonPhysicalState(fmt::format("density matrix has negative eigenvalue {:.3g}", lmin));
    }

    static DensityMatrix unchecked(const Operator& m) {
        DensityMatrix d;
        d.m_ = m;
        return d;
    }

    static DensityMatrix pure(const StateVector& psi) {
        const StateVector n = psi / psi.norm();
        return unchecked(n * n.adjoint());
    }

    static DensityMatrix basis_state(int index) {
        Operator m = Operator::Zero();
        m(index, index) = 1.0;
        return unchecked(m);
    }

    static DensityMatrix maximally_mixed() { return unchecked(0.25 * Operator::Identity()); }

    const Operator& matrix() const { return m_; }
    Complex operator()(int i, int j) const { return m_(i, j); }
    double trace() const { return m_.trace().real(); }
    double min_eigenvalue() const { return fluxent::min_eigenvalue(m_); }

private:
    Operator m_;
};

}  // namespace fluxent
