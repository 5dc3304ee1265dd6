#pragma once

#include <complex>

#include <Eigen/Dense>

namespace rotor {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Largest entry of |U^H U - I|.
double unitarity_defect(const CMatrix& u);

/// Dense square matrix that passed the unitarity check at construction.
///
/// Every Floquet-type matrix built by the library (G, S, C, X and the kick
/// exponentials) is handed out as a UnitaryMatrix, so downstream eigenphase
/// code never has to re-validate its input.
class UnitaryMatrix {
public:
    static constexpr double kTolerance = 1e-12;

    /// Throws NotUnitary if the defect exceeds `tolerance`.
    explicit UnitaryMatrix(CMatrix m, double tolerance = kTolerance);

    const CMatrix& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }
    double defect() const { return unitarity_defect(m_); }

    /// Multiplies by a unimodular constant; the result is still unitary.
    UnitaryMatrix rotated(double phase) const;

private:
    CMatrix m_;
};

} // namespace rotor
