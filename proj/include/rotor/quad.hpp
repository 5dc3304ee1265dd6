#pragma once

#include <complex>
#include <vector>

#include <boost/multiprecision/float128.hpp>
#include <Eigen/Dense>

#include "rotor/resonance.hpp"

namespace Eigen {

template <>
struct NumTraits<boost::multiprecision::float128> : GenericNumTraits<boost::multiprecision::float128> {
    using Real = boost::multiprecision::float128;
    using NonInteger = Real;
    using Nested = Real;
    using Literal = Real;
    enum {
        IsInteger = 0,
        IsSigned = 1,
        IsComplex = 0,
        RequireInitialization = 1,
        ReadCost = 1,
        AddCost = 4,
        MulCost = 8
    };
    static Real dummy_precision() { return Real(1e-30); }
    static int digits10() { return std::numeric_limits<Real>::digits10; }
};

} // namespace Eigen

namespace rotor::quad {

// Quad-precision (113-bit significand) counterparts of the double builders.
// Used where eigenphase motion is far below double-precision resolution,
// e.g. band derivatives of order mu^7 at mu = 1e-4.

using Real = boost::multiprecision::float128;
using Complex = std::complex<Real>;
using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

Real pi();

Matrix build_G(const ResonanceParams& params);
Matrix build_S(const ResonanceParams& params, const Real& vartheta);
Matrix build_X(const ResonanceParams& params, const Real& theta);

struct EigenSystem {
    std::vector<Complex> values; ///< unit modulus
    Matrix vectors;              ///< orthonormal columns
};

/// Eigen-decomposition of a unitary matrix through its complex Schur form;
/// the Schur vectors of a normal matrix are its eigenvectors.
EigenSystem unitary_eigensystem(const Matrix& u);

/// |det| of the leading k x k block.
Real leading_minor_modulus(const Matrix& m, Eigen::Index k);

} // namespace rotor::quad
