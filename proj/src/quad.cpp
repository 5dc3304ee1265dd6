#include "rotor/quad.hpp"


#include "builders.hpp"
#include "rotor/errors.hpp"

namespace rotor::quad {

Real pi()
{
    return detail::pi_v<Real>();
}

Matrix build_G(const ResonanceParams& params)
{
    return detail::make_G<Real>(params);
}

Matrix build_S(const ResonanceParams& params, const Real& vartheta)
{
    Matrix s = detail::make_G<Real>(params);
    const Real mu(params.mu);
    for (long j = 0; j < params.Q; ++j) {
        const Real x = -mu * cos(vartheta + Real(2) * pi() * Real(j) / Real(params.Q));
        s.row(j) *= Complex(cos(x), sin(x));
    }
    return s;
}

Matrix build_X(const ResonanceParams& params, const Real& theta)
{
    detail::require_ring_form(params);
    const Matrix c = detail::make_C<Real>(params);
    if (params.mu == 0.0)
        return c;
    return c * detail::hermitian_exp<Real>(detail::make_hopping<Real>(params.q, theta), Real(params.mu));
}

EigenSystem unitary_eigensystem(const Matrix& u)
{
    Eigen::ComplexSchur<Matrix> schur(u);
    if (schur.info() != Eigen::Success)
        throw ConvergenceFailure("quad-precision Schur decomposition did not converge");
    EigenSystem out;
    const Matrix& t = schur.matrixT();
    out.values.reserve(static_cast<std::size_t>(t.rows()));
    for (Eigen::Index k = 0; k < t.rows(); ++k) {
        const Complex w = t(k, k);
        out.values.push_back(w / Real(abs(w)));
    }
    out.vectors = schur.matrixU();
    return out;
}

Real leading_minor_modulus(const Matrix& m, Eigen::Index k)
{
    const Matrix block = m.topLeftCorner(k, k);
    return abs(Eigen::PartialPivLU<Matrix>(block).determinant());
}

} // namespace rotor::quad
