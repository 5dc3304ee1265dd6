#include "rotor/linalg.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "rotor/errors.hpp"

namespace rotor {

double unitarity_defect(const CMatrix& u)
{
    if (u.rows() != u.cols())
        return INFINITY;
    const CMatrix gram = u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols());
    return gram.cwiseAbs().maxCoeff();
}

UnitaryMatrix::UnitaryMatrix(CMatrix m, double tolerance) : m_(std::move(m))
{
    if (m_.rows() == 0 || m_.rows() != m_.cols())
        throw NotUnitary("matrix is empty or not square");
    const double d = unitarity_defect(m_);
    if (!(d < tolerance))
        throw NotUnitary("unitarity defect " + std::to_string(d) + " exceeds tolerance");
}

UnitaryMatrix UnitaryMatrix::rotated(double phase) const
{
    return UnitaryMatrix(m_ * std::polar(1.0, phase));
}

} // namespace rotor
