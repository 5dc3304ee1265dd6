#pragma once

#include <cstdint>
#include <optional>

#include "rotor/linalg.hpp"
#include "rotor/resonance.hpp"

namespace rotor {

// Two Bloch-angle conventions are in use and both are exposed:
//   vartheta in [0, 2 pi / Q)  parameterizes the fibre matrices S(vartheta, mu);
//   theta    in [0, 2 pi)      parameterizes the ring form X(theta, mu),
// related by theta = q * vartheta. Builders accept any finite angle; the
// intervals above are the canonical fundamental domains.

/// Free block: G_jk = (1/Q) sum_s exp(2 pi i s (j-k)/Q) a_{s+1}.
UnitaryMatrix build_G(const ResonanceParams& params);

/// Fibre propagator S(vartheta, mu) = D(vartheta) G with
/// D = diag(exp(-i mu cos(vartheta + 2 pi (j-1)/Q))).
UnitaryMatrix build_S(const ResonanceParams& params, double vartheta);

/// Diagonal C = diag(exp(-i pi p (j - 1/2)^2 / q)).
UnitaryMatrix build_C(const ResonanceParams& params);

/// Hermitian nearest-neighbour ring hopping V(theta) with corner phases
/// exp(+-i theta); entries add up when q <= 2.
CMatrix hopping_matrix(long q, double theta);

/// Ring form X(theta, mu) = C exp(-i mu V(theta)), primitive resonances at
/// beta = 1/2 only (UnsupportedParams otherwise).
UnitaryMatrix build_X(const ResonanceParams& params, double theta);

/// Applies the full propagator to a state sampled on `grid_points` angles in
/// two independent ways (plane-wave kinetic phase on the momentum lattice
/// plus pointwise kick, versus fibre-wise S(vartheta) action) and returns the
/// largest pointwise discrepancy. When `psi` is empty a complex Gaussian
/// state is drawn from `seed`. Throws GridMismatch unless Q divides
/// grid_points.
double verify_direct_integral(const ResonanceParams& params, std::size_t grid_points,
                              const std::optional<CVector>& psi = std::nullopt,
                              std::uint64_t seed = 0);

} // namespace rotor
