#pragma once

#include <vector>

#include "rotor/linalg.hpp"

namespace rotor {

/// Parameters of a kicked-rotor resonance.
///
/// The kick period is tau = 2*pi*P/Q, p/q is P/Q in lowest terms (q is the
/// resonance order, Q the resonance length) and beta is the quasi-momentum,
/// stored reduced to [0, 1). Instances are produced by validate_resonance;
/// nu is kept as metadata only.
struct ResonanceParams {
    long P = 1;
    long Q = 1;
    long p = 1;
    long q = 1;
    long nu = 0;
    double beta = 0.5;
    double mu = 0.0;
    double tau = 0.0;
    bool primitive = true;

    /// Copy with kick strength `mu` (must be finite and >= 0).
    ResonanceParams with_kick(double mu) const;

    friend bool operator==(const ResonanceParams&, const ResonanceParams&) = default;
};

/// Checks the resonance conditions tau = 2 pi P/Q and beta = nu/P + Q/2 (mod 1).
/// Throws InvalidInput for P, Q < 1 and NotAResonance when the beta condition
/// fails by more than 1e-12.
ResonanceParams validate_resonance(long P, long Q, double beta, long nu);

/// Convenience for primitive resonances: P = p, Q = q.
ResonanceParams primitive_resonance(long p, long q, double beta, long nu = 0);

/// The quasi-momentum selected by nu for the given (P, Q), in [0, 1).
double resonant_beta(long P, long Q, long nu);

/// All nu in [0, P) that make (P, Q, beta) a resonance.
std::vector<long> admissible_nu(long P, long Q, double beta);

/// Eigenvalues a_r of the free block G together with their degeneracy classes.
struct UnperturbedSpectrum {
    std::vector<Complex> a;                ///< a_1..a_Q stored at index r-1
    std::vector<double> phase;             ///< arg a_r reduced to (-pi, pi]
    std::vector<std::vector<int>> classes; ///< 1-based indices of equal a_r, sorted

    /// Index into `classes` of the class containing r (1-based).
    std::size_t class_of(int r) const;
    std::size_t size() const noexcept { return a.size(); }
};

/// Phase of a_r = exp(-i pi p (r + beta - 1)^2 / q) for any integer r,
/// reduced to (-pi, pi]. Exact reduction when beta is a multiple of 1/2.
double unperturbed_phase(long p, long q, double beta, long r);

UnperturbedSpectrum unperturbed_eigenvalues(const ResonanceParams& params);

/// Circular distance between two phases, in [0, pi].
double phase_distance(double a, double b);

} // namespace rotor
