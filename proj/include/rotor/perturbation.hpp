#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rotor/linalg.hpp"
#include "rotor/resonance.hpp"

namespace rotor {

/// Nearest-neighbour walk on the ring {1, ..., q}. A step from site 1 to
/// site q picks up the corner factor exp(i theta) and counts +1 towards the
/// winding; a step from q to 1 counts -1.
struct LatticePath {
    long q = 0;
    std::vector<long> sites; ///< m_0, ..., m_l
    std::vector<int> steps;  ///< +1 (towards larger index) or -1, one per step
    long winding = 0;

    std::size_t length() const noexcept { return steps.size(); }
    LatticePath reversed() const;

    /// Walk from `start` taking the given +-1 steps. Needed for q <= 2 where
    /// the sites alone do not determine the direction.
    static LatticePath from_steps(long q, long start, std::vector<int> steps);
    /// Consecutive sites must differ by +-1 mod q; requires q >= 3.
    static LatticePath from_sites(long q, std::vector<long> sites);

    bool operator==(const LatticePath&) const = default;
};

/// Ordered composition r_1 + ... + r_n of a positive integer.
struct Composition {
    std::vector<int> parts;

    int total() const;
    std::vector<int> partial_sums() const; ///< l_1, ..., l_n
    Composition reversed() const;

    static Composition from_parts(std::vector<int> parts);
    /// Composition of `total` whose partial sums l_1 .. l_{n-1} are the set
    /// bits of `cuts` (bit l-1 <-> cut after position l).
    static Composition from_cuts(int total, unsigned long long cuts);

    bool operator==(const Composition&) const = default;
};

/// Exponent of the leading band-width term of band j: max(2j-1, q-2j+1), and
/// q for the nondegenerate band j = (q+1)/2. Requires q an odd prime
/// (UnsupportedParams) and 1 <= j <= (q+1)/2 (InvalidBand).
int alpha_exponent(int j, long q);

/// Shortest path carrying the leading contribution: rightward j..q-j+1 when
/// 4j < q+2, leftward through the corner otherwise, and the winding loop
/// j, j-1, ..., 1, q, ..., j for j = (q+1)/2.
LatticePath canonical_path(int j, long q);

/// Weight g(m_0) g(m_{l_1}) ... g(m_{l_n}) h(m_l) with g(m, z) = a_m / (a_m - z)
/// and h(m) = 1 / a_m. Throws PoleHit if |a_m - z| < 1e-14 for a needed site.
Complex path_operator_element(const ResonanceParams& params, const LatticePath& path, const Composition& comp,
                              Complex z);

/// 2^{-l} exp(i nu theta) times the weight above: one path's contribution to
/// the matrix element of the resolvent expansion.
Complex path_matrix_term(const ResonanceParams& params, const LatticePath& path, const Composition& comp, Complex z,
                         double theta);

/// <j| P(theta, z, r) |k> as an explicit sum over all paths in Lambda(l, j, k).
/// Enumerates 2^l walks; BudgetExceeded for l > 24.
Complex path_sum_element(const ResonanceParams& params, const Composition& comp, Complex z, double theta, long j,
                         long k);

/// Sum over n and all compositions r of alpha into n parts of
///     (-1)^n / (r_1! ... r_n!) * prod_{s<n} w[l_s - 1].
/// `cut_weight` holds w_1 .. w_{alpha-1}.
Complex composition_sum_dp(int alpha, std::span<const Complex> cut_weight);
/// Same sum by visiting all 2^{alpha-1} compositions; blocks are reduced
/// in a fixed pairwise tree so the result does not depend on `threads`.
Complex composition_sum_enumerate(int alpha, std::span<const Complex> cut_weight, unsigned threads = 0);

/// 1 / k! for k = 0..n, from compensated factorial products.
std::vector<double> inverse_factorials(int n);

struct PathSumOptions {
    int brute_force_max_alpha = 24; ///< cross-check by enumeration up to this exponent
    bool oracle = true;
    std::vector<double> oracle_mu = {1e-3, 3e-4, 1e-4}; ///< tried in order until the gap is below 2%
    double oracle_tolerance = 0.02;
    double oracle_floor = 1e-28; ///< smallest mu^alpha |s| the quad oracle can resolve
    unsigned threads = 0;
};

struct PathSumCoefficient {
    int j = 0;
    int alpha = 0;
    LatticePath path;
    Complex s;                       ///< dynamic-programming value
    Complex s_enumerated;            ///< NaN when enumeration was skipped
    double enumeration_gap = 0.0;    ///< |s - s_enumerated| / |s|, NaN when skipped
    Complex oracle_estimate;         ///< NaN when the oracle was skipped
    double oracle_mu = 0.0;
    double relative_gap = 0.0;       ///< ||s| - |oracle|| / |oracle|, NaN when skipped
};

constexpr int kMaxPathAlpha = 30;

/// s_j from the closed-form residues of the canonical path(s). For the
/// nondegenerate band both winding loops contribute. Requires a primitive
/// resonance at beta = 1/2 with q an odd prime (UnsupportedParams), a valid
/// band (InvalidBand) and alpha_j <= 30 (BudgetExceeded).
PathSumCoefficient path_sum_coefficient(const ResonanceParams& params, int j, const PathSumOptions& options = {});

/// Richardson-extrapolated centred difference d phi_j / d theta at `theta`,
/// with phi_j tracked in quad precision from theta = 0 at kick `mu`. Uses
/// the ring form where available and S(theta / q) otherwise. Requires
/// 0 < mu <= 1e-2 and 1e-5 <= h <= 1e-2 (InvalidInput).
double numerical_band_derivative(const ResonanceParams& params, int j, double mu, double theta, double h = 1e-2);

/// theta at which band j's derivative is sampled: pi/2, or pi/4 for the
/// nondegenerate band (cosine profile).
double probe_angle(int j, long q);

struct ScalingFit {
    double exponent = 0.0;
    double log_prefactor = 0.0;
    double residual_rms = 0.0;
    std::vector<double> mu;
    std::vector<double> derivative;
};

/// Least-squares slope of log|d phi_j / d theta| against log mu at the probe
/// angle. Needs >= 4 values spanning a decade (InsufficientData), all in
/// (0, 1e-2] (InvalidInput).
ScalingFit scaling_fit(const ResonanceParams& params, int j, std::span<const double> mu_values,
                       unsigned threads = 0);

} // namespace rotor
