#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "rotor/linalg.hpp"
#include "rotor/resonance.hpp"

namespace rotor {

bool is_prime(long n);

enum class GaussCase { MultipleOfQ, FullPeriod, Partial };

std::string_view to_string(GaussCase c);

struct GaussSumReport {
    Complex value;
    double magnitude_squared = 0.0;
    GaussCase gauss_case = GaussCase::Partial;
    double bound = 0.0; ///< T^2, q, or 2q(1 + log q)
    bool satisfied = false;
};

/// sum_{n=j}^{j+T-1} a_n^N with a_n = exp(-i pi p (n + beta - 1)^2 / q).
/// The first two cases are equalities (checked to 1e-9 relative), the
/// third an upper bound. InvalidInput unless q is prime, q does not divide
/// p and 1 <= T <= q.
GaussSumReport gauss_partial_sum(long p, long q, double beta, long N, long j, long T);

/// sigma_N(rho) = -rho^|N| / |N|, sigma_0 = 0: Fourier coefficients of
/// log|1 - rho e^{i phi}|. InvalidInput unless 0 < rho < 1.
double fourier_log_coeff(long N, double rho);

struct LogProductResult {
    double sum = 0.0;
    double bound_ratio = 0.0; ///< |sum| / sqrt(q log^3 q)
};

/// sum_{l=1}^{alpha_j - 1} log|a_{m_l} conj(a_j) - 1| along the canonical
/// path m of band j. Primitive resonances at beta = 1/2 with q an odd prime
/// (UnsupportedParams); DegenerateFactor if a factor vanishes.
LogProductResult log_diagonal_product(const ResonanceParams& params, int j);

/// Same sum with each factor replaced by |rho a_{m_l} conj(a_j) - 1|,
/// evaluated through the Fourier series with coefficients sigma_N(rho).
double log_diagonal_product_regularized(const ResonanceParams& params, int j, double rho);

struct GammaBoundResult {
    double x_star = 0.0;
    double lambda_star = 0.0;
    double value = 0.0; ///< max of -2 (x - lambda)^2 + F(x)
    double quadrature_error = 0.0;
};

/// F(x) = int_0^x log cos(pi t / 4) dt by adaptive Simpson.
double log_cos_integral(double x, double tolerance = 1e-14);

/// Maximizes -2 (x - lambda)^2 + F(x) over [0, 1] x [1/4, 1/2] on a dense
/// grid with `quadrature_points` nodes per axis, then refines locally.
/// InvalidInput for fewer than 1000 points.
GammaBoundResult gamma_bound(int quadrature_points = 4000);

struct DecayFit {
    double rate = 0.0; ///< slope of log|s_j| against q
    double intercept = 0.0;
    double residual_rms = 0.0;
    std::vector<long> q;
    std::vector<long> p;
    std::vector<int> j;
    std::vector<double> magnitude;
};

/// Fits log|s_j(p, q)| = rate * q + c over the given primes. Needs at least
/// five distinct primes (InsufficientData).
DecayFit decay_fit(const std::function<long(long)>& p_rule, std::span<const long> q_list,
                   const std::function<int(long)>& j_rule = [](long) { return 1; });

} // namespace rotor
