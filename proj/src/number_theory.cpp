#include "rotor/number_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "builders.hpp"
#include "rotor/errors.hpp"
#include "rotor/fit.hpp"
#include "rotor/perturbation.hpp"

namespace rotor {

namespace {

constexpr double kEqualityTolerance = 1e-9;

/// exp(-i pi p N (n + beta - 1)^2 / q), phase reduced exactly for
/// half-integer beta.
Complex gauss_term(long p, long q, double beta, long N, long n)
{
    const double twice_beta = 2.0 * beta;
    if (twice_beta == std::round(twice_beta)) {
        // (n + beta - 1)^2 = k^2 / 4, phase = -pi p N k^2 / (4q), periodic mod 8q.
        const __int128 m = 8 * static_cast<__int128>(q);
        const __int128 k = (2 * static_cast<__int128>(n) + std::llround(twice_beta) - 2) % m;
        __int128 pn = (static_cast<__int128>(p) % m) * (static_cast<__int128>(N) % m) % m;
        __int128 num = pn * (k * k % m) % m;
        if (num < 0)
            num += m;
        return std::polar(1.0, -std::numbers::pi * static_cast<double>(num) / (4.0 * static_cast<double>(q)));
    }
    const long double x = static_cast<long double>(n) + beta - 1.0L;
    const long double e = std::fmod(static_cast<long double>(p) * static_cast<long double>(N) * x * x,
                                    2.0L * static_cast<long double>(q));
    return std::polar(1.0, static_cast<double>(-std::numbers::pi_v<long double> * e / static_cast<long double>(q)));
}

struct SimpsonResult {
    double value;
    double error;
};

double log_cos(double t)
{
    return std::log(std::cos(std::numbers::pi * t / 4.0));
}

SimpsonResult simpson_step(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = log_cos(lm);
    const double frm = log_cos(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol)
        return {left + right + diff / 15.0, std::abs(diff) / 15.0};
    const auto l = simpson_step(a, m, fa, flm, fm, left, tol / 2.0, depth - 1);
    const auto r = simpson_step(m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
    return {l.value + r.value, l.error + r.error};
}

SimpsonResult adaptive_simpson(double a, double b, double tol)
{
    if (a == b)
        return {0.0, 0.0};
    const double fa = log_cos(a);
    const double fb = log_cos(b);
    const double fm = log_cos(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(a, b, fa, fm, fb, whole, tol, 40);
}

double objective(double x, double lambda, double f)
{
    return -2.0 * (x - lambda) * (x - lambda) + f;
}

} // namespace

bool is_prime(long n)
{
    if (n < 2)
        return false;
    if (n % 2 == 0)
        return n == 2;
    for (long d = 3; d <= n / d; d += 2)
        if (n % d == 0)
            return false;
    return true;
}

std::string_view to_string(GaussCase c)
{
    switch (c) {
    case GaussCase::MultipleOfQ:
        return "multiple-of-q";
    case GaussCase::FullPeriod:
        return "full-period";
    case GaussCase::Partial:
        return "partial";
    }
    return "partial";
}

GaussSumReport gauss_partial_sum(long p, long q, double beta, long N, long j, long T)
{
    if (!is_prime(q))
        throw InvalidInput("q=" + std::to_string(q) + " is not prime");
    if (p % q == 0)
        throw InvalidInput("q must not divide p");
    if (T < 1 || T > q)
        throw InvalidInput("T must lie in 1..q (got " + std::to_string(T) + ")");
    if (!std::isfinite(beta))
        throw InvalidInput("beta must be finite");

    GaussSumReport out;
    Complex acc{0.0, 0.0};
    for (long n = j; n < j + T; ++n)
        acc += gauss_term(p, q, beta, N, n);
    out.value = acc;
    out.magnitude_squared = std::norm(acc);

    const double dq = static_cast<double>(q);
    if (N % q == 0) {
        out.gauss_case = GaussCase::MultipleOfQ;
        out.bound = static_cast<double>(T) * static_cast<double>(T);
        out.satisfied = std::abs(out.magnitude_squared - out.bound) <= kEqualityTolerance * out.bound;
    } else if (T == q) {
        out.gauss_case = GaussCase::FullPeriod;
        out.bound = dq;
        out.satisfied = std::abs(out.magnitude_squared - out.bound) <= kEqualityTolerance * out.bound;
    } else {
        out.gauss_case = GaussCase::Partial;
        out.bound = 2.0 * dq * (1.0 + std::log(dq));
        out.satisfied = out.magnitude_squared <= out.bound;
    }
    return out;
}

double fourier_log_coeff(long N, double rho)
{
    if (!(rho > 0.0 && rho < 1.0))
        throw InvalidInput("rho must lie in (0, 1)");
    if (N == 0)
        return 0.0;
    const double n = std::abs(static_cast<double>(N));
    return -std::pow(rho, n) / n;
}

LogProductResult log_diagonal_product(const ResonanceParams& params, int j)
{
    detail::require_ring_form(params);
    const LatticePath path = canonical_path(j, params.q);
    const int alpha = static_cast<int>(path.length());
    const auto a = unperturbed_eigenvalues(params).a;
    const Complex aj = a[static_cast<std::size_t>(j - 1)];

    double sum = 0.0;
    for (int l = 1; l < alpha; ++l) {
        const long m = path.sites[static_cast<std::size_t>(l)];
        const double factor = std::abs(a[static_cast<std::size_t>(m - 1)] * std::conj(aj) - 1.0);
        if (factor < 1e-12)
            throw DegenerateFactor("a_" + std::to_string(m) + " coincides with a_" + std::to_string(j));
        sum += std::log(factor);
    }
    const double q = static_cast<double>(params.q);
    const double lq = std::log(q);
    return {sum, std::abs(sum) / std::sqrt(q * lq * lq * lq)};
}

double log_diagonal_product_regularized(const ResonanceParams& params, int j, double rho)
{
    detail::require_ring_form(params);
    if (!(rho > 0.0 && rho < 1.0))
        throw InvalidInput("rho must lie in (0, 1)");
    const LatticePath path = canonical_path(j, params.q);
    const auto a = unperturbed_eigenvalues(params).a;
    const double phj = std::arg(a[static_cast<std::size_t>(j - 1)]);
    std::vector<double> phi;
    for (std::size_t l = 1; l + 1 < path.sites.size(); ++l)
        phi.push_back(std::arg(a[static_cast<std::size_t>(path.sites[l] - 1)]) - phj);

    // log|1 - rho e^{i phi}| = sum_{N >= 1} sigma_N(rho) cos(N phi); stop once
    // the geometric tail rho^N / (N (1 - rho)) per factor is negligible.
    double sum = 0.0;
    for (long N = 1;; ++N) {
        const double c = fourier_log_coeff(N, rho);
        double s = 0.0;
        for (double p : phi)
            s += std::cos(static_cast<double>(N) * p);
        sum += c * s;
        if (-c / (1.0 - rho) * static_cast<double>(phi.size()) < 1e-15)
            break;
    }
    return sum;
}

double log_cos_integral(double x, double tolerance)
{
    if (!std::isfinite(x) || std::abs(x) >= 2.0)
        throw InvalidInput("log cos integral defined for |x| < 2");
    return adaptive_simpson(0.0, x, tolerance).value;
}

GammaBoundResult gamma_bound(int quadrature_points)
{
    if (quadrature_points < 1000)
        throw InvalidInput("gamma_bound needs at least 1000 quadrature points");
    const auto n = static_cast<std::size_t>(quadrature_points);

    // F on the x grid by accumulating adaptive Simpson over each cell.
    std::vector<double> xs(n);
    std::vector<double> fs(n);
    double error = 0.0;
    const double cell_tol = 1e-15;
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = static_cast<double>(i) / static_cast<double>(n - 1);
        if (i == 0) {
            fs[i] = 0.0;
            continue;
        }
        const auto r = adaptive_simpson(xs[i - 1], xs[i], cell_tol);
        fs[i] = fs[i - 1] + r.value;
        error += r.error;
    }

    GammaBoundResult best;
    best.value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const double lambda = 0.25 + 0.25 * static_cast<double>(k) / static_cast<double>(n - 1);
            const double v = objective(xs[i], lambda, fs[i]);
            if (v > best.value) {
                best.value = v;
                best.x_star = xs[i];
                best.lambda_star = lambda;
            }
        }

    // For fixed x the optimal lambda is x clamped to [1/4, 1/2]; refine x by
    // golden-section search on the neighbouring grid cells.
    auto profile = [](double x) {
        const double lambda = std::clamp(x, 0.25, 0.5);
        return objective(x, lambda, adaptive_simpson(0.0, x, 1e-15).value);
    };
    const double h = 1.0 / static_cast<double>(n - 1);
    double lo = std::max(0.0, best.x_star - h);
    double hi = std::min(1.0, best.x_star + h);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - g * (hi - lo);
    double d = lo + g * (hi - lo);
    double fc = profile(c);
    double fd = profile(d);
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = profile(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = profile(d);
        }
    }
    const double x = 0.5 * (lo + hi);
    const auto fx = adaptive_simpson(0.0, x, 1e-15);
    const double refined = objective(x, std::clamp(x, 0.25, 0.5), fx.value);
    if (refined >= best.value) {
        best.value = refined;
        best.x_star = x;
        best.lambda_star = std::clamp(x, 0.25, 0.5);
    }
    best.quadrature_error = std::max(error, fx.error);
    return best;
}

DecayFit decay_fit(const std::function<long(long)>& p_rule, std::span<const long> q_list,
                   const std::function<int(long)>& j_rule)
{
    const std::set<long> distinct(q_list.begin(), q_list.end());
    if (distinct.size() < 5)
        throw InsufficientData("decay fit needs at least 5 distinct primes");
    DecayFit out;
    PathSumOptions options;
    options.oracle = false;
    options.brute_force_max_alpha = 0;
    std::vector<double> x;
    std::vector<double> y;
    for (long q : q_list) {
        if (!is_prime(q) || q < 3)
            throw InvalidInput("decay fit needs odd primes (got " + std::to_string(q) + ")");
        const long p = p_rule(q);
        const int j = j_rule(q);
        const auto nu = admissible_nu(p, q, 0.5);
        if (nu.empty())
            throw UnsupportedParams("beta = 1/2 is not resonant for p=" + std::to_string(p));
        const auto params = validate_resonance(p, q, 0.5, nu.front());
        const auto coeff = path_sum_coefficient(params, j, options);
        const double mag = std::abs(coeff.s);
        out.q.push_back(q);
        out.p.push_back(p);
        out.j.push_back(j);
        out.magnitude.push_back(mag);
        x.push_back(static_cast<double>(q));
        y.push_back(std::log(mag));
    }
    const LinearFit fit = least_squares(x, y);
    out.rate = fit.slope;
    out.intercept = fit.intercept;
    out.residual_rms = fit.residual_rms;
    return out;
}

} // namespace rotor
