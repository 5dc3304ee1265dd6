#include "rotor/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "builders.hpp"
#include "rotor/errors.hpp"
#include "rotor/fit.hpp"
#include "rotor/number_theory.hpp"
#include "rotor/parallel.hpp"
#include "rotor/quad.hpp"
#include "rotor/spectrum.hpp"
#include "tracking.hpp"

namespace rotor {

namespace {

constexpr double kPoleTolerance = 1e-14;
constexpr double kResidueTolerance = 1e-12;
constexpr int kMaxEnumeratedLength = 24;
constexpr int kSplitLevels = 8;

const Complex kNaN{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};

long wrap_site(long site, long q)
{
    return ((site - 1) % q + q) % q + 1;
}

void require_odd_prime(long q)
{
    if (q < 3 || !is_prime(q))
        throw UnsupportedParams("q must be an odd prime (got " + std::to_string(q) + ")");
}

void require_band(int j, long q)
{
    if (j < 1 || j > (q + 1) / 2)
        throw InvalidBand("band j=" + std::to_string(j) + " outside 1.." + std::to_string((q + 1) / 2));
}

std::vector<Complex> site_values(const ResonanceParams& params)
{
    return unperturbed_eigenvalues(params).a;
}

/// Path weights w_l = a_{m_l} / (a_{m_l} - a_j) at the cut positions.
std::vector<Complex> residue_weights(const std::vector<Complex>& a, const LatticePath& path)
{
    const Complex aj = a[static_cast<std::size_t>(path.sites.front() - 1)];
    std::vector<Complex> w;
    for (std::size_t l = 1; l + 1 < path.sites.size(); ++l) {
        const Complex am = a[static_cast<std::size_t>(path.sites[l] - 1)];
        if (std::abs(am - aj) < kResidueTolerance)
            throw DegenerateResidue("a_" + std::to_string(path.sites[l]) + " coincides with a_" +
                                    std::to_string(path.sites.front()) + " inside the path");
        w.push_back(am / (am - aj));
    }
    return w;
}

// Quad-precision band tracking for the finite-difference oracle.

using QReal = quad::Real;
using QMatrix = quad::Matrix;

QReal quad_arg(const quad::Complex& z)
{
    return atan2(z.imag(), z.real());
}

QMatrix start_vectors(const ResonanceParams& params, bool ring)
{
    const long n = params.Q;
    if (!ring) {
        const CMatrix v = continue_from_free(params);
        QMatrix out(n, n);
        for (long r = 0; r < n; ++r)
            for (long c = 0; c < n; ++c)
                out(r, c) = quad::Complex(QReal(v(r, c).real()), QReal(v(r, c).imag()));
        return out;
    }
    // Ring form at theta = 0 commutes with the reflection j -> q + 1 - j, so
    // |j> +- |j'> are eigenvectors there for a degenerate pair j < j'.
    QMatrix out = QMatrix::Identity(n, n);
    const QReal h = QReal(1) / sqrt(QReal(2));
    for (const auto& cls : unperturbed_eigenvalues(params).classes) {
        if (cls.size() != 2)
            continue;
        const long r = cls[0] - 1;
        const long rp = cls[1] - 1;
        out.col(r).setZero();
        out.col(rp).setZero();
        out(r, r) = h;
        out(rp, r) = h;
        out(r, rp) = h;
        out(rp, rp) = -h;
    }
    return out;
}


/// k! as an unevaluated sum hi + lo of two doubles (compensated products).
std::vector<std::pair<double, double>> factorials_dd(int n)
{
    std::vector<std::pair<double, double>> out{{1.0, 0.0}};
    double hi = 1.0;
    double lo = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double p = hi * k;
        const double e = std::fma(hi, static_cast<double>(k), -p) + lo * k;
        hi = p + e;
        lo = e - (hi - p);
        out.emplace_back(hi, lo);
    }
    return out;
}

// Composition sums alternate in sign and cancel by several orders of
// magnitude, so both algorithms accumulate in quad precision.

using QComplex = quad::Complex;

std::vector<QReal> quad_inverse_factorials(int n)
{
    std::vector<QReal> out;
    for (const auto& [hi, lo] : factorials_dd(n))
        out.push_back(QReal(1) / (QReal(hi) + QReal(lo)));
    return out;
}

std::vector<QComplex> to_quad(std::span<const Complex> w)
{
    std::vector<QComplex> out;
    for (const auto& z : w)
        out.emplace_back(QReal(z.real()), QReal(z.imag()));
    return out;
}

Complex to_double(const QComplex& z)
{
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

void check_cut_weights(int alpha, std::span<const Complex> cut_weight)
{
    if (alpha < 1)
        throw InvalidInput("composition total must be positive");
    if (cut_weight.size() != static_cast<std::size_t>(alpha - 1))
        throw InvalidInput("expected alpha - 1 cut weights");
}

/// Depth-first walk over the cut decisions at positions l..alpha-1. Every
/// part closed contributes -1/r!, every cut its weight. The recursion
/// (no cut + cut) is itself the fixed reduction tree.
struct CompositionWalk {
    int alpha;
    const std::vector<QComplex>& w;
    const std::vector<QReal>& inv;

    QComplex operator()(int l, int last, const QComplex& prod) const
    {
        if (l == alpha)
            return -prod * inv[static_cast<std::size_t>(alpha - last)];
        const QComplex keep = (*this)(l + 1, last, prod);
        const QComplex cut = (*this)(l + 1, l, -prod * inv[static_cast<std::size_t>(l - last)] *
                                                   w[static_cast<std::size_t>(l - 1)]);
        return keep + cut;
    }
};

} // namespace

LatticePath LatticePath::from_steps(long q, long start, std::vector<int> steps)
{
    if (q < 1)
        throw InvalidInput("ring size must be positive");
    if (start < 1 || start > q)
        throw InvalidInput("path start " + std::to_string(start) + " outside 1.." + std::to_string(q));
    LatticePath path;
    path.q = q;
    path.sites.push_back(start);
    long site = start;
    for (int s : steps) {
        if (s != 1 && s != -1)
            throw InvalidInput("path steps must be +1 or -1");
        if (s == -1 && site == 1)
            ++path.winding;
        else if (s == 1 && site == q)
            --path.winding;
        site = wrap_site(site + s, q);
        path.sites.push_back(site);
    }
    path.steps = std::move(steps);
    return path;
}

LatticePath LatticePath::from_sites(long q, std::vector<long> sites)
{
    if (q < 3)
        throw InvalidInput("sites determine a path only for q >= 3; use from_steps");
    if (sites.empty())
        throw InvalidInput("a path needs at least one site");
    std::vector<int> steps;
    for (std::size_t i = 1; i < sites.size(); ++i) {
        const long a = sites[i - 1];
        const long b = sites[i];
        if (a < 1 || a > q || b < 1 || b > q)
            throw InvalidInput("path site outside 1.." + std::to_string(q));
        if (wrap_site(a + 1, q) == b)
            steps.push_back(1);
        else if (wrap_site(a - 1, q) == b)
            steps.push_back(-1);
        else
            throw InvalidInput("sites " + std::to_string(a) + " and " + std::to_string(b) + " are not neighbours");
    }
    return from_steps(q, sites.front(), std::move(steps));
}

LatticePath LatticePath::reversed() const
{
    std::vector<int> back(steps.rbegin(), steps.rend());
    for (int& s : back)
        s = -s;
    return from_steps(q, sites.back(), std::move(back));
}

int Composition::total() const
{
    int t = 0;
    for (int r : parts)
        t += r;
    return t;
}

std::vector<int> Composition::partial_sums() const
{
    std::vector<int> out;
    int t = 0;
    for (int r : parts)
        out.push_back(t += r);
    return out;
}

Composition Composition::reversed() const
{
    return Composition{std::vector<int>(parts.rbegin(), parts.rend())};
}

Composition Composition::from_parts(std::vector<int> parts)
{
    if (parts.empty())
        throw InvalidInput("a composition needs at least one part");
    for (int r : parts)
        if (r < 1)
            throw InvalidInput("composition parts must be positive");
    return Composition{std::move(parts)};
}

Composition Composition::from_cuts(int total, unsigned long long cuts)
{
    if (total < 1 || total > 64)
        throw InvalidInput("composition total must lie in 1..64");
    if (total < 64 && (cuts >> (total - 1)) != 0)
        throw InvalidInput("cut outside 1..total-1");
    std::vector<int> parts;
    int last = 0;
    for (int l = 1; l < total; ++l)
        if (cuts >> (l - 1) & 1ULL) {
            parts.push_back(l - last);
            last = l;
        }
    parts.push_back(total - last);
    return Composition{std::move(parts)};
}

int alpha_exponent(int j, long q)
{
    require_odd_prime(q);
    require_band(j, q);
    if (2 * j == q + 1)
        return static_cast<int>(q);
    return static_cast<int>(std::max<long>(2 * j - 1, q - 2 * j + 1));
}

LatticePath canonical_path(int j, long q)
{
    const int alpha = alpha_exponent(j, q);
    const bool rightward = 4L * j < q + 2 && 2 * j != q + 1;
    return LatticePath::from_steps(q, j, std::vector<int>(static_cast<std::size_t>(alpha), rightward ? 1 : -1));
}

Complex path_operator_element(const ResonanceParams& params, const LatticePath& path, const Composition& comp,
                              Complex z)
{
    if (static_cast<std::size_t>(comp.total()) != path.length())
        throw InvalidInput("composition total " + std::to_string(comp.total()) + " differs from path length " +
                           std::to_string(path.length()));
    const auto a = site_values(params);
    for (long m : path.sites)
        if (m < 1 || m > static_cast<long>(a.size()))
            throw InvalidInput("path site " + std::to_string(m) + " outside the spectrum");

    auto g = [&](long m) {
        const Complex am = a[static_cast<std::size_t>(m - 1)];
        if (std::abs(am - z) < kPoleTolerance)
            throw PoleHit("z hits the unperturbed eigenvalue a_" + std::to_string(m));
        return am / (am - z);
    };
    Complex value = g(path.sites.front());
    for (int l : comp.partial_sums())
        value *= g(path.sites[static_cast<std::size_t>(l)]);
    return value / a[static_cast<std::size_t>(path.sites.back() - 1)];
}

Complex path_matrix_term(const ResonanceParams& params, const LatticePath& path, const Composition& comp, Complex z,
                         double theta)
{
    const double scale = std::ldexp(1.0, -static_cast<int>(path.length()));
    return scale * std::polar(1.0, static_cast<double>(path.winding) * theta) *
           path_operator_element(params, path, comp, z);
}

Complex path_sum_element(const ResonanceParams& params, const Composition& comp, Complex z, double theta, long j,
                         long k)
{
    const int len = comp.total();
    if (len > kMaxEnumeratedLength)
        throw BudgetExceeded("path enumeration limited to length " + std::to_string(kMaxEnumeratedLength));
    const long q = params.Q;
    if (j < 1 || j > q || k < 1 || k > q)
        throw InvalidInput("matrix indices outside 1.." + std::to_string(q));

    Complex acc{0.0, 0.0};
    std::vector<int> steps(static_cast<std::size_t>(len));
    for (unsigned long long mask = 0; mask < (1ULL << len); ++mask) {
        long site = j;
        for (int i = 0; i < len; ++i) {
            steps[static_cast<std::size_t>(i)] = (mask >> i & 1ULL) ? 1 : -1;
            site = wrap_site(site + steps[static_cast<std::size_t>(i)], q);
        }
        if (site != k)
            continue;
        acc += path_matrix_term(params, LatticePath::from_steps(q, j, steps), comp, z, theta);
    }
    return acc;
}

std::vector<double> inverse_factorials(int n)
{
    if (n < 0)
        throw InvalidInput("factorial order must be non-negative");
    std::vector<double> out;
    for (const auto& [hi, lo] : factorials_dd(n))
        out.push_back((1.0 / hi) * (1.0 - lo / hi));
    return out;
}

Complex composition_sum_dp(int alpha, std::span<const Complex> cut_weight)
{
    check_cut_weights(alpha, cut_weight);
    const auto inv = quad_inverse_factorials(alpha);
    const auto w = to_quad(cut_weight);
    // d[l]: signed sum over compositions of l, weighted up to the last cut.
    std::vector<QComplex> d(static_cast<std::size_t>(alpha) + 1);
    d[0] = QComplex(1);
    for (int l = 1; l <= alpha; ++l) {
        QComplex acc(0);
        for (int k = 0; k < l; ++k) {
            const QComplex term = d[static_cast<std::size_t>(k)] * inv[static_cast<std::size_t>(l - k)];
            acc -= k == 0 ? term : term * w[static_cast<std::size_t>(k - 1)];
        }
        d[static_cast<std::size_t>(l)] = acc;
    }
    return to_double(d[static_cast<std::size_t>(alpha)]);
}

Complex composition_sum_enumerate(int alpha, std::span<const Complex> cut_weight, unsigned threads)
{
    check_cut_weights(alpha, cut_weight);
    if (alpha > kMaxPathAlpha)
        throw BudgetExceeded("enumeration limited to alpha <= " + std::to_string(kMaxPathAlpha));
    const auto inv = quad_inverse_factorials(alpha);
    const auto w = to_quad(cut_weight);
    const CompositionWalk walk{alpha, w, inv};

    // The first `levels` decisions are expanded into independent subtrees
    // whose sums are then combined in the same (no cut, cut) order.
    const int levels = std::min(alpha - 1, kSplitLevels);
    std::vector<QComplex> partial(std::size_t{1} << levels);
    parallel_for(
        partial.size(),
        [&](std::size_t prefix) {
            QComplex prod(1);
            int last = 0;
            for (int level = 0; level < levels; ++level) {
                const int l = level + 1;
                if (prefix >> (levels - 1 - level) & 1U) {
                    prod = -prod * inv[static_cast<std::size_t>(l - last)] * w[static_cast<std::size_t>(l - 1)];
                    last = l;
                }
            }
            partial[prefix] = walk(levels + 1, last, prod);
        },
        threads);
    while (partial.size() > 1) {
        std::vector<QComplex> next(partial.size() / 2);
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i] = partial[2 * i] + partial[2 * i + 1];
        partial = std::move(next);
    }
    return to_double(partial.front());
}

PathSumCoefficient path_sum_coefficient(const ResonanceParams& params, int j, const PathSumOptions& options)
{
    detail::require_ring_form(params);
    require_odd_prime(params.q);
    if (params.p % params.q == 0)
        throw UnsupportedParams("p must not be a multiple of q");
    require_band(j, params.q);
    const int alpha = alpha_exponent(j, params.q);
    if (alpha > kMaxPathAlpha)
        throw BudgetExceeded("alpha_j=" + std::to_string(alpha) + " exceeds the budget " +
                             std::to_string(kMaxPathAlpha));

    const auto a = site_values(params);
    const Complex aj = a[static_cast<std::size_t>(j - 1)];
    const bool loop = 2 * j == params.q + 1;

    PathSumCoefficient out;
    out.j = j;
    out.alpha = alpha;
    out.path = canonical_path(j, params.q);

    std::vector<LatticePath> paths{out.path};
    if (loop)
        paths.push_back(out.path.reversed());

    const double sign = j % 2 == 0 ? 1.0 : -1.0;
    const Complex prefactor = Complex{0.0, sign} * aj * std::ldexp(1.0, -alpha);
    const bool enumerate = alpha <= options.brute_force_max_alpha;
    Complex s_dp{0.0, 0.0};
    Complex s_en{0.0, 0.0};
    for (const auto& path : paths) {
        const auto w = residue_weights(a, path);
        s_dp += prefactor * composition_sum_dp(alpha, w);
        if (enumerate)
            s_en += prefactor * composition_sum_enumerate(alpha, w, options.threads);
    }
    out.s = s_dp;
    if (enumerate) {
        out.s_enumerated = s_en;
        out.enumeration_gap = std::abs(s_dp - s_en) / std::abs(s_dp);
    } else {
        out.s_enumerated = kNaN;
        out.enumeration_gap = std::numeric_limits<double>::quiet_NaN();
    }

    out.oracle_estimate = kNaN;
    out.relative_gap = std::numeric_limits<double>::quiet_NaN();
    if (!options.oracle)
        return out;
    const double theta = probe_angle(j, params.q);
    for (double mu : options.oracle_mu) {
        const double scale = std::pow(mu, alpha);
        if (scale * std::abs(out.s) < options.oracle_floor)
            break;
        const double d = numerical_band_derivative(params, j, mu, theta);
        out.oracle_estimate = Complex{0.0, 1.0} * aj * (d / (scale * std::sin(theta)));
        out.oracle_mu = mu;
        const double ref = std::abs(out.oracle_estimate);
        out.relative_gap = std::abs(std::abs(out.s) - ref) / ref;
        if (out.relative_gap < options.oracle_tolerance)
            break;
    }
    return out;
}

double probe_angle(int j, long q)
{
    return 2 * j == q + 1 ? std::numbers::pi / 4.0 : std::numbers::pi / 2.0;
}

double numerical_band_derivative(const ResonanceParams& params, int j, double mu, double theta, double h)
{
    if (!(mu > 0.0 && mu <= 1e-2))
        throw InvalidInput("finite-difference oracle needs 0 < mu <= 1e-2");
    if (!(h >= 1e-5 && h <= 1e-2))
        throw InvalidInput("finite-difference step must lie in [1e-5, 1e-2]");
    if (!std::isfinite(theta))
        throw InvalidInput("theta must be finite");
    if (j < 1 || j > params.Q)
        throw InvalidBand("band j=" + std::to_string(j) + " outside 1.." + std::to_string(params.Q));

    const ResonanceParams kicked = params.with_kick(mu);
    const bool ring = params.primitive && params.beta == 0.5;
    auto sample = [&](const QReal& t) {
        return ring ? quad::build_X(kicked, t) : quad::build_S(kicked, t / QReal(params.Q));
    };

    const QReal qt(theta);
    const QReal qh(h);
    const QReal first = qt - qh;
    const long steps = std::max(4L, static_cast<long>(std::ceil(std::abs(theta - h) / 0.05)));
    std::vector<QReal> path;
    for (long k = 0; k <= steps; ++k)
        path.push_back(first * QReal(k) / QReal(steps));
    path.push_back(qt - qh / 2);
    path.push_back(qt + qh / 2);
    path.push_back(qt + qh);

    QMatrix carried = start_vectors(kicked, ring);
    const QReal two_pi = 2 * quad::pi();
    std::vector<QReal> phase;
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto es = quad::unitary_eigensystem(sample(path[k]));
        const auto pick = detail::match_columns<QReal>(carried, es.values, es.vectors, QReal(1e-30), 1e-6, k, k == 0);
        QReal ph = quad_arg(es.values[pick[static_cast<std::size_t>(j - 1)]]);
        if (!phase.empty()) {
            while (ph - phase.back() > quad::pi())
                ph -= two_pi;
            while (ph - phase.back() <= -quad::pi())
                ph += two_pi;
        }
        phase.push_back(ph);
    }
    const std::size_t n = phase.size();
    const QReal d_h = (phase[n - 1] - phase[n - 4]) / (2 * qh);
    const QReal d_half = (phase[n - 2] - phase[n - 3]) / qh;
    return static_cast<double>((4 * d_half - d_h) / 3);
}

ScalingFit scaling_fit(const ResonanceParams& params, int j, std::span<const double> mu_values, unsigned threads)
{
    if (mu_values.size() < 4)
        throw InsufficientData("scaling fit needs at least 4 kick strengths");
    for (double mu : mu_values)
        if (!(mu > 0.0 && mu <= 1e-2))
            throw InvalidInput("kick strengths for the scaling fit must lie in (0, 1e-2]");
    const auto [lo, hi] = std::minmax_element(mu_values.begin(), mu_values.end());
    if (*hi < 10.0 * *lo * (1.0 - 1e-12))
        throw InsufficientData("kick strengths must span at least one decade");

    const double theta = probe_angle(j, params.q);
    ScalingFit out;
    out.mu.assign(mu_values.begin(), mu_values.end());
    out.derivative.resize(out.mu.size());
    parallel_for(
        out.mu.size(), [&](std::size_t k) { out.derivative[k] = numerical_band_derivative(params, j, out.mu[k], theta); },
        threads);

    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t k = 0; k < out.mu.size(); ++k) {
        if (out.derivative[k] == 0.0)
            throw InsufficientData("band derivative vanished at mu=" + std::to_string(out.mu[k]));
        x.push_back(std::log(out.mu[k]));
        y.push_back(std::log(std::abs(out.derivative[k])));
    }
    const LinearFit fit = least_squares(x, y);
    out.exponent = fit.slope;
    out.log_prefactor = fit.intercept;
    out.residual_rms = fit.residual_rms;
    return out;
}

} // namespace rotor
