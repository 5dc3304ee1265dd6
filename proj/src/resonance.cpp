#include "rotor/resonance.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "rotor/errors.hpp"

namespace rotor {

namespace {

constexpr double kResonanceTolerance = 1e-12;
constexpr double kDegeneracyTolerance = 1e-12;

long positive_mod(long a, long m)
{
    const long r = a % m;
    return r < 0 ? r + m : r;
}

double wrap_phase(double x)
{
    double y = std::remainder(x, 2.0 * std::numbers::pi);
    if (y <= -std::numbers::pi)
        y += 2.0 * std::numbers::pi;
    return y;
}

} // namespace

ResonanceParams ResonanceParams::with_kick(double kick) const
{
    if (!std::isfinite(kick) || kick < 0.0)
        throw InvalidInput("kick strength must be finite and non-negative");
    ResonanceParams out = *this;
    out.mu = kick;
    return out;
}

double resonant_beta(long P, long Q, long nu)
{
    if (P < 1 || Q < 1)
        throw InvalidInput("P and Q must be positive");
    // nu/P + Q/2 = (2 nu + P Q) / (2 P)
    const long den = 2 * P;
    const long num = positive_mod(positive_mod(2 * nu, den) + positive_mod(P * Q, den), den);
    return static_cast<double>(num) / static_cast<double>(den);
}

ResonanceParams validate_resonance(long P, long Q, double beta, long nu)
{
    if (P < 1 || Q < 1)
        throw InvalidInput("resonance requires P >= 1 and Q >= 1 (got P=" + std::to_string(P) +
                           ", Q=" + std::to_string(Q) + ")");
    if (!std::isfinite(beta))
        throw InvalidInput("beta must be finite");

    const double target = resonant_beta(P, Q, nu);
    const double diff = beta - target;
    if (std::abs(diff - std::round(diff)) > kResonanceTolerance)
        throw NotAResonance("beta=" + std::to_string(beta) + " violates beta = nu/P + Q/2 (mod 1) for P=" +
                            std::to_string(P) + ", Q=" + std::to_string(Q) + ", nu=" + std::to_string(nu));

    const long g = std::gcd(P, Q);
    ResonanceParams out;
    out.P = P;
    out.Q = Q;
    out.p = P / g;
    out.q = Q / g;
    out.nu = nu;
    out.beta = target;
    out.mu = 0.0;
    out.tau = 2.0 * std::numbers::pi * static_cast<double>(P) / static_cast<double>(Q);
    out.primitive = (out.Q == out.q);
    return out;
}

ResonanceParams primitive_resonance(long p, long q, double beta, long nu)
{
    return validate_resonance(p, q, beta, nu);
}

std::vector<long> admissible_nu(long P, long Q, double beta)
{
    if (P < 1 || Q < 1)
        throw InvalidInput("P and Q must be positive");
    std::vector<long> out;
    for (long nu = 0; nu < P; ++nu) {
        const double diff = beta - resonant_beta(P, Q, nu);
        if (std::abs(diff - std::round(diff)) <= kResonanceTolerance)
            out.push_back(nu);
    }
    return out;
}

double unperturbed_phase(long p, long q, double beta, long r)
{
    const double twice_beta = 2.0 * beta;
    if (twice_beta == std::round(twice_beta) && std::abs(twice_beta) < 1e6) {
        // r + beta - 1 = k/2, phase = -pi p k^2 / (4q), periodic in p k^2 mod 8q.
        const __int128 k = 2 * static_cast<__int128>(r) + static_cast<__int128>(std::llround(twice_beta)) - 2;
        const __int128 m = 8 * static_cast<__int128>(q);
        __int128 n = ((static_cast<__int128>(p) % m) * ((k * k) % m)) % m;
        if (n < 0)
            n += m;
        return wrap_phase(-std::numbers::pi * static_cast<double>(n) / (4.0 * static_cast<double>(q)));
    }
    const long double x = static_cast<long double>(r) + static_cast<long double>(beta) - 1.0L;
    const long double num = std::fmod(static_cast<long double>(p) * x * x, 2.0L * static_cast<long double>(q));
    return wrap_phase(static_cast<double>(-std::numbers::pi_v<long double> * num / static_cast<long double>(q)));
}

double phase_distance(double a, double b)
{
    return std::abs(wrap_phase(a - b));
}

UnperturbedSpectrum unperturbed_eigenvalues(const ResonanceParams& params)
{
    UnperturbedSpectrum spec;
    const auto n = static_cast<std::size_t>(params.Q);
    spec.a.reserve(n);
    spec.phase.reserve(n);
    for (long r = 1; r <= params.Q; ++r) {
        const double ph = unperturbed_phase(params.p, params.q, params.beta, r);
        spec.phase.push_back(ph);
        spec.a.push_back(std::polar(1.0, ph));
    }
    for (int r = 1; r <= static_cast<int>(n); ++r) {
        bool placed = false;
        for (auto& cls : spec.classes) {
            if (phase_distance(spec.phase[cls.front() - 1], spec.phase[r - 1]) < kDegeneracyTolerance) {
                cls.push_back(r);
                placed = true;
                break;
            }
        }
        if (!placed)
            spec.classes.push_back({r});
    }
    return spec;
}

std::size_t UnperturbedSpectrum::class_of(int r) const
{
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (int member : classes[c])
            if (member == r)
                return c;
    throw InvalidInput("index " + std::to_string(r) + " outside the spectrum");
}

} // namespace rotor
