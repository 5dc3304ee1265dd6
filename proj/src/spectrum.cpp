#include "rotor/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "rotor/errors.hpp"
#include "rotor/floquet.hpp"
#include "rotor/parallel.hpp"
#include "rotor/quad.hpp"
#include "tracking.hpp"

namespace rotor {

namespace {

constexpr double kClusterTolerance = 1e-13;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double principal(double x)
{
    double y = std::remainder(x, kTwoPi);
    if (y <= -std::numbers::pi)
        y += kTwoPi;
    return y;
}

std::vector<std::size_t> match_nearest_phase(const std::vector<double>& previous, const EigenSolution& next)
{
    const std::size_t n = previous.size();
    const auto ph = next.phases();
    struct Candidate {
        double distance;
        std::size_t band;
        std::size_t index;
    };
    std::vector<Candidate> all;
    all.reserve(n * n);
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t k = 0; k < n; ++k)
            all.push_back({std::abs(principal(ph[k] - previous[b])), b, k});
    std::stable_sort(all.begin(), all.end(),
                     [](const Candidate& x, const Candidate& y) { return x.distance < y.distance; });
    std::vector<std::size_t> out(n, n);
    std::vector<bool> used(n, false);
    for (const auto& c : all)
        if (out[c.band] == n && !used[c.index]) {
            out[c.band] = c.index;
            used[c.index] = true;
        }
    return out;
}

void append_unwrapped(std::vector<double>& track, double phase)
{
    if (track.empty())
        track.push_back(phase);
    else
        track.push_back(track.back() + principal(phase - track.back()));
}

} // namespace

std::vector<double> EigenSolution::phases() const
{
    std::vector<double> out;
    out.reserve(eigenvalues.size());
    for (const auto& w : eigenvalues)
        out.push_back(std::arg(w));
    return out;
}

EigenSolution eigenphases(const UnitaryMatrix& u)
{
    const CMatrix& m = u.matrix();
    Eigen::ComplexSchur<CMatrix> schur(m);
    if (schur.info() != Eigen::Success)
        throw ConvergenceFailure("complex Schur decomposition did not converge");

    const CMatrix& t = schur.matrixT();
    const CMatrix& z = schur.matrixU();
    const Eigen::Index n = m.rows();
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> ph(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k)
        ph[static_cast<std::size_t>(k)] = std::arg(t(k, k));
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ph[a] < ph[b]; });

    EigenSolution out;
    out.eigenvectors.resize(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto k = static_cast<Eigen::Index>(order[static_cast<std::size_t>(c)]);
        const Complex w = t(k, k) / std::abs(t(k, k));
        out.eigenvalues.push_back(w);
        out.eigenvectors.col(c) = z.col(k);
        out.residuals.push_back((m * z.col(k) - w * z.col(k)).norm());
    }
    return out;
}

EigenSolution eigenphases(const CMatrix& u)
{
    return eigenphases(UnitaryMatrix(u));
}

std::vector<std::size_t> match_bands(CMatrix& carried, const EigenSolution& next, double ambiguity_tolerance,
                                     std::size_t grid_index, bool allow_ties)
{
    return detail::match_columns<double>(carried, next.eigenvalues, next.eigenvectors, kClusterTolerance,
                                         ambiguity_tolerance, grid_index, allow_ties);
}

std::vector<std::vector<double>> track_bands(std::span<const EigenSolution> samples, const CMatrix& start,
                                             TrackingMethod method, double ambiguity_tolerance)
{
    const auto n = static_cast<std::size_t>(start.cols());
    std::vector<std::vector<double>> phases(n);
    if (samples.empty())
        return phases;
    for (auto& p : phases)
        p.reserve(samples.size());

    CMatrix carried = start;
    std::vector<double> last(n);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const EigenSolution& s = samples[k];
        std::vector<std::size_t> pick;
        if (method == TrackingMethod::Overlap || k == 0)
            pick = match_bands(carried, s, ambiguity_tolerance, k, k == 0);
        else
            pick = match_nearest_phase(last, s);
        for (std::size_t b = 0; b < n; ++b) {
            const double ph = std::arg(s.eigenvalues[pick[b]]);
            append_unwrapped(phases[b], ph);
            last[b] = ph;
        }
    }
    return phases;
}

CMatrix reference_basis(const ResonanceParams& params)
{
    const long Q = params.Q;
    const auto spec = unperturbed_eigenvalues(params);
    CMatrix fourier(Q, Q);
    const double norm = 1.0 / std::sqrt(static_cast<double>(Q));
    for (long j = 0; j < Q; ++j)
        for (long s = 0; s < Q; ++s)
            fourier(j, s) = std::polar(norm, kTwoPi * static_cast<double>((j * s) % Q) / static_cast<double>(Q));

    CMatrix basis = fourier;
    for (const auto& cls : spec.classes) {
        if (cls.size() != 2)
            continue;
        const Eigen::Index r = cls[0] - 1;
        const Eigen::Index rp = cls[1] - 1;
        basis.col(r) = (fourier.col(r) + fourier.col(rp)) / std::numbers::sqrt2;
        basis.col(rp) = (fourier.col(r) - fourier.col(rp)) / std::numbers::sqrt2;
    }
    return basis;
}

CMatrix continue_from_free(const ResonanceParams& params, double ambiguity_tolerance)
{
    CMatrix carried = reference_basis(params);
    if (params.mu == 0.0) {
        match_bands(carried, eigenphases(build_S(params, 0.0)), ambiguity_tolerance, 0, true);
        return carried;
    }

    // Geometric continuation in mu at vartheta = 0; refine the ratio if a step
    // turns out ambiguous.
    const double start = std::min(params.mu, 1e-6);
    for (double ratio : {1.25, 1.05, 1.01}) {
        CMatrix trial = carried;
        try {
            double mu = start;
            bool first = true;
            while (true) {
                const auto sol = eigenphases(build_S(params.with_kick(mu), 0.0));
                match_bands(trial, sol, ambiguity_tolerance, 0, first);
                first = false;
                if (mu >= params.mu)
                    break;
                mu = std::min(params.mu, mu * ratio);
            }
            return trial;
        } catch (const TrackingAmbiguity&) {
            if (ratio == 1.01)
                throw;
        }
    }
    return carried;
}

BandStructure sweep_bands(const ResonanceParams& params, std::size_t grid_size, const SweepOptions& options)
{
    if (grid_size < 8)
        throw InvalidInput("sweep_bands needs at least 8 grid points");

    const CMatrix start = continue_from_free(params, options.ambiguity_tolerance);
    const double period = kTwoPi / static_cast<double>(params.Q);

    std::size_t n = grid_size;
    while (true) {
        std::vector<double> grid(n);
        for (std::size_t k = 0; k < n; ++k)
            grid[k] = period * static_cast<double>(k) / static_cast<double>(n);
        std::vector<EigenSolution> samples(n);
        parallel_for(n, [&](std::size_t k) { samples[k] = eigenphases(build_S(params, grid[k])); }, options.threads);

        try {
            BandStructure out;
            out.grid = std::move(grid);
            out.phases = track_bands(samples, start, options.method, options.ambiguity_tolerance);
            out.labels.resize(out.phases.size());
            std::iota(out.labels.begin(), out.labels.end(), 1);
            out.widths = band_widths(out.phases);
            return out;
        } catch (const TrackingAmbiguity& e) {
            if (2 * n > options.max_grid)
                throw TrackingAmbiguity(std::string(e.what()) + " (grid " + std::to_string(n) + ")",
                                        e.grid_index());
            n *= 2;
        }
    }
}

std::vector<double> band_widths(const std::vector<std::vector<double>>& phases)
{
    std::vector<double> out;
    out.reserve(phases.size());
    for (const auto& p : phases) {
        if (p.empty()) {
            out.push_back(0.0);
            continue;
        }
        const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
        out.push_back(*hi - *lo);
    }
    return out;
}

std::vector<double> band_widths(const BandStructure& bands)
{
    return band_widths(bands.phases);
}

std::vector<bool> flatness_test(const BandStructure& bands, double threshold)
{
    if (!(threshold > 0.0))
        throw InvalidInput("flatness threshold must be positive");
    std::vector<bool> out;
    for (double w : band_widths(bands))
        out.push_back(w < threshold);
    return out;
}

double gd_determinant(const ResonanceParams& params)
{
    const Eigen::Index d = (params.Q + 1) / 2;
    const quad::Matrix g = quad::build_G(params);
    return static_cast<double>(quad::leading_minor_modulus(g, d));
}

} // namespace rotor
