#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rotor/linalg.hpp"
#include "rotor/resonance.hpp"

namespace rotor {

/// Complete eigensystem of a unitary matrix.
///
/// Eigenvalues are renormalized to unit modulus and ordered by principal
/// phase in (-pi, pi]; column k of `eigenvectors` belongs to eigenvalue k.
struct EigenSolution {
    std::vector<Complex> eigenvalues;
    CMatrix eigenvectors;
    std::vector<double> residuals; ///< |U v - w v| per pair

    std::vector<double> phases() const;
};

EigenSolution eigenphases(const UnitaryMatrix& u);
/// Validates unitarity first (NotUnitary).
EigenSolution eigenphases(const CMatrix& u);

enum class TrackingMethod {
    Overlap,      ///< maximal eigenvector overlap, degenerate clusters as subspaces
    NearestPhase, ///< closest eigenphase, eigenvectors ignored
};

/// Matches the eigenpairs of `next` to bands carried in the columns of
/// `carried`. Returns, for each band, the index of its eigenpair in `next`,
/// and updates `carried` in place. With `allow_ties` false a band whose two
/// best candidate clusters differ in overlap by less than `ambiguity_tolerance`
/// raises TrackingAmbiguity tagged with `grid_index`.
std::vector<std::size_t> match_bands(CMatrix& carried, const EigenSolution& next, double ambiguity_tolerance,
                                     std::size_t grid_index, bool allow_ties = false);

/// Follows bands along a sequence of samples. Column b of `start` is band b's
/// vector at the first sample; phases come back unwrapped, phases[b][k].
std::vector<std::vector<double>> track_bands(std::span<const EigenSolution> samples, const CMatrix& start,
                                             TrackingMethod method = TrackingMethod::Overlap,
                                             double ambiguity_tolerance = 1e-6);

/// Labelled mu = 0 eigenvectors of G: column r-1 belongs to a_r. Members of a
/// degenerate pair {r < r'} get the symmetric / antisymmetric combinations of
/// the two Fourier vectors.
CMatrix reference_basis(const ResonanceParams& params);

/// Band vectors of S(0, mu) labelled by continuation from mu = 0 in geometric
/// steps. Column r-1 belongs to band r.
CMatrix continue_from_free(const ResonanceParams& params, double ambiguity_tolerance = 1e-6);

struct SweepOptions {
    std::size_t max_grid = 4096; ///< grid is doubled on TrackingAmbiguity up to this size
    TrackingMethod method = TrackingMethod::Overlap;
    double ambiguity_tolerance = 1e-6;
    unsigned threads = 0; ///< 0: hardware concurrency, capped by ROTOR_BANDS_THREADS
};

/// Eigenphase curves phi_j(vartheta) on vartheta in [0, 2 pi / Q).
struct BandStructure {
    std::vector<double> grid;
    std::vector<std::vector<double>> phases; ///< phases[j-1][k], unwrapped
    std::vector<int> labels;                 ///< band j continues a_j from mu = 0
    std::vector<double> widths;

    std::size_t band_count() const noexcept { return phases.size(); }
};

/// Throws InvalidInput for grid_size < 8 and TrackingAmbiguity when even the
/// largest allowed grid cannot be tracked.
BandStructure sweep_bands(const ResonanceParams& params, std::size_t grid_size = 256, const SweepOptions& options = {});

std::vector<double> band_widths(const BandStructure& bands);
/// max - min of each unwrapped phase array.
std::vector<double> band_widths(const std::vector<std::vector<double>>& phases);

constexpr double kDefaultFlatnessThreshold = 1e-9;

/// true where the band width is below `threshold`.
std::vector<bool> flatness_test(const BandStructure& bands, double threshold = kDefaultFlatnessThreshold);

/// |det| of the leading d x d block of G, d = floor((Q + 1) / 2). Evaluated
/// in quad precision; the value underflows no earlier than ~1e-4900.
double gd_determinant(const ResonanceParams& params);

} // namespace rotor
