// Cluster-aware eigenvector matching shared by the double and quad trackers.
#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "builders.hpp"
#include "rotor/errors.hpp"

namespace rotor::detail {

template <class Real>
std::vector<std::vector<std::size_t>> eigen_clusters(const std::vector<std::complex<Real>>& w, const Real& tol)
{
    using std::abs;
    const std::size_t n = w.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i)
            i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (abs(w[a] - w[b]) < tol)
                parent[find(b)] = find(a);

    std::vector<std::vector<std::size_t>> out;
    std::vector<std::ptrdiff_t> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<std::ptrdiff_t>(out.size());
            out.emplace_back();
        }
        out[static_cast<std::size_t>(slot[root])].push_back(i);
    }
    return out;
}

/// Assigns each carried column (band) an eigenpair of (values, vectors) by
/// overlap. Eigenvalues closer than `cluster_tol` form one cluster whose
/// eigenvectors are interchangeable; bands mapped to a cluster carry their
/// projection onto it instead of an arbitrary basis vector.
template <class Real>
std::vector<std::size_t> match_columns(MatrixC<Real>& carried, const std::vector<std::complex<Real>>& values,
                                       const MatrixC<Real>& vectors, const Real& cluster_tol,
                                       double ambiguity_tolerance, std::size_t grid_index, bool allow_ties)
{
    using std::norm;
    using Index = Eigen::Index;
    const auto n = static_cast<std::size_t>(carried.cols());
    const auto groups = eigen_clusters(values, cluster_tol);
    const std::size_t nc = groups.size();

    const MatrixC<Real> inner = vectors.adjoint() * carried;
    std::vector<std::vector<double>> overlap(n, std::vector<double>(nc, 0.0));
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < nc; ++c) {
            Real acc(0);
            for (std::size_t k : groups[c])
                acc += norm(inner(static_cast<Index>(k), static_cast<Index>(b)));
            overlap[b][c] = static_cast<double>(acc);
        }

    if (!allow_ties && nc > 1) {
        for (std::size_t b = 0; b < n; ++b) {
            std::vector<double> row = overlap[b];
            std::partial_sort(row.begin(), row.begin() + 2, row.end(), std::greater<>());
            if (row[0] - row[1] < ambiguity_tolerance)
                throw TrackingAmbiguity("band " + std::to_string(b + 1) + " overlaps " + std::to_string(row[0]) +
                                            " vs " + std::to_string(row[1]) + " at grid point " +
                                            std::to_string(grid_index),
                                        grid_index);
        }
    }

    struct Candidate {
        double overlap;
        std::size_t band;
        std::size_t target;
    };
    auto by_overlap = [](const Candidate& x, const Candidate& y) { return x.overlap > y.overlap; };

    std::vector<Candidate> all;
    all.reserve(n * nc);
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < nc; ++c)
            all.push_back({overlap[b][c], b, c});
    std::stable_sort(all.begin(), all.end(), by_overlap);
    std::vector<std::size_t> capacity(nc);
    for (std::size_t c = 0; c < nc; ++c)
        capacity[c] = groups[c].size();
    std::vector<std::size_t> cluster_of(n, nc);
    for (const auto& cand : all)
        if (cluster_of[cand.band] == nc && capacity[cand.target] > 0) {
            cluster_of[cand.band] = cand.target;
            --capacity[cand.target];
        }

    std::vector<std::size_t> result(n, values.size());
    for (std::size_t c = 0; c < nc; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t b = 0; b < n; ++b)
            if (cluster_of[b] == c)
                members.push_back(b);
        if (members.empty())
            continue;
        if (groups[c].size() == 1) {
            const std::size_t k = groups[c].front();
            result[members.front()] = k;
            carried.col(static_cast<Index>(members.front())) = vectors.col(static_cast<Index>(k));
            continue;
        }
        std::vector<Candidate> local;
        for (std::size_t b : members)
            for (std::size_t k : groups[c])
                local.push_back(
                    {static_cast<double>(norm(inner(static_cast<Index>(k), static_cast<Index>(b)))), b, k});
        std::stable_sort(local.begin(), local.end(), by_overlap);
        std::vector<bool> taken(values.size(), false);
        for (const auto& cand : local)
            if (result[cand.band] == values.size() && !taken[cand.target]) {
                result[cand.band] = cand.target;
                taken[cand.target] = true;
            }
        for (std::size_t b : members) {
            Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> proj =
                Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>::Zero(carried.rows());
            for (std::size_t k : groups[c]) {
                const auto kk = static_cast<Index>(k);
                proj += vectors.col(kk) * inner(kk, static_cast<Index>(b));
            }
            const Real len = proj.norm();
            if (len > Real(1e-8))
                carried.col(static_cast<Index>(b)) = proj / len;
            else
                carried.col(static_cast<Index>(b)) = vectors.col(static_cast<Index>(result[b]));
        }
    }
    return result;
}

} // namespace rotor::detail
