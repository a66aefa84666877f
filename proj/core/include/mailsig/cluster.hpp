#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mailsig/csv.hpp"
#include "mailsig/stats.hpp"

namespace mailsig {

struct ClusterResult {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;
    Matrix centers;
    double inertia = 0;
};

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` by inertia.
/// An emptied cluster is reseeded to the point farthest from its center.
ClusterResult kmeans(const Matrix& x, std::size_t k, std::size_t restarts, std::uint64_t seed);

struct ElbowResult {
    std::vector<std::size_t> ks;
    std::vector<double> inertias;
    std::size_t suggested_k = 1;
    bool low_confidence = false;  // best second difference < 10% of total drop
};

ElbowResult elbow_sweep(const Matrix& x, std::size_t k_min, std::size_t k_max,
                        std::size_t restarts, std::uint64_t seed);

struct GmmResult {
    std::size_t k = 0;
    Matrix means;
    Matrix variances;  // diagonal covariances
    std::vector<double> weights;
    Matrix responsibilities;  // rows x k
    std::vector<double> log_likelihood_trace;
    bool covariance_floored = false;
    std::vector<std::size_t> hard_assignments() const;
};

/// Diagonal-covariance EM initialized from k-means; stops when the
/// log-likelihood gain drops below 1e-8 or after 500 iterations.
GmmResult gmm_em(const Matrix& x, std::size_t k, std::uint64_t seed);

/// Cohen's kappa after exhaustively aligning b's labels to a's (k <= 6).
/// Differing cluster counts are fatal.
double clustering_kappa(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct PcaProjection {
    Matrix components;  // orthonormal rows, eigenvalue-descending
    std::vector<double> explained_variance_ratio;
    Matrix coords;  // rows x dims
};

/// PCA of the column-standardized data; per component the largest-magnitude
/// loading is made positive.
PcaProjection pca_project(const Matrix& x, std::size_t dims = 2);

/// Per-cluster center values in standard-deviation units, one row per
/// cluster, for radar plotting.
CsvTable profile_report(const ClusterResult& result, const std::vector<std::string>& features);

}  // namespace mailsig
