#include "mailsig/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mailsig/errors.hpp"
#include "mailsig/learn.hpp"
#include "mailsig/rng.hpp"

namespace mailsig {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double d = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        d += diff * diff;
    }
    return d;
}

Matrix kmeanspp_seed(const Matrix& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.size();
    Matrix centers;
    centers.push_back(x[rng.below(n)]);
    std::vector<double> d2(n);
    while (centers.size() < k) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) best = std::min(best, sq_dist(x[i], c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0) {
            const double u = rng.next_double() * total;
            double acc = 0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= u) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);  // all points coincide with a center
        }
        centers.push_back(x[pick]);
    }
    return centers;
}

ClusterResult lloyd(const Matrix& x, Matrix centers) {
    const std::size_t n = x.size();
    const std::size_t k = centers.size();
    const std::size_t p = x.front().size();
    std::vector<std::size_t> assign(n, 0);
    double inertia = 0;

    for (int iter = 0; iter < 300; ++iter) {
        bool changed = iter == 0;
        inertia = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sq_dist(x[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) changed = true;
            assign[i] = best;
            inertia += best_d;
        }
        if (!changed && iter > 0) break;

        Matrix sums(k, std::vector<double>(p, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) sums[assign[i]][j] += x[i][j];
            ++counts[assign[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Reseed an emptied cluster to the worst-served point.
                std::size_t far = 0;
                double far_d = -1;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(x[i], centers[assign[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centers[c] = x[far];
                continue;
            }
            for (std::size_t j = 0; j < p; ++j) centers[c][j] = sums[c][j] / counts[c];
        }
    }

    ClusterResult result;
    result.k = k;
    result.assignments = std::move(assign);
    result.centers = std::move(centers);
    result.inertia = inertia;
    return result;
}

ClusterResult kmeans_with_warm_start(const Matrix& x, std::size_t k, std::size_t restarts,
                                     std::uint64_t seed, const Matrix* warm_start) {
    if (x.empty()) throw DataError("cannot cluster an empty matrix");
    if (k == 0 || k > x.size()) throw ConfigError("cluster count must be in [1, rows]");
    Rng rng(seed);
    ClusterResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng local = rng.fork(r);
        ClusterResult candidate = lloyd(x, kmeanspp_seed(x, k, local));
        if (candidate.inertia < best.inertia) best = std::move(candidate);
    }
    if (warm_start && warm_start->size() == k) {
        ClusterResult candidate = lloyd(x, *warm_start);
        if (candidate.inertia < best.inertia) best = std::move(candidate);
    }
    return best;
}

}  // namespace

ClusterResult kmeans(const Matrix& x, std::size_t k, std::size_t restarts, std::uint64_t seed) {
    return kmeans_with_warm_start(x, k, restarts, seed, nullptr);
}

ElbowResult elbow_sweep(const Matrix& x, std::size_t k_min, std::size_t k_max,
                        std::size_t restarts, std::uint64_t seed) {
    if (k_min == 0 || k_max < k_min) throw ConfigError("invalid elbow range");
    ElbowResult result;
    Matrix prev_centers;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        // Warm-starting from the previous solution plus one extra seed keeps
        // the inertia curve monotone, which the elbow heuristic relies on.
        Matrix warm = prev_centers;
        if (!warm.empty() && warm.size() < k) {
            Rng extra(seed + k);
            while (warm.size() < k) warm.push_back(x[extra.below(x.size())]);
        }
        const ClusterResult fit =
            kmeans_with_warm_start(x, k, restarts, seed, warm.empty() ? nullptr : &warm);
        result.ks.push_back(k);
        result.inertias.push_back(fit.inertia);
        prev_centers = fit.centers;
    }

    const std::size_t m = result.ks.size();
    if (m < 3) {
        result.suggested_k = result.ks.front();
        result.low_confidence = true;
        return result;
    }
    double best_drop = -std::numeric_limits<double>::infinity();
    std::size_t best_k = result.ks[1];
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double second_diff =
            result.inertias[i - 1] - 2.0 * result.inertias[i] + result.inertias[i + 1];
        if (second_diff > best_drop) {
            best_drop = second_diff;
            best_k = result.ks[i];
        }
    }
    result.suggested_k = best_k;
    const double total_drop = result.inertias.front() - result.inertias.back();
    result.low_confidence = !(best_drop >= 0.10 * total_drop) || total_drop <= 0;
    return result;
}

GmmResult gmm_em(const Matrix& x, std::size_t k, std::uint64_t seed) {
    if (x.empty()) throw DataError("cannot cluster an empty matrix");
    if (k == 0 || k > x.size()) throw ConfigError("component count must be in [1, rows]");
    const std::size_t n = x.size();
    const std::size_t p = x.front().size();
    constexpr double kVarFloor = 1e-6;

    GmmResult result;
    result.k = k;
    const ClusterResult init = kmeans(x, k, 4, seed);
    result.means = init.centers;
    result.variances.assign(k, std::vector<double>(p, 0.0));
    result.weights.assign(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = init.assignments[i];
        ++counts[c];
        for (std::size_t j = 0; j < p; ++j) {
            const double d = x[i][j] - result.means[c][j];
            result.variances[c][j] += d * d;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        result.weights[c] = static_cast<double>(std::max<std::size_t>(counts[c], 1)) / n;
        for (std::size_t j = 0; j < p; ++j) {
            double v = counts[c] > 0 ? result.variances[c][j] / counts[c] : 1.0;
            if (v < kVarFloor) {
                v = kVarFloor;
                result.covariance_floored = true;
            }
            result.variances[c][j] = v;
        }
    }
    {
        double wsum = std::accumulate(result.weights.begin(), result.weights.end(), 0.0);
        for (auto& w : result.weights) w /= wsum;
    }

    result.responsibilities.assign(n, std::vector<double>(k, 0.0));
    std::vector<double> logp(k);
    for (int iter = 0; iter < 500; ++iter) {
        double ll = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < k; ++c) {
                double lp = std::log(result.weights[c]);
                for (std::size_t j = 0; j < p; ++j) {
                    const double v = result.variances[c][j];
                    const double d = x[i][j] - result.means[c][j];
                    lp += -0.5 * (std::log(2.0 * M_PI * v) + d * d / v);
                }
                logp[c] = lp;
            }
            const double lse = log_sum_exp(logp);
            ll += lse;
            for (std::size_t c = 0; c < k; ++c) {
                result.responsibilities[i][c] = std::exp(logp[c] - lse);
            }
        }
        result.log_likelihood_trace.push_back(ll);
        if (result.log_likelihood_trace.size() > 1) {
            const double prev = result.log_likelihood_trace[result.log_likelihood_trace.size() - 2];
            if (ll - prev < 1e-8) break;
        }

        for (std::size_t c = 0; c < k; ++c) {
            double nc = 0;
            for (std::size_t i = 0; i < n; ++i) nc += result.responsibilities[i][c];
            nc = std::max(nc, 1e-12);
            result.weights[c] = nc / n;
            for (std::size_t j = 0; j < p; ++j) {
                double mu = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    mu += result.responsibilities[i][c] * x[i][j];
                }
                mu /= nc;
                double var = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = x[i][j] - mu;
                    var += result.responsibilities[i][c] * d * d;
                }
                var /= nc;
                if (var < kVarFloor) {
                    var = kVarFloor;
                    result.covariance_floored = true;
                }
                result.means[c][j] = mu;
                result.variances[c][j] = var;
            }
        }
    }
    return result;
}

std::vector<std::size_t> GmmResult::hard_assignments() const {
    std::vector<std::size_t> assign(responsibilities.size(), 0);
    for (std::size_t i = 0; i < responsibilities.size(); ++i) {
        assign[i] = static_cast<std::size_t>(
            std::max_element(responsibilities[i].begin(), responsibilities[i].end()) -
            responsibilities[i].begin());
    }
    return assign;
}

double clustering_kappa(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size() || a.empty()) {
        throw DataError("kappa needs equal non-empty assignments");
    }
    auto count_labels = [](std::span<const std::size_t> v) {
        std::size_t top = 0;
        for (auto label : v) top = std::max(top, label);
        return top + 1;
    };
    const std::size_t ka = count_labels(a);
    const std::size_t kb = count_labels(b);
    if (ka != kb) throw DataError("assignments use different cluster counts");
    if (ka > 6) throw DataError("label alignment supports at most 6 clusters");

    std::vector<std::size_t> perm(ka);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best_perm = perm;
    std::size_t best_agree = 0;
    do {
        std::size_t agree = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == perm[b[i]]) ++agree;
        }
        if (agree > best_agree) {
            best_agree = agree;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<int> av(a.size()), bv(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        av[i] = static_cast<int>(a[i]);
        bv[i] = static_cast<int>(best_perm[b[i]]);
    }
    return cohen_kappa(av, bv);
}

PcaProjection pca_project(const Matrix& x, std::size_t dims) {
    if (x.empty()) throw DataError("cannot project an empty matrix");
    const std::size_t n = x.size();
    const std::size_t p = x.front().size();
    if (dims == 0 || dims > p) throw ConfigError("projection dimensions must be in [1, columns]");

    Matrix z = x;
    standardize_columns(z);
    Matrix cov(p, std::vector<double>(p, 0.0));
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a; b < p; ++b) cov[a][b] += z[i][a] * z[i][b];
        }
    }
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            cov[a][b] /= denom;
            cov[b][a] = cov[a][b];
        }
    }

    std::vector<double> values;
    Matrix vectors;
    jacobi_eigen_symmetric(cov, values, vectors);

    PcaProjection projection;
    double total = 0;
    for (double v : values) total += std::max(v, 0.0);
    if (total <= 0) total = 1;
    for (std::size_t d = 0; d < dims; ++d) {
        auto component = vectors[d];
        std::size_t arg = 0;
        for (std::size_t j = 1; j < p; ++j) {
            if (std::fabs(component[j]) > std::fabs(component[arg])) arg = j;
        }
        if (component[arg] < 0) {
            for (auto& v : component) v = -v;
        }
        projection.components.push_back(component);
        projection.explained_variance_ratio.push_back(std::max(values[d], 0.0) / total);
    }
    projection.coords.assign(n, std::vector<double>(dims, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dims; ++d) {
            projection.coords[i][d] = dot(z[i], projection.components[d]);
        }
    }
    return projection;
}

CsvTable profile_report(const ClusterResult& result, const std::vector<std::string>& features) {
    if (!result.centers.empty() && result.centers.front().size() != features.size()) {
        throw DataError("feature names do not match center width");
    }
    CsvTable table;
    table.header.push_back("cluster");
    for (const auto& f : features) table.header.push_back(f);
    for (std::size_t c = 0; c < result.centers.size(); ++c) {
        std::vector<std::string> row;
        row.push_back(std::to_string(c));
        for (double v : result.centers[c]) row.push_back(format_double(v));
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace mailsig
