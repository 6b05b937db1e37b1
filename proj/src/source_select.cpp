#include "deto/source_select.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace deto {

Matrix normalize_features(const Matrix& rows) {
    if (rows.rows() == 0) throw std::invalid_argument("normalize_features: empty input");
    Matrix out(rows.rows(), rows.cols());
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
        const double lo = rows.col(c).minCoeff();
        const double hi = rows.col(c).maxCoeff();
        if (hi > lo)
            out.col(c) = (rows.col(c).array() - lo) / (hi - lo);
        else
            out.col(c).setZero();
    }
    return out;
}

namespace {

int nearest_centroid(const Matrix& centroids, const Vector& p) {
    int best = 0;
    double best_d = (centroids.row(0).transpose() - p).squaredNorm();
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
        const double d = (centroids.row(c).transpose() - p).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

Matrix seed_kmeanspp(const Matrix& points, int k, Rng& rng) {
    const int n = static_cast<int>(points.rows());
    Matrix centroids(k, points.cols());
    std::vector<bool> chosen(n, false);

    int first = rng.uniform_int(n);
    centroids.row(0) = points.row(first);
    chosen[first] = true;

    Vector d2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        int pick = -1;
        if (total > 0.0 && std::isfinite(total)) {
            double target = rng.uniform() * total;
            for (int i = 0; i < n; ++i) {
                target -= d2[i];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1;
        } else {
            // All remaining points coincide with a centroid; pick uniformly
            // among the unchosen ones.
            int remaining = static_cast<int>(std::count(chosen.begin(), chosen.end(), false));
            int idx = rng.uniform_int(std::max(remaining, 1));
            pick = 0;
            for (int i = 0; i < n; ++i) {
                if (chosen[i]) continue;
                if (idx-- == 0) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.row(c) = points.row(pick);
        chosen[pick] = true;
        d2 = d2.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }
    return centroids;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, Rng& rng, int max_iters) {
    const int n = static_cast<int>(points.rows());
    if (n == 0) throw std::invalid_argument("kmeans: no points");
    if (k < 1 || k > n) throw std::invalid_argument("kmeans: k must be in [1, #points]");

    KMeansResult res;
    res.centroids = seed_kmeanspp(points, k, rng);
    res.assignment.assign(n, -1);

    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            const int c = nearest_centroid(res.centroids, points.row(i).transpose());
            if (c != res.assignment[i]) {
                res.assignment[i] = c;
                changed = true;
            }
        }

        // Refill empty clusters with the point farthest from its centroid
        // (ties resolved toward the highest index, i.e. the freshest point).
        std::vector<int> counts(k, 0);
        for (int a : res.assignment) ++counts[a];
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (counts[res.assignment[i]] <= 1) continue;
                const double d =
                    (points.row(i) - res.centroids.row(res.assignment[i])).squaredNorm();
                if (d >= far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far < 0) continue;
            --counts[res.assignment[far]];
            res.assignment[far] = c;
            ++counts[c];
            changed = true;
        }

        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            Vector mean = Vector::Zero(points.cols());
            for (int i = 0; i < n; ++i)
                if (res.assignment[i] == c) mean += points.row(i).transpose();
            res.centroids.row(c) = (mean / counts[c]).transpose();
        }
        if (!changed && iter > 0) break;
    }

    res.objective = 0.0;
    for (int i = 0; i < n; ++i)
        res.objective += (points.row(i) - res.centroids.row(res.assignment[i])).squaredNorm();
    return res;
}

std::vector<int> select_sources(const HyperparamArchive& archive, int k, Rng& rng,
                                SourcePolicy policy) {
    if (archive.empty()) throw std::invalid_argument("select_sources: empty archive");
    if (k < 1) throw std::invalid_argument("select_sources: k must be >= 1");
    const int n = archive.size();
    const std::vector<int>& steps = archive.steps();

    std::vector<int> picked;
    if (n <= k) {
        picked = steps;
        std::sort(picked.begin(), picked.end());
        return picked;
    }

    switch (policy) {
        case SourcePolicy::Recent: {
            picked.assign(steps.end() - k, steps.end());
            break;
        }
        case SourcePolicy::Random: {
            std::vector<int> perm = rng.permutation(n);
            for (int i = 0; i < k; ++i) picked.push_back(steps[perm[i]]);
            break;
        }
        case SourcePolicy::Similar: {
            const Matrix norm = normalize_features(archive.features());
            const Vector ref = norm.row(n - 1).transpose();
            std::vector<std::pair<double, int>> by_dist;
            for (int i = 0; i < n; ++i)
                by_dist.emplace_back((norm.row(i).transpose() - ref).norm(), i);
            std::stable_sort(by_dist.begin(), by_dist.end(),
                             [](const auto& a, const auto& b) {
                                 if (a.first != b.first) return a.first < b.first;
                                 return a.second > b.second;  // ties: most recent first
                             });
            for (int i = 0; i < k; ++i) picked.push_back(steps[by_dist[i].second]);
            break;
        }
        case SourcePolicy::Adaptive: {
            const Matrix norm = normalize_features(archive.features());
            const KMeansResult km = kmeans(norm, k, rng);
            for (int c = 0; c < k; ++c) {
                int best = -1;
                double best_d = std::numeric_limits<double>::infinity();
                for (int i = 0; i < n; ++i) {
                    if (km.assignment[i] != c) continue;
                    const double d = (norm.row(i) - km.centroids.row(c)).squaredNorm();
                    // Ties go to the most recent step; rows are in ascending
                    // step order, so <= keeps the later one.
                    if (d <= best_d) {
                        best_d = d;
                        best = i;
                    }
                }
                if (best >= 0) picked.push_back(steps[best]);
            }
            break;
        }
    }
    std::sort(picked.begin(), picked.end());
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
    return picked;
}

}  // namespace deto
