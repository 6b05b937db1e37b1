#ifndef DETO_SOURCE_SELECT_HPP
#define DETO_SOURCE_SELECT_HPP

#include <vector>

#include "deto/gp.hpp"
#include "deto/rng.hpp"
#include "deto/types.hpp"

namespace deto {

/// Per-step GP hyperparameters (gamma, ell), one row per completed time
/// step, kept in ascending step order. These act as implicit features of
/// each step's landscape.
class HyperparamArchive {
public:
    void add(int time_step, const KernelParams& p) {
        if (!p.valid()) throw std::invalid_argument("HyperparamArchive: invalid features");
        if (!steps_.empty() && time_step <= steps_.back())
            throw std::invalid_argument("HyperparamArchive: steps must be added in order");
        steps_.push_back(time_step);
        features_.conservativeResize(static_cast<Eigen::Index>(steps_.size()), 2);
        features_(static_cast<Eigen::Index>(steps_.size()) - 1, 0) = p.gamma;
        features_(static_cast<Eigen::Index>(steps_.size()) - 1, 1) = p.ell;
    }

    int size() const { return static_cast<int>(steps_.size()); }
    bool empty() const { return steps_.empty(); }
    const std::vector<int>& steps() const { return steps_; }
    /// One row per step: (gamma, ell).
    const Matrix& features() const { return features_; }

private:
    std::vector<int> steps_;
    Matrix features_;
};

/// Min-max scales every column to [0, 1]; constant columns map to 0.
Matrix normalize_features(const Matrix& rows);

struct KMeansResult {
    std::vector<int> assignment;  // cluster index per point
    Matrix centroids;             // k rows
    double objective = 0.0;       // within-cluster sum of squared distances
};

/// Lloyd iterations from k-means++ seeding until assignments stabilize (at
/// most max_iters). Empty clusters are refilled with the point farthest from
/// its assigned centroid.
KMeansResult kmeans(const Matrix& points, int k, Rng& rng, int max_iters = 100);

enum class SourcePolicy { Adaptive, Recent, Similar, Random };

/// Picks source time steps for transfer. The default (Adaptive) clusters the
/// normalized hyperparameter features and returns, per cluster, the step
/// nearest its centroid (ties go to the most recent step). When the archive
/// holds at most k steps, all of them are returned. Alternatives: Recent =
/// last k steps; Similar = k nearest to the newest archive entry (the
/// freshest available stand-in for the current landscape); Random = uniform
/// k without replacement. Results are sorted ascending and duplicate-free.
std::vector<int> select_sources(const HyperparamArchive& archive, int k, Rng& rng,
                                SourcePolicy policy = SourcePolicy::Adaptive);

}  // namespace deto

#endif  // DETO_SOURCE_SELECT_HPP
