#ifndef DETO_LHS_HPP
#define DETO_LHS_HPP

#include <stdexcept>

#include "deto/rng.hpp"
#include "deto/types.hpp"

namespace deto {

/// Latin hypercube sample: `count` points, one per stratum per dimension.
/// Rows are points.
inline Matrix lhs_sample(int count, const Box& bounds, Rng& rng) {
    if (count < 1) throw std::invalid_argument("lhs_sample: count must be >= 1");
    const int n = bounds.dim();
    Matrix points(count, n);
    for (int d = 0; d < n; ++d) {
        const std::vector<int> perm = rng.permutation(count);
        const double width = (bounds.upper[d] - bounds.lower[d]) / count;
        for (int i = 0; i < count; ++i)
            points(i, d) = bounds.lower[d] + (perm[i] + rng.uniform()) * width;
    }
    return points;
}

}  // namespace deto

#endif  // DETO_LHS_HPP
