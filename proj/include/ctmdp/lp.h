#pragma once

#include "ctmdp/rational.h"

#include <vector>

namespace ctmdp {

using RationalVector = std::vector<Rational>;

/// Outcome of a convex-hull membership test.
///
/// feasible: `weights` (one per candidate, non-negative, summing to 1) reproduce the target.
/// infeasible: `certificate` c and `bound` c0 satisfy c.target > c0 >= c.candidate for every candidate.
struct HullResult {
    bool feasible = false;
    RationalVector weights;
    RationalVector certificate;
    Rational bound;
};

/// Exact test whether `target` lies in the convex hull of `candidates`.
/// Dense phase-one simplex with Bland's rule over rationals.
/// Throws std::invalid_argument on empty candidates or mismatched dimensions.
HullResult convex_hull_membership(const std::vector<RationalVector>& candidates, const RationalVector& target);

}  // namespace ctmdp
