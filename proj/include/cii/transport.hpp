#pragma once

#include "cii/uncertain.hpp"

#include <optional>
#include <vector>

namespace cii {

/// Extra information about admissible distributions in the ball. Only a
/// support interval is supported: candidate CDFs are forced to 0 below
/// support.lo and to 1 at support.hi.
struct BallConstraints {
    std::optional<Interval> support;

    static BallConstraints with_support(double lo, double hi);
};

enum class EnvelopeSense { Sup, Inf };

/// Largest reachable CDF value at each query point over the W1 ball of
/// radius d around the base: the pointwise supremum envelope.
StepCdf upper_envelope(const StepCdf& base, double d, const BallConstraints& c,
                       const std::vector<double>& query_grid);

/// Pointwise infimum envelope over the same ball.
StepCdf lower_envelope(const StepCdf& base, double d, const BallConstraints& c,
                       const std::vector<double>& query_grid);

/// Ball applied bound-wise to a p-box: upper envelope of the upper bound,
/// lower envelope of the lower bound. Contains the base for every d >= 0
/// provided the base respects the support constraint.
PBox ascloseas(const PBox& base, double d, const BallConstraints& c,
               const std::vector<double>& query_grid);

/// Default query grid: the merged breakpoints of both base bounds plus
/// n_extra uniform points over the (possibly constraint-extended) support.
std::vector<double> default_query_grid(const PBox& base, const BallConstraints& c,
                                       int n_extra = 128);

/// Brute-force LP verifier for the envelopes: discretizes the support into
/// grid_size cells and optimizes the CDF value at the cell containing x0
/// subject to monotonicity, support clamps, and the transport budget.
double envelope_oracle(const StepCdf& base, double d, const BallConstraints& c,
                       double x0, EnvelopeSense sense, int grid_size);

}  // namespace cii
