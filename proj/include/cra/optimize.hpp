#pragma once

#include <utility>

#include "cra/metrics.hpp"
#include "cra/model.hpp"

namespace cra {

/// Which analytical case produced the optimum.
enum class OptBranch {
    GeneralRoot,          // interior root of the derivative numerator
    SymmetricPersistent,  // equal channels, sticky source: minimal transmission
    SymmetricAlternating, // equal channels, flippy source: maximal transmission
    SymmetricIndifferent, // equal channels, iid source: objective is flat
    DegenerateA,          // quadratic term vanishes, affine/constant analysis
    Clamped               // general-branch candidate projected onto an endpoint
};

const char* to_string(OptBranch b);

/// Feasible transmission-probability interval. The lower endpoint must be
/// strictly positive: transmitting never at all freezes both estimators, so
/// the open-limit optimum is approximated by its smallest feasible value.
struct Interval {
    double lo = 1e-3;
    double hi = 1.0;
};

struct OptimizerResult {
    double p_alpha_star;
    double value;
    double delta;  // discriminant of the derivative numerator (0 on symmetric branches)
    OptBranch branch;
};

/// Quadratic whose sign equals the sign of the average metric's derivative in
/// the transmission probability: M(x) = -AC x^2 - 2BC x + (AE - BD).
double derivative_numerator(const CraRational& co, double p_alpha);

/// Discriminant B^2 C^2 + AC (AE - BD) of the derivative numerator. Provably
/// nonnegative; a materially negative value (beyond rounding slack) throws,
/// since it can only come from corrupted coefficients.
double discriminant(const CraRational& co);

/// Maximizes the average metric over the feasible interval via the closed-form
/// candidate root with endpoint projection, the equal-channel monotonicity
/// rule, or the degenerate affine analysis. Ties favor fewer transmissions.
OptimizerResult optimize(const SourceModel& src, const ChannelPair& ch, Interval itv = {});

/// Brute-force companion oracle: argmax of avg_cra_closed over a step grid,
/// ties toward smaller transmission probability. Returns (argmax, value).
std::pair<double, double> grid_argmax(const SourceModel& src, const ChannelPair& ch, Interval itv,
                                      double step);

}  // namespace cra
