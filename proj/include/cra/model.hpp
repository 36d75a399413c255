#pragma once

#include <array>

#include "cra/mat2.hpp"

namespace cra {

/// Absolute tolerance used for equality classification of user-supplied
/// probabilities (memoryless source test, equal-channel test).
inline constexpr double kEqualityTol = 1e-12;

/// Two-state Markov source. p is the 0->1 flip probability, q the 1->0 flip
/// probability. Both must lie strictly inside (0,1) so the chain is ergodic.
struct SourceModel {
    double p;
    double q;
    SourceModel(double p_, double q_);
};

/// Sign of the source's one-step autocorrelation: p+q < 1 keeps states sticky,
/// p+q = 1 is an iid sequence, p+q > 1 flips more often than it stays.
enum class CorrelationClass { Persistent, Memoryless, Alternating };

const char* to_string(CorrelationClass c);

/// Per-slot delivery probabilities of the legitimate receiver (p_s) and the
/// eavesdropper (p_s_e). Strictly inside (0,1).
struct ChannelPair {
    double p_s;
    double p_s_e;
    ChannelPair(double p_s_, double p_s_e_);
};

/// Randomized stationary transmission policy: transmit each slot independently
/// with probability p_alpha in (0,1]. Zero is rejected because it freezes both
/// estimators forever.
struct Policy {
    double p_alpha;
    explicit Policy(double p_alpha_);
};

/// Joint per-slot reception outcome probabilities. lambda_xy is the chance that
/// the legitimate receiver gets the update (x) and the eavesdropper gets it (y)
/// in one slot, marginalized over the transmit coin. p_a and p_b are the two
/// receivers' marginal update probabilities.
struct LambdaSet {
    double lambda11;
    double lambda10;
    double lambda01;
    double lambda00;
    double p_a;
    double p_b;
};

/// Stationary distribution (v0, v1) of the source chain.
std::array<double, 2> stationary_source(const SourceModel& src);

CorrelationClass correlation_class(const SourceModel& src);

/// One-step transition matrix [[1-p, p], [q, 1-q]].
Mat2 transition_matrix(const SourceModel& src);

/// Reception outcome probabilities for a policy over a channel pair.
/// All four lambdas are strictly positive and sum to one.
LambdaSet lambda_set(const Policy& pol, const ChannelPair& ch);

}  // namespace cra
