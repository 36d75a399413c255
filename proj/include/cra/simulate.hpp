#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "cra/model.hpp"

namespace cra {

struct SimConfig {
    long long horizon = 50'000;  // simulated slots per run, t = 1..horizon
    int runs = 400;              // independent replications
    std::uint64_t seed = 1;      // master seed; per-run streams derive from it
    long long warmup = 1'000;    // slots discarded from every run's average
};

/// Cross-run mean and standard error for the three slot metrics.
struct SimEstimate {
    double mean_cra = 0.0;
    double mean_accuracy = 0.0;
    double mean_confidentiality = 0.0;
    double se_cra = 0.0;
    double se_accuracy = 0.0;
    double se_confidentiality = 0.0;
    int runs_used = 0;
};

/// One captured slot. The synthetic t = 0 row records the forced initial
/// synchronization of both estimators.
struct TraceRow {
    long long t;
    int x, alpha, h, h_e;
    long long theta, theta_e;
    int xhat, xhat_e;
    int cra;
};

struct SimTrace {
    std::vector<TraceRow> rows;
};

/// Slots a trace capture will keep at most (memory guard on long horizons).
inline constexpr long long kTraceCap = 1'000'000;

/// Empirical distribution of the two receivers' update ages, truncated at cap.
/// joint, marginal_a (legitimate receiver) and marginal_b (adversary) are
/// normalized over all observed slots including the mass beyond the cap.
struct AgeHistogram {
    int cap = 0;
    long long samples = 0;
    std::vector<double> joint;      // (cap+1)*(cap+1), row index = legitimate age
    std::vector<double> marginal_a;
    std::vector<double> marginal_b;
    double joint_overflow = 0.0;
    double overflow_a = 0.0;
    double overflow_b = 0.0;

    double joint_at(int i, int j) const { return joint[std::size_t(i) * (cap + 1) + j]; }
};

/// Number of worker threads: the CRA_THREADS environment variable when set to
/// a positive integer, hardware concurrency otherwise.
int worker_count();

/// Slot-level Monte Carlo estimate. Each run draws its own stream from the
/// master seed, starts from a stationary source sample with both estimators
/// force-synchronized at t = 0, and averages slots in (warmup, horizon].
/// Output is bit-identical for a fixed seed regardless of worker count.
SimEstimate simulate(const SourceModel& src, const ChannelPair& ch, const Policy& pol,
                     const SimConfig& cfg);

/// Same estimate, but also captures the first run's slots (at most kTraceCap).
SimEstimate simulate_traced(const SourceModel& src, const ChannelPair& ch, const Policy& pol,
                            const SimConfig& cfg, SimTrace& trace);

/// Age-pair histogram accumulated over all runs' post-warmup slots.
AgeHistogram empirical_age_distribution(const SourceModel& src, const ChannelPair& ch,
                                        const Policy& pol, const SimConfig& cfg, int cap = 64);

/// One estimate per grid point; every point gets an independent derived seed.
std::vector<std::pair<double, SimEstimate>> sweep_sim(const SourceModel& src,
                                                      const ChannelPair& ch,
                                                      const std::vector<double>& p_alpha_grid,
                                                      const SimConfig& cfg);

/// CSV export: t,x,alpha,h,h_e,theta,theta_e,xhat,xhat_e,cra.
void write_trace_csv(std::ostream& os, const SimTrace& trace);

}  // namespace cra
