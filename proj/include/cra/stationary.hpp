#pragma once

#include <array>

#include "cra/model.hpp"

namespace cra {

/// Composite state of the chain tracked by the analysis: the source bit x, the
/// legitimate receiver's current estimate a, and the eavesdropper's estimate b.
/// Canonical flat index is 4x + 2a + b.
struct JointState {
    int x;
    int a;
    int b;
    int index() const { return 4 * x + 2 * a + b; }
    static JointState from_index(int i) { return {(i >> 2) & 1, (i >> 1) & 1, i & 1}; }
};

/// Row-stochastic 8x8 one-step kernel over JointState indices.
using JointKernel = std::array<std::array<double, 8>, 8>;

/// Stationary probability vector over JointState indices.
using JointStationary = std::array<double, 8>;

/// One-step kernel of the joint (source, estimate, estimate) chain. The source
/// moves first, then the slot's reception outcome rewrites none, one, or both
/// estimates to the new source value.
JointKernel build_kernel(const SourceModel& src, const LambdaSet& lam);

bool kernel_row_stochastic(const JointKernel& k, double tol = 1e-12);

/// Structural ergodicity test: the kernel's directed graph is strongly
/// connected and at least one self-loop exists.
bool kernel_ergodic_structure(const JointKernel& k);

/// Stationary vector from a QR least-squares solve of the augmented balance
/// system (transpose(P) - I stacked over the all-ones row). Throws
/// std::runtime_error when the kernel is structurally non-ergodic or the
/// residual check fails.
JointStationary stationary_numeric(const JointKernel& k);

/// Stationary vector assembled from the closed form: a synchronized-update
/// term plus two one-receiver-ahead terms, each a short product of 2x2
/// resolvents against the source chain.
JointStationary stationary_closed_form(const SourceModel& src, const LambdaSet& lam);

/// Stationary probability that the two receivers' update ages equal (i, j).
/// Geometric in the off-diagonal distance and in the shared stale run.
double age_pair_stationary(const LambdaSet& lam, long long i, long long j);

/// Joint probability that the source is x now, was a at age i, and was b at
/// age j, under the stationary source law.
double three_time_joint(const SourceModel& src, int x, int a, int b, long long i, long long j);

/// Third, independent route to the stationary vector: the age-pair series
/// truncated at ages i,j <= n. Error decays like
/// max(lambda00, 1-p_a, 1-p_b)^n. n = 0 keeps only the doubly-fresh cell.
JointStationary stationary_by_series(const SourceModel& src, const LambdaSet& lam, long long n);

}  // namespace cra
