#include "cra/stationary.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cra {

JointKernel build_kernel(const SourceModel& src, const LambdaSet& lam) {
    Mat2 q = transition_matrix(src);
    JointKernel k{};
    for (int i = 0; i < 8; ++i) {
        JointState s = JointState::from_index(i);
        for (int j = 0; j < 8; ++j) {
            JointState t = JointState::from_index(j);
            // Reception outcomes move the estimates: both to the new source
            // value, one of them, or neither.
            double w = 0.0;
            if (t.a == t.x && t.b == t.x) w += lam.lambda11;
            if (t.a == t.x && t.b == s.b) w += lam.lambda10;
            if (t.a == s.a && t.b == t.x) w += lam.lambda01;
            if (t.a == s.a && t.b == s.b) w += lam.lambda00;
            k[i][j] = q(s.x, t.x) * w;
        }
    }
    return k;
}

bool kernel_row_stochastic(const JointKernel& k, double tol) {
    for (int i = 0; i < 8; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 8; ++j) {
            if (k[i][j] < 0.0) return false;
            sum += k[i][j];
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

bool kernel_ergodic_structure(const JointKernel& k) {
    bool self_loop = false;
    for (int i = 0; i < 8; ++i)
        if (k[i][i] > 0.0) self_loop = true;
    if (!self_loop) return false;

    // Strong connectivity on 8 nodes: forward and backward reachability from
    // node 0 by breadth-first sweeps.
    auto reach = [&](bool forward) {
        std::array<bool, 8> seen{};
        std::vector<int> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < 8; ++v) {
                double edge = forward ? k[u][v] : k[v][u];
                if (edge > 0.0 && !seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        for (bool b : seen)
            if (!b) return false;
        return true;
    };
    return reach(true) && reach(false);
}

JointStationary stationary_numeric(const JointKernel& k) {
    if (!kernel_row_stochastic(k))
        throw std::runtime_error("stationary_numeric: kernel is not row-stochastic");
    if (!kernel_ergodic_structure(k))
        throw std::runtime_error("stationary_numeric: kernel is not ergodic");

    // Augmented balance system: (P^T - I) pi = 0 stacked with sum(pi) = 1.
    Eigen::Matrix<double, 9, 8> a;
    Eigen::Matrix<double, 9, 1> rhs;
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) a(r, c) = k[c][r] - (r == c ? 1.0 : 0.0);
        rhs(r) = 0.0;
    }
    for (int c = 0; c < 8; ++c) a(8, c) = 1.0;
    rhs(8) = 1.0;

    Eigen::Matrix<double, 8, 1> pi = a.colPivHouseholderQr().solve(rhs);

    JointStationary out{};
    double sum = 0.0;
    for (int i = 0; i < 8; ++i) {
        out[i] = pi(i);
        sum += out[i];
    }
    for (double& v : out) v /= sum;

    // Residual guard: the solve must reproduce an invariant vector.
    for (int j = 0; j < 8; ++j) {
        double acc = 0.0;
        for (int i = 0; i < 8; ++i) acc += out[i] * k[i][j];
        if (std::abs(acc - out[j]) > 1e-12)
            throw std::runtime_error("stationary_numeric: residual check failed");
    }
    return out;
}

JointStationary stationary_closed_form(const SourceModel& src, const LambdaSet& lam) {
    Mat2 q = transition_matrix(src);
    std::array<double, 2> v = stationary_source(src);

    Mat2 r0 = resolvent(q, lam.lambda00);
    Mat2 rb = q * resolvent(q, 1.0 - lam.p_b);
    Mat2 ra = q * resolvent(q, 1.0 - lam.p_a);

    JointStationary pi{};
    for (int i = 0; i < 8; ++i) {
        JointState s = JointState::from_index(i);
        double t1 = (s.a == s.b) ? v[s.a] * lam.lambda11 * r0(s.a, s.x) : 0.0;
        double t2 = v[s.b] * lam.lambda10 * lam.p_b * rb(s.b, s.a) * r0(s.a, s.x);
        double t3 = v[s.a] * lam.lambda01 * lam.p_a * ra(s.a, s.b) * r0(s.b, s.x);
        pi[i] = t1 + t2 + t3;
    }
    return pi;
}

double age_pair_stationary(const LambdaSet& lam, long long i, long long j) {
    if (i < 0 || j < 0) throw std::domain_error("age_pair_stationary: ages must be nonnegative");
    if (i == j) return lam.lambda11 * std::pow(lam.lambda00, double(i));
    if (i < j)
        return lam.lambda10 * lam.p_b * std::pow(1.0 - lam.p_b, double(j - i - 1)) *
               std::pow(lam.lambda00, double(i));
    return lam.lambda01 * lam.p_a * std::pow(1.0 - lam.p_a, double(i - j - 1)) *
           std::pow(lam.lambda00, double(j));
}

double three_time_joint(const SourceModel& src, int x, int a, int b, long long i, long long j) {
    if (i < 0 || j < 0) throw std::domain_error("three_time_joint: ages must be nonnegative");
    if ((x | a | b) < 0 || x > 1 || a > 1 || b > 1)
        throw std::domain_error("three_time_joint: states must be binary");
    Mat2 q = transition_matrix(src);
    std::array<double, 2> v = stationary_source(src);
    if (i == j) {
        if (a != b) return 0.0;
        return v[a] * mat2_pow(q, (unsigned long long)i)(a, x);
    }
    if (i < j) {
        return v[b] * mat2_pow(q, (unsigned long long)(j - i))(b, a) *
               mat2_pow(q, (unsigned long long)i)(a, x);
    }
    return v[a] * mat2_pow(q, (unsigned long long)(i - j))(a, b) *
           mat2_pow(q, (unsigned long long)j)(b, x);
}

JointStationary stationary_by_series(const SourceModel& src, const LambdaSet& lam, long long n) {
    if (n < 0) throw std::domain_error("stationary_by_series: truncation must be nonnegative");
    Mat2 q = transition_matrix(src);
    std::array<double, 2> v = stationary_source(src);
    std::size_t m = std::size_t(n) + 1;

    // Power table q^k and partial geometric sums over the age offset, so the
    // double series reduces to one pass over the shared stale run.
    std::vector<Mat2> qpow(m);
    qpow[0] = mat2_identity();
    for (std::size_t k = 1; k < m; ++k) qpow[k] = qpow[k - 1] * q;

    // sum_a[d] = sum over offsets 1..d of (1-p_a)^(offset-1) q^offset,
    // likewise for the other receiver.
    std::vector<Mat2> sum_a(m), sum_b(m);
    sum_a[0] = Mat2{};
    sum_b[0] = Mat2{};
    double wa = 1.0, wb = 1.0;
    for (std::size_t d = 1; d < m; ++d) {
        sum_a[d] = sum_a[d - 1] + wa * qpow[d];
        sum_b[d] = sum_b[d - 1] + wb * qpow[d];
        wa *= 1.0 - lam.p_a;
        wb *= 1.0 - lam.p_b;
    }

    JointStationary pi{};
    for (int idx = 0; idx < 8; ++idx) {
        JointState s = JointState::from_index(idx);
        double acc = 0.0;
        double stale = 1.0;  // lambda00^k
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t rest = m - 1 - k;
            double synced = (s.a == s.b) ? lam.lambda11 * v[s.a] * qpow[k](s.a, s.x) : 0.0;
            double bob_fresher =
                lam.lambda10 * lam.p_b * v[s.b] * sum_b[rest](s.b, s.a) * qpow[k](s.a, s.x);
            double eve_fresher =
                lam.lambda01 * lam.p_a * v[s.a] * sum_a[rest](s.a, s.b) * qpow[k](s.b, s.x);
            acc += stale * (synced + bob_fresher + eve_fresher);
            stale *= lam.lambda00;
        }
        pi[idx] = acc;
    }
    return pi;
}

}  // namespace cra
