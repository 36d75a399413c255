#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cra/metrics.hpp"
#include "cra/model.hpp"
#include "cra/rng.hpp"
#include "cra/stationary.hpp"

using namespace cra;

namespace {

struct Tuple {
    double p, q, ps, pse, pa;
};

// Ranges keep every geometric decay rate comfortably below one so the series
// route converges well inside the truncation depths used here.
Tuple draw_tuple(Rng& rng) {
    return {0.05 + 0.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform(),
            0.2 + 0.75 * rng.uniform(), 0.2 + 0.75 * rng.uniform(),
            0.3 + 0.7 * rng.uniform()};
}

double max_abs_gap(const JointStationary& a, const JointStationary& b) {
    double worst = 0.0;
    for (int s = 0; s < 8; ++s) worst = std::max(worst, std::abs(a[s] - b[s]));
    return worst;
}

}  // namespace

TEST_CASE("joint state index round-trips") {
    for (int i = 0; i < 8; ++i) {
        JointState s = JointState::from_index(i);
        CHECK(s.index() == i);
        CHECK((s.x == 0 || s.x == 1));
        CHECK((s.a == 0 || s.a == 1));
        CHECK((s.b == 0 || s.b == 1));
    }
    CHECK(JointState{1, 0, 1}.index() == 5);
}

TEST_CASE("kernel rows are stochastic and the chain is ergodic") {
    Rng rng(11);
    for (int k = 0; k < 100; ++k) {
        Tuple t = draw_tuple(rng);
        SourceModel src(t.p, t.q);
        LambdaSet lam = lambda_set(Policy(t.pa), ChannelPair(t.ps, t.pse));
        JointKernel ker = build_kernel(src, lam);
        CHECK(kernel_row_stochastic(ker));
        CHECK(kernel_ergodic_structure(ker));
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) CHECK(ker[i][j] >= 0.0);
    }
}

TEST_CASE("closed form matches the linear-solve route everywhere sampled") {
    Rng rng(12);
    for (int k = 0; k < 200; ++k) {
        Tuple t = draw_tuple(rng);
        SourceModel src(t.p, t.q);
        LambdaSet lam = lambda_set(Policy(t.pa), ChannelPair(t.ps, t.pse));
        JointStationary closed = stationary_closed_form(src, lam);
        JointStationary numeric = stationary_numeric(build_kernel(src, lam));
        CHECK(max_abs_gap(closed, numeric) <= 1e-12);
        double total = 0.0;
        for (double v : closed) {
            CHECK(v > 0.0);
            total += v;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("pinned stationary vector") {
    SourceModel src(0.3, 0.4);
    LambdaSet lam = lambda_set(Policy(0.7), ChannelPair(0.8, 0.3));
    JointStationary pi = stationary_closed_form(src, lam);
    const double expect[8] = {0.35557383995886827,   0.12895545563033495,
                              0.038359880318233251,  0.048539395521134711,
                              0.055774456767063683,  0.031124819072304296,
                              0.12172039438440599,   0.21995175834765443};
    for (int s = 0; s < 8; ++s) CHECK(std::abs(pi[s] - expect[s]) <= 1e-15);
}

TEST_CASE("stationarity: pi is a fixed point of the kernel") {
    Rng rng(13);
    for (int k = 0; k < 50; ++k) {
        Tuple t = draw_tuple(rng);
        SourceModel src(t.p, t.q);
        LambdaSet lam = lambda_set(Policy(t.pa), ChannelPair(t.ps, t.pse));
        JointKernel ker = build_kernel(src, lam);
        JointStationary pi = stationary_closed_form(src, lam);
        for (int j = 0; j < 8; ++j) {
            double acc = 0.0;
            for (int i = 0; i < 8; ++i) acc += pi[i] * ker[i][j];
            CHECK(std::abs(acc - pi[j]) <= 1e-13);
        }
    }
}

TEST_CASE("series route converges to the closed form") {
    Rng rng(14);
    for (int k = 0; k < 50; ++k) {
        Tuple t = draw_tuple(rng);
        SourceModel src(t.p, t.q);
        LambdaSet lam = lambda_set(Policy(t.pa), ChannelPair(t.ps, t.pse));
        JointStationary closed = stationary_closed_form(src, lam);
        JointStationary series = stationary_by_series(src, lam, 1000);
        CHECK(max_abs_gap(closed, series) <= 1e-12);
    }
}

TEST_CASE("series truncation error tracks the documented geometric bound") {
    SourceModel src(0.3, 0.4);
    LambdaSet lam = lambda_set(Policy(0.7), ChannelPair(0.8, 0.3));
    JointStationary closed = stationary_closed_form(src, lam);
    double rate = std::max({lam.lambda00, 1.0 - lam.p_a, 1.0 - lam.p_b});
    for (long long n : {5LL, 10LL, 20LL, 40LL}) {
        JointStationary series = stationary_by_series(src, lam, n);
        double mass_gap = 0.0;
        for (int s = 0; s < 8; ++s) mass_gap += closed[s] - series[s];
        CHECK(mass_gap >= 0.0);
        // constant 3 covers the three overlapping tail regions of the age grid
        CHECK(mass_gap <= 3.0 * std::pow(rate, double(n)));
    }
}

TEST_CASE("series partial sums grow monotonically entrywise") {
    SourceModel src(0.2, 0.5);
    LambdaSet lam = lambda_set(Policy(0.6), ChannelPair(0.7, 0.4));
    JointStationary prev = stationary_by_series(src, lam, 0);
    for (long long n = 1; n <= 30; ++n) {
        JointStationary cur = stationary_by_series(src, lam, n);
        for (int s = 0; s < 8; ++s) CHECK(cur[s] >= prev[s] - 1e-18);
        prev = cur;
    }
}

TEST_CASE("series at depth zero keeps only the doubly-fresh synchronized cell") {
    SourceModel src(0.3, 0.4);
    LambdaSet lam = lambda_set(Policy(0.7), ChannelPair(0.8, 0.3));
    auto v = stationary_source(src);
    JointStationary s0 = stationary_by_series(src, lam, 0);
    for (int i = 0; i < 8; ++i) {
        JointState st = JointState::from_index(i);
        double expect = (st.x == st.a && st.a == st.b) ? lam.lambda11 * v[st.x] : 0.0;
        CHECK(std::abs(s0[i] - expect) <= 1e-16);
    }
    CHECK_THROWS_AS(stationary_by_series(src, lam, -1), std::domain_error);
}

TEST_CASE("age-pair stationary law: spot values and normalization") {
    LambdaSet lam = lambda_set(Policy(0.7), ChannelPair(0.8, 0.3));
    CHECK(std::abs(age_pair_stationary(lam, 0, 0) - lam.lambda11) <= 1e-16);
    CHECK(std::abs(age_pair_stationary(lam, 2, 2) - lam.lambda11 * lam.lambda00 * lam.lambda00) <=
          1e-16);
    // legitimate receiver fresher than the adversary
    double e03 = lam.lambda10 * lam.p_b * std::pow(1.0 - lam.p_b, 2.0);
    CHECK(std::abs(age_pair_stationary(lam, 0, 3) - e03) <= 1e-16);
    // adversary fresher, with a shared stale run of two slots
    double e52 = lam.lambda01 * lam.p_a * std::pow(1.0 - lam.p_a, 2.0) *
                 lam.lambda00 * lam.lambda00;
    CHECK(std::abs(age_pair_stationary(lam, 5, 2) - e52) <= 1e-16);

    CHECK_THROWS_AS(age_pair_stationary(lam, -1, 0), std::domain_error);
    CHECK_THROWS_AS(age_pair_stationary(lam, 0, -2), std::domain_error);

    double total = 0.0;
    for (long long i = 0; i <= 400; ++i)
        for (long long j = 0; j <= 400; ++j) total += age_pair_stationary(lam, i, j);
    CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("age-pair law sums to one across random parameter draws") {
    Rng rng(15);
    for (int k = 0; k < 20; ++k) {
        Tuple t = draw_tuple(rng);
        LambdaSet lam = lambda_set(Policy(t.pa), ChannelPair(t.ps, t.pse));
        double total = 0.0;
        for (long long i = 0; i <= 700; ++i)
            for (long long j = 0; j <= 700; ++j) total += age_pair_stationary(lam, i, j);
        CHECK(std::abs(total - 1.0) <= 1e-10);
    }
}

TEST_CASE("three-time source law matches brute-force path enumeration") {
    Rng rng(16);
    for (int k = 0; k < 20; ++k) {
        double p = 0.05 + 0.9 * rng.uniform();
        double q = 0.05 + 0.9 * rng.uniform();
        SourceModel src(p, q);
        Mat2 Q = transition_matrix(src);
        auto v = stationary_source(src);
        // ages (i, j): i for the legitimate estimate a, j for the adversary b
        for (long long i : {0LL, 1LL, 2LL, 4LL})
            for (long long j : {0LL, 1LL, 3LL, 5LL}) {
                long long span = std::max(i, j);
                for (int x = 0; x < 2; ++x)
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b) {
                            double brute = 0.0;
                            // enumerate all source paths of length span, oldest slot first
                            for (int bits = 0; bits < (1 << span); ++bits) {
                                std::vector<int> path(std::size_t(span) + 1);
                                path[0] = (span == 0) ? x : ((bits >> 0) & 1);
                                for (long long s = 1; s < span; ++s)
                                    path[std::size_t(s)] = (bits >> s) & 1;
                                if (span > 0) path[std::size_t(span)] = x;
                                // path[s] is the source value at age span - s
                                if (path[std::size_t(span - i)] != a) continue;
                                if (path[std::size_t(span - j)] != b) continue;
                                double w = v[path[0]];
                                for (long long s = 0; s < span; ++s)
                                    w *= Q(path[std::size_t(s)], path[std::size_t(s) + 1]);
                                brute += w;
                            }
                            double got = three_time_joint(src, x, a, b, i, j);
                            CHECK(std::abs(got - brute) <= 1e-14);
                        }
            }
    }
}

TEST_CASE("three-time law marginalizes to the source stationary vector") {
    SourceModel src(0.35, 0.2);
    auto v = stationary_source(src);
    for (long long i : {0LL, 2LL, 7LL})
        for (long long j : {1LL, 2LL, 9LL}) {
            for (int x = 0; x < 2; ++x) {
                double acc = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) acc += three_time_joint(src, x, a, b, i, j);
                CHECK(std::abs(acc - v[x]) <= 1e-14);
            }
        }
    // equal ages force equal estimates
    CHECK(three_time_joint(src, 0, 0, 1, 3, 3) == 0.0);
    CHECK(three_time_joint(src, 1, 1, 0, 0, 0) == 0.0);
    CHECK_THROWS_AS(three_time_joint(src, 0, 0, 0, -1, 0), std::domain_error);
}

TEST_CASE("average metric from the stationary vector is a degree-(1,2) rational") {
    SourceModel src(0.2, 0.3);
    ChannelPair ch(0.9, 0.1);

    // sample the metric through the stationary route only
    std::vector<double> xs, ys;
    for (int k = 1; k <= 10; ++k) {
        double x = k / 10.0;
        LambdaSet lam = lambda_set(Policy(x), ch);
        xs.push_back(x);
        ys.push_back(avg_cra_from_pi(stationary_closed_form(src, lam)));
    }

    // homogeneous fit of y*(C x^2 + D x + E) = A x + B via the SVD null space
    Eigen::MatrixXd M(int(xs.size()), 5);
    for (int r = 0; r < int(xs.size()); ++r) {
        double x = xs[std::size_t(r)], y = ys[std::size_t(r)];
        M(r, 0) = x;
        M(r, 1) = 1.0;
        M(r, 2) = -y * x * x;
        M(r, 3) = -y * x;
        M(r, 4) = -y;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    Eigen::VectorXd w = svd.matrixV().col(4);
    CHECK(svd.singularValues()(4) <= 1e-12);

    // fitted coefficients reproduce the metric on a denser grid
    for (int k = 5; k <= 100; ++k) {
        double x = k / 100.0;
        LambdaSet lam = lambda_set(Policy(x), ch);
        double y = avg_cra_from_pi(stationary_closed_form(src, lam));
        double fit = (w(0) * x + w(1)) / ((w(2) * x + w(3)) * x + w(4));
        CHECK(std::abs(fit - y) <= 1e-9);
    }

    // and line up with the analytic coefficient vector up to scale
    CraRational co = cra_coefficients(src, ch);
    Eigen::VectorXd exact(5);
    exact << co.A, co.B, co.C, co.D, co.E;
    double cosine = std::abs(w.dot(exact)) / (w.norm() * exact.norm());
    CHECK(cosine >= 1.0 - 1e-10);
}

TEST_CASE("linear-solve route rejects a structurally broken kernel") {
    SourceModel src(0.3, 0.4);
    LambdaSet lam = lambda_set(Policy(0.7), ChannelPair(0.8, 0.3));
    JointKernel ker = build_kernel(src, lam);
    // disconnect one state: make it absorbing
    for (int j = 0; j < 8; ++j) ker[3][j] = 0.0;
    ker[3][3] = 1.0;
    CHECK_THROWS_AS(stationary_numeric(ker), std::runtime_error);
    // break row normalization
    JointKernel bad = build_kernel(src, lam);
    bad[0][0] += 0.25;
    CHECK_THROWS_AS(stationary_numeric(bad), std::runtime_error);
}
