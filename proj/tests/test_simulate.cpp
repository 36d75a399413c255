#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cra/metrics.hpp"
#include "cra/model.hpp"
#include "cra/rng.hpp"
#include "cra/simulate.hpp"
#include "cra/stationary.hpp"

using namespace cra;

namespace {

const SourceModel kSrc{0.3, 0.4};
const ChannelPair kCh{0.8, 0.3};
const Policy kPol{0.7};

bool same_estimate(const SimEstimate& a, const SimEstimate& b) {
    return a.mean_cra == b.mean_cra && a.mean_accuracy == b.mean_accuracy &&
           a.mean_confidentiality == b.mean_confidentiality && a.se_cra == b.se_cra &&
           a.se_accuracy == b.se_accuracy && a.se_confidentiality == b.se_confidentiality &&
           a.runs_used == b.runs_used;
}

}  // namespace

TEST_CASE("trace starts from forced synchronization and obeys slot dynamics") {
    SimConfig cfg;
    cfg.horizon = 4000;
    cfg.runs = 1;
    cfg.seed = 99;
    cfg.warmup = 100;
    SimTrace trace;
    simulate_traced(kSrc, kCh, kPol, cfg, trace);
    REQUIRE(trace.rows.size() == std::size_t(cfg.horizon) + 1);

    const TraceRow& r0 = trace.rows[0];
    CHECK(r0.t == 0);
    CHECK(r0.alpha == 1);
    CHECK(r0.h == 1);
    CHECK(r0.h_e == 1);
    CHECK(r0.theta == 0);
    CHECK(r0.theta_e == 0);
    CHECK(r0.xhat == r0.x);
    CHECK(r0.xhat_e == r0.x);
    CHECK(r0.cra == 0);

    for (std::size_t i = 1; i < trace.rows.size(); ++i) {
        const TraceRow& prev = trace.rows[i - 1];
        const TraceRow& cur = trace.rows[i];
        CHECK(cur.t == prev.t + 1);
        CHECK((cur.x == 0 || cur.x == 1));
        CHECK((cur.alpha == 0 || cur.alpha == 1));
        CHECK((cur.h == 0 || cur.h == 1));
        CHECK((cur.h_e == 0 || cur.h_e == 1));

        bool bob_delivery = cur.alpha == 1 && cur.h == 1;
        bool eve_delivery = cur.alpha == 1 && cur.h_e == 1;
        if (bob_delivery) {
            CHECK(cur.theta == 0);
            CHECK(cur.xhat == cur.x);
        } else {
            CHECK(cur.theta == prev.theta + 1);
            CHECK(cur.xhat == prev.xhat);
        }
        if (eve_delivery) {
            CHECK(cur.theta_e == 0);
            CHECK(cur.xhat_e == cur.x);
        } else {
            CHECK(cur.theta_e == prev.theta_e + 1);
            CHECK(cur.xhat_e == prev.xhat_e);
        }
        CHECK(cur.cra == ((cur.xhat == cur.x && cur.xhat_e != cur.x) ? 1 : 0));
    }
}

TEST_CASE("trace capture truncates at the memory cap") {
    SimConfig cfg;
    cfg.horizon = kTraceCap + 1000;
    cfg.runs = 1;
    cfg.seed = 5;
    cfg.warmup = 10;
    SimTrace trace;
    SimEstimate est = simulate_traced(kSrc, kCh, kPol, cfg, trace);
    CHECK(trace.rows.size() == std::size_t(kTraceCap));
    CHECK(est.runs_used == 1);
}

TEST_CASE("identical seeds replay identical estimates") {
    SimConfig cfg;
    cfg.horizon = 2000;
    cfg.runs = 8;
    cfg.seed = 12345;
    cfg.warmup = 200;
    SimEstimate a = simulate(kSrc, kCh, kPol, cfg);
    SimEstimate b = simulate(kSrc, kCh, kPol, cfg);
    CHECK(same_estimate(a, b));
    CHECK(a.runs_used == 8);

    cfg.seed = 54321;
    SimEstimate c = simulate(kSrc, kCh, kPol, cfg);
    CHECK(!same_estimate(a, c));
}

TEST_CASE("estimates are bit-identical across worker counts") {
    SimConfig cfg;
    cfg.horizon = 3000;
    cfg.runs = 16;
    cfg.seed = 777;
    cfg.warmup = 300;

    ::setenv("CRA_THREADS", "1", 1);
    SimEstimate serial = simulate(kSrc, kCh, kPol, cfg);
    ::setenv("CRA_THREADS", "7", 1);
    SimEstimate threaded = simulate(kSrc, kCh, kPol, cfg);
    ::unsetenv("CRA_THREADS");
    SimEstimate dflt = simulate(kSrc, kCh, kPol, cfg);

    CHECK(same_estimate(serial, threaded));
    CHECK(same_estimate(serial, dflt));
}

TEST_CASE("worker count env override") {
    ::setenv("CRA_THREADS", "3", 1);
    CHECK(worker_count() == 3);
    ::setenv("CRA_THREADS", "0", 1);
    CHECK(worker_count() >= 1);
    ::setenv("CRA_THREADS", "notanumber", 1);
    CHECK(worker_count() >= 1);
    ::unsetenv("CRA_THREADS");
    CHECK(worker_count() >= 1);
}

TEST_CASE("config validation") {
    SimConfig cfg;
    cfg.horizon = 0;
    CHECK_THROWS_AS(simulate(kSrc, kCh, kPol, cfg), std::domain_error);
    cfg.horizon = 100;
    cfg.runs = 0;
    CHECK_THROWS_AS(simulate(kSrc, kCh, kPol, cfg), std::domain_error);
    cfg.runs = 4;
    cfg.warmup = 100;
    CHECK_THROWS_AS(simulate(kSrc, kCh, kPol, cfg), std::domain_error);
    cfg.warmup = -1;
    CHECK_THROWS_AS(simulate(kSrc, kCh, kPol, cfg), std::domain_error);
    cfg.warmup = 99;
    CHECK_NOTHROW(simulate(kSrc, kCh, kPol, cfg));
}

TEST_CASE("monte carlo mean matches the closed form within its error bars") {
    SimConfig cfg;
    cfg.horizon = 6000;
    cfg.runs = 40;
    cfg.seed = 424242;
    cfg.warmup = 600;
    SimEstimate est = simulate(kSrc, kCh, kPol, cfg);
    CHECK(est.se_cra > 0.0);
    CHECK(est.se_cra < 0.01);

    double closed = avg_cra_closed(kSrc, kCh, kPol);
    CHECK(std::abs(est.mean_cra - closed) <= 5.0 * est.se_cra);

    double acc = marginal_accuracy(kSrc, kCh, kPol);
    double conf = marginal_confidentiality(kSrc, kCh, kPol);
    CHECK(std::abs(est.mean_accuracy - acc) <= 5.0 * est.se_accuracy);
    CHECK(std::abs(est.mean_confidentiality - conf) <= 5.0 * est.se_confidentiality);

    // slot metrics are probabilities and respect the partition ordering
    CHECK(est.mean_cra >= 0.0);
    CHECK(est.mean_cra <= est.mean_accuracy);
    CHECK(est.mean_cra <= est.mean_confidentiality);
}

TEST_CASE("standard error shrinks with replication") {
    SimConfig small;
    small.horizon = 2000;
    small.runs = 12;
    small.seed = 31;
    small.warmup = 200;
    SimConfig big = small;
    big.runs = 192;
    double se_small = simulate(kSrc, kCh, kPol, small).se_cra;
    double se_big = simulate(kSrc, kCh, kPol, big).se_cra;
    CHECK(se_big < se_small);
    // 16x the replications should shave roughly 4x off the error bar
    CHECK(se_small / se_big > 2.0);
    CHECK(se_small / se_big < 8.0);
}

TEST_CASE("empirical age distribution is normalized and geometric") {
    SimConfig cfg;
    cfg.horizon = 20000;
    cfg.runs = 30;
    cfg.seed = 1001;
    cfg.warmup = 1000;
    AgeHistogram hist = empirical_age_distribution(kSrc, kCh, kPol, cfg, 32);
    CHECK(hist.cap == 32);
    CHECK(hist.samples == 30LL * (20000 - 1000));

    double joint_total = hist.joint_overflow;
    for (double v : hist.joint) joint_total += v;
    CHECK(std::abs(joint_total - 1.0) <= 1e-12);

    double ma = hist.overflow_a, mb = hist.overflow_b;
    for (double v : hist.marginal_a) ma += v;
    for (double v : hist.marginal_b) mb += v;
    CHECK(std::abs(ma - 1.0) <= 1e-12);
    CHECK(std::abs(mb - 1.0) <= 1e-12);

    // marginals follow the per-slot delivery geometry
    LambdaSet lam = lambda_set(kPol, kCh);
    for (int k = 0; k <= 5; ++k) {
        double ga = lam.p_a * std::pow(1.0 - lam.p_a, double(k));
        double gb = lam.p_b * std::pow(1.0 - lam.p_b, double(k));
        CHECK(std::abs(hist.marginal_a[std::size_t(k)] - ga) <= 0.005);
        CHECK(std::abs(hist.marginal_b[std::size_t(k)] - gb) <= 0.005);
    }

    // joint cells match the stationary age-pair law
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= 3; ++j)
            CHECK(std::abs(hist.joint_at(i, j) - age_pair_stationary(lam, i, j)) <= 0.005);

    CHECK_THROWS_AS(empirical_age_distribution(kSrc, kCh, kPol, cfg, 0), std::domain_error);
}

TEST_CASE("sweep points use independent derived streams") {
    SimConfig cfg;
    cfg.horizon = 1500;
    cfg.runs = 6;
    cfg.seed = 2024;
    cfg.warmup = 150;
    std::vector<double> grid = {0.3, 0.7, 1.0};
    auto a = sweep_sim(kSrc, kCh, grid, cfg);
    auto b = sweep_sim(kSrc, kCh, grid, cfg);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].first == grid[i]);
        CHECK(same_estimate(a[i].second, b[i].second));
    }

    // each point equals a standalone run with that point's derived seed
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SimConfig pt = cfg;
        pt.seed = derive_seed(cfg.seed, 0x5157454550ull + i);
        SimEstimate solo = simulate(kSrc, kCh, Policy(grid[i]), pt);
        CHECK(same_estimate(solo, a[i].second));
    }

    CHECK_THROWS_AS(sweep_sim(kSrc, kCh, {}, cfg), std::domain_error);
}

TEST_CASE("trace csv export") {
    SimConfig cfg;
    cfg.horizon = 50;
    cfg.runs = 1;
    cfg.seed = 3;
    cfg.warmup = 5;
    SimTrace trace;
    simulate_traced(kSrc, kCh, kPol, cfg, trace);
    std::ostringstream os;
    write_trace_csv(os, trace);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "t,x,alpha,h,h_e,theta,theta_e,xhat,xhat_e,cra");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (rows == 0) {
            CHECK(line.substr(0, 2) == "0,");
        }
        ++rows;
    }
    CHECK(rows == trace.rows.size());
}
