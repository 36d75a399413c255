#include "cra/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "cra/rng.hpp"

namespace cra {

namespace {

struct RunMeans {
    double cra = 0.0;
    double accuracy = 0.0;
    double confidentiality = 0.0;
};

struct AgeCounts {
    int cap = 0;
    std::vector<long long> joint;
    std::vector<long long> marg_a, marg_b;
    long long joint_over = 0, over_a = 0, over_b = 0;
    long long samples = 0;

    explicit AgeCounts(int c)
        : cap(c),
          joint(std::size_t(c + 1) * (c + 1), 0),
          marg_a(std::size_t(c + 1), 0),
          marg_b(std::size_t(c + 1), 0) {}

    void merge(const AgeCounts& o) {
        for (std::size_t i = 0; i < joint.size(); ++i) joint[i] += o.joint[i];
        for (std::size_t i = 0; i < marg_a.size(); ++i) marg_a[i] += o.marg_a[i];
        for (std::size_t i = 0; i < marg_b.size(); ++i) marg_b[i] += o.marg_b[i];
        joint_over += o.joint_over;
        over_a += o.over_a;
        over_b += o.over_b;
        samples += o.samples;
    }
};

void validate_config(const SimConfig& cfg) {
    if (cfg.horizon < 1) throw std::domain_error("simulate: horizon must be >= 1");
    if (cfg.runs < 1) throw std::domain_error("simulate: runs must be >= 1");
    if (cfg.warmup < 0 || cfg.warmup >= cfg.horizon)
        throw std::domain_error("simulate: warmup must satisfy 0 <= warmup < horizon");
}

/// One replication. Slot order of draws is fixed (source, transmit coin, both
/// channel coins) and every coin is drawn even on silent slots, so traces and
/// estimates depend only on the run seed.
RunMeans run_once(const SourceModel& src, const ChannelPair& ch, const Policy& pol,
                  const SimConfig& cfg, std::uint64_t run_seed, AgeCounts* age,
                  SimTrace* trace) {
    Rng rng(run_seed);
    std::array<double, 2> v = stationary_source(src);

    int x = rng.bernoulli(v[1]) ? 1 : 0;
    int xhat = x, xhat_e = x;  // forced synchronization at t = 0
    long long theta = 0, theta_e = 0;

    if (trace) trace->rows.push_back({0, x, 1, 1, 1, 0, 0, xhat, xhat_e, 0});

    long long counted = cfg.horizon - cfg.warmup;
    long long n_cra = 0, n_acc = 0, n_conf = 0;

    for (long long t = 1; t <= cfg.horizon; ++t) {
        double u_src = rng.uniform();
        x = x ? (u_src < src.q ? 0 : 1) : (u_src < src.p ? 1 : 0);
        int alpha = rng.bernoulli(pol.p_alpha) ? 1 : 0;
        int h = rng.bernoulli(ch.p_s) ? 1 : 0;
        int h_e = rng.bernoulli(ch.p_s_e) ? 1 : 0;

        if (alpha && h) {
            xhat = x;
            theta = 0;
        } else {
            ++theta;
        }
        if (alpha && h_e) {
            xhat_e = x;
            theta_e = 0;
        } else {
            ++theta_e;
        }

        int acc = xhat == x;
        int conf = xhat_e != x;
        int cra = acc & conf;

        if (t > cfg.warmup) {
            n_acc += acc;
            n_conf += conf;
            n_cra += cra;
            if (age) {
                ++age->samples;
                bool ia = theta <= age->cap, ib = theta_e <= age->cap;
                if (ia && ib)
                    ++age->joint[std::size_t(theta) * (age->cap + 1) + std::size_t(theta_e)];
                else
                    ++age->joint_over;
                if (ia) ++age->marg_a[std::size_t(theta)]; else ++age->over_a;
                if (ib) ++age->marg_b[std::size_t(theta_e)]; else ++age->over_b;
            }
        }
        if (trace && t < kTraceCap)
            trace->rows.push_back({t, x, alpha, h, h_e, theta, theta_e, xhat, xhat_e, cra});
    }
    return {double(n_cra) / double(counted), double(n_acc) / double(counted),
            double(n_conf) / double(counted)};
}

SimEstimate reduce(const std::vector<RunMeans>& runs) {
    SimEstimate e;
    e.runs_used = int(runs.size());
    double n = double(runs.size());
    for (const RunMeans& r : runs) {
        e.mean_cra += r.cra;
        e.mean_accuracy += r.accuracy;
        e.mean_confidentiality += r.confidentiality;
    }
    e.mean_cra /= n;
    e.mean_accuracy /= n;
    e.mean_confidentiality /= n;
    if (runs.size() > 1) {
        double s_cra = 0.0, s_acc = 0.0, s_conf = 0.0;
        for (const RunMeans& r : runs) {
            s_cra += (r.cra - e.mean_cra) * (r.cra - e.mean_cra);
            s_acc += (r.accuracy - e.mean_accuracy) * (r.accuracy - e.mean_accuracy);
            s_conf += (r.confidentiality - e.mean_confidentiality) *
                      (r.confidentiality - e.mean_confidentiality);
        }
        double scale = 1.0 / ((n - 1.0) * n);
        e.se_cra = std::sqrt(s_cra * scale);
        e.se_accuracy = std::sqrt(s_acc * scale);
        e.se_confidentiality = std::sqrt(s_conf * scale);
    }
    return e;
}

/// Runs all replications across workers; per-run results land in an
/// index-addressed vector, so the reduction order never varies.
SimEstimate run_all(const SourceModel& src, const ChannelPair& ch, const Policy& pol,
                    const SimConfig& cfg, AgeCounts* age, SimTrace* trace) {
    validate_config(cfg);
    std::vector<RunMeans> results(std::size_t(cfg.runs));
    std::vector<AgeCounts> age_parts;
    if (age) age_parts.assign(std::size_t(cfg.runs), AgeCounts(age->cap));

    int workers = std::clamp(worker_count(), 1, cfg.runs);
    std::atomic<int> next{0};
    auto work = [&]() {
        for (int i = next.fetch_add(1); i < cfg.runs; i = next.fetch_add(1)) {
            results[std::size_t(i)] =
                run_once(src, ch, pol, cfg, derive_seed(cfg.seed, std::uint64_t(i)),
                         age ? &age_parts[std::size_t(i)] : nullptr,
                         (trace && i == 0) ? trace : nullptr);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }

    if (age)
        for (const AgeCounts& part : age_parts) age->merge(part);
    return reduce(results);
}

}  // namespace

int worker_count() {
    if (const char* env = std::getenv("CRA_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v < 1024) return int(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

SimEstimate simulate(const SourceModel& src, const ChannelPair& ch, const Policy& pol,
                     const SimConfig& cfg) {
    return run_all(src, ch, pol, cfg, nullptr, nullptr);
}

SimEstimate simulate_traced(const SourceModel& src, const ChannelPair& ch, const Policy& pol,
                            const SimConfig& cfg, SimTrace& trace) {
    trace.rows.clear();
    trace.rows.reserve(std::size_t(std::min(cfg.horizon + 1, kTraceCap)));
    return run_all(src, ch, pol, cfg, nullptr, &trace);
}

AgeHistogram empirical_age_distribution(const SourceModel& src, const ChannelPair& ch,
                                        const Policy& pol, const SimConfig& cfg, int cap) {
    if (cap < 1) throw std::domain_error("empirical_age_distribution: cap must be >= 1");
    AgeCounts counts(cap);
    run_all(src, ch, pol, cfg, &counts, nullptr);

    AgeHistogram h;
    h.cap = cap;
    h.samples = counts.samples;
    double n = double(counts.samples);
    h.joint.resize(counts.joint.size());
    h.marginal_a.resize(counts.marg_a.size());
    h.marginal_b.resize(counts.marg_b.size());
    for (std::size_t i = 0; i < counts.joint.size(); ++i) h.joint[i] = double(counts.joint[i]) / n;
    for (std::size_t i = 0; i < counts.marg_a.size(); ++i) {
        h.marginal_a[i] = double(counts.marg_a[i]) / n;
        h.marginal_b[i] = double(counts.marg_b[i]) / n;
    }
    h.joint_overflow = double(counts.joint_over) / n;
    h.overflow_a = double(counts.over_a) / n;
    h.overflow_b = double(counts.over_b) / n;
    return h;
}

std::vector<std::pair<double, SimEstimate>> sweep_sim(const SourceModel& src,
                                                      const ChannelPair& ch,
                                                      const std::vector<double>& p_alpha_grid,
                                                      const SimConfig& cfg) {
    if (p_alpha_grid.empty()) throw std::domain_error("sweep_sim: empty grid");
    std::vector<std::pair<double, SimEstimate>> out;
    out.reserve(p_alpha_grid.size());
    for (std::size_t i = 0; i < p_alpha_grid.size(); ++i) {
        SimConfig point_cfg = cfg;
        point_cfg.seed = derive_seed(cfg.seed, 0x5157454550ull + i);  // independent per point
        out.emplace_back(p_alpha_grid[i],
                         simulate(src, ch, Policy(p_alpha_grid[i]), point_cfg));
    }
    return out;
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
    os << "t,x,alpha,h,h_e,theta,theta_e,xhat,xhat_e,cra\n";
    for (const TraceRow& r : trace.rows) {
        os << r.t << ',' << r.x << ',' << r.alpha << ',' << r.h << ',' << r.h_e << ',' << r.theta
           << ',' << r.theta_e << ',' << r.xhat << ',' << r.xhat_e << ',' << r.cra << '\n';
    }
}

}  // namespace cra
