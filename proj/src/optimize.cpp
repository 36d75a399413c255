#include "cra/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cra {

const char* to_string(OptBranch b) {
    switch (b) {
        case OptBranch::GeneralRoot: return "GeneralRoot";
        case OptBranch::SymmetricPersistent: return "SymmetricPersistent";
        case OptBranch::SymmetricAlternating: return "SymmetricAlternating";
        case OptBranch::SymmetricIndifferent: return "SymmetricIndifferent";
        case OptBranch::DegenerateA: return "DegenerateA";
        case OptBranch::Clamped: return "Clamped";
    }
    return "?";
}

double derivative_numerator(const CraRational& co, double p_alpha) {
    return -co.A * co.C * p_alpha * p_alpha - 2.0 * co.B * co.C * p_alpha +
           (co.A * co.E - co.B * co.D);
}

namespace {

double coefficient_scale(const CraRational& co) {
    return std::max(std::abs(co.A), std::abs(co.B)) *
           std::max({std::abs(co.C), std::abs(co.D), std::abs(co.E)});
}

void validate_interval(const Interval& itv) {
    if (!(itv.lo > 0.0) || !(itv.lo <= itv.hi) || !(itv.hi <= 1.0))
        throw std::domain_error("optimize: interval must satisfy 0 < lo <= hi <= 1");
}

}  // namespace

double discriminant(const CraRational& co) {
    double raw = co.B * co.B * co.C * co.C + co.A * co.C * (co.A * co.E - co.B * co.D);
    double scale = co.B * co.B * co.C * co.C +
                   std::abs(co.A * co.C) *
                       (std::abs(co.A * co.E) + std::abs(co.B * co.D));
    if (raw < -1e-9 * scale)
        throw std::runtime_error("discriminant: materially negative (corrupt coefficients)");
    return raw;
}

OptimizerResult optimize(const SourceModel& src, const ChannelPair& ch, Interval itv) {
    validate_interval(itv);
    OptimizerResult res{};

    if (std::abs(ch.p_s - ch.p_s_e) < kEqualityTol) {
        // Equal channels: the objective is monotone in the transmission
        // probability, with direction set by the source correlation sign.
        switch (correlation_class(src)) {
            case CorrelationClass::Alternating:
                res.p_alpha_star = itv.hi;
                res.branch = OptBranch::SymmetricAlternating;
                break;
            case CorrelationClass::Persistent:
                res.p_alpha_star = itv.lo;
                res.branch = OptBranch::SymmetricPersistent;
                break;
            case CorrelationClass::Memoryless:
                // Flat objective: any feasible point; ties favor fewer sends.
                res.p_alpha_star = itv.lo;
                res.branch = OptBranch::SymmetricIndifferent;
                break;
        }
        res.delta = 0.0;
        res.value = avg_cra_closed(src, ch, Policy(res.p_alpha_star));
        return res;
    }

    CraRational co = cra_coefficients(src, ch);
    res.delta = discriminant(co);
    double scale = coefficient_scale(co);

    if (std::abs(co.A * co.C) < 1e-14 * scale) {
        // Quadratic term of the derivative numerator vanishes; what is left is
        // M(x) = -2BC x + (AE - BD), affine or constant.
        double slope = -2.0 * co.B * co.C;  // always <= 0: B < 0 and C <= 0
        double constant = co.A * co.E - co.B * co.D;
        if (std::abs(slope) >= 1e-14 * scale) {
            res.p_alpha_star = std::clamp(constant / (2.0 * co.B * co.C), itv.lo, itv.hi);
        } else {
            res.p_alpha_star = constant > 0.0 ? itv.hi : itv.lo;
        }
        res.branch = OptBranch::DegenerateA;
    } else {
        double cand = (-co.B * co.C + std::sqrt(std::max(res.delta, 0.0))) / (co.A * co.C);
        if (cand < itv.lo) {
            res.p_alpha_star = itv.lo;
            res.branch = OptBranch::Clamped;
        } else if (cand > itv.hi) {
            res.p_alpha_star = itv.hi;
            res.branch = OptBranch::Clamped;
        } else {
            res.p_alpha_star = cand;
            res.branch = OptBranch::GeneralRoot;
        }
    }
    res.value = co.eval(res.p_alpha_star);
    return res;
}

std::pair<double, double> grid_argmax(const SourceModel& src, const ChannelPair& ch, Interval itv,
                                      double step) {
    validate_interval(itv);
    if (!(step > 0.0)) throw std::domain_error("grid_argmax: step must be positive");
    double best_x = itv.lo;
    double best_v = avg_cra_closed(src, ch, Policy(itv.lo));
    for (long long k = 1;; ++k) {
        double x = itv.lo + double(k) * step;
        bool last = x >= itv.hi - 1e-15;
        if (last) x = itv.hi;
        double v = avg_cra_closed(src, ch, Policy(x));
        if (v > best_v) {  // strict: ties keep the smaller argument
            best_v = v;
            best_x = x;
        }
        if (last) break;
    }
    return {best_x, best_v};
}

}  // namespace cra
