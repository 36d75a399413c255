#pragma once

#include <utility>
#include <vector>

#include "cra/model.hpp"
#include "cra/stationary.hpp"

namespace cra {

/// Coefficients of the long-run average metric as a rational function of the
/// transmission probability: (A*x + B) / (C*x^2 + D*x + E). Valid only when
/// the two channels differ; at equal channels numerator and denominator share
/// a factor and the fraction degenerates to 0/0.
struct CraRational {
    double A;
    double B;
    double C;
    double D;
    double E;

    double eval(double p_alpha) const {
        return (A * p_alpha + B) / ((C * p_alpha + D) * p_alpha + E);
    }
};

/// All slot-level reconstruction metrics derived from one stationary solve,
/// so the partition identities hold by construction.
struct MetricReport {
    double cra;                        // legitimate estimate right, adversary wrong
    double accuracy;                   // legitimate estimate right
    double confidentiality;            // adversary estimate wrong
    double non_confidential_accuracy;  // both estimates right
    std::vector<std::pair<double, double>> weighted;  // (omega, blended value)
    JointStationary pi;
};

/// Long-run probability that the legitimate estimate is correct while the
/// adversary's is wrong, read off a stationary vector.
double avg_cra_from_pi(const JointStationary& pi);

/// Rational-function coefficients of the average metric. Throws
/// std::domain_error when the channels are equal within tolerance; callers
/// must route through avg_cra_closed, which handles that branch.
CraRational cra_coefficients(const SourceModel& src, const ChannelPair& ch);

/// Average metric via the fastest valid route: the rational form on distinct
/// channels, the stationary closed form when the channels coincide. In the
/// near-degenerate band both routes are evaluated and cross-checked.
double avg_cra_closed(const SourceModel& src, const ChannelPair& ch, const Policy& pol);

/// Closed-form marginal probability that the legitimate estimate matches the
/// source.
double marginal_accuracy(const SourceModel& src, const ChannelPair& ch, const Policy& pol);

/// Closed-form marginal probability that the adversary's estimate differs
/// from the source.
double marginal_confidentiality(const SourceModel& src, const ChannelPair& ch, const Policy& pol);

/// Weighted marginal blend: (1-omega)*accuracy + omega*confidentiality.
double weighted_metric(const SourceModel& src, const ChannelPair& ch, const Policy& pol,
                       double omega);

/// Full report from a single stationary solve.
MetricReport metric_report(const SourceModel& src, const ChannelPair& ch, const Policy& pol,
                           const std::vector<double>& omegas);

}  // namespace cra
