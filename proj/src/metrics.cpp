#include "cra/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace cra {

double avg_cra_from_pi(const JointStationary& pi) {
    return pi[JointState{0, 0, 1}.index()] + pi[JointState{1, 1, 0}.index()];
}

CraRational cra_coefficients(const SourceModel& src, const ChannelPair& ch) {
    double ps = ch.p_s, pe = ch.p_s_e;
    if (std::abs(ps - pe) < kEqualityTol)
        throw std::domain_error(
            "cra_coefficients: equal channels degenerate the rational form; "
            "use avg_cra_closed");
    double p = src.p, q = src.q, s = p + q;
    double mix = ps * pe - ps - pe;  // strictly negative on the whole domain
    CraRational co;
    co.A = p * q * (ps * ps * (1.0 - pe) * (s - 2.0) + pe * pe * (1.0 - ps) * s);
    co.B = p * q * s * (2.0 * ps * pe - ps - pe);
    co.C = mix * ps * pe * (s - 1.0) * (s - 1.0) * s;
    co.D = mix * (ps + pe) * (1.0 - s) * s * s;
    co.E = mix * s * s * s;
    return co;
}

namespace {

double avg_cra_stationary_route(const SourceModel& src, const ChannelPair& ch, const Policy& pol) {
    return avg_cra_from_pi(stationary_closed_form(src, lambda_set(pol, ch)));
}

}  // namespace

double avg_cra_closed(const SourceModel& src, const ChannelPair& ch, const Policy& pol) {
    double gap = std::abs(ch.p_s - ch.p_s_e);
    if (gap < kEqualityTol) return avg_cra_stationary_route(src, ch, pol);
    if (gap <= 1e-6) {
        // Near-degenerate band: guard the rational form against cancellation
        // by cross-checking it with the stationary route.
        double exact = avg_cra_stationary_route(src, ch, pol);
        double rational = cra_coefficients(src, ch).eval(pol.p_alpha);
        if (std::abs(exact - rational) > 1e-6)
            throw std::runtime_error("avg_cra_closed: near-degenerate branches disagree");
        return exact;
    }
    return cra_coefficients(src, ch).eval(pol.p_alpha);
}

double marginal_accuracy(const SourceModel& src, const ChannelPair& ch, const Policy& pol) {
    double p = src.p, q = src.q, s = p + q;
    double u = pol.p_alpha * ch.p_s;
    double denom = s * (s + u * (1.0 - s));
    return (q * (q + u * (1.0 - q)) + p * (p + u * (1.0 - p))) / denom;
}

double marginal_confidentiality(const SourceModel& src, const ChannelPair& ch, const Policy& pol) {
    double p = src.p, q = src.q, s = p + q;
    double u = pol.p_alpha * ch.p_s_e;
    // The two mismatch cells carry identical mass, hence the factor 2.
    return 2.0 * p * q * (1.0 - u) / (s * (s + u * (1.0 - s)));
}

double weighted_metric(const SourceModel& src, const ChannelPair& ch, const Policy& pol,
                       double omega) {
    if (!(omega >= 0.0) || !(omega <= 1.0))
        throw std::domain_error("weighted_metric: omega must lie in [0,1]");
    return (1.0 - omega) * marginal_accuracy(src, ch, pol) +
           omega * marginal_confidentiality(src, ch, pol);
}

MetricReport metric_report(const SourceModel& src, const ChannelPair& ch, const Policy& pol,
                           const std::vector<double>& omegas) {
    MetricReport r;
    r.pi = stationary_closed_form(src, lambda_set(pol, ch));
    r.cra = avg_cra_from_pi(r.pi);
    r.non_confidential_accuracy =
        r.pi[JointState{0, 0, 0}.index()] + r.pi[JointState{1, 1, 1}.index()];
    r.accuracy = r.cra + r.non_confidential_accuracy;
    double conf = 0.0;
    for (int a = 0; a < 2; ++a)
        conf += r.pi[JointState{0, a, 1}.index()] + r.pi[JointState{1, a, 0}.index()];
    r.confidentiality = conf;
    for (double w : omegas) {
        if (!(w >= 0.0) || !(w <= 1.0))
            throw std::domain_error("metric_report: omega must lie in [0,1]");
        r.weighted.emplace_back(w, (1.0 - w) * r.accuracy + w * r.confidentiality);
    }
    return r;
}

}  // namespace cra
