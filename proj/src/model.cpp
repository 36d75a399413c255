#include "cra/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cra {

namespace {

void require_open_unit(double v, const char* name) {
    if (!(v > 0.0) || !(v < 1.0))
        throw std::domain_error(std::string(name) + " must lie strictly inside (0,1), got " +
                                std::to_string(v));
}

}  // namespace

SourceModel::SourceModel(double p_, double q_) : p(p_), q(q_) {
    require_open_unit(p, "p");
    require_open_unit(q, "q");
}

ChannelPair::ChannelPair(double p_s_, double p_s_e_) : p_s(p_s_), p_s_e(p_s_e_) {
    require_open_unit(p_s, "p_s");
    require_open_unit(p_s_e, "p_s_e");
}

Policy::Policy(double p_alpha_) : p_alpha(p_alpha_) {
    if (!(p_alpha > 0.0) || !(p_alpha <= 1.0))
        throw std::domain_error("p_alpha must lie in (0,1], got " + std::to_string(p_alpha));
}

const char* to_string(CorrelationClass c) {
    switch (c) {
        case CorrelationClass::Persistent: return "Persistent";
        case CorrelationClass::Memoryless: return "Memoryless";
        case CorrelationClass::Alternating: return "Alternating";
    }
    return "?";
}

std::array<double, 2> stationary_source(const SourceModel& src) {
    double s = src.p + src.q;
    return {src.q / s, src.p / s};
}

CorrelationClass correlation_class(const SourceModel& src) {
    double s = src.p + src.q;
    if (std::abs(s - 1.0) < kEqualityTol) return CorrelationClass::Memoryless;
    return s < 1.0 ? CorrelationClass::Persistent : CorrelationClass::Alternating;
}

Mat2 transition_matrix(const SourceModel& src) {
    return {1.0 - src.p, src.p, src.q, 1.0 - src.q};
}

LambdaSet lambda_set(const Policy& pol, const ChannelPair& ch) {
    double pa = pol.p_alpha, ps = ch.p_s, pe = ch.p_s_e;
    LambdaSet l;
    l.lambda11 = pa * ps * pe;
    l.lambda10 = pa * ps * (1.0 - pe);
    l.lambda01 = pa * (1.0 - ps) * pe;
    l.lambda00 = pa * (1.0 - ps) * (1.0 - pe) + (1.0 - pa);
    l.p_a = l.lambda11 + l.lambda10;
    l.p_b = l.lambda11 + l.lambda01;
    return l;
}

}  // namespace cra
