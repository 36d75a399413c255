#pragma once

#include <vector>

namespace cra {

/// Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double regularized_gamma_q(double a, double x);

/// Survival function of the chi-square distribution with df degrees of
/// freedom: P(X > stat).
double chi_square_sf(double stat, int df);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares line through (xs, ys).
LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace cra
