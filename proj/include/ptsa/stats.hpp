#pragma once

#include <cstddef>
#include <vector>

namespace ptsa::stats {

inline constexpr double kPi = 3.14159265358979323846;

double norm_pdf(double x);
double norm_cdf(double x);
/// Upper-tail probability P(Z > x); accurate deep into the tail.
double norm_sf(double x);
/// Inverse standard-normal CDF on (0, 1).
double norm_ppf(double p);
/// Inverse of the survival function: norm_isf(q) = norm_ppf(1 - q) without
/// the cancellation for small q.
double norm_isf(double q);

double weibull_cdf(double x, double scale, double shape);
double weibull_sf(double x, double scale, double shape);
double weibull_ppf(double p, double scale, double shape);

struct KsResult {
    double statistic;
    double p_value;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

double mean(const std::vector<double>& v);
/// Sample standard deviation (n-1 denominator).
double sample_std(const std::vector<double>& v);

}  // namespace ptsa::stats
