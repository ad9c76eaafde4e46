#pragma once

// Small numerical statistics helpers used across modules.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace priceopt {

// Numerically stable log(1/(1+exp(-x))).
inline double log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

// Numerically stable logistic function, monotone, strictly inside (0,1) for
// every finite input: where the exact value would round onto an endpoint it
// is nudged to the nearest representable interior value.
inline double logistic(double x) {
    double p;
    if (x >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        p = e / (1.0 + e);
    }
    if (p >= 1.0) return 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    if (p <= 0.0) return std::numeric_limits<double>::denorm_min();
    return p;
}

inline double normal_lpdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

// Gamma log-density in the shape-scale parameterization.
inline double gamma_lpdf(double x, double shape, double scale) {
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    return (shape - 1.0) * std::log(x) - x / scale - shape * std::log(scale) -
           std::lgamma(shape);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Inverse standard normal CDF: Acklam's rational approximation polished with
// one Halley step, giving close to full double precision on (0,1).
double normal_quantile(double p);

// Type-7 (linear interpolation) sample quantile of unsorted data.
double quantile_type7(std::span<const double> data, double p);

inline double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double sample_variance(std::span<const double> x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

// Streaming mean/variance accumulator (Welford).
class Welford {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace priceopt
