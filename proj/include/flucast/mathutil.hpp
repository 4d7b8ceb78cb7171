/*
 * Copyright (C) 2026 flucast contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef FLUCAST_MATHUTIL_HPP
#define FLUCAST_MATHUTIL_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace flucast {

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double inv_logit(double x)
{
    // Branch keeps exp() argument non-positive for numerical stability.
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/**
 * Inverse standard normal CDF (Acklam's rational approximation with one
 * Halley refinement step; relative error below 1e-9 across (0, 1)).
 */
double norm_quantile(double p);

/// Digamma function; recurrence up to x >= 10, then the asymptotic series.
double digamma(double x);

/**
 * Empirical quantile with linear interpolation between order statistics
 * (h = (n - 1) p + 1). `sorted` must be ascending and non-empty.
 */
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Welford running mean/variance accumulator.
class RunningMoments {
public:
    void add(double x)
    {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    std::size_t count() const { return n_; }
    double mean() const { return n_ > 0 ? mean_ : std::numeric_limits<double>::quiet_NaN(); }

    /// Sample variance (n - 1 denominator).
    double variance() const
    {
        if (n_ < 2) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return m2_ / static_cast<double>(n_ - 1);
    }

    double stddev() const { return std::sqrt(variance()); }

private:
    std::size_t n_ = 0;
    double mean_   = 0.0;
    double m2_     = 0.0;
};

} // namespace flucast

#endif // FLUCAST_MATHUTIL_HPP
