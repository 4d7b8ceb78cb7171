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
#ifndef FLUCAST_SCORING_HPP
#define FLUCAST_SCORING_HPP

#include "flucast/series.hpp"

#include <array>
#include <string>
#include <vector>

namespace flucast {

/// The 23 submission probabilities, ascending.
inline constexpr std::array<double, 23> kQuantileProbs = {
    0.01, 0.025, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50,
    0.55, 0.60,  0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.975, 0.99};

/// Nominal central-interval levels scored, ascending.
inline constexpr std::array<double, 11> kIntervalLevels = {
    0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.95, 0.98};

/// Quantile forecast for one target: values aligned with kQuantileProbs.
struct QuantileForecast {
    ForecastTarget target;
    std::array<double, 23> values{};

    /// Throws InvalidArgumentError on negative or non-monotone values.
    void validate() const;
};

/**
 * Interval score for a central (1-alpha) interval [l, r]: the width plus
 * 2/alpha times the distance by which the observation escapes the interval.
 */
double interval_score(double l, double r, double alpha, double y);

/**
 * Weighted interval score over the 11 central intervals plus the median,
 * with weights alpha_b/2 (1/2 on the median term), normalized by B + 1/2.
 */
double wis(const QuantileForecast& forecast, double y);

/// WIS after mapping every quantile and the observation through log(1 + x).
double lwis(const QuantileForecast& forecast, double y);

/// Scored target: both scores plus per-interval coverage indicators.
struct ScoreRecord {
    ForecastTarget target;
    std::string model;
    double wis  = 0.0;
    double lwis = 0.0;
    std::array<bool, 11> covered{};
};

ScoreRecord score_forecast(const std::string& model, const QuantileForecast& forecast,
                           double y);

/// Empirical coverage per interval level. Throws InvalidArgumentError on empty input.
std::array<double, 11> coverage_curve(const std::vector<ScoreRecord>& records);

/// Mean squared gap between empirical and nominal coverage over the 11 levels.
double coverage_msec(const std::array<double, 11>& empirical);

enum class ScoreKind { wis, lwis };

/**
 * Mean score of model A divided by mean score of model B, averaged over the
 * targets both models scored. Throws InvalidArgumentError when the shared
 * set is empty.
 */
double relative_score(const std::vector<ScoreRecord>& a, const std::vector<ScoreRecord>& b,
                      ScoreKind kind = ScoreKind::wis);

} // namespace flucast

#endif // FLUCAST_SCORING_HPP
