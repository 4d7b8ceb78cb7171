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
#include "flucast/scoring.hpp"

#include "flucast/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace flucast {

namespace {

// Index into kQuantileProbs of the lower endpoint for each interval level;
// the upper endpoint mirrors it (22 - index). Level 0.10 pairs 0.45/0.55
// (indices 10/12), ..., level 0.98 pairs 0.01/0.99 (indices 0/22).
constexpr std::array<int, 11> kLowerIdx = {10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0};
constexpr int kMedianIdx                = 11;

struct IntervalView {
    double lower;
    double upper;
    double alpha;
};

IntervalView interval_at(const std::array<double, 23>& values, int level_idx)
{
    const int lo = kLowerIdx[static_cast<std::size_t>(level_idx)];
    return IntervalView{values[static_cast<std::size_t>(lo)],
                        values[static_cast<std::size_t>(22 - lo)],
                        1.0 - kIntervalLevels[static_cast<std::size_t>(level_idx)]};
}

double weighted_interval_sum(const std::array<double, 23>& values, double y)
{
    const double median = values[kMedianIdx];
    double total        = 0.5 * std::fabs(y - median);
    for (int b = 0; b < 11; ++b) {
        const IntervalView iv = interval_at(values, b);
        total += (iv.alpha / 2.0) * interval_score(iv.lower, iv.upper, iv.alpha, y);
    }
    return total / (11.0 + 0.5);
}

} // namespace

void QuantileForecast::validate() const
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0)) {
            throw InvalidArgumentError("quantile forecast has a negative or NaN value");
        }
        if (i > 0 && values[i] < values[i - 1]) {
            throw InvalidArgumentError("quantile forecast values are not nondecreasing");
        }
    }
}

double interval_score(double l, double r, double alpha, double y)
{
    if (l > r) {
        throw InvalidArgumentError("interval_score: lower endpoint exceeds upper");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgumentError("interval_score: alpha must lie in (0,1)");
    }
    double score = r - l;
    if (y < l) {
        score += (2.0 / alpha) * (l - y);
    } else if (y > r) {
        score += (2.0 / alpha) * (y - r);
    }
    return score;
}

double wis(const QuantileForecast& forecast, double y)
{
    forecast.validate();
    return weighted_interval_sum(forecast.values, y);
}

double lwis(const QuantileForecast& forecast, double y)
{
    forecast.validate();
    std::array<double, 23> logged{};
    for (std::size_t i = 0; i < logged.size(); ++i) {
        logged[i] = std::log1p(forecast.values[i]);
    }
    return weighted_interval_sum(logged, std::log1p(y));
}

ScoreRecord score_forecast(const std::string& model, const QuantileForecast& forecast,
                           double y)
{
    ScoreRecord rec;
    rec.target = forecast.target;
    rec.model  = model;
    rec.wis    = wis(forecast, y);
    rec.lwis   = lwis(forecast, y);
    for (int b = 0; b < 11; ++b) {
        const IntervalView iv = interval_at(forecast.values, b);
        rec.covered[static_cast<std::size_t>(b)] = iv.lower <= y && y <= iv.upper;
    }
    return rec;
}

std::array<double, 11> coverage_curve(const std::vector<ScoreRecord>& records)
{
    if (records.empty()) {
        throw InvalidArgumentError("coverage_curve: no scored targets");
    }
    std::array<double, 11> rates{};
    for (const auto& rec : records) {
        for (int b = 0; b < 11; ++b) {
            rates[static_cast<std::size_t>(b)] += rec.covered[static_cast<std::size_t>(b)] ? 1.0 : 0.0;
        }
    }
    for (double& r : rates) {
        r /= static_cast<double>(records.size());
    }
    return rates;
}

double coverage_msec(const std::array<double, 11>& empirical)
{
    double total = 0.0;
    for (std::size_t b = 0; b < empirical.size(); ++b) {
        const double gap = empirical[b] - kIntervalLevels[b];
        total += gap * gap;
    }
    return total / static_cast<double>(empirical.size());
}

double relative_score(const std::vector<ScoreRecord>& a, const std::vector<ScoreRecord>& b,
                      ScoreKind kind)
{
    const auto value = [kind](const ScoreRecord& rec) {
        return kind == ScoreKind::wis ? rec.wis : rec.lwis;
    };
    std::map<ForecastTarget, double> b_scores;
    for (const auto& rec : b) {
        b_scores.emplace(rec.target, value(rec));
    }
    double sum_a = 0.0;
    double sum_b = 0.0;
    std::size_t shared = 0;
    for (const auto& rec : a) {
        const auto it = b_scores.find(rec.target);
        if (it != b_scores.end()) {
            sum_a += value(rec);
            sum_b += it->second;
            ++shared;
        }
    }
    if (shared == 0) {
        throw InvalidArgumentError("relative_score: the models share no targets");
    }
    return (sum_a / static_cast<double>(shared)) / (sum_b / static_cast<double>(shared));
}

} // namespace flucast
