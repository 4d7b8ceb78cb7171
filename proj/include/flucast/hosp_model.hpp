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
#ifndef FLUCAST_HOSP_MODEL_HPP
#define FLUCAST_HOSP_MODEL_HPP

#include "flucast/ili_model.hpp"
#include "flucast/rng.hpp"
#include "flucast/scoring.hpp"
#include "flucast/series.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace flucast {

/// Polynomial order of the scaled-ILI predictor.
enum class PredictorOrder { linear, quadratic };

/// Error distribution family. Only the normal family is implemented; the
/// enum is the extension point for heavier-tailed alternatives.
enum class ErrorFamily { normal };

/**
 * Layout of the weekly hospitalization regression: an order-1 autoregression
 * on last week's count plus a polynomial in the population-scaled ILI signal,
 *
 *     H_w = a0 + a1 (ILI_w * P) + a2 (ILI_w * P)^2 + phi H_{w-1} + e_w,
 *     e_w ~ N(0, variance * P),
 *
 * where P is the location's population divided by 50,000. With a linear
 * predictor order the squared column is dropped (a2 fixed at zero).
 */
struct HospRegressionSpec {
    PredictorOrder predictor_order = PredictorOrder::quadratic;
    ErrorFamily error_family       = ErrorFamily::normal;
    double population_scale        = 1.0; // P, > 0

    /// Design columns: intercept, ILI*P, (ILI*P)^2 when quadratic, lag.
    int num_coefficients() const
    {
        return predictor_order == PredictorOrder::quadratic ? 4 : 3;
    }

    /// Throws InvalidArgumentError unless population_scale > 0.
    void validate() const;
};

/// Coefficient labels in design-column order (a0, a1, [a2,] phi).
std::vector<std::string> coefficient_names(const HospRegressionSpec& spec);

/// Regression data: row-major design matrix plus the aligned response.
struct HospDesign {
    std::vector<double> x; // rows * cols, row-major
    std::vector<double> y; // response H_w per row
    std::vector<int> weeks; // season week of each response
    int cols = 0;
    // error variance of a row is (structural variance) * population_scale;
    // build_design copies it from the spec so fit and forecast agree on P
    double population_scale = 1.0;

    std::size_t rows() const { return y.size(); }

    double at(std::size_t row, int col) const
    {
        return x[row * static_cast<std::size_t>(cols) + static_cast<std::size_t>(col)];
    }
};

/**
 * Assemble regression rows from one season's ILI and hospitalization series.
 * Week w contributes a row when ILI_w, H_w and the lag H_{w-1} are all
 * present; weeks lacking a lag are dropped. Throws InvalidArgumentError when
 * the series are from different seasons or when fewer than
 * num_coefficients + 2 rows survive.
 */
HospDesign build_design(const SeasonSeries& ili, const SeasonSeries& hosp,
                        const HospRegressionSpec& spec);

/// One joint posterior draw: coefficients in design-column order plus the
/// error variance (before the population scaling applied at forecast time).
struct HospDraw {
    std::vector<double> coefficients;
    double variance = 0.0;
};

/**
 * Normal-inverse-gamma posterior over the regression coefficients and error
 * variance: variance ~ InvGamma(shape, scale), and coefficients given the
 * variance are N(location, variance * precision^{-1}).
 */
struct HospPosterior {
    std::vector<double> location;  // posterior coefficient mean
    std::vector<double> precision; // row-major, symmetric positive definite
    double shape = 0.0;
    double scale = 0.0;

    /// Point mass at (coefficients, variance); draw() returns it exactly.
    static HospPosterior fixed(std::vector<double> coefficients, double variance);

    int dim() const { return static_cast<int>(location.size()); }

    bool is_fixed() const { return fixed_variance_ >= 0.0; }

    /**
     * Throws InvalidArgumentError on a size mismatch, an asymmetric or
     * non-positive-definite precision, or nonpositive shape/scale.
     */
    void validate() const;

    /// One joint draw. Thread-safe for concurrent callers with private Rngs.
    HospDraw draw(Rng& rng) const;

private:
    double fixed_variance_ = -1.0; // >= 0 marks a point-mass posterior
};

/**
 * Conjugate prior. The default is the improper reference prior
 * p(coefficients, variance) proportional to 1/variance; a proper prior
 * supplies a location, an SPD precision, and positive shape/scale.
 */
struct HospPrior {
    bool proper = false;
    std::vector<double> location;
    std::vector<double> precision; // row-major
    double shape = 0.0;
    double scale = 0.0;

    static HospPrior reference() { return {}; }

    /// Throws InvalidArgumentError on inconsistent sizes or nonpositive
    /// shape/scale.
    static HospPrior normal_inverse_gamma(std::vector<double> location,
                                          std::vector<double> precision, double shape,
                                          double scale);
};

/**
 * Exact conjugate update for the model y = X b + e, e ~ N(0, v * P) with P
 * the design's population scale, so the posterior is over the structural
 * variance v that cut_forecast rescales by P. Under the reference prior the
 * coefficient mean is the least-squares solution, shape is (rows - cols)/2
 * and scale is half the residual sum of squares divided by P; a
 * rank-deficient design then raises NumericalError advising a proper prior.
 * With a proper prior the standard normal-inverse-gamma update applies (on
 * the P-weighted data) and the prior precision absorbs any rank deficiency.
 */
HospPosterior fit_conjugate(const HospDesign& design,
                            const HospPrior& prior = HospPrior::reference());

/// Forecast draws for the weeks after the reference week; stored values are counts >= 0.
struct HospForecast {
    int season         = 0;
    int reference_week = 0;
    std::vector<int> weeks; // forecast season-weeks, aligned with horizons
    std::size_t num_draws = 0;
    std::vector<double> draws; // [draw * weeks.size() + horizon_index]

    double at(std::size_t draw, std::size_t horizon_index) const
    {
        return draws[draw * weeks.size() + horizon_index];
    }

    /// All draws for one forecast week, in draw order.
    std::vector<double> horizon_draws(std::size_t horizon_index) const;
};

/**
 * Monte Carlo forecast combining predictive ILI paths with the regression
 * posterior. Each of the k_draws iterations resamples one retained ILI path
 * (whole path, with replacement), draws one (coefficients, variance) point,
 * and rolls the regression forward from last_observed_hosp, drawing week
 * w+i from N(mean, variance * P) and chaining the drawn value into the next
 * week's lag. Negative values are stored as 0; the chained lag keeps the raw
 * draw. The regression posterior is fit from observations only, so the ILI
 * forecast never feeds back into it. Iteration streams are keyed by draw
 * index: output is identical for any num_threads.
 *
 * Throws InvalidArgumentError when the lag anchor is missing (non-finite),
 * the ILI forecast is empty, k_draws is 0, or the posterior dimension does
 * not match the spec.
 */
HospForecast cut_forecast(const IliForecast& ili, const HospPosterior& posterior,
                          double last_observed_hosp, const HospRegressionSpec& spec,
                          std::size_t k_draws, std::uint64_t seed, int num_threads = 1);

/**
 * Empirical quantiles by the standard linear interpolation of order
 * statistics (the rule spreadsheet and R default quantiles use). Requires at
 * least 100 draws and strictly increasing probabilities inside (0, 1);
 * throws InvalidArgumentError otherwise.
 */
std::vector<double> extract_quantiles(const std::vector<double>& draws,
                                      const std::vector<double>& probabilities);

/**
 * Submission-grade quantiles for one target: the 23 standard probabilities
 * evaluated on one horizon's draws, floored at zero.
 */
QuantileForecast quantile_forecast(const ForecastTarget& target,
                                   const std::vector<double>& draws);

/// One QuantileForecast per forecast week, targets labeled for `location`.
std::vector<QuantileForecast> quantile_forecasts(const HospForecast& forecast,
                                                 const std::string& location);

} // namespace flucast

#endif // FLUCAST_HOSP_MODEL_HPP
