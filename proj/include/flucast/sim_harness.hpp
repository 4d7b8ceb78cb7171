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
#ifndef FLUCAST_SIM_HARNESS_HPP
#define FLUCAST_SIM_HARNESS_HPP

#include "flucast/hosp_model.hpp"
#include "flucast/ili_model.hpp"
#include "flucast/rng.hpp"
#include "flucast/sampler.hpp"
#include "flucast/scoring.hpp"
#include "flucast/series.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace flucast {

/**
 * Generative hospitalization model used by the simulation study, stated on
 * the log scale so counts stay positive:
 *
 *   log H_w = alpha0 + alpha1 x_w + alpha2 x_w^2 + phi log H_{w-1} + e_w
 *
 * with x_w = ILI_w * P and e_w ~ N(0, sigma2). The log-scale noise is
 * homoskedastic; the population factor enters only through the predictor.
 * One coefficient set is shared across seasons.
 */
struct HospGenerativeParams {
    std::vector<double> alpha; // intercept, linear, quadratic
    double phi              = 0.0;
    double sigma2           = 0.0;
    double population_scale = 1.0; // P, > 0

    /// Throws InvalidArgumentError unless alpha has three finite entries,
    /// |phi| < 1 (the initialization needs a stationary mean), sigma2 >= 0,
    /// and population_scale > 0.
    void validate() const;
};

/**
 * Fit the generative model to one observed season by conjugate regression on
 * log counts and return posterior means. Every hospitalization value must be
 * positive. Needs at least seven usable weeks so the variance mean exists.
 */
HospGenerativeParams estimate_generative_params(const SeasonSeries& ili,
                                                const SeasonSeries& hosp,
                                                double population_scale);

/**
 * Simulate one season of hospitalizations along an observed ILI trace. The
 * recursion starts from the stationary conditional mean at the week-1 ILI
 * value: log H_0 = (alpha0 + alpha1 x_1 + alpha2 x_1^2) / (1 - phi). ILI must
 * be present for every week up to the season's last observed week.
 */
SeasonSeries simulate_hosp_season(const SeasonSeries& ili,
                                  const HospGenerativeParams& params, Rng& rng);

/// Panel version; each season draws from its own stream keyed by the season
/// year, so results do not depend on panel order.
SeasonPanel simulate_hosp(const SeasonPanel& ili, const HospGenerativeParams& params,
                          std::uint64_t seed);

/**
 * Time-series comparators fitted directly to the hospitalization history.
 * `base` is a random walk with drift. `ar` is an autoregression with
 * intercept whose order is chosen from 0..max_order by AIC.
 */
struct BaselineModel {
    enum class Kind : std::uint8_t { base, ar };
    Kind kind     = Kind::base;
    int max_order = 5;

    std::string name() const; // "BASE" or "AR"

    /// Throws InvalidArgumentError when max_order is negative.
    void validate() const;
};

/// Fitted baseline: drift term, AR coefficients (lags 1..order, empty for
/// the random walk), and the innovation variance behind the intervals.
struct BaselineFitResult {
    int order     = 0;
    double drift  = 0.0;
    std::vector<double> ar;
    double sigma2 = 0.0;
};

/**
 * Least-squares baseline fit. The random walk needs three points (drift is
 * the mean step, sigma2 the unbiased variance of the de-drifted steps). The
 * autoregression compares candidate orders by AIC on the common sample that
 * the largest feasible order leaves, then refits the winner on its own
 * maximal sample; the feasible ceiling shrinks with short histories.
 */
BaselineFitResult fit_baseline(const BaselineModel& model,
                               const std::vector<double>& history);

/**
 * Gaussian predictive quantiles for horizons 1..max_horizon after the
 * reference week, clipped at zero. The random walk's h-step variance is
 * h * sigma2; the autoregression accumulates squared impulse weights.
 * History must cover every week 1..reference_week.
 */
std::vector<QuantileForecast> baseline_forecast(const BaselineModel& model,
                                                const SeasonSeries& history,
                                                int reference_week, int max_horizon,
                                                const std::string& location);

/**
 * Leave-one-season-out study layout: for every replicate, hospitalizations
 * are simulated along the real ILI panel; each season in turn plays the
 * forecast season, fitted only up to each forecast week. The four ILI models
 * feed the cut pipeline; the baselines see the simulated counts directly.
 */
struct SimStudyConfig {
    std::vector<int> seasons; // defaults to 2010..2022 without 2020
    std::vector<int> forecast_weeks = {14, 20, 26, 32, 38};
    int replicates  = 500;
    int max_horizon = 4;
    HospGenerativeParams generative;
    std::uint64_t seed  = 0;
    std::size_t k_draws = 50000; // cut-forecast draws per target
    SamplerConfig sampler;       // ILI fit effort; its seed field is ignored
    PriorConfig priors;
    int num_threads = 1; // replicate-level workers; never affects the rows
    std::string location = "US";

    static SimStudyConfig defaults();

    /// Throws InvalidArgumentError when seasons are empty or repeat,
    /// replicates < 1, max_horizon < 1, or any forecast week + max_horizon
    /// overruns the shortest included season.
    void validate() const;
};

/// One scored target. A failed fit keeps its rows with `missing` set and the
/// failure text in `reason`; wis is NaN there.
struct SimScoreRow {
    int replicate = 0;
    std::string model; // "ASGD", "ASG", "SIRD", "SIR", "BASE", "AR"
    int season  = 0;
    int week    = 0; // reference week w*
    int horizon = 0; // 1..max_horizon
    double truth = std::numeric_limits<double>::quiet_NaN();
    double wis   = std::numeric_limits<double>::quiet_NaN();
    std::array<bool, 11> covered{}; // aligned with kIntervalLevels
    bool missing = false;
    std::string reason;
};

struct SimStudyResult {
    std::vector<SimScoreRow> rows; // replicate-major, then season, week, model, horizon
    std::vector<std::string> warnings;

    long missing_count() const;
};

/**
 * Run the full study. `ili` must hold every configured season, observed
 * through the last scored week. Identical config and panel give identical
 * rows for any num_threads. ILI model fits are shared across replicates
 * (the simulation only varies hospitalizations), so the sampler runs once
 * per (model, season, week).
 */
SimStudyResult run_loso(const SimStudyConfig& config, const SeasonPanel& ili);

/// Tidy CSV: header row, then one line per score row, coverage flags as 0/1.
void write_sim_scores_csv(const SimStudyResult& result, const std::string& path);

/// Per-model mean WIS and coverage over the non-missing rows.
struct ModelSummary {
    std::string model;
    double mean_wis = std::numeric_limits<double>::quiet_NaN();
    std::array<double, 11> coverage{};
    long scored  = 0;
    long missing = 0;
};

std::vector<ModelSummary> summarize_scores(const std::vector<SimScoreRow>& rows);

} // namespace flucast

#endif // FLUCAST_SIM_HARNESS_HPP
