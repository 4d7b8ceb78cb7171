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
#ifndef FLUCAST_ILI_MODEL_HPP
#define FLUCAST_ILI_MODEL_HPP

#include "flucast/curves.hpp"
#include "flucast/priors.hpp"
#include "flucast/sampler.hpp"
#include "flucast/series.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flucast {

enum class CurveKind : std::uint8_t { sir, asg };

/**
 * Which model variant to fit: trajectory family, whether the weekly
 * discrepancy walks are present, the seasons pooled into the fit, and how far
 * the season being forecast has been observed.
 */
struct IliModelSpec {
    CurveKind curve_kind     = CurveKind::asg;
    bool discrepancy_enabled = true;
    std::vector<int> seasons_included; // historical seasons plus the forecast one
    int forecast_season    = 0;
    int last_observed_week = 0; // w*; forecast-season weeks beyond it are unseen

    /// "SIR", "SIRD", "ASG", or "ASGD".
    std::string model_name() const;

    /// Throws InvalidArgumentError when the forecast season is missing from
    /// seasons_included, seasons repeat, or last_observed_week is negative.
    void validate() const;
};

/**
 * Natural-scale parameter bundle for one model configuration. Week vectors
 * are complete: gamma runs over the longest included season (week 1 carries
 * the derived sum-to-zero value) and upsilon over the forecast season with
 * its pinned final zero.
 */
struct IliParams {
    CurveKind curve_kind = CurveKind::asg;
    std::vector<SirParams> sir;  // per season, when curve_kind == sir
    std::vector<AsgParams> asg;  // per season, when curve_kind == asg
    std::vector<double> kappa;   // per season
    std::array<double, 5> theta = {}; // hierarchical mean of transformed bump params
    std::array<double, 5> tau   = {}; // hierarchical sds
    std::vector<double> gamma;   // shared weekly discrepancy, index 0 = week 1
    std::vector<double> upsilon; // forecast-season discrepancy, index 0 = week 1
    double var_gamma      = 0.0;
    double var_gamma_last = 0.0;
    double sd_upsilon     = 0.0;
};

/**
 * Logit-scale mean for (season, week): the trajectory value plus, when
 * discrepancy is enabled, the shared weekly term and (for the forecast season
 * only) the season-specific term. `season_index` addresses
 * spec.seasons_included.
 *
 * Throws NumericalError when the trajectory's infectious fraction leaves
 * (0, 1).
 */
double logit_mean(const IliParams& params, const IliModelSpec& spec, int season_index,
                  int week);

/**
 * Log density of value `y` under Beta(pi * kappa, kappa * (1 - pi)), the
 * mean/scale parameterization: mean pi, variance pi(1-pi)/(1+kappa).
 * Throws InvalidArgumentError outside y in (0,1), pi in (0,1), kappa > 0.
 */
double beta_loglik(double y, double pi, double kappa);

/**
 * Joint posterior over all seasons of one location, exposed to the sampler
 * through an unconstrained parameterization: log transforms for positives, a
 * scaled logistic transform for the banded initial infectious fraction, free
 * walk states with the week-1 value derived (sum to zero) and the final
 * season-specific state pinned at zero. Gradients are analytic.
 */
class IliModel final : public LogDensityModel {
public:
    /// `ili` holds season series of proportions in (0, 1) for this location.
    /// Seasons in the spec but absent from the panel contribute no likelihood.
    IliModel(IliModelSpec spec, const SeasonPanel& ili, PriorConfig priors);

    std::size_t dim() const override { return static_cast<std::size_t>(dim_); }
    double log_density_gradient(std::span<const double> x,
                                std::span<double> grad) const override;
    std::vector<std::string> param_names() const override;

    const IliModelSpec& spec() const { return spec_; }
    const PriorConfig& priors() const { return priors_; }
    int num_seasons() const { return static_cast<int>(seasons_.size()); }
    int season_weeks(int season_index) const { return seasons_[static_cast<std::size_t>(season_index)].weeks; }
    int max_weeks() const { return max_weeks_; }          // shared walk length
    int forecast_weeks() const { return forecast_weeks_; } // season-specific walk length
    int forecast_season_index() const { return forecast_index_; }
    int observation_count() const;

    /// Natural-scale parameters for one unconstrained point.
    IliParams unpack(std::span<const double> x) const;

    /// Map raw draws onto named natural-scale draws (full walk vectors with
    /// the derived and pinned entries included).
    PosteriorDraws constrain(const PosteriorDraws& raw) const;

    /// Names matching constrain() output, one per constrained coordinate.
    std::vector<std::string> constrained_names() const;

private:
    struct SeasonData {
        int season = 0;
        int weeks  = 0;
        std::vector<int> obs_week;    // weeks with a usable observation
        std::vector<double> log_y;    // log(y) per observation
        std::vector<double> log_1my;  // log(1 - y)
    };

    IliModelSpec spec_;
    PriorConfig priors_;
    std::vector<SeasonData> seasons_;
    int forecast_index_ = 0; // position of the forecast season in seasons_
    int max_weeks_      = 0;
    int forecast_weeks_ = 0;
    int curve_len_      = 0; // unconstrained coords per season trajectory
    int dim_            = 0;

    // Offsets into the unconstrained vector.
    int off_kappa_ = 0, off_theta_ = 0, off_tau_ = 0;
    int off_gamma_ = 0, off_upsilon_ = 0, off_var_ = 0;
};

/**
 * Empirical-Bayes center for the bump baseline: per-season maximum-likelihood
 * fit of the Beta model with a bump mean (no discrepancy), averaged over the
 * seasons that fit cleanly.
 */
struct EmpiricalBayesLambda {
    double center = 0.0;
    double scale  = 0.1;
    std::vector<int> used_seasons;
    std::vector<int> skipped_seasons;
    std::vector<double> mles; // aligned with used_seasons
};

/**
 * Requires at least two seasons in the panel. Seasons with fewer than
 * `min_observations` usable points or a failed optimization are skipped (and
 * reported in the result); all seasons failing is a NumericalError.
 */
EmpiricalBayesLambda fit_lambda_empirical_bayes(const SeasonPanel& ili,
                                                double scale = 0.1,
                                                int min_observations = 8);

/// Per-draw predictive ILI paths for the weeks after the last observed one.
struct IliForecast {
    int season         = 0;
    int reference_week = 0;
    std::vector<int> weeks; // forecast season-weeks, reference_week + 1 ...
    std::size_t num_draws = 0;
    std::vector<double> ili; // [draw * weeks.size() + horizon_index]
    std::vector<std::string> warnings;

    double at(std::size_t draw, std::size_t horizon_index) const
    {
        return ili[draw * weeks.size() + horizon_index];
    }
};

/**
 * Posterior-predictive ILI draws: for every retained posterior draw, the
 * logit mean at each future week (walk states come from the same draw) feeds
 * one Beta draw. Horizons that run past the season end are truncated with a
 * warning. Draw streams are derived per draw index, so results do not depend
 * on evaluation order.
 */
IliForecast forecast_ili(const IliModel& model, const PosteriorDraws& draws,
                         int max_horizon, std::uint64_t seed);

} // namespace flucast

#endif // FLUCAST_ILI_MODEL_HPP
