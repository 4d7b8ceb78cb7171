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
#ifndef FLUCAST_PRIORS_HPP
#define FLUCAST_PRIORS_HPP

#include <string>
#include <string_view>

namespace flucast {

/**
 * Hyperparameters for every prior in the ILI model, loadable from a flat
 * `key = value` config file ('#' starts a comment). Defaults are weakly
 * informative; the lambda center is normally overwritten with the
 * empirical-Bayes value before fitting.
 */
struct PriorConfig {
    // Beta scale parameter kappa_s: half-normal(0, scale) on kappa itself.
    double kappa_scale = 5000.0;

    // Shared-walk innovation variance and last-week variance:
    // inverse-gamma(shape, scale) assigned directly to the variances.
    double var_gamma_shape      = 2.0;
    double var_gamma_scale      = 0.02;
    double var_gamma_last_shape = 2.0;
    double var_gamma_last_scale = 0.02;

    // Season-specific walk: half-normal(0, scale) on the sd.
    double sd_upsilon_scale = 1.0;

    // Hierarchical mean for the transformed bump parameters
    // (lambda, log eta, mu, log var1, log var2).
    double asg_lambda_center = -4.6; // ~1% baseline on the logit scale
    double asg_lambda_scale  = 0.1;
    double asg_log_scale_sd  = 2.0; // prior sd for the three log components
    double asg_mu_mean       = 22.0;
    double asg_mu_sd         = 5.0;
    // Diagonal hierarchical sds: half-normal(0, scale) each.
    double asg_tau_scale = 1.0;

    // Transmission-curve priors. i0 is truncated-normal on (0, upper);
    // beta and rho are truncated-normal on (0, inf).
    double sir_s0       = 0.9;
    double sir_i0_mean  = 0.0;
    double sir_i0_sd    = 0.01;
    double sir_i0_upper = 0.01;
    double sir_beta_mean = 0.4;
    double sir_beta_sd   = 0.2;
    double sir_rho_mean  = 0.5;
    double sir_rho_sd    = 0.2;

    /// Throws InvalidArgumentError when a scale is non-positive or the fixed
    /// susceptible fraction leaves no room for the initial infectious bound.
    void validate() const;

    /// Parse `key = value` text; unknown keys and bad numbers are errors.
    static PriorConfig parse(std::string_view text, const std::string& origin);

    static PriorConfig from_file(const std::string& path);

    /// Write every key back out in parseable form.
    void save(const std::string& path) const;
};

} // namespace flucast

#endif // FLUCAST_PRIORS_HPP
