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
#include "flucast/ili_model.hpp"

#include "flucast/calendar.hpp"
#include "flucast/errors.hpp"
#include "flucast/mathutil.hpp"
#include "flucast/optim.hpp"
#include "flucast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

namespace flucast {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Infectious fractions this small make the logit gradient overflow-prone.
constexpr double kMinInfectious = 1e-290;

std::string indexed(const char* base, int idx)
{
    return std::string(base) + "[" + std::to_string(idx) + "]";
}

/// Component names of the transformed bump parameter vector.
constexpr const char* kBumpCoord[5] = {"lambda", "log_eta", "mu", "log_var1",
                                       "log_var2"};

} // namespace

std::string IliModelSpec::model_name() const
{
    const bool sir = curve_kind == CurveKind::sir;
    if (discrepancy_enabled) {
        return sir ? "SIRD" : "ASGD";
    }
    return sir ? "SIR" : "ASG";
}

void IliModelSpec::validate() const
{
    if (seasons_included.empty()) {
        throw InvalidArgumentError("model spec: no seasons included");
    }
    std::set<int> unique(seasons_included.begin(), seasons_included.end());
    if (unique.size() != seasons_included.size()) {
        throw InvalidArgumentError("model spec: repeated season");
    }
    if (unique.count(forecast_season) == 0) {
        throw InvalidArgumentError("model spec: forecast season not included");
    }
    if (last_observed_week < 0) {
        throw InvalidArgumentError("model spec: negative last observed week");
    }
}

double beta_loglik(double y, double pi, double kappa)
{
    if (!(y > 0.0 && y < 1.0)) {
        throw InvalidArgumentError("beta_loglik: value outside (0, 1)");
    }
    if (!(pi > 0.0 && pi < 1.0)) {
        throw InvalidArgumentError("beta_loglik: mean outside (0, 1)");
    }
    if (!(kappa > 0.0)) {
        throw InvalidArgumentError("beta_loglik: scale must be positive");
    }
    const double a = pi * kappa;
    const double b = (1.0 - pi) * kappa;
    return std::lgamma(kappa) - std::lgamma(a) - std::lgamma(b) +
           (a - 1.0) * std::log(y) + (b - 1.0) * std::log1p(-y);
}

double logit_mean(const IliParams& params, const IliModelSpec& spec, int season_index,
                  int week)
{
    const auto si = static_cast<std::size_t>(season_index);
    if (season_index < 0 || si >= spec.seasons_included.size()) {
        throw InvalidArgumentError("logit_mean: season index out of range");
    }
    if (week < 1) {
        throw InvalidArgumentError("logit_mean: week must be >= 1");
    }

    double f = 0.0;
    if (params.curve_kind == CurveKind::sir) {
        const auto traj = integrate_sir(params.sir[si], week);
        const double i  = traj.at(week).i;
        if (!(i > 0.0 && i < 1.0)) {
            throw NumericalError("logit_mean: infectious fraction outside (0, 1)");
        }
        f = logit(i);
    } else {
        f = asg_eval(params.asg[si], week);
    }

    if (spec.discrepancy_enabled) {
        f += params.gamma.at(static_cast<std::size_t>(week - 1));
        if (spec.seasons_included[si] == spec.forecast_season) {
            f += params.upsilon.at(static_cast<std::size_t>(week - 1));
        }
    }
    return f;
}

IliModel::IliModel(IliModelSpec spec, const SeasonPanel& ili, PriorConfig priors)
    : spec_(std::move(spec)), priors_(std::move(priors))
{
    spec_.validate();
    priors_.validate();

    seasons_.reserve(spec_.seasons_included.size());
    forecast_index_ = -1;
    for (std::size_t si = 0; si < spec_.seasons_included.size(); ++si) {
        const int season = spec_.seasons_included[si];
        SeasonData sd;
        sd.season = season;
        sd.weeks  = weeks_in_season(season);
        if (season == spec_.forecast_season) {
            forecast_index_ = static_cast<int>(si);
        }

        if (const SeasonSeries* series = find_season(ili, season)) {
            const int cutoff = season == spec_.forecast_season
                                   ? std::min(spec_.last_observed_week, sd.weeks)
                                   : sd.weeks;
            for (int w = 1; w <= std::min(cutoff, series->weeks()); ++w) {
                if (!series->has(w)) {
                    continue;
                }
                const double y = series->at(w);
                if (!(y > 0.0 && y < 1.0)) {
                    throw InvalidArgumentError(
                        "ILI model: observation outside (0, 1) at season " +
                        std::to_string(season) + " week " + std::to_string(w));
                }
                sd.obs_week.push_back(w);
                sd.log_y.push_back(std::log(y));
                sd.log_1my.push_back(std::log1p(-y));
            }
        }
        max_weeks_ = std::max(max_weeks_, sd.weeks);
        seasons_.push_back(std::move(sd));
    }
    forecast_weeks_ = seasons_[static_cast<std::size_t>(forecast_index_)].weeks;

    const int s = num_seasons();
    curve_len_  = spec_.curve_kind == CurveKind::sir ? 3 : 5;
    off_kappa_  = s * curve_len_;
    off_theta_  = off_kappa_ + s;
    off_tau_    = off_theta_ + (spec_.curve_kind == CurveKind::asg ? 5 : 0);
    const int hier_end = off_tau_ + (spec_.curve_kind == CurveKind::asg ? 5 : 0);
    off_gamma_         = hier_end;
    off_upsilon_       = off_gamma_ + (spec_.discrepancy_enabled ? max_weeks_ - 1 : 0);
    off_var_ = off_upsilon_ + (spec_.discrepancy_enabled ? forecast_weeks_ - 1 : 0);
    dim_     = off_var_ + (spec_.discrepancy_enabled ? 3 : 0);
}

int IliModel::observation_count() const
{
    int n = 0;
    for (const auto& sd : seasons_) {
        n += static_cast<int>(sd.obs_week.size());
    }
    return n;
}

std::vector<std::string> IliModel::param_names() const
{
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(dim_));
    for (const auto& sd : seasons_) {
        if (spec_.curve_kind == CurveKind::sir) {
            names.push_back(indexed("i0_raw", sd.season));
            names.push_back(indexed("log_beta", sd.season));
            names.push_back(indexed("log_rho", sd.season));
        } else {
            for (const char* coord : kBumpCoord) {
                names.push_back(std::string(coord) + "[" + std::to_string(sd.season) +
                                "]");
            }
        }
    }
    for (const auto& sd : seasons_) {
        names.push_back(indexed("log_kappa", sd.season));
    }
    if (spec_.curve_kind == CurveKind::asg) {
        for (const char* coord : kBumpCoord) {
            names.push_back(std::string("theta_") + coord);
        }
        for (const char* coord : kBumpCoord) {
            names.push_back(std::string("log_tau_") + coord);
        }
    }
    if (spec_.discrepancy_enabled) {
        for (int w = 2; w <= max_weeks_; ++w) {
            names.push_back(indexed("gamma", w));
        }
        for (int w = 1; w <= forecast_weeks_ - 1; ++w) {
            names.push_back(indexed("upsilon", w));
        }
        names.emplace_back("log_var_gamma");
        names.emplace_back("log_var_gamma_last");
        names.emplace_back("log_sd_upsilon");
    }
    return names;
}

double IliModel::log_density_gradient(std::span<const double> x,
                                      std::span<double> grad) const
{
    std::fill(grad.begin(), grad.end(), 0.0);
    const bool disc = spec_.discrepancy_enabled;
    const bool sir  = spec_.curve_kind == CurveKind::sir;
    double logp     = 0.0;

    auto reject = [&grad]() {
        std::fill(grad.begin(), grad.end(), 0.0);
        return kNegInf;
    };

    // Assemble the full shared walk (week 1 derived) and season walk
    // (final week pinned) on the natural scale, with gradient accumulators.
    std::vector<double> gamma_full, gamma_acc, ups_full;
    if (disc) {
        gamma_full.resize(static_cast<std::size_t>(max_weeks_));
        gamma_acc.assign(static_cast<std::size_t>(max_weeks_), 0.0);
        double head = 0.0;
        for (int w = 2; w <= max_weeks_; ++w) {
            const double g = x[static_cast<std::size_t>(off_gamma_ + w - 2)];
            gamma_full[static_cast<std::size_t>(w - 1)] = g;
            head -= g;
        }
        gamma_full[0] = head;

        ups_full.assign(static_cast<std::size_t>(forecast_weeks_), 0.0);
        for (int w = 1; w <= forecast_weeks_ - 1; ++w) {
            ups_full[static_cast<std::size_t>(w - 1)] =
                x[static_cast<std::size_t>(off_upsilon_ + w - 1)];
        }
    }

    // Likelihood plus per-season curve and scale priors.
    SirSensitivities sens;
    for (std::size_t si = 0; si < seasons_.size(); ++si) {
        const SeasonData& sd = seasons_[si];
        const std::size_t c0 = si * static_cast<std::size_t>(curve_len_);
        const std::size_t ki = static_cast<std::size_t>(off_kappa_) + si;

        const double log_kappa = x[ki];
        const double kappa     = std::exp(log_kappa);
        if (!std::isfinite(kappa) || kappa <= 0.0) {
            return reject();
        }
        // Scale prior: half-normal(0, scale) on kappa plus the log transform.
        const double ks = priors_.kappa_scale;
        logp += -0.5 * kappa * kappa / (ks * ks) + log_kappa;
        grad[ki] += -kappa * kappa / (ks * ks) + 1.0;

        AsgParams asg;
        SirParams sirp;
        double i0_sig = 0.0;
        if (sir) {
            i0_sig = inv_logit(x[c0]);
            sirp.s0   = priors_.sir_s0;
            sirp.i0   = priors_.sir_i0_upper * i0_sig;
            sirp.beta = std::exp(x[c0 + 1]);
            sirp.rho  = std::exp(x[c0 + 2]);
            if (!(i0_sig > 0.0 && i0_sig < 1.0) || !std::isfinite(sirp.beta) ||
                !std::isfinite(sirp.rho)) {
                return reject();
            }

            // Truncated-normal priors with the transform terms.
            const double di = sirp.i0 - priors_.sir_i0_mean;
            const double vs = priors_.sir_i0_sd * priors_.sir_i0_sd;
            logp += -0.5 * di * di / vs + std::log(i0_sig) + std::log1p(-i0_sig);
            grad[c0] += -di / vs * priors_.sir_i0_upper * i0_sig * (1.0 - i0_sig) +
                        (1.0 - 2.0 * i0_sig);

            const double db = sirp.beta - priors_.sir_beta_mean;
            const double vb = priors_.sir_beta_sd * priors_.sir_beta_sd;
            logp += -0.5 * db * db / vb + x[c0 + 1];
            grad[c0 + 1] += -db * sirp.beta / vb + 1.0;

            const double dr = sirp.rho - priors_.sir_rho_mean;
            const double vr = priors_.sir_rho_sd * priors_.sir_rho_sd;
            logp += -0.5 * dr * dr / vr + x[c0 + 2];
            grad[c0 + 2] += -dr * sirp.rho / vr + 1.0;

            try {
                sens.compute(sirp, sd.weeks);
            } catch (const NumericalError&) {
                return reject();
            }
        } else {
            asg.lambda    = x[c0];
            asg.eta       = std::exp(x[c0 + 1]);
            asg.mu        = x[c0 + 2];
            asg.sigma1_sq = std::exp(x[c0 + 3]);
            asg.sigma2_sq = std::exp(x[c0 + 4]);
            if (!std::isfinite(asg.eta) || !std::isfinite(asg.sigma1_sq) ||
                !std::isfinite(asg.sigma2_sq)) {
                return reject();
            }

            // Hierarchical prior on the transformed coordinates; tau both
            // scales the quadratic and contributes its own -log tau term.
            for (int j = 0; j < 5; ++j) {
                const std::size_t tj = static_cast<std::size_t>(off_theta_ + j);
                const std::size_t uj = static_cast<std::size_t>(off_tau_ + j);
                const double tau     = std::exp(x[uj]);
                if (!std::isfinite(tau) || tau <= 0.0) {
                    return reject();
                }
                const double diff = x[c0 + static_cast<std::size_t>(j)] - x[tj];
                const double it2  = 1.0 / (tau * tau);
                logp += -0.5 * diff * diff * it2 - x[uj];
                grad[c0 + static_cast<std::size_t>(j)] += -diff * it2;
                grad[tj] += diff * it2;
                grad[uj] += diff * diff * it2 - 1.0;
            }
        }

        // Likelihood over this season's usable observations.
        for (std::size_t k = 0; k < sd.obs_week.size(); ++k) {
            const int w          = sd.obs_week[k];
            const double log_y   = sd.log_y[k];
            const double log_1my = sd.log_1my[k];

            double f = 0.0;
            std::array<double, 3> sir_g{};
            std::array<double, 5> asg_g{};
            if (sir) {
                const double i = sens.infectious[static_cast<std::size_t>(w - 1)];
                if (!(i > kMinInfectious && i < 1.0)) {
                    return reject();
                }
                f     = logit(i);
                sir_g = sens.logit_grad(w);
            } else {
                f     = asg_eval(asg, w);
                asg_g = asg_grad(asg, w);
            }

            double m = f;
            if (disc) {
                m += gamma_full[static_cast<std::size_t>(w - 1)];
                if (static_cast<int>(si) == forecast_index_) {
                    m += ups_full[static_cast<std::size_t>(w - 1)];
                }
            }
            const double pi = inv_logit(m);
            if (!(pi > 0.0 && pi < 1.0)) {
                return reject();
            }

            const double a = pi * kappa;
            const double b = (1.0 - pi) * kappa;
            if (!(a > 0.0) || !(b > 0.0)) { // shape underflow
                return reject();
            }
            logp += std::lgamma(kappa) - std::lgamma(a) - std::lgamma(b) +
                    (a - 1.0) * log_y + (b - 1.0) * log_1my;

            const double psi_a = digamma(a);
            const double psi_b = digamma(b);
            const double g_m =
                kappa * pi * (1.0 - pi) * (-psi_a + psi_b + log_y - log_1my);
            grad[ki] += kappa * (digamma(kappa) - pi * psi_a - (1.0 - pi) * psi_b +
                                 pi * log_y + (1.0 - pi) * log_1my);

            if (sir) {
                grad[c0] += g_m * sir_g[0] * priors_.sir_i0_upper * i0_sig *
                            (1.0 - i0_sig);
                grad[c0 + 1] += g_m * sir_g[1] * sirp.beta;
                grad[c0 + 2] += g_m * sir_g[2] * sirp.rho;
            } else {
                grad[c0] += g_m * asg_g[0];
                grad[c0 + 1] += g_m * asg_g[1] * asg.eta;
                grad[c0 + 2] += g_m * asg_g[2];
                grad[c0 + 3] += g_m * asg_g[3] * asg.sigma1_sq;
                grad[c0 + 4] += g_m * asg_g[4] * asg.sigma2_sq;
            }
            if (disc) {
                gamma_acc[static_cast<std::size_t>(w - 1)] += g_m;
                if (static_cast<int>(si) == forecast_index_ && w < forecast_weeks_) {
                    grad[static_cast<std::size_t>(off_upsilon_ + w - 1)] += g_m;
                }
            }
        }
    }

    // Hyperprior on the hierarchical mean vector.
    if (!sir) {
        const double centers[5] = {priors_.asg_lambda_center, 0.0, priors_.asg_mu_mean,
                                   0.0, 0.0};
        const double sds[5]     = {priors_.asg_lambda_scale, priors_.asg_log_scale_sd,
                                   priors_.asg_mu_sd, priors_.asg_log_scale_sd,
                                   priors_.asg_log_scale_sd};
        for (int j = 0; j < 5; ++j) {
            const std::size_t tj = static_cast<std::size_t>(off_theta_ + j);
            const double diff    = x[tj] - centers[j];
            const double iv      = 1.0 / (sds[j] * sds[j]);
            logp += -0.5 * diff * diff * iv;
            grad[tj] += -diff * iv;
        }
        // Half-normal(0, scale) on each hierarchical sd.
        const double ts = priors_.asg_tau_scale;
        for (int j = 0; j < 5; ++j) {
            const std::size_t uj = static_cast<std::size_t>(off_tau_ + j);
            const double tau     = std::exp(x[uj]);
            logp += -0.5 * tau * tau / (ts * ts) + x[uj];
            grad[uj] += -tau * tau / (ts * ts) + 1.0;
        }
    }

    if (disc) {
        const std::size_t xv  = static_cast<std::size_t>(off_var_);
        const std::size_t xvl = static_cast<std::size_t>(off_var_ + 1);
        const std::size_t xs  = static_cast<std::size_t>(off_var_ + 2);
        const double var_g    = std::exp(x[xv]);
        const double var_gl   = std::exp(x[xvl]);
        const double sd_u     = std::exp(x[xs]);
        if (!std::isfinite(var_g) || !std::isfinite(var_gl) || !std::isfinite(sd_u) ||
            var_g <= 0.0 || var_gl <= 0.0 || sd_u <= 0.0) {
            return reject();
        }

        // Shared walk, backward in week: each week conditions on the next,
        // and the final week carries its own variance.
        for (int w = 1; w <= max_weeks_ - 1; ++w) {
            const double d = gamma_full[static_cast<std::size_t>(w - 1)] -
                             gamma_full[static_cast<std::size_t>(w)];
            logp += -0.5 * d * d / var_g - 0.5 * x[xv];
            gamma_acc[static_cast<std::size_t>(w - 1)] += -d / var_g;
            gamma_acc[static_cast<std::size_t>(w)] += d / var_g;
            grad[xv] += 0.5 * d * d / var_g - 0.5;
        }
        const double tail = gamma_full[static_cast<std::size_t>(max_weeks_ - 1)];
        logp += -0.5 * tail * tail / var_gl - 0.5 * x[xvl];
        gamma_acc[static_cast<std::size_t>(max_weeks_ - 1)] += -tail / var_gl;
        grad[xvl] += 0.5 * tail * tail / var_gl - 0.5;

        // Season-specific walk ending at the pinned zero.
        const double var_u = sd_u * sd_u;
        for (int w = 1; w <= forecast_weeks_ - 1; ++w) {
            const double d = ups_full[static_cast<std::size_t>(w - 1)] -
                             ups_full[static_cast<std::size_t>(w)];
            logp += -0.5 * d * d / var_u - x[xs];
            grad[static_cast<std::size_t>(off_upsilon_ + w - 1)] += -d / var_u;
            if (w < forecast_weeks_ - 1) {
                grad[static_cast<std::size_t>(off_upsilon_ + w)] += d / var_u;
            }
            grad[xs] += d * d / var_u - 1.0;
        }

        // Inverse-gamma on both shared-walk variances (log-scale sampling).
        logp += -priors_.var_gamma_shape * x[xv] - priors_.var_gamma_scale / var_g;
        grad[xv] += -priors_.var_gamma_shape + priors_.var_gamma_scale / var_g;
        logp += -priors_.var_gamma_last_shape * x[xvl] -
                priors_.var_gamma_last_scale / var_gl;
        grad[xvl] += -priors_.var_gamma_last_shape + priors_.var_gamma_last_scale / var_gl;

        // Half-normal on the season-walk sd.
        const double us = priors_.sd_upsilon_scale;
        logp += -0.5 * sd_u * sd_u / (us * us) + x[xs];
        grad[xs] += -sd_u * sd_u / (us * us) + 1.0;

        // Fold natural-scale walk gradients onto the free states; week 1 is
        // minus the sum of the rest, so its gradient flows to every one.
        for (int w = 2; w <= max_weeks_; ++w) {
            grad[static_cast<std::size_t>(off_gamma_ + w - 2)] +=
                gamma_acc[static_cast<std::size_t>(w - 1)] - gamma_acc[0];
        }
    }

    if (!std::isfinite(logp)) {
        return reject();
    }
    return logp;
}

IliParams IliModel::unpack(std::span<const double> x) const
{
    IliParams p;
    p.curve_kind = spec_.curve_kind;
    const int s  = num_seasons();
    p.kappa.resize(static_cast<std::size_t>(s));
    for (int si = 0; si < s; ++si) {
        const std::size_t c0 = static_cast<std::size_t>(si * curve_len_);
        if (spec_.curve_kind == CurveKind::sir) {
            SirParams sp;
            sp.s0   = priors_.sir_s0;
            sp.i0   = priors_.sir_i0_upper * inv_logit(x[c0]);
            sp.beta = std::exp(x[c0 + 1]);
            sp.rho  = std::exp(x[c0 + 2]);
            p.sir.push_back(sp);
        } else {
            AsgParams ap;
            ap.lambda    = x[c0];
            ap.eta       = std::exp(x[c0 + 1]);
            ap.mu        = x[c0 + 2];
            ap.sigma1_sq = std::exp(x[c0 + 3]);
            ap.sigma2_sq = std::exp(x[c0 + 4]);
            p.asg.push_back(ap);
        }
        p.kappa[static_cast<std::size_t>(si)] =
            std::exp(x[static_cast<std::size_t>(off_kappa_ + si)]);
    }
    if (spec_.curve_kind == CurveKind::asg) {
        for (int j = 0; j < 5; ++j) {
            p.theta[static_cast<std::size_t>(j)] =
                x[static_cast<std::size_t>(off_theta_ + j)];
            p.tau[static_cast<std::size_t>(j)] =
                std::exp(x[static_cast<std::size_t>(off_tau_ + j)]);
        }
    }
    if (spec_.discrepancy_enabled) {
        p.gamma.assign(static_cast<std::size_t>(max_weeks_), 0.0);
        double head = 0.0;
        for (int w = 2; w <= max_weeks_; ++w) {
            const double g = x[static_cast<std::size_t>(off_gamma_ + w - 2)];
            p.gamma[static_cast<std::size_t>(w - 1)] = g;
            head -= g;
        }
        p.gamma[0] = head;
        p.upsilon.assign(static_cast<std::size_t>(forecast_weeks_), 0.0);
        for (int w = 1; w <= forecast_weeks_ - 1; ++w) {
            p.upsilon[static_cast<std::size_t>(w - 1)] =
                x[static_cast<std::size_t>(off_upsilon_ + w - 1)];
        }
        p.var_gamma      = std::exp(x[static_cast<std::size_t>(off_var_)]);
        p.var_gamma_last = std::exp(x[static_cast<std::size_t>(off_var_ + 1)]);
        p.sd_upsilon     = std::exp(x[static_cast<std::size_t>(off_var_ + 2)]);
    }
    return p;
}

std::vector<std::string> IliModel::constrained_names() const
{
    std::vector<std::string> names;
    for (const auto& sd : seasons_) {
        if (spec_.curve_kind == CurveKind::sir) {
            names.push_back(indexed("i0", sd.season));
            names.push_back(indexed("beta", sd.season));
            names.push_back(indexed("rho", sd.season));
        } else {
            names.push_back(indexed("lambda", sd.season));
            names.push_back(indexed("eta", sd.season));
            names.push_back(indexed("mu", sd.season));
            names.push_back(indexed("var1", sd.season));
            names.push_back(indexed("var2", sd.season));
        }
    }
    for (const auto& sd : seasons_) {
        names.push_back(indexed("kappa", sd.season));
    }
    if (spec_.curve_kind == CurveKind::asg) {
        for (const char* coord : kBumpCoord) {
            names.push_back(std::string("theta_") + coord);
        }
        for (const char* coord : kBumpCoord) {
            names.push_back(std::string("tau_") + coord);
        }
    }
    if (spec_.discrepancy_enabled) {
        for (int w = 1; w <= max_weeks_; ++w) {
            names.push_back(indexed("gamma", w));
        }
        for (int w = 1; w <= forecast_weeks_; ++w) {
            names.push_back(indexed("upsilon", w));
        }
        names.emplace_back("var_gamma");
        names.emplace_back("var_gamma_last");
        names.emplace_back("sd_upsilon");
    }
    return names;
}

PosteriorDraws IliModel::constrain(const PosteriorDraws& raw) const
{
    PosteriorDraws out;
    out.names       = constrained_names();
    out.num_chains  = raw.num_chains;
    out.num_draws   = raw.num_draws;
    out.dim         = out.names.size();
    out.divergences = raw.divergences;
    out.data.reserve(raw.total_draws() * out.dim);

    for (int c = 0; c < raw.num_chains; ++c) {
        for (int d = 0; d < raw.num_draws; ++d) {
            const IliParams p = unpack(raw.point(c, d));
            for (int si = 0; si < num_seasons(); ++si) {
                const auto u = static_cast<std::size_t>(si);
                if (spec_.curve_kind == CurveKind::sir) {
                    out.data.push_back(p.sir[u].i0);
                    out.data.push_back(p.sir[u].beta);
                    out.data.push_back(p.sir[u].rho);
                } else {
                    out.data.push_back(p.asg[u].lambda);
                    out.data.push_back(p.asg[u].eta);
                    out.data.push_back(p.asg[u].mu);
                    out.data.push_back(p.asg[u].sigma1_sq);
                    out.data.push_back(p.asg[u].sigma2_sq);
                }
            }
            out.data.insert(out.data.end(), p.kappa.begin(), p.kappa.end());
            if (spec_.curve_kind == CurveKind::asg) {
                out.data.insert(out.data.end(), p.theta.begin(), p.theta.end());
                out.data.insert(out.data.end(), p.tau.begin(), p.tau.end());
            }
            if (spec_.discrepancy_enabled) {
                out.data.insert(out.data.end(), p.gamma.begin(), p.gamma.end());
                out.data.insert(out.data.end(), p.upsilon.begin(), p.upsilon.end());
                out.data.push_back(p.var_gamma);
                out.data.push_back(p.var_gamma_last);
                out.data.push_back(p.sd_upsilon);
            }
        }
    }
    return out;
}

EmpiricalBayesLambda fit_lambda_empirical_bayes(const SeasonPanel& ili, double scale,
                                                int min_observations)
{
    if (ili.size() < 2) {
        throw InvalidArgumentError(
            "empirical-Bayes baseline fit needs at least two seasons");
    }
    if (!(scale > 0.0)) {
        throw InvalidArgumentError("empirical-Bayes scale must be positive");
    }

    EmpiricalBayesLambda result;
    result.scale = scale;

    for (const auto& series : ili) {
        std::vector<int> weeks;
        std::vector<double> values;
        for (int w = 1; w <= series.weeks(); ++w) {
            if (series.has(w) && series.at(w) > 0.0 && series.at(w) < 1.0) {
                weeks.push_back(w);
                values.push_back(series.at(w));
            }
        }
        if (static_cast<int>(values.size()) < min_observations) {
            result.skipped_seasons.push_back(series.season);
            continue;
        }

        // Maximize the curve-only Beta likelihood over
        // (lambda, log eta, mu, log var1, log var2, log kappa).
        auto nll = [&](std::span<const double> q) -> double {
            AsgParams p;
            p.lambda           = q[0];
            p.eta              = std::exp(q[1]);
            p.mu               = q[2];
            p.sigma1_sq        = std::exp(q[3]);
            p.sigma2_sq        = std::exp(q[4]);
            const double kappa = std::exp(q[5]);
            if (!std::isfinite(p.eta) || !std::isfinite(p.sigma1_sq) ||
                !std::isfinite(p.sigma2_sq) || !std::isfinite(kappa) || kappa <= 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            double total = 0.0;
            for (std::size_t k = 0; k < weeks.size(); ++k) {
                const double pi = inv_logit(asg_eval(p, weeks[k]));
                if (!(pi > 0.0 && pi < 1.0)) {
                    return std::numeric_limits<double>::infinity();
                }
                const double a = pi * kappa;
                const double b = (1.0 - pi) * kappa;
                total += std::lgamma(kappa) - std::lgamma(a) - std::lgamma(b) +
                         (a - 1.0) * std::log(values[k]) +
                         (b - 1.0) * std::log1p(-values[k]);
            }
            return -total;
        };

        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        const double base   = quantile_sorted(sorted, 0.25);
        const double peak   = sorted.back();
        const auto peak_pos = std::max_element(values.begin(), values.end());
        const int peak_week = weeks[static_cast<std::size_t>(peak_pos - values.begin())];

        std::vector<double> start = {logit(base),
                                     std::log(std::max(0.25, logit(peak) - logit(base))),
                                     static_cast<double>(peak_week),
                                     std::log(16.0),
                                     std::log(16.0),
                                     std::log(500.0)};
        const std::vector<double> step = {0.25, 0.25, 2.0, 0.5, 0.5, 0.75};

        auto fit = nelder_mead(nll, start, step, 6000);
        // Polish from the first pass; cheap insurance against a stalled simplex.
        fit = nelder_mead(nll, fit.x, {0.02, 0.02, 0.2, 0.05, 0.05, 0.05}, 3000);

        if (!std::isfinite(fit.fval) || !std::isfinite(fit.x[0])) {
            result.skipped_seasons.push_back(series.season);
            continue;
        }
        result.used_seasons.push_back(series.season);
        result.mles.push_back(fit.x[0]);
    }

    if (result.mles.empty()) {
        throw NumericalError("empirical-Bayes baseline fit failed for every season");
    }
    double sum = 0.0;
    for (double v : result.mles) sum += v;
    result.center = sum / static_cast<double>(result.mles.size());
    return result;
}

IliForecast forecast_ili(const IliModel& model, const PosteriorDraws& draws,
                         int max_horizon, std::uint64_t seed)
{
    if (max_horizon < 1) {
        throw InvalidArgumentError("forecast horizon must be >= 1");
    }
    if (draws.dim != model.dim()) {
        throw InvalidArgumentError("draws do not match the model's dimension");
    }

    const IliModelSpec& spec = model.spec();
    const int fidx           = model.forecast_season_index();
    const int season_weeks   = model.season_weeks(fidx);
    const int w_star         = std::min(spec.last_observed_week, season_weeks);

    IliForecast out;
    out.season         = spec.forecast_season;
    out.reference_week = w_star;

    const int horizon = std::min(max_horizon, season_weeks - w_star);
    if (horizon < max_horizon) {
        out.warnings.push_back("forecast horizon truncated to week " +
                               std::to_string(season_weeks) + " (season end)");
    }
    if (horizon <= 0) {
        return out;
    }
    for (int h = 1; h <= horizon; ++h) {
        out.weeks.push_back(w_star + h);
    }

    out.num_draws = draws.total_draws();
    out.ili.resize(out.num_draws * out.weeks.size());

    const bool sir  = spec.curve_kind == CurveKind::sir;
    const bool disc = spec.discrepancy_enabled;
    for (int c = 0; c < draws.num_chains; ++c) {
        for (int d = 0; d < draws.num_draws; ++d) {
            const std::size_t global =
                static_cast<std::size_t>(c) * static_cast<std::size_t>(draws.num_draws) +
                static_cast<std::size_t>(d);
            const IliParams p = model.unpack(draws.point(c, d));
            Rng rng = Rng::stream(seed, 2, global + 1);

            SirTrajectory traj;
            if (sir) {
                traj = integrate_sir(p.sir[static_cast<std::size_t>(fidx)],
                                     w_star + horizon);
            }
            const double kappa = p.kappa[static_cast<std::size_t>(fidx)];
            for (int h = 1; h <= horizon; ++h) {
                const int w = w_star + h;
                double f    = 0.0;
                if (sir) {
                    f = logit(traj.at(w).i);
                } else {
                    f = asg_eval(p.asg[static_cast<std::size_t>(fidx)], w);
                }
                if (disc) {
                    f += p.gamma[static_cast<std::size_t>(w - 1)];
                    f += p.upsilon[static_cast<std::size_t>(w - 1)];
                }
                if (!std::isfinite(f)) {
                    throw NumericalError("forecast: non-finite logit mean");
                }
                // Clamp away exact-degenerate means so the Beta draw is defined.
                double pi = inv_logit(f);
                pi        = std::min(1.0 - 1e-12, std::max(1e-12, pi));
                out.ili[global * out.weeks.size() + static_cast<std::size_t>(h - 1)] =
                    rng.beta(pi * kappa, (1.0 - pi) * kappa);
            }
        }
    }
    return out;
}

} // namespace flucast
