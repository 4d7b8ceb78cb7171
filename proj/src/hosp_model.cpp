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
#include "flucast/hosp_model.hpp"

#include "flucast/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace flucast {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajorMatrix> map_matrix(const std::vector<double>& data, int rows_, int cols_)
{
    return {data.data(), rows_, cols_};
}

} // namespace

void HospRegressionSpec::validate() const
{
    if (!(population_scale > 0.0) || !std::isfinite(population_scale)) {
        throw InvalidArgumentError("hospitalization regression: population scale must be positive");
    }
}

std::vector<std::string> coefficient_names(const HospRegressionSpec& spec)
{
    if (spec.predictor_order == PredictorOrder::quadratic) {
        return {"alpha0", "alpha1", "alpha2", "phi"};
    }
    return {"alpha0", "alpha1", "phi"};
}

HospDesign build_design(const SeasonSeries& ili, const SeasonSeries& hosp,
                        const HospRegressionSpec& spec)
{
    spec.validate();
    if (ili.season != hosp.season) {
        throw InvalidArgumentError("hospitalization design: ILI season " +
                                   std::to_string(ili.season) +
                                   " does not match hospitalization season " +
                                   std::to_string(hosp.season));
    }
    const bool quadratic = spec.predictor_order == PredictorOrder::quadratic;
    HospDesign design;
    design.cols             = spec.num_coefficients();
    design.population_scale = spec.population_scale;

    const int last = std::min(ili.weeks(), hosp.weeks());
    for (int w = 2; w <= last; ++w) {
        if (!ili.has(w) || !hosp.has(w) || !hosp.has(w - 1)) {
            continue;
        }
        const double x = ili.at(w) * spec.population_scale;
        design.x.push_back(1.0);
        design.x.push_back(x);
        if (quadratic) {
            design.x.push_back(x * x);
        }
        design.x.push_back(hosp.at(w - 1));
        design.y.push_back(hosp.at(w));
        design.weeks.push_back(w);
    }

    const int needed = design.cols + 2;
    if (static_cast<int>(design.rows()) < needed) {
        throw InvalidArgumentError("hospitalization design: season " +
                                   std::to_string(hosp.season) + " has only " +
                                   std::to_string(design.rows()) + " usable weeks, need " +
                                   std::to_string(needed));
    }
    return design;
}

HospPosterior HospPosterior::fixed(std::vector<double> coefficients, double variance)
{
    if (coefficients.empty()) {
        throw InvalidArgumentError("fixed posterior: empty coefficient vector");
    }
    if (!(variance >= 0.0) || !std::isfinite(variance)) {
        throw InvalidArgumentError("fixed posterior: variance must be finite and >= 0");
    }
    HospPosterior post;
    const auto p = coefficients.size();
    post.location = std::move(coefficients);
    post.precision.assign(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        post.precision[i * p + i] = 1.0;
    }
    post.fixed_variance_ = variance;
    return post;
}

void HospPosterior::validate() const
{
    const auto p = location.size();
    if (p == 0 || precision.size() != p * p) {
        throw InvalidArgumentError("posterior: precision must be square and match the location size");
    }
    if (is_fixed()) {
        return;
    }
    if (!(shape > 0.0) || !(scale > 0.0)) {
        throw InvalidArgumentError("posterior: shape and scale must be positive");
    }
    const auto n = static_cast<Eigen::Index>(p);
    auto prec    = map_matrix(precision, static_cast<int>(p), static_cast<int>(p));
    const double scale_ref = prec.cwiseAbs().maxCoeff();
    if ((prec - prec.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, scale_ref)) {
        throw InvalidArgumentError("posterior: precision matrix is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(prec)};
    if (llt.info() != Eigen::Success) {
        throw InvalidArgumentError("posterior: precision matrix is not positive definite");
    }
    (void)n;
}

HospDraw HospPosterior::draw(Rng& rng) const
{
    HospDraw out;
    if (is_fixed()) {
        out.coefficients = location;
        out.variance     = fixed_variance_;
        return out;
    }
    const auto p = static_cast<Eigen::Index>(location.size());
    // variance ~ InvGamma(shape, scale): invert a Gamma(shape, rate = scale) draw
    out.variance = scale / rng.gamma(shape);

    auto prec = map_matrix(precision, static_cast<int>(p), static_cast<int>(p));
    Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(prec)};
    if (llt.info() != Eigen::Success) {
        throw NumericalError("posterior draw: precision matrix is not positive definite");
    }
    Eigen::VectorXd z(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        z[i] = rng.normal();
    }
    // coefficients = location + sqrt(variance) * L^{-T} z, precision = L L^T
    const Eigen::VectorXd shift =
        llt.matrixU().solve(z) * std::sqrt(out.variance);
    out.coefficients.resize(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) {
        out.coefficients[static_cast<std::size_t>(i)] = location[static_cast<std::size_t>(i)] + shift[i];
    }
    return out;
}

HospPrior HospPrior::normal_inverse_gamma(std::vector<double> location,
                                          std::vector<double> precision, double shape,
                                          double scale)
{
    const auto p = location.size();
    if (p == 0 || precision.size() != p * p) {
        throw InvalidArgumentError("prior: precision must be square and match the location size");
    }
    if (!(shape > 0.0) || !(scale > 0.0)) {
        throw InvalidArgumentError("prior: shape and scale must be positive");
    }
    HospPrior prior;
    prior.proper    = true;
    prior.location  = std::move(location);
    prior.precision = std::move(precision);
    prior.shape     = shape;
    prior.scale     = scale;
    return prior;
}

HospPosterior fit_conjugate(const HospDesign& design, const HospPrior& prior)
{
    const int p  = design.cols;
    const auto n = static_cast<Eigen::Index>(design.rows());
    if (p <= 0 || n == 0 || design.x.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(p)) {
        throw InvalidArgumentError("conjugate fit: empty or inconsistent design");
    }
    if (!(design.population_scale > 0.0) || !std::isfinite(design.population_scale)) {
        throw InvalidArgumentError("conjugate fit: design population scale must be positive");
    }

    auto x = map_matrix(design.x, static_cast<int>(n), p);
    Eigen::Map<const Eigen::VectorXd> y(design.y.data(), n);

    // every row shares the error variance v * P, so the sufficient statistics
    // for the structural variance v are the cross products divided by P
    const double weight       = 1.0 / design.population_scale;
    const Eigen::MatrixXd xtx = weight * (x.transpose() * x);
    const Eigen::VectorXd xty = weight * (x.transpose() * y);

    HospPosterior post;
    if (!prior.proper) {
        if (n <= p) {
            throw InvalidArgumentError("conjugate fit: the reference prior needs more rows than columns");
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        if (qr.rank() < p) {
            throw NumericalError(
                "conjugate fit: design matrix is rank deficient; supply a proper prior");
        }
        const Eigen::VectorXd beta = qr.solve(y);
        const double ssr           = weight * (y - x * beta).squaredNorm();
        post.location.assign(beta.data(), beta.data() + p);
        post.precision.resize(static_cast<std::size_t>(p) * static_cast<std::size_t>(p));
        Eigen::Map<RowMajorMatrix>(post.precision.data(), p, p) = xtx;
        post.shape = 0.5 * static_cast<double>(n - p);
        // exactly interpolating data still needs a positive scale; draws then sit at ~0
        post.scale = std::max(0.5 * ssr, std::numeric_limits<double>::min());
        return post;
    }

    if (static_cast<int>(prior.location.size()) != p) {
        throw InvalidArgumentError("conjugate fit: prior dimension does not match the design");
    }
    auto prior_prec = map_matrix(prior.precision, p, p);
    Eigen::Map<const Eigen::VectorXd> prior_loc(prior.location.data(), p);

    const Eigen::MatrixXd post_prec = Eigen::MatrixXd(prior_prec) + xtx;
    Eigen::LLT<Eigen::MatrixXd> llt(post_prec);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("conjugate fit: posterior precision is not positive definite");
    }
    const Eigen::VectorXd post_loc = llt.solve(prior_prec * prior_loc + xty);

    post.location.assign(post_loc.data(), post_loc.data() + p);
    post.precision.resize(static_cast<std::size_t>(p) * static_cast<std::size_t>(p));
    Eigen::Map<RowMajorMatrix>(post.precision.data(), p, p) = post_prec;
    post.shape = prior.shape + 0.5 * static_cast<double>(n);
    post.scale = prior.scale +
                 0.5 * (weight * y.squaredNorm() + prior_loc.dot(prior_prec * prior_loc) -
                        post_loc.dot(post_prec * post_loc));
    if (!(post.scale > 0.0)) {
        // mathematically positive; a nonpositive value here is lost precision
        post.scale = std::numeric_limits<double>::min();
    }
    return post;
}

std::vector<double> HospForecast::horizon_draws(std::size_t horizon_index) const
{
    std::vector<double> out(num_draws);
    const std::size_t stride = weeks.size();
    for (std::size_t k = 0; k < num_draws; ++k) {
        out[k] = draws[k * stride + horizon_index];
    }
    return out;
}

HospForecast cut_forecast(const IliForecast& ili, const HospPosterior& posterior,
                          double last_observed_hosp, const HospRegressionSpec& spec,
                          std::size_t k_draws, std::uint64_t seed, int num_threads)
{
    spec.validate();
    posterior.validate();
    if (!std::isfinite(last_observed_hosp)) {
        throw InvalidArgumentError(
            "cut forecast: hospitalization count at the reference week (lag anchor) is missing");
    }
    if (ili.num_draws == 0 || ili.weeks.empty()) {
        throw InvalidArgumentError("cut forecast: no predictive ILI paths to resample");
    }
    if (k_draws == 0) {
        throw InvalidArgumentError("cut forecast: need at least one draw");
    }
    if (posterior.dim() != spec.num_coefficients()) {
        throw InvalidArgumentError("cut forecast: posterior dimension " +
                                   std::to_string(posterior.dim()) +
                                   " does not match the regression layout");
    }

    const std::size_t horizons = ili.weeks.size();
    HospForecast forecast;
    forecast.season         = ili.season;
    forecast.reference_week = ili.reference_week;
    forecast.weeks          = ili.weeks;
    forecast.num_draws      = k_draws;
    forecast.draws.assign(k_draws * horizons, 0.0);

    const bool quadratic = spec.predictor_order == PredictorOrder::quadratic;
    const double pop     = spec.population_scale;
    const int lag_col    = spec.num_coefficients() - 1;

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            Rng rng                = Rng::stream(seed, k + 1);
            const std::size_t path = rng.uniform_index(ili.num_draws);
            const HospDraw par     = posterior.draw(rng);
            const double sd        = std::sqrt(par.variance * pop);
            double lag             = last_observed_hosp;
            for (std::size_t h = 0; h < horizons; ++h) {
                const double x = ili.at(path, h) * pop;
                double mean    = par.coefficients[0] + par.coefficients[1] * x;
                if (quadratic) {
                    mean += par.coefficients[2] * x * x;
                }
                mean += par.coefficients[static_cast<std::size_t>(lag_col)] * lag;
                const double value = rng.normal(mean, sd);
                lag                = value; // the chain keeps the raw draw
                forecast.draws[k * horizons + h] = std::max(0.0, value);
            }
        }
    };

    const int workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(std::max(1, num_threads)), k_draws));
    if (workers <= 1) {
        run_range(0, k_draws);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        const std::size_t chunk = (k_draws + static_cast<std::size_t>(workers) - 1) /
                                  static_cast<std::size_t>(workers);
        for (int t = 0; t < workers; ++t) {
            const std::size_t begin = static_cast<std::size_t>(t) * chunk;
            const std::size_t end   = std::min(k_draws, begin + chunk);
            if (begin >= end) {
                break;
            }
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    return forecast;
}

std::vector<double> extract_quantiles(const std::vector<double>& draws,
                                      const std::vector<double>& probabilities)
{
    if (draws.size() < 100) {
        throw InvalidArgumentError("quantiles: need at least 100 draws, got " +
                                   std::to_string(draws.size()));
    }
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double prob = probabilities[i];
        if (!(prob > 0.0) || !(prob < 1.0)) {
            throw InvalidArgumentError("quantiles: probabilities must lie strictly inside (0, 1)");
        }
        if (i > 0 && !(prob > probabilities[i - 1])) {
            throw InvalidArgumentError("quantiles: probabilities must be strictly increasing");
        }
    }

    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());

    const auto n = sorted.size();
    std::vector<double> out(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double h     = static_cast<double>(n - 1) * probabilities[i];
        const auto lo      = static_cast<std::size_t>(h);
        const double fraction = h - static_cast<double>(lo);
        double q = sorted[lo];
        if (fraction > 0.0 && lo + 1 < n) {
            q += fraction * (sorted[lo + 1] - sorted[lo]);
        }
        out[i] = q;
    }
    return out;
}

QuantileForecast quantile_forecast(const ForecastTarget& target,
                                   const std::vector<double>& draws)
{
    const std::vector<double> probs(kQuantileProbs.begin(), kQuantileProbs.end());
    const std::vector<double> values = extract_quantiles(draws, probs);
    QuantileForecast forecast;
    forecast.target = target;
    for (std::size_t i = 0; i < values.size(); ++i) {
        forecast.values[i] = std::max(0.0, values[i]);
    }
    return forecast;
}

std::vector<QuantileForecast> quantile_forecasts(const HospForecast& forecast,
                                                 const std::string& location)
{
    std::vector<QuantileForecast> out;
    out.reserve(forecast.weeks.size());
    for (std::size_t h = 0; h < forecast.weeks.size(); ++h) {
        ForecastTarget target;
        target.location       = location;
        target.season         = forecast.season;
        target.reference_week = forecast.reference_week;
        target.horizon        = forecast.weeks[h] - forecast.reference_week;
        out.push_back(quantile_forecast(target, forecast.horizon_draws(h)));
    }
    return out;
}

} // namespace flucast
