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
#include "flucast/sim_harness.hpp"

#include "flucast/errors.hpp"
#include "flucast/mathutil.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <thread>
#include <utility>

namespace flucast {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c = 0)
{
    Rng rng = Rng::stream(seed, a, b, c);
    return rng();
}

} // namespace

void HospGenerativeParams::validate() const
{
    if (alpha.size() != 3) {
        throw InvalidArgumentError("generative model needs exactly three alpha coefficients");
    }
    for (double a : alpha) {
        if (!std::isfinite(a)) {
            throw InvalidArgumentError("generative alpha coefficients must be finite");
        }
    }
    if (!std::isfinite(phi) || std::abs(phi) >= 1.0) {
        throw InvalidArgumentError(
            "generative lag coefficient must satisfy |phi| < 1 so the recursion "
            "has a stationary mean to start from");
    }
    if (!std::isfinite(sigma2) || sigma2 < 0.0) {
        throw InvalidArgumentError("generative noise variance must be finite and >= 0");
    }
    if (!std::isfinite(population_scale) || population_scale <= 0.0) {
        throw InvalidArgumentError("population scale must be positive");
    }
}

HospGenerativeParams estimate_generative_params(const SeasonSeries& ili,
                                                const SeasonSeries& hosp,
                                                double population_scale)
{
    for (int w = 1; w <= hosp.weeks(); ++w) {
        if (hosp.has(w) && hosp.at(w) <= 0.0) {
            throw InvalidArgumentError(
                "hospitalizations must be positive to fit the log-scale model");
        }
    }
    SeasonSeries log_hosp = hosp;
    for (double& v : log_hosp.values) {
        if (std::isfinite(v)) {
            v = std::log(v);
        }
    }

    HospRegressionSpec spec;
    spec.predictor_order  = PredictorOrder::quadratic;
    spec.population_scale = population_scale;
    HospDesign design = build_design(ili, log_hosp, spec);
    // The log-scale noise carries no population factor; P enters the
    // predictor columns only.
    design.population_scale = 1.0;

    const HospPosterior post = fit_conjugate(design);
    if (!(post.shape > 1.0)) {
        throw InvalidArgumentError(
            "too few weeks to average the noise variance; need at least seven");
    }

    HospGenerativeParams params;
    params.alpha            = {post.location[0], post.location[1], post.location[2]};
    params.phi              = post.location[3];
    params.sigma2           = post.scale / (post.shape - 1.0);
    params.population_scale = population_scale;
    if (std::abs(params.phi) >= 1.0) {
        throw NumericalError("estimated lag coefficient is nonstationary");
    }
    params.validate();
    return params;
}

SeasonSeries simulate_hosp_season(const SeasonSeries& ili,
                                  const HospGenerativeParams& params, Rng& rng)
{
    params.validate();
    const int last = ili.last_observed_week();
    if (last < 1) {
        throw InvalidArgumentError("cannot simulate along an empty ILI season");
    }
    for (int w = 1; w <= last; ++w) {
        if (!ili.has(w)) {
            throw InvalidArgumentError("ILI trace has a gap at week " + std::to_string(w));
        }
    }

    const double sd = std::sqrt(params.sigma2);
    auto mean_part  = [&](int week) {
        const double x = ili.at(week) * params.population_scale;
        return params.alpha[0] + params.alpha[1] * x + params.alpha[2] * x * x;
    };

    SeasonSeries out = SeasonSeries::empty(ili.season);
    double log_lag   = mean_part(1) / (1.0 - params.phi);
    for (int w = 1; w <= last; ++w) {
        double log_h = mean_part(w) + params.phi * log_lag;
        if (sd > 0.0) {
            log_h += rng.normal(0.0, sd);
        }
        out.set(w, std::exp(log_h), Provenance::simulated);
        log_lag = log_h;
    }
    return out;
}

SeasonPanel simulate_hosp(const SeasonPanel& ili, const HospGenerativeParams& params,
                          std::uint64_t seed)
{
    SeasonPanel out;
    out.reserve(ili.size());
    for (const SeasonSeries& season : ili) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(season.season));
        out.push_back(simulate_hosp_season(season, params, rng));
    }
    return out;
}

std::string BaselineModel::name() const { return kind == Kind::base ? "BASE" : "AR"; }

void BaselineModel::validate() const
{
    if (max_order < 0) {
        throw InvalidArgumentError("autoregressive order bound must be >= 0");
    }
}

namespace {

/// OLS of y on an intercept and the previous `order` values, using rows
/// `first_row`..T-1. Returns the coefficients (intercept first) and the SSR.
std::pair<Eigen::VectorXd, double> ar_ols(const std::vector<double>& y, int order,
                                          int first_row)
{
    const int t = static_cast<int>(y.size());
    const int n = t - first_row;
    Eigen::MatrixXd x(n, order + 1);
    Eigen::VectorXd b(n);
    for (int r = 0; r < n; ++r) {
        const int row = first_row + r;
        x(r, 0)       = 1.0;
        for (int i = 1; i <= order; ++i) {
            x(r, i) = y[static_cast<std::size_t>(row - i)];
        }
        b(r) = y[static_cast<std::size_t>(row)];
    }
    const Eigen::VectorXd coef = x.colPivHouseholderQr().solve(b);
    const double ssr           = (b - x * coef).squaredNorm();
    return {coef, ssr};
}

} // namespace

BaselineFitResult fit_baseline(const BaselineModel& model,
                               const std::vector<double>& history)
{
    model.validate();
    const int t = static_cast<int>(history.size());
    for (double v : history) {
        if (!std::isfinite(v)) {
            throw InvalidArgumentError("baseline history must be finite");
        }
    }
    if (t < 3) {
        throw InvalidArgumentError("baseline fit needs at least 3 observations");
    }

    BaselineFitResult fit;
    if (model.kind == BaselineModel::Kind::base) {
        const int n = t - 1;
        double sum  = 0.0;
        for (int i = 1; i < t; ++i) {
            sum += history[static_cast<std::size_t>(i)] - history[static_cast<std::size_t>(i - 1)];
        }
        fit.drift  = sum / static_cast<double>(n);
        double ssq = 0.0;
        for (int i = 1; i < t; ++i) {
            const double d = history[static_cast<std::size_t>(i)] -
                             history[static_cast<std::size_t>(i - 1)] - fit.drift;
            ssq += d * d;
        }
        fit.sigma2 = ssq / static_cast<double>(n - 1);
        return fit;
    }

    // Candidate orders share the sample the largest one leaves, so their AIC
    // values are comparable; short histories shrink the ceiling.
    const int pmax = std::min(model.max_order, (t - 2) / 2);
    int best_p     = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int p = 0; p <= pmax; ++p) {
        const auto [coef, ssr] = ar_ols(history, p, pmax);
        const double n         = static_cast<double>(t - pmax);
        const double aic =
            n * std::log(std::max(ssr / n, 1e-300)) + 2.0 * static_cast<double>(p + 2);
        if (aic < best_aic) {
            best_aic = aic;
            best_p   = p;
        }
    }

    const auto [coef, ssr] = ar_ols(history, best_p, best_p);
    fit.order              = best_p;
    fit.drift              = coef(0);
    fit.ar.assign(coef.data() + 1, coef.data() + 1 + best_p);
    const int dof = (t - best_p) - (best_p + 1);
    fit.sigma2    = dof >= 1 ? ssr / static_cast<double>(dof) : 0.0;
    return fit;
}

std::vector<QuantileForecast> baseline_forecast(const BaselineModel& model,
                                                const SeasonSeries& history,
                                                int reference_week, int max_horizon,
                                                const std::string& location)
{
    if (reference_week < 1 || reference_week > history.weeks()) {
        throw InvalidArgumentError("reference week is outside the season");
    }
    if (max_horizon < 1) {
        throw InvalidArgumentError("max_horizon must be >= 1");
    }
    if (reference_week + max_horizon > history.weeks()) {
        throw InvalidArgumentError("forecast horizon runs past the season end");
    }
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(reference_week));
    for (int w = 1; w <= reference_week; ++w) {
        if (!history.has(w)) {
            throw InvalidArgumentError("baseline history has a gap at week " +
                                       std::to_string(w));
        }
        values.push_back(history.at(w));
    }

    const BaselineFitResult fit = fit_baseline(model, values);
    // The random walk is the order-1 recursion with unit coefficient; its
    // impulse weights are all 1, giving the h * sigma2 variance.
    const std::vector<double> ar =
        model.kind == BaselineModel::Kind::base ? std::vector<double>{1.0} : fit.ar;
    const int order = static_cast<int>(ar.size());

    std::vector<double> psi(static_cast<std::size_t>(max_horizon), 0.0);
    psi[0] = 1.0;
    for (int j = 1; j < max_horizon; ++j) {
        double s = 0.0;
        for (int i = 1; i <= std::min(j, order); ++i) {
            s += ar[static_cast<std::size_t>(i - 1)] * psi[static_cast<std::size_t>(j - i)];
        }
        psi[static_cast<std::size_t>(j)] = s;
    }

    std::vector<double> ext = values;
    std::vector<QuantileForecast> out;
    out.reserve(static_cast<std::size_t>(max_horizon));
    double var = 0.0;
    for (int h = 1; h <= max_horizon; ++h) {
        double mean = fit.drift;
        for (int i = 0; i < order; ++i) {
            mean += ar[static_cast<std::size_t>(i)] * ext[ext.size() - 1 - static_cast<std::size_t>(i)];
        }
        ext.push_back(mean);
        var += fit.sigma2 * psi[static_cast<std::size_t>(h - 1)] * psi[static_cast<std::size_t>(h - 1)];
        const double sd = std::sqrt(var);

        QuantileForecast qf;
        qf.target.location       = location;
        qf.target.season         = history.season;
        qf.target.reference_week = reference_week;
        qf.target.horizon        = h;
        for (std::size_t i = 0; i < kQuantileProbs.size(); ++i) {
            const double q = mean + sd * norm_quantile(kQuantileProbs[i]);
            qf.values[i]   = std::max(0.0, q);
        }
        qf.validate();
        out.push_back(std::move(qf));
    }
    return out;
}

SimStudyConfig SimStudyConfig::defaults()
{
    SimStudyConfig config;
    for (int s = 2010; s <= 2022; ++s) {
        if (s != 2020) {
            config.seasons.push_back(s);
        }
    }
    return config;
}

void SimStudyConfig::validate() const
{
    if (seasons.empty()) {
        throw InvalidArgumentError("study needs at least one season");
    }
    std::vector<int> sorted = seasons;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidArgumentError("study seasons must be distinct");
    }
    if (forecast_weeks.empty()) {
        throw InvalidArgumentError("study needs at least one forecast week");
    }
    if (replicates < 1) {
        throw InvalidArgumentError("study needs at least one replicate");
    }
    if (max_horizon < 1) {
        throw InvalidArgumentError("max_horizon must be >= 1");
    }
    for (int s : seasons) {
        for (int w : forecast_weeks) {
            if (w < 1 || w + max_horizon > weeks_in_season(s)) {
                throw InvalidArgumentError(
                    "forecast week " + std::to_string(w) + " plus horizon overruns season " +
                    std::to_string(s));
            }
        }
    }
    if (k_draws < 100) {
        throw InvalidArgumentError("cut forecasts need at least 100 draws");
    }
    if (num_threads < 1) {
        throw InvalidArgumentError("num_threads must be >= 1");
    }
    if (location.empty()) {
        throw InvalidArgumentError("location must be named");
    }
    generative.validate();
    sampler.validate();
}

long SimStudyResult::missing_count() const
{
    long n = 0;
    for (const SimScoreRow& row : rows) {
        if (row.missing) {
            ++n;
        }
    }
    return n;
}

namespace {

struct IliModelDef {
    const char* name;
    CurveKind kind;
    bool discrepancy;
};

constexpr std::array<IliModelDef, 4> kIliModels = {{
    {"ASGD", CurveKind::asg, true},
    {"ASG", CurveKind::asg, false},
    {"SIRD", CurveKind::sir, true},
    {"SIR", CurveKind::sir, false},
}};

struct CachedIliFit {
    IliForecast forecast;
    bool ok = false;
    std::string reason;
};

SeasonSeries truncate_after(const SeasonSeries& s, int week)
{
    SeasonSeries out = s;
    for (int w = week + 1; w <= out.weeks(); ++w) {
        out.values[static_cast<std::size_t>(w - 1)] =
            std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

void append_missing(std::vector<SimScoreRow>& rows, int replicate, const std::string& model,
                    int season, int week, int max_horizon,
                    const std::vector<double>& truth, const std::string& reason)
{
    for (int h = 1; h <= max_horizon; ++h) {
        SimScoreRow row;
        row.replicate = replicate;
        row.model     = model;
        row.season    = season;
        row.week      = week;
        row.horizon   = h;
        row.truth     = truth[static_cast<std::size_t>(h - 1)];
        row.missing   = true;
        row.reason    = reason;
        rows.push_back(std::move(row));
    }
}

void append_scored(std::vector<SimScoreRow>& rows, int replicate, const std::string& model,
                   int season, int week, const std::vector<QuantileForecast>& forecasts,
                   const std::vector<double>& truth)
{
    for (std::size_t h = 0; h < forecasts.size(); ++h) {
        const ScoreRecord rec = score_forecast(model, forecasts[h], truth[h]);
        SimScoreRow row;
        row.replicate = replicate;
        row.model     = model;
        row.season    = season;
        row.week      = week;
        row.horizon   = static_cast<int>(h) + 1;
        row.truth     = truth[h];
        row.wis       = rec.wis;
        row.covered   = rec.covered;
        rows.push_back(std::move(row));
    }
}

} // namespace

SimStudyResult run_loso(const SimStudyConfig& config, const SeasonPanel& ili)
{
    config.validate();

    const int num_seasons = static_cast<int>(config.seasons.size());
    const int num_weeks   = static_cast<int>(config.forecast_weeks.size());
    const int max_week =
        *std::max_element(config.forecast_weeks.begin(), config.forecast_weeks.end());

    SeasonPanel panel_full;
    panel_full.reserve(static_cast<std::size_t>(num_seasons));
    for (int season : config.seasons) {
        const SeasonSeries* s = find_season(ili, season);
        if (s == nullptr) {
            throw InvalidArgumentError("ILI panel is missing season " + std::to_string(season));
        }
        if (s->last_observed_week() < max_week + config.max_horizon) {
            throw InvalidArgumentError("season " + std::to_string(season) +
                                       " is not observed through the last scored week");
        }
        panel_full.push_back(*s);
    }

    // ILI fits depend only on the observed ILI panel, never on the simulated
    // hospitalizations, so one fit per (model, left-out season, week) serves
    // every replicate.
    SimStudyResult result;
    std::vector<CachedIliFit> cache(
        static_cast<std::size_t>(num_seasons * num_weeks * 4));
    for (int si = 0; si < num_seasons; ++si) {
        for (int wi = 0; wi < num_weeks; ++wi) {
            const int season = config.seasons[static_cast<std::size_t>(si)];
            const int week   = config.forecast_weeks[static_cast<std::size_t>(wi)];

            SeasonPanel fit_panel = panel_full;
            fit_panel[static_cast<std::size_t>(si)] =
                truncate_after(panel_full[static_cast<std::size_t>(si)], week);

            PriorConfig centered = config.priors;
            bool eb_ok           = true;
            std::string eb_reason;
            try {
                const EmpiricalBayesLambda eb = fit_lambda_empirical_bayes(fit_panel);
                centered.asg_lambda_center    = eb.center;
                centered.asg_lambda_scale     = eb.scale;
            } catch (const std::exception& e) {
                eb_ok     = false;
                eb_reason = e.what();
            }

            for (int mi = 0; mi < 4; ++mi) {
                const IliModelDef& def = kIliModels[static_cast<std::size_t>(mi)];
                const std::size_t idx  = static_cast<std::size_t>(
                    (si * num_weeks + wi) * 4 + mi);
                CachedIliFit& entry = cache[idx];

                if (def.kind == CurveKind::asg && !eb_ok) {
                    entry.reason = "baseline centering failed: " + eb_reason;
                } else {
                    IliModelSpec spec;
                    spec.curve_kind          = def.kind;
                    spec.discrepancy_enabled = def.discrepancy;
                    spec.seasons_included    = config.seasons;
                    spec.forecast_season     = season;
                    spec.last_observed_week  = week;
                    try {
                        const IliModel model(
                            spec, fit_panel,
                            def.kind == CurveKind::asg ? centered : config.priors);
                        SamplerConfig scfg = config.sampler;
                        scfg.seed = derive_seed(config.seed, 0xF1, idx);
                        scfg.num_threads   = config.num_threads;
                        const PosteriorDraws draws = sample(model, scfg);
                        entry.forecast =
                            forecast_ili(model, draws, config.max_horizon,
                                         derive_seed(config.seed, 0xF2, idx));
                        entry.ok = true;
                    } catch (const std::exception& e) {
                        entry.reason = e.what();
                    }
                }
                if (!entry.ok) {
                    result.warnings.push_back(std::string(def.name) + " season " +
                                              std::to_string(season) + " week " +
                                              std::to_string(week) + ": " + entry.reason);
                }
            }
        }
    }

    // Real ILI truncated at each forecast week, shared by the per-replicate
    // regressions.
    std::vector<SeasonSeries> trunc_ili;
    trunc_ili.reserve(static_cast<std::size_t>(num_seasons * num_weeks));
    for (int si = 0; si < num_seasons; ++si) {
        for (int wi = 0; wi < num_weeks; ++wi) {
            trunc_ili.push_back(truncate_after(
                panel_full[static_cast<std::size_t>(si)],
                config.forecast_weeks[static_cast<std::size_t>(wi)]));
        }
    }

    HospRegressionSpec reg_spec;
    reg_spec.population_scale = config.generative.population_scale;

    auto run_replicate = [&](int rep, std::vector<SimScoreRow>& rows) {
        const SeasonPanel sim =
            simulate_hosp(panel_full, config.generative,
                          derive_seed(config.seed, 0x51, static_cast<std::uint64_t>(rep)));

        for (int si = 0; si < num_seasons; ++si) {
            const int season            = config.seasons[static_cast<std::size_t>(si)];
            const SeasonSeries& hsim    = sim[static_cast<std::size_t>(si)];
            for (int wi = 0; wi < num_weeks; ++wi) {
                const int week = config.forecast_weeks[static_cast<std::size_t>(wi)];
                std::vector<double> truth;
                truth.reserve(static_cast<std::size_t>(config.max_horizon));
                for (int h = 1; h <= config.max_horizon; ++h) {
                    truth.push_back(hsim.at(week + h));
                }

                // One conjugate regression serves all four ILI models; only
                // the ILI forecast entering the cut step differs.
                HospPosterior post;
                bool reg_ok = false;
                std::string reg_reason;
                try {
                    const HospDesign design =
                        build_design(trunc_ili[static_cast<std::size_t>(si * num_weeks + wi)],
                                     truncate_after(hsim, week), reg_spec);
                    post   = fit_conjugate(design);
                    reg_ok = true;
                } catch (const std::exception& e) {
                    reg_reason = e.what();
                }

                for (int mi = 0; mi < 4; ++mi) {
                    const IliModelDef& def = kIliModels[static_cast<std::size_t>(mi)];
                    const CachedIliFit& entry = cache[static_cast<std::size_t>(
                        (si * num_weeks + wi) * 4 + mi)];
                    if (!entry.ok) {
                        append_missing(rows, rep, def.name, season, week,
                                       config.max_horizon, truth, entry.reason);
                        continue;
                    }
                    if (!reg_ok) {
                        append_missing(rows, rep, def.name, season, week,
                                       config.max_horizon, truth, reg_reason);
                        continue;
                    }
                    try {
                        const HospForecast cut = cut_forecast(
                            entry.forecast, post, hsim.at(week), reg_spec, config.k_draws,
                            derive_seed(config.seed, 0xC0 + static_cast<std::uint64_t>(mi),
                                        static_cast<std::uint64_t>(rep),
                                        static_cast<std::uint64_t>(si * num_weeks + wi)),
                            1);
                        const auto forecasts = quantile_forecasts(cut, config.location);
                        append_scored(rows, rep, def.name, season, week, forecasts, truth);
                    } catch (const std::exception& e) {
                        append_missing(rows, rep, def.name, season, week,
                                       config.max_horizon, truth, e.what());
                    }
                }

                for (const BaselineModel::Kind kind :
                     {BaselineModel::Kind::base, BaselineModel::Kind::ar}) {
                    BaselineModel baseline;
                    baseline.kind = kind;
                    try {
                        const auto forecasts = baseline_forecast(
                            baseline, hsim, week, config.max_horizon, config.location);
                        append_scored(rows, rep, baseline.name(), season, week, forecasts,
                                      truth);
                    } catch (const std::exception& e) {
                        append_missing(rows, rep, baseline.name(), season, week,
                                       config.max_horizon, truth, e.what());
                    }
                }
            }
        }
    };

    std::vector<std::vector<SimScoreRow>> per_replicate(
        static_cast<std::size_t>(config.replicates));
    const int workers = std::min(config.num_threads, config.replicates);
    if (workers <= 1) {
        for (int rep = 0; rep < config.replicates; ++rep) {
            run_replicate(rep, per_replicate[static_cast<std::size_t>(rep)]);
        }
    } else {
        // Contiguous replicate chunks; every replicate derives its own
        // streams, so the partition never shows in the rows.
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        const int base  = config.replicates / workers;
        const int extra = config.replicates % workers;
        int start       = 0;
        for (int t = 0; t < workers; ++t) {
            const int count = base + (t < extra ? 1 : 0);
            const int lo    = start;
            const int hi    = start + count;
            start           = hi;
            pool.emplace_back([&, lo, hi] {
                for (int rep = lo; rep < hi; ++rep) {
                    run_replicate(rep, per_replicate[static_cast<std::size_t>(rep)]);
                }
            });
        }
        for (std::thread& th : pool) {
            th.join();
        }
    }

    std::size_t total = 0;
    for (const auto& rows : per_replicate) {
        total += rows.size();
    }
    result.rows.reserve(total);
    for (auto& rows : per_replicate) {
        std::move(rows.begin(), rows.end(), std::back_inserter(result.rows));
    }
    return result;
}

namespace {

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

} // namespace

void write_sim_scores_csv(const SimStudyResult& result, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataFormatError("cannot open " + path + " for writing");
    }
    out << "replicate,model,season,week,horizon,truth,wis";
    for (double level : kIntervalLevels) {
        out << ",covered_" << static_cast<int>(std::lround(level * 100));
    }
    out << ",missing,reason\n";
    out << std::setprecision(17);
    for (const SimScoreRow& row : result.rows) {
        out << row.replicate << ',' << row.model << ',' << row.season << ',' << row.week
            << ',' << row.horizon << ',' << row.truth << ',';
        if (!row.missing) {
            out << row.wis;
        }
        for (bool c : row.covered) {
            out << ',' << (c ? 1 : 0);
        }
        out << ',' << (row.missing ? 1 : 0) << ',' << csv_escape(row.reason) << '\n';
    }
    if (!out) {
        throw DataFormatError("failed while writing " + path);
    }
}

std::vector<ModelSummary> summarize_scores(const std::vector<SimScoreRow>& rows)
{
    std::vector<ModelSummary> out;
    std::vector<double> wis_sum;
    std::vector<std::array<long, 11>> cov_sum;
    auto find = [&](const std::string& model) -> std::size_t {
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out[i].model == model) {
                return i;
            }
        }
        out.push_back(ModelSummary{});
        out.back().model = model;
        wis_sum.push_back(0.0);
        cov_sum.push_back(std::array<long, 11>{});
        return out.size() - 1;
    };

    for (const SimScoreRow& row : rows) {
        const std::size_t at = find(row.model);
        if (row.missing) {
            ++out[at].missing;
            continue;
        }
        ++out[at].scored;
        wis_sum[at] += row.wis;
        for (std::size_t i = 0; i < row.covered.size(); ++i) {
            cov_sum[at][i] += row.covered[i] ? 1 : 0;
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].scored > 0) {
            out[i].mean_wis = wis_sum[i] / static_cast<double>(out[i].scored);
            for (std::size_t j = 0; j < 11; ++j) {
                out[i].coverage[j] =
                    static_cast<double>(cov_sum[i][j]) / static_cast<double>(out[i].scored);
            }
        }
    }
    return out;
}

} // namespace flucast
