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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "flucast/errors.hpp"
#include "flucast/hosp_model.hpp"
#include "flucast/rng.hpp"
#include "flucast/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace flucast;

namespace oracle {

/**
 * Independent dense solve in extended precision: Gauss-Jordan with partial
 * pivoting on [A | B], returning A^{-1} B. A is n x n row-major, B is n x m.
 */
std::vector<long double> solve(std::vector<long double> a, std::vector<long double> b, int n,
                               int m)
{
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (fabsl(a[r * n + col]) > fabsl(a[pivot * n + col])) {
                pivot = r;
            }
        }
        for (int c = 0; c < n; ++c) {
            std::swap(a[col * n + c], a[pivot * n + c]);
        }
        for (int c = 0; c < m; ++c) {
            std::swap(b[col * m + c], b[pivot * m + c]);
        }
        const long double d = a[col * n + col];
        for (int c = 0; c < n; ++c) {
            a[col * n + c] /= d;
        }
        for (int c = 0; c < m; ++c) {
            b[col * m + c] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) {
                continue;
            }
            const long double f = a[r * n + col];
            for (int c = 0; c < n; ++c) {
                a[r * n + c] -= f * a[col * n + c];
            }
            for (int c = 0; c < m; ++c) {
                b[r * m + c] -= f * b[col * m + c];
            }
        }
    }
    return b;
}

/// Least-squares coefficients via the normal equations in extended precision.
std::vector<long double> normal_equations(const HospDesign& design)
{
    const int p  = design.cols;
    const auto n = design.rows();
    std::vector<long double> xtx(static_cast<std::size_t>(p) * p, 0.0L);
    std::vector<long double> xty(static_cast<std::size_t>(p), 0.0L);
    for (std::size_t r = 0; r < n; ++r) {
        for (int i = 0; i < p; ++i) {
            xty[static_cast<std::size_t>(i)] +=
                static_cast<long double>(design.at(r, i)) * design.y[r];
            for (int j = 0; j < p; ++j) {
                xtx[static_cast<std::size_t>(i) * p + j] +=
                    static_cast<long double>(design.at(r, i)) * design.at(r, j);
            }
        }
    }
    return solve(std::move(xtx), std::move(xty), p, 1);
}

} // namespace oracle

namespace {

/// Season series with weeks 1..values.size() filled in order.
SeasonSeries series_from(int season, const std::vector<double>& values)
{
    SeasonSeries s = SeasonSeries::empty(season);
    for (std::size_t i = 0; i < values.size(); ++i) {
        s.set(static_cast<int>(i) + 1, values[i]);
    }
    return s;
}

/// Hospitalization series following the regression recursion with no noise.
SeasonSeries recurse_hosp(const SeasonSeries& ili, const std::vector<double>& coef,
                          double scale, double h1, int last_week)
{
    SeasonSeries hosp = SeasonSeries::empty(ili.season);
    hosp.set(1, h1);
    const bool quadratic = coef.size() == 4;
    for (int w = 2; w <= last_week; ++w) {
        const double x = ili.at(w) * scale;
        double value   = coef[0] + coef[1] * x;
        if (quadratic) {
            value += coef[2] * x * x;
        }
        value += coef.back() * hosp.at(w - 1);
        hosp.set(w, value);
    }
    return hosp;
}

/// Single-path predictive ILI container for driving the forecast by hand.
IliForecast fixed_ili_path(const std::vector<double>& path, int reference_week,
                           int season = 2022)
{
    IliForecast fc;
    fc.season         = season;
    fc.reference_week = reference_week;
    fc.num_draws      = 1;
    fc.ili            = path;
    for (std::size_t i = 0; i < path.size(); ++i) {
        fc.weeks.push_back(reference_week + static_cast<int>(i) + 1);
    }
    return fc;
}

struct Moments {
    double mean = 0.0;
    double var  = 0.0;
    double se_mean = 0.0;
    double se_var  = 0.0;
};

/// Sample mean/variance with standard errors (the variance one uses the
/// empirical fourth central moment, valid for any distribution).
Moments moments(const std::vector<double>& x)
{
    const auto n = static_cast<double>(x.size());
    Moments m;
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d  = v - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    m.var     = m2;
    m.se_mean = std::sqrt(m2 / n);
    m.se_var  = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
    return m;
}

} // namespace

TEST_CASE("design matrix layout and row filtering")
{
    HospRegressionSpec spec;
    spec.population_scale = 10.0;

    SUBCASE("weeks 2..10 with week 1 present give 9 rows")
    {
        std::vector<double> ili(10), hosp(10);
        for (int i = 0; i < 10; ++i) {
            ili[static_cast<std::size_t>(i)]  = 0.1 + 0.02 * i;
            hosp[static_cast<std::size_t>(i)] = 50.0 + 3.0 * i;
        }
        const auto design = build_design(series_from(2022, ili), series_from(2022, hosp), spec);
        CHECK(design.rows() == 9);
        CHECK(design.cols == 4);
        CHECK(design.weeks.front() == 2);
        CHECK(design.weeks.back() == 10);
        // row for week 2: [1, ili_2 * P, (ili_2 * P)^2, H_1], response H_2
        CHECK(design.at(0, 0) == 1.0);
        CHECK(design.at(0, 1) == doctest::Approx(0.12 * 10.0).epsilon(1e-15));
        CHECK(design.at(0, 2) == doctest::Approx(1.2 * 1.2).epsilon(1e-15));
        CHECK(design.at(0, 3) == 50.0);
        CHECK(design.y[0] == 53.0);
    }

    SUBCASE("zero ILI keeps the row with zero predictor columns")
    {
        std::vector<double> ili(10, 0.2), hosp(10, 40.0);
        ili[4] = 0.0; // week 5
        const auto design = build_design(series_from(2022, ili), series_from(2022, hosp), spec);
        CHECK(design.rows() == 9);
        CHECK(design.at(3, 1) == 0.0);
        CHECK(design.at(3, 2) == 0.0);
        CHECK(design.at(3, 3) == 40.0);
    }

    SUBCASE("doubling the population scale doubles the linear column and quadruples the square")
    {
        std::vector<double> ili(8, 0.25), hosp(8, 30.0);
        auto narrow = spec;
        auto wide   = spec;
        wide.population_scale = 2.0 * narrow.population_scale;
        const auto a = build_design(series_from(2022, ili), series_from(2022, hosp), narrow);
        const auto b = build_design(series_from(2022, ili), series_from(2022, hosp), wide);
        for (std::size_t r = 0; r < a.rows(); ++r) {
            CHECK(b.at(r, 1) == doctest::Approx(2.0 * a.at(r, 1)).epsilon(1e-15));
            CHECK(b.at(r, 2) == doctest::Approx(4.0 * a.at(r, 2)).epsilon(1e-15));
        }
    }

    SUBCASE("a missing hospitalization week drops itself and the week that lags on it")
    {
        std::vector<double> ili(12, 0.2), hosp(12, 40.0);
        auto ili_s  = series_from(2022, ili);
        auto hosp_s = series_from(2022, hosp);
        hosp_s.values[5] = std::numeric_limits<double>::quiet_NaN(); // week 6
        const auto design = build_design(ili_s, hosp_s, spec);
        CHECK(design.rows() == 9); // weeks 2..12 minus weeks 6 and 7
        CHECK(std::find(design.weeks.begin(), design.weeks.end(), 6) == design.weeks.end());
        CHECK(std::find(design.weeks.begin(), design.weeks.end(), 7) == design.weeks.end());
    }

    SUBCASE("linear order drops the squared column")
    {
        auto linear = spec;
        linear.predictor_order = PredictorOrder::linear;
        std::vector<double> ili(10, 0.3), hosp(10, 20.0);
        const auto design = build_design(series_from(2022, ili), series_from(2022, hosp), linear);
        CHECK(design.cols == 3);
        CHECK(design.at(0, 1) == doctest::Approx(3.0).epsilon(1e-15));
        CHECK(design.at(0, 2) == 20.0); // lag moves up one column
        CHECK(coefficient_names(linear) == std::vector<std::string>{"alpha0", "alpha1", "phi"});
    }

    SUBCASE("too few usable rows and mismatched seasons are rejected")
    {
        std::vector<double> ili(6, 0.2), hosp(6, 10.0);
        // quadratic needs cols + 2 = 6 rows; 6 weeks give only 5
        CHECK_THROWS_AS(build_design(series_from(2022, ili), series_from(2022, hosp), spec),
                        InvalidArgumentError);
        std::vector<double> longer(10, 0.2), hosp_l(10, 10.0);
        CHECK_THROWS_AS(build_design(series_from(2021, longer), series_from(2022, hosp_l), spec),
                        InvalidArgumentError);
        auto bad = spec;
        bad.population_scale = 0.0;
        CHECK_THROWS_AS(build_design(series_from(2022, longer), series_from(2022, hosp_l), bad),
                        InvalidArgumentError);
    }
}

TEST_CASE("conjugate fit matches the normal-equations oracle")
{
    HospRegressionSpec spec;
    spec.population_scale = 10.0;
    Rng rng(911);

    SUBCASE("noiseless recursion is recovered to 1e-6")
    {
        const std::vector<double> truth = {5.0, 2.0, -0.1, 0.6};
        std::vector<double> ili(25);
        for (auto& v : ili) {
            v = 0.1 + 0.8 * rng.uniform();
        }
        const auto ili_s  = series_from(2022, ili);
        const auto hosp_s = recurse_hosp(ili_s, truth, spec.population_scale, 40.0, 25);
        const auto post   = fit_conjugate(build_design(ili_s, hosp_s, spec));
        REQUIRE(post.dim() == 4);
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(post.location[static_cast<std::size_t>(i)] -
                           truth[static_cast<std::size_t>(i)]) < 1e-6);
        }
        CHECK(post.shape == doctest::Approx(0.5 * (24 - 4)));
        CHECK(post.scale >= 0.0);
        CHECK(post.scale < 1e-10);
    }

    SUBCASE("posterior mean equals least squares on noisy data")
    {
        const std::vector<double> truth = {8.0, 1.5, -0.05, 0.4};
        std::vector<double> ili(30);
        for (auto& v : ili) {
            v = 0.1 + 0.8 * rng.uniform();
        }
        const auto ili_s = series_from(2022, ili);
        auto hosp_s      = recurse_hosp(ili_s, truth, spec.population_scale, 30.0, 30);
        for (int w = 1; w <= 30; ++w) {
            hosp_s.set(w, hosp_s.at(w) + rng.normal(0.0, 2.0));
        }
        const auto design = build_design(ili_s, hosp_s, spec);
        const auto post   = fit_conjugate(design);
        const auto beta   = oracle::normal_equations(design);
        for (int i = 0; i < 4; ++i) {
            CHECK(post.location[static_cast<std::size_t>(i)] ==
                  doctest::Approx(static_cast<double>(beta[static_cast<std::size_t>(i)]))
                      .epsilon(1e-9));
        }
        // shape and scale against a direct residual computation
        long double ssr = 0.0L;
        for (std::size_t r = 0; r < design.rows(); ++r) {
            long double fit = 0.0L;
            for (int c = 0; c < design.cols; ++c) {
                fit += beta[static_cast<std::size_t>(c)] * design.at(r, c);
            }
            const long double res = design.y[r] - fit;
            ssr += res * res;
        }
        CHECK(post.shape == doctest::Approx(0.5 * (static_cast<double>(design.rows()) - 4)));
        // the posterior tracks the structural variance, so the residual sum
        // of squares enters divided by the population scale
        CHECK(post.scale ==
              doctest::Approx(static_cast<double>(0.5L * ssr / 10.0L)).epsilon(1e-9));
        CHECK(post.precision[0] ==
              doctest::Approx(static_cast<double>(design.rows()) / 10.0));
    }

    SUBCASE("constant ILI makes the design rank deficient under the reference prior")
    {
        std::vector<double> ili(20, 0.3);
        std::vector<double> hosp(20);
        for (int i = 0; i < 20; ++i) {
            hosp[static_cast<std::size_t>(i)] = 25.0 + 2.0 * i + rng.normal(0.0, 0.5);
        }
        const auto design = build_design(series_from(2022, ili), series_from(2022, hosp), spec);
        CHECK_THROWS_AS(fit_conjugate(design), NumericalError);
        CHECK_THROWS_WITH_AS(fit_conjugate(design),
                             doctest::Contains("proper prior"), NumericalError);

        // the same design fits once a proper prior supplies curvature
        std::vector<double> prior_prec(16, 0.0);
        for (int i = 0; i < 4; ++i) {
            prior_prec[static_cast<std::size_t>(i) * 4 + static_cast<std::size_t>(i)] = 1.0;
        }
        const auto prior = HospPrior::normal_inverse_gamma(std::vector<double>(4, 0.0),
                                                           prior_prec, 2.0, 4.0);
        const auto post  = fit_conjugate(design, prior);
        CHECK_NOTHROW(post.validate());
        CHECK(post.shape == doctest::Approx(2.0 + 0.5 * 19.0));
    }

    SUBCASE("proper prior update matches the closed-form computed independently")
    {
        const std::vector<double> truth = {4.0, 1.0, 0.5};
        auto linear = spec;
        linear.predictor_order = PredictorOrder::linear;
        std::vector<double> ili(15);
        for (auto& v : ili) {
            v = 0.1 + 0.8 * rng.uniform();
        }
        const auto ili_s = series_from(2022, ili);
        auto hosp_s      = recurse_hosp(ili_s, truth, linear.population_scale, 12.0, 15);
        for (int w = 1; w <= 15; ++w) {
            hosp_s.set(w, hosp_s.at(w) + rng.normal(0.0, 1.0));
        }
        const auto design = build_design(ili_s, hosp_s, linear);

        const std::vector<double> m0 = {1.0, -0.5, 0.2};
        const std::vector<double> p0 = {2.0, 0.3, 0.0, 0.3, 1.5, 0.1, 0.0, 0.1, 3.0};
        const double a0 = 3.0, b0 = 5.0;
        const auto post =
            fit_conjugate(design, HospPrior::normal_inverse_gamma(m0, p0, a0, b0));

        // independent update in extended precision; the cross products are
        // divided by the population scale (shared error weight 1/P)
        const int p = 3;
        const long double w_inv = 1.0L / static_cast<long double>(design.population_scale);
        std::vector<long double> pn(9), rhs(3);
        std::vector<long double> xtx(9, 0.0L), xty(3, 0.0L);
        long double yty = 0.0L;
        for (std::size_t r = 0; r < design.rows(); ++r) {
            yty += w_inv * static_cast<long double>(design.y[r]) * design.y[r];
            for (int i = 0; i < p; ++i) {
                xty[static_cast<std::size_t>(i)] +=
                    w_inv * static_cast<long double>(design.at(r, i)) * design.y[r];
                for (int j = 0; j < p; ++j) {
                    xtx[static_cast<std::size_t>(i) * 3 + j] +=
                        w_inv * static_cast<long double>(design.at(r, i)) * design.at(r, j);
                }
            }
        }
        for (int i = 0; i < 9; ++i) {
            pn[static_cast<std::size_t>(i)] =
                xtx[static_cast<std::size_t>(i)] + p0[static_cast<std::size_t>(i)];
        }
        long double m0p0m0 = 0.0L;
        for (int i = 0; i < p; ++i) {
            long double row = 0.0L;
            for (int j = 0; j < p; ++j) {
                row += static_cast<long double>(p0[static_cast<std::size_t>(i) * 3 + j]) *
                       m0[static_cast<std::size_t>(j)];
            }
            rhs[static_cast<std::size_t>(i)] = row + xty[static_cast<std::size_t>(i)];
            m0p0m0 += m0[static_cast<std::size_t>(i)] * row;
        }
        const auto mn = oracle::solve(pn, rhs, 3, 1);
        long double mnpnmn = 0.0L;
        for (int i = 0; i < p; ++i) {
            long double row = 0.0L;
            for (int j = 0; j < p; ++j) {
                row += pn[static_cast<std::size_t>(i) * 3 + j] * mn[static_cast<std::size_t>(j)];
            }
            mnpnmn += mn[static_cast<std::size_t>(i)] * row;
        }
        for (int i = 0; i < p; ++i) {
            CHECK(post.location[static_cast<std::size_t>(i)] ==
                  doctest::Approx(static_cast<double>(mn[static_cast<std::size_t>(i)]))
                      .epsilon(1e-10));
        }
        CHECK(post.shape == doctest::Approx(a0 + 0.5 * static_cast<double>(design.rows())));
        CHECK(post.scale ==
              doctest::Approx(static_cast<double>(b0 + 0.5L * (yty + m0p0m0 - mnpnmn)))
                  .epsilon(1e-9));
    }

    SUBCASE("fitted variance is the structural one, not the population-scaled one")
    {
        // generate with error sd sqrt(v * P) and check the posterior variance
        // mean lands near v itself; confusing the two metrics would be off by
        // a factor of P = 6629. The bar is 3 sigma of the chi-square spread
        // of a 40-dof residual variance, about 0.67 v.
        auto national = spec;
        national.population_scale = 6629.0;
        const std::vector<double> truth = {200.0, 8.0, -0.006, 0.6};
        const double v = 2.0;
        std::vector<double> ili(45);
        for (auto& val : ili) {
            val = 0.01 + 0.04 * rng.uniform();
        }
        const auto ili_s = series_from(2022, ili);
        SeasonSeries hosp_s = SeasonSeries::empty(2022);
        hosp_s.set(1, 3000.0);
        for (int w = 2; w <= 45; ++w) {
            const double x  = ili_s.at(w) * national.population_scale;
            const double mu = truth[0] + truth[1] * x + truth[2] * x * x +
                              truth[3] * hosp_s.at(w - 1);
            hosp_s.set(w, mu + rng.normal(0.0, std::sqrt(v * national.population_scale)));
        }
        const auto post = fit_conjugate(build_design(ili_s, hosp_s, national));
        const double ev = post.scale / (post.shape - 1.0);
        CHECK(std::abs(ev - v) < 0.7 * v);
    }

    SUBCASE("reference prior refuses designs with no residual degrees of freedom")
    {
        HospDesign tiny;
        tiny.cols = 2;
        tiny.x    = {1.0, 2.0, 1.0, 3.0};
        tiny.y    = {4.0, 5.0};
        CHECK_THROWS_AS(fit_conjugate(tiny), InvalidArgumentError);
    }
}

TEST_CASE("posterior draw generator matches its own moments")
{
    // variance ~ InvGamma(a, b) has mean b/(a-1); coefficients given the
    // variance are centered at the location with covariance v * precision^{-1},
    // so marginally cov = E[v] * precision^{-1}.
    HospPosterior post;
    post.location  = {10.0, 1.0, 0.5};
    post.precision = {4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0};
    post.shape     = 50.0;
    post.scale     = 98.0;
    REQUIRE_NOTHROW(post.validate());

    std::vector<long double> prec_l(post.precision.begin(), post.precision.end());
    std::vector<long double> eye = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    const auto inv = oracle::solve(prec_l, eye, 3, 3);
    const double ev = post.scale / (post.shape - 1.0); // 2.0

    const std::size_t n = 200000;
    Rng rng(2024);
    std::vector<double> variances(n);
    std::vector<std::vector<double>> coef(3, std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const auto d = post.draw(rng);
        variances[k] = d.variance;
        for (int i = 0; i < 3; ++i) {
            coef[static_cast<std::size_t>(i)][k] = d.coefficients[static_cast<std::size_t>(i)];
        }
    }

    const auto vm = moments(variances);
    CHECK(std::abs(vm.mean - ev) < 3.0 * vm.se_mean);

    for (int i = 0; i < 3; ++i) {
        const auto cm = moments(coef[static_cast<std::size_t>(i)]);
        CHECK(std::abs(cm.mean - post.location[static_cast<std::size_t>(i)]) < 3.0 * cm.se_mean);
        const double want = ev * static_cast<double>(inv[static_cast<std::size_t>(i) * 3 + i]);
        CHECK(std::abs(cm.var - want) < 3.0 * cm.se_var);
    }

    // one off-diagonal covariance, with its standard error taken from the
    // empirical spread of the cross products
    const auto m0 = moments(coef[0]);
    const auto m1 = moments(coef[1]);
    std::vector<double> cross(n);
    for (std::size_t k = 0; k < n; ++k) {
        cross[k] = (coef[0][k] - m0.mean) * (coef[1][k] - m1.mean);
    }
    const auto xm = moments(cross);
    const double want01 = ev * static_cast<double>(inv[1]);
    CHECK(std::abs(xm.mean - want01) < 3.0 * xm.se_mean);
}

TEST_CASE("posterior validation and the fixed point mass")
{
    SUBCASE("fixed posterior returns its point exactly")
    {
        const auto post = HospPosterior::fixed({7.0, 0.0, 0.0, 0.0}, 0.25);
        REQUIRE_NOTHROW(post.validate());
        CHECK(post.is_fixed());
        Rng rng(5);
        const auto a = post.draw(rng);
        const auto b = post.draw(rng);
        CHECK(a.coefficients == std::vector<double>{7.0, 0.0, 0.0, 0.0});
        CHECK(a.variance == 0.25);
        CHECK(b.coefficients == a.coefficients);
        CHECK_THROWS_AS(HospPosterior::fixed({}, 1.0), InvalidArgumentError);
        CHECK_THROWS_AS(HospPosterior::fixed({1.0}, -1.0), InvalidArgumentError);
    }

    SUBCASE("bad shapes and matrices are rejected")
    {
        HospPosterior post;
        post.location  = {1.0, 2.0};
        post.precision = {1.0, 0.0, 0.0, 1.0};
        post.shape     = 2.0;
        post.scale     = 0.0;
        CHECK_THROWS_AS(post.validate(), InvalidArgumentError);
        post.scale     = 1.0;
        post.precision = {1.0, 0.5, -0.5, 1.0}; // asymmetric
        CHECK_THROWS_AS(post.validate(), InvalidArgumentError);
        post.precision = {1.0, 2.0, 2.0, 1.0}; // indefinite
        CHECK_THROWS_AS(post.validate(), InvalidArgumentError);
        post.precision = {1.0, 0.0, 0.0}; // wrong size
        CHECK_THROWS_AS(post.validate(), InvalidArgumentError);
    }
}

TEST_CASE("forecast recursion in the deterministic limit")
{
    HospRegressionSpec spec;
    spec.population_scale = 100.0;

    SUBCASE("constant model pushes every draw to the intercept")
    {
        const auto ili  = fixed_ili_path({0.02, 0.05, 0.03, 0.01}, 20);
        const auto post = HospPosterior::fixed({7.0, 0.0, 0.0, 0.0}, 0.0);
        const auto fc   = cut_forecast(ili, post, 123.0, spec, 500, 99);
        REQUIRE(fc.num_draws == 500);
        REQUIRE(fc.weeks == std::vector<int>{21, 22, 23, 24});
        for (double v : fc.draws) {
            CHECK(v == 7.0);
        }
    }

    SUBCASE("noise-free affine chain matches the hand recursion exactly")
    {
        const std::vector<double> path = {0.01, 0.02, 0.03, 0.04};
        const auto ili  = fixed_ili_path(path, 30);
        const auto post = HospPosterior::fixed({2.0, 3.0, 0.0, 0.5}, 0.0);
        const auto fc   = cut_forecast(ili, post, 10.0, spec, 200, 7);

        double lag = 10.0;
        std::vector<double> want;
        for (double p : path) {
            lag = 2.0 + 3.0 * (p * 100.0) + 0.5 * lag;
            want.push_back(lag);
        }
        for (std::size_t k = 0; k < fc.num_draws; ++k) {
            for (std::size_t h = 0; h < 4; ++h) {
                CHECK(fc.at(k, h) == want[h]);
            }
        }
    }

    SUBCASE("quadratic term enters the mean")
    {
        const auto ili  = fixed_ili_path({0.04}, 10);
        const auto post = HospPosterior::fixed({1.0, 2.0, 0.25, 0.5}, 0.0);
        const auto fc   = cut_forecast(ili, post, 8.0, spec, 200, 7);
        const double x  = 0.04 * 100.0;
        const double want = 1.0 + 2.0 * x + 0.25 * x * x + 0.5 * 8.0;
        CHECK(fc.at(0, 0) == want);
    }
}

TEST_CASE("forecast moments match the Gaussian propagation oracle")
{
    // fixed coefficients and a fixed ILI path make the forecast a linear
    // Gaussian recursion: mean_i = a0 + a1 x_i + a2 x_i^2 + phi mean_{i-1},
    // var_i = sigma2 * P + phi^2 var_{i-1}
    HospRegressionSpec spec;
    spec.population_scale = 25.0;
    const std::vector<double> path = {0.06, 0.08, 0.07, 0.05};
    const auto ili = fixed_ili_path(path, 15);
    const std::vector<double> coef = {120.0, 8.0, 0.3, 0.7};
    const double sigma2 = 4.0;
    const auto post     = HospPosterior::fixed(coef, sigma2);

    const std::size_t k_draws = 50000;
    const auto fc = cut_forecast(ili, post, 300.0, spec, k_draws, 4242);

    double mean = 300.0, var = 0.0;
    for (std::size_t h = 0; h < path.size(); ++h) {
        const double x = path[h] * spec.population_scale;
        mean = coef[0] + coef[1] * x + coef[2] * x * x + coef[3] * mean;
        var  = sigma2 * spec.population_scale + coef[3] * coef[3] * var;
        REQUIRE(mean > 20.0 * std::sqrt(var)); // clipping never engages here

        const auto m = moments(fc.horizon_draws(h));
        CHECK(std::abs(m.mean - mean) < 3.0 * m.se_mean);
        CHECK(std::abs(m.var - var) < 3.0 * m.se_var);
    }
}

TEST_CASE("forecast moments with posterior coefficient uncertainty")
{
    // one horizon with a fixed ILI value: H = theta . r + e
    // with theta from the posterior and e ~ N(0, v P). Then
    //   E[H]   = location . r
    //   Var[H] = E[v] (r' precision^{-1} r) + E[v] P
    HospRegressionSpec spec;
    spec.predictor_order  = PredictorOrder::linear;
    spec.population_scale = 5.0;

    HospPosterior post;
    post.location  = {40.0, 2.0, 0.5};
    post.precision = {4.0, 0.0, 0.0, 0.0, 9.0, 0.0, 0.0, 0.0, 16.0};
    post.shape     = 50.0;
    post.scale     = 98.0;

    const double anchor = 60.0;
    const auto ili      = fixed_ili_path({0.4}, 12);
    const double x      = 0.4 * spec.population_scale;
    const std::vector<double> r = {1.0, x, anchor};

    const double ev   = post.scale / (post.shape - 1.0);
    const double quad = r[0] * r[0] / 4.0 + r[1] * r[1] / 9.0 + r[2] * r[2] / 16.0;
    const double want_mean = 40.0 + 2.0 * x + 0.5 * anchor;
    const double want_var  = ev * quad + ev * spec.population_scale;

    const auto fc = cut_forecast(ili, post, anchor, spec, 50000, 31337);
    const auto m  = moments(fc.horizon_draws(0));
    CHECK(std::abs(m.mean - want_mean) < 3.0 * m.se_mean);
    CHECK(std::abs(m.var - want_var) < 3.0 * m.se_var);
}

TEST_CASE("forecast invariants: cut, widening intervals, clipping, resampling")
{
    HospRegressionSpec spec;
    spec.population_scale = 25.0;

    SUBCASE("refitting is untouched by predictive ILI draws")
    {
        // the regression posterior is a function of observations alone; the
        // predictive ILI paths enter only the forecast stage
        Rng rng(55);
        std::vector<double> ili(20), hosp(20);
        for (int i = 0; i < 20; ++i) {
            ili[static_cast<std::size_t>(i)]  = 0.05 + 0.4 * rng.uniform();
            hosp[static_cast<std::size_t>(i)] = 80.0 + 30.0 * rng.uniform();
        }
        const auto design = build_design(series_from(2022, ili), series_from(2022, hosp), spec);
        const auto a      = fit_conjugate(design);
        const auto b      = fit_conjugate(design);
        CHECK(a.location == b.location);
        CHECK(a.precision == b.precision);
        CHECK(a.shape == b.shape);
        CHECK(a.scale == b.scale);

        auto wild = fixed_ili_path({0.9, 0.9, 0.9, 0.9}, 20);
        auto calm = fixed_ili_path({0.01, 0.01, 0.01, 0.01}, 20);
        const auto fc_wild = cut_forecast(wild, a, 100.0, spec, 300, 1);
        const auto fc_calm = cut_forecast(calm, a, 100.0, spec, 300, 1);
        CHECK(fc_wild.draws != fc_calm.draws);
        const auto c = fit_conjugate(design);
        CHECK(c.location == a.location);
    }

    SUBCASE("interval widths are nondecreasing in horizon when phi >= 0")
    {
        const auto ili  = fixed_ili_path({0.05, 0.05, 0.05, 0.05}, 8);
        const auto post = HospPosterior::fixed({150.0, 2.0, 0.1, 0.7}, 9.0);
        const auto fc   = cut_forecast(ili, post, 400.0, spec, 50000, 2718);
        double previous = 0.0;
        for (std::size_t h = 0; h < 4; ++h) {
            const auto q = extract_quantiles(fc.horizon_draws(h), {0.025, 0.975});
            const double width = q[1] - q[0];
            CHECK(width >= previous);
            previous = width;
        }
    }

    SUBCASE("negative draws are stored as zero")
    {
        const auto ili  = fixed_ili_path({0.01, 0.01}, 5);
        const auto post = HospPosterior::fixed({0.0, 0.0, 0.0, 0.0}, 100.0);
        const auto fc   = cut_forecast(ili, post, 0.0, spec, 2000, 12);
        double minimum  = 1e300;
        bool saw_zero   = false;
        for (double v : fc.draws) {
            minimum = std::min(minimum, v);
            saw_zero = saw_zero || v == 0.0;
        }
        CHECK(minimum >= 0.0);
        CHECK(saw_zero); // half the raw normals are negative here
    }

    SUBCASE("paths are resampled with replacement across iterations")
    {
        IliForecast two;
        two.season         = 2022;
        two.reference_week = 10;
        two.weeks          = {11};
        two.num_draws      = 2;
        two.ili            = {0.1, 0.9};
        const auto post = HospPosterior::fixed({0.0, 1.0, 0.0, 0.0}, 0.0);
        const auto fc   = cut_forecast(two, post, 50.0, spec, 1000, 77);
        std::size_t low = 0, high = 0;
        for (double v : fc.draws) {
            if (v == doctest::Approx(0.1 * 25.0)) {
                ++low;
            } else if (v == doctest::Approx(0.9 * 25.0)) {
                ++high;
            }
        }
        CHECK(low + high == 1000);
        CHECK(low > 300);  // ~Binomial(1000, 1/2)
        CHECK(high > 300);
    }

    SUBCASE("argument validation")
    {
        const auto ili  = fixed_ili_path({0.1}, 3);
        const auto post = HospPosterior::fixed({1.0, 0.0, 0.0, 0.0}, 0.0);
        CHECK_THROWS_AS(
            cut_forecast(ili, post, std::numeric_limits<double>::quiet_NaN(), spec, 10, 1),
            InvalidArgumentError);
        CHECK_THROWS_AS(cut_forecast(ili, post, 5.0, spec, 0, 1), InvalidArgumentError);
        IliForecast empty;
        empty.num_draws = 0;
        CHECK_THROWS_AS(cut_forecast(empty, post, 5.0, spec, 10, 1), InvalidArgumentError);
        auto linear = spec;
        linear.predictor_order = PredictorOrder::linear;
        CHECK_THROWS_AS(cut_forecast(ili, post, 5.0, linear, 10, 1), InvalidArgumentError);
    }
}

TEST_CASE("forecast draws are reproducible and thread-count independent")
{
    HospRegressionSpec spec;
    spec.population_scale = 25.0;
    const auto ili  = fixed_ili_path({0.05, 0.06, 0.04, 0.03}, 9);
    HospPosterior post;
    post.location  = {100.0, 3.0, -0.01, 0.5};
    post.precision = {6.0, 0.0, 0.0, 0.0, 0.0, 6.0, 0.0, 0.0,
                      0.0, 0.0, 6.0, 0.0, 0.0, 0.0, 0.0, 6.0};
    post.shape     = 20.0;
    post.scale     = 60.0;

    const auto a = cut_forecast(ili, post, 200.0, spec, 5000, 404, 1);
    const auto b = cut_forecast(ili, post, 200.0, spec, 5000, 404, 3);
    const auto c = cut_forecast(ili, post, 200.0, spec, 5000, 405, 1);
    CHECK(a.draws == b.draws);
    CHECK(a.draws != c.draws);
}

TEST_CASE("empirical quantiles follow the interpolation rule")
{
    SUBCASE("median of 1..100 is 50.5 and tails interpolate")
    {
        std::vector<double> draws(100);
        std::iota(draws.begin(), draws.end(), 1.0);
        // shuffle to prove sorting is internal
        Rng rng(1);
        for (std::size_t i = draws.size(); i > 1; --i) {
            std::swap(draws[i - 1], draws[rng.uniform_index(i)]);
        }
        const auto q = extract_quantiles(draws, {0.01, 0.5, 0.99});
        CHECK(q[0] == doctest::Approx(1.99).epsilon(1e-12));
        CHECK(q[1] == doctest::Approx(50.5).epsilon(1e-12));
        CHECK(q[2] == doctest::Approx(99.01).epsilon(1e-12));
    }

    SUBCASE("constant draws collapse every quantile")
    {
        const std::vector<double> draws(150, 3.25);
        const std::vector<double> probs(kQuantileProbs.begin(), kQuantileProbs.end());
        for (double q : extract_quantiles(draws, probs)) {
            CHECK(q == 3.25);
        }
    }

    SUBCASE("quantile vectors are nondecreasing for random draw sets")
    {
        Rng rng(77);
        const std::vector<double> probs(kQuantileProbs.begin(), kQuantileProbs.end());
        for (int rep = 0; rep < 1000; ++rep) {
            std::vector<double> draws(120);
            for (auto& d : draws) {
                d = rng.normal(50.0, 20.0);
            }
            const auto q = extract_quantiles(draws, probs);
            CHECK(std::is_sorted(q.begin(), q.end()));
        }
    }

    SUBCASE("bad inputs are rejected")
    {
        std::vector<double> draws(120, 1.0);
        CHECK_THROWS_AS(extract_quantiles({1.0, 2.0}, {0.5}), InvalidArgumentError);
        CHECK_THROWS_AS(extract_quantiles(draws, {0.5, 0.25}), InvalidArgumentError);
        CHECK_THROWS_AS(extract_quantiles(draws, {0.25, 0.25}), InvalidArgumentError);
        CHECK_THROWS_AS(extract_quantiles(draws, {0.0, 0.5}), InvalidArgumentError);
        CHECK_THROWS_AS(extract_quantiles(draws, {0.5, 1.0}), InvalidArgumentError);
    }
}

TEST_CASE("submission quantiles label targets and stay valid")
{
    HospRegressionSpec spec;
    spec.population_scale = 25.0;
    const auto ili  = fixed_ili_path({0.05, 0.06}, 30);
    const auto post = HospPosterior::fixed({80.0, 4.0, 0.0, 0.6}, 16.0);
    const auto fc   = cut_forecast(ili, post, 250.0, spec, 4000, 13);

    const auto forecasts = quantile_forecasts(fc, "US");
    REQUIRE(forecasts.size() == 2);
    CHECK(forecasts[0].target.location == "US");
    CHECK(forecasts[0].target.season == 2022);
    CHECK(forecasts[0].target.reference_week == 30);
    CHECK(forecasts[0].target.horizon == 1);
    CHECK(forecasts[1].target.horizon == 2);
    CHECK(forecasts[0].target.predicted_week() == 31);
    for (const auto& f : forecasts) {
        CHECK_NOTHROW(f.validate());
    }

    // the median sits near the closed-form first-horizon mean
    const double x    = 0.05 * 25.0;
    const double mean = 80.0 + 4.0 * x + 0.6 * 250.0;
    const double sd   = std::sqrt(16.0 * 25.0);
    CHECK(forecasts[0].values[11] == doctest::Approx(mean).epsilon(0.02));
    // and the 95% interval has roughly the Gaussian width
    CHECK(forecasts[0].values[21] - forecasts[0].values[1] ==
          doctest::Approx(2.0 * 1.96 * sd).epsilon(0.1));
}
