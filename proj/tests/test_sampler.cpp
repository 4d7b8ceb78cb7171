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

#include "flucast/csv.hpp"
#include "flucast/diagnostics.hpp"
#include "flucast/errors.hpp"
#include "flucast/mathutil.hpp"
#include "flucast/rng.hpp"
#include "flucast/sampler.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <vector>

using namespace flucast;

namespace {

class StdNormal final : public LogDensityModel {
public:
    std::size_t dim() const override { return 1; }
    double log_density_gradient(std::span<const double> x,
                                std::span<double> grad) const override
    {
        grad[0] = -x[0];
        return -0.5 * x[0] * x[0];
    }
};

/// Zero-mean Gaussian with banded correlation and spread-out scales.
class CorrelatedGaussian final : public LogDensityModel {
public:
    explicit CorrelatedGaussian(int n) : n_(n), precision_(n, n), cov_(n, n)
    {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double sd_i = 0.5 + 2.5 * i / (n - 1.0);
                const double sd_j = 0.5 + 2.5 * j / (n - 1.0);
                cov_(i, j)        = sd_i * sd_j * std::pow(0.7, std::abs(i - j));
            }
        }
        precision_ = cov_.inverse();
    }

    std::size_t dim() const override { return static_cast<std::size_t>(n_); }

    double log_density_gradient(std::span<const double> x,
                                std::span<double> grad) const override
    {
        Eigen::Map<const Eigen::VectorXd> v(x.data(), n_);
        Eigen::VectorXd px = precision_ * v;
        for (int i = 0; i < n_; ++i) {
            grad[static_cast<std::size_t>(i)] = -px(i);
        }
        return -0.5 * v.dot(px);
    }

    double variance(int i) const { return cov_(i, i); }

private:
    int n_;
    Eigen::MatrixXd precision_;
    Eigen::MatrixXd cov_;
};

/// Normal prior on a mean parameter plus normal observations of it.
class ConjugateMean final : public LogDensityModel {
public:
    ConjugateMean(double prior_mean, double prior_var, std::vector<double> data,
                  double obs_var)
        : prior_mean_(prior_mean), prior_var_(prior_var), data_(std::move(data)),
          obs_var_(obs_var)
    {
    }

    std::size_t dim() const override { return 1; }

    double log_density_gradient(std::span<const double> x,
                                std::span<double> grad) const override
    {
        const double theta = x[0];
        double logp        = -0.5 * (theta - prior_mean_) * (theta - prior_mean_) / prior_var_;
        double g           = -(theta - prior_mean_) / prior_var_;
        for (double y : data_) {
            logp += -0.5 * (y - theta) * (y - theta) / obs_var_;
            g += (y - theta) / obs_var_;
        }
        grad[0] = g;
        return logp;
    }

    double posterior_mean() const
    {
        const double n = static_cast<double>(data_.size());
        double sum     = 0.0;
        for (double y : data_) sum += y;
        const double prec = 1.0 / prior_var_ + n / obs_var_;
        return (prior_mean_ / prior_var_ + sum / obs_var_) / prec;
    }

    double posterior_var() const
    {
        const double n = static_cast<double>(data_.size());
        return 1.0 / (1.0 / prior_var_ + n / obs_var_);
    }

private:
    double prior_mean_;
    double prior_var_;
    std::vector<double> data_;
    double obs_var_;
};

class Improper final : public LogDensityModel {
public:
    std::size_t dim() const override { return 2; }
    double log_density_gradient(std::span<const double>, std::span<double> grad) const override
    {
        grad[0] = grad[1] = 0.0;
        return -std::numeric_limits<double>::infinity();
    }
};

PosteriorDraws pack_draws(const std::vector<std::vector<std::vector<double>>>& chains)
{
    PosteriorDraws d;
    d.num_chains = static_cast<int>(chains.size());
    d.num_draws  = static_cast<int>(chains[0].size());
    d.dim        = chains[0][0].size();
    d.names.resize(d.dim, "p");
    d.divergences.assign(static_cast<std::size_t>(d.num_chains), 0);
    d.data.reserve(d.total_draws() * d.dim);
    for (const auto& chain : chains) {
        for (const auto& draw : chain) {
            d.data.insert(d.data.end(), draw.begin(), draw.end());
        }
    }
    return d;
}

double draw_mean(const PosteriorDraws& d, std::size_t p)
{
    RunningMoments rm;
    for (int c = 0; c < d.num_chains; ++c) {
        for (int i = 0; i < d.num_draws; ++i) {
            rm.add(d.at(c, i, p));
        }
    }
    return rm.mean();
}

double draw_var(const PosteriorDraws& d, std::size_t p)
{
    RunningMoments rm;
    for (int c = 0; c < d.num_chains; ++c) {
        for (int i = 0; i < d.num_draws; ++i) {
            rm.add(d.at(c, i, p));
        }
    }
    return rm.variance();
}

} // namespace

TEST_CASE("standard normal target is recovered")
{
    StdNormal target;
    SamplerConfig cfg;
    cfg.num_chains = 4;
    cfg.warmup     = 1000;
    cfg.draws      = 5000;
    cfg.seed       = 31;

    const auto draws = sample(target, cfg);
    CHECK(draws.total_draws() == 20000);
    CHECK(draws.total_divergences() == 0);
    CHECK(std::fabs(draw_mean(draws, 0)) < 0.05);
    CHECK(std::fabs(draw_var(draws, 0) - 1.0) < 0.1);

    const auto d = diagnose(draws);
    CHECK(d.max_rhat() < 1.01);
    CHECK(d.min_ess() > 500.0);
}

TEST_CASE("ten-dimensional correlated gaussian converges cleanly")
{
    CorrelatedGaussian target(10);
    SamplerConfig cfg;
    cfg.num_chains = 4;
    cfg.warmup     = 1000;
    cfg.draws      = 5000;
    cfg.seed       = 20260815;

    const auto draws = sample(target, cfg);
    CHECK(draws.total_divergences() == 0);

    const auto diag = diagnose(draws);
    for (double r : diag.rhat) {
        CHECK(r < 1.01);
    }
    for (std::size_t p = 0; p < draws.dim; ++p) {
        const double se = std::sqrt(target.variance(static_cast<int>(p)) / diag.ess[p]);
        CHECK(std::fabs(draw_mean(draws, p)) < 3.0 * se);
        // Marginal spread should track the known covariance diagonal.
        CHECK(draw_var(draws, p) ==
              doctest::Approx(target.variance(static_cast<int>(p))).epsilon(0.15));
    }
}

TEST_CASE("conjugate gaussian posterior recovered across twenty seeds")
{
    Rng data_rng(555);
    std::vector<double> data;
    for (int i = 0; i < 12; ++i) {
        data.push_back(1.1 + 0.8 * data_rng.normal());
    }
    ConjugateMean target(0.0, 4.0, data, 0.64);

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SamplerConfig cfg;
        cfg.num_chains = 2;
        cfg.warmup     = 400;
        cfg.draws      = 1500;
        cfg.seed       = seed;
        const auto draws = sample(target, cfg);
        const auto diag  = diagnose(draws);
        const double se  = std::sqrt(target.posterior_var() / diag.ess[0]);
        CHECK(std::fabs(draw_mean(draws, 0) - target.posterior_mean()) < 3.0 * se);
    }
}

TEST_CASE("sampling is deterministic and thread-count independent")
{
    CorrelatedGaussian target(4);
    SamplerConfig cfg;
    cfg.num_chains = 3;
    cfg.warmup     = 200;
    cfg.draws      = 300;
    cfg.seed       = 77;

    const auto a = sample(target, cfg);
    const auto b = sample(target, cfg);
    CHECK(a.data == b.data);
    CHECK(a.divergences == b.divergences);

    cfg.num_threads = 3;
    const auto c    = sample(target, cfg);
    CHECK(a.data == c.data);
    CHECK(a.divergences == c.divergences);

    cfg.num_threads = 1;
    cfg.seed        = 78;
    const auto d    = sample(target, cfg);
    CHECK(a.data != d.data);
}

TEST_CASE("improper target fails loudly at initialization")
{
    Improper target;
    SamplerConfig cfg;
    cfg.num_chains = 1;
    cfg.warmup     = 10;
    cfg.draws      = 10;
    CHECK_THROWS_AS((void)sample(target, cfg), NumericalError);
}

TEST_CASE("config validation")
{
    StdNormal target;
    SamplerConfig cfg;
    cfg.num_chains = 0;
    CHECK_THROWS_AS((void)sample(target, cfg), InvalidArgumentError);
    cfg = SamplerConfig{};
    cfg.target_accept = 1.5;
    CHECK_THROWS_AS((void)sample(target, cfg), InvalidArgumentError);
}

TEST_CASE("split statistic near one for well-mixed chains, large for split ones")
{
    Rng rng(1234);
    int high = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<std::vector<std::vector<double>>> chains(
            4, std::vector<std::vector<double>>(500, std::vector<double>(1)));
        for (auto& chain : chains) {
            for (auto& draw : chain) {
                draw[0] = rng.normal();
            }
        }
        const auto r = rhat(pack_draws(chains));
        // Floor is sqrt((n-1)/n), slightly below one, when B < W by chance.
        CHECK(r[0] > 0.995);
        if (r[0] > 1.02) ++high;
    }
    // i.i.d. chains should essentially never look unconverged.
    CHECK(high <= 2);

    // Push one chain far away: the statistic must flag it.
    std::vector<std::vector<std::vector<double>>> chains(
        4, std::vector<std::vector<double>>(500, std::vector<double>(1)));
    for (std::size_t c = 0; c < chains.size(); ++c) {
        for (auto& draw : chains[c]) {
            draw[0] = rng.normal() + (c == 0 ? 10.0 : 0.0);
        }
    }
    CHECK(rhat(pack_draws(chains))[0] > 1.5);
}

TEST_CASE("degenerate draws give sentinel diagnostics, bad shapes throw")
{
    std::vector<std::vector<std::vector<double>>> chains(
        3, std::vector<std::vector<double>>(50, std::vector<double>{2.5}));
    const auto d = pack_draws(chains);
    CHECK(std::isnan(rhat(d)[0]));
    CHECK(std::isnan(ess(d)[0]));
    CHECK(diagnose(d).has_undefined());

    std::vector<std::vector<std::vector<double>>> single(
        1, std::vector<std::vector<double>>(50, std::vector<double>{0.0}));
    CHECK_THROWS_AS((void)rhat(pack_draws(single)), InvalidArgumentError);
    CHECK_THROWS_AS((void)ess(pack_draws(single)), InvalidArgumentError);

    std::vector<std::vector<std::vector<double>>> tiny(
        2, std::vector<std::vector<double>>(3, std::vector<double>{0.0}));
    CHECK_THROWS_AS((void)rhat(pack_draws(tiny)), InvalidArgumentError);
}

TEST_CASE("effective sample size tracks independence and autocorrelation")
{
    Rng rng(999);

    SUBCASE("independent draws")
    {
        std::vector<std::vector<std::vector<double>>> chains(
            4, std::vector<std::vector<double>>(2000, std::vector<double>(1)));
        for (auto& chain : chains) {
            for (auto& draw : chain) {
                draw[0] = rng.normal();
            }
        }
        const double e = ess(pack_draws(chains))[0];
        CHECK(e > 0.9 * 8000);
        CHECK(e <= 8000.0);
    }

    SUBCASE("first-order autoregression with coefficient 0.9")
    {
        const double phi = 0.9;
        std::vector<std::vector<std::vector<double>>> chains(
            4, std::vector<std::vector<double>>(5000, std::vector<double>(1)));
        for (auto& chain : chains) {
            double x = rng.normal() / std::sqrt(1.0 - phi * phi);
            for (int burn = 0; burn < 200; ++burn) {
                x = phi * x + rng.normal();
            }
            for (auto& draw : chain) {
                x       = phi * x + rng.normal();
                draw[0] = x;
            }
        }
        const double e      = ess(pack_draws(chains))[0];
        const double target = 20000.0 * (1.0 - phi) / (1.0 + phi);
        CHECK(e > 0.75 * target);
        CHECK(e < 1.25 * target);
    }
}

TEST_CASE("draw dump round-trips through csv")
{
    StdNormal target;
    SamplerConfig cfg;
    cfg.num_chains = 2;
    cfg.warmup     = 50;
    cfg.draws      = 20;
    cfg.seed       = 5;
    const auto draws = sample(target, cfg);

    const auto path = std::filesystem::temp_directory_path() / "flucast_draws_test.csv";
    write_draws_csv(draws, path.string());

    const auto table = CsvTable::read_file(path.string());
    REQUIRE(table.header().size() == 3);
    CHECK(table.header()[0] == "chain");
    CHECK(table.header()[1] == "draw");
    CHECK(table.header()[2] == "x1");
    REQUIRE(table.rows() == 40);
    for (std::size_t row = 0; row < table.rows(); ++row) {
        const int chain = std::stoi(table.cell(row, 0)) - 1;
        const int draw  = std::stoi(table.cell(row, 1)) - 1;
        CHECK(std::stod(table.cell(row, 2)) == draws.at(chain, draw, 0));
    }
    std::filesystem::remove(path);
}
