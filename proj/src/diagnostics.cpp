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
#include "flucast/diagnostics.hpp"

#include "flucast/errors.hpp"
#include "flucast/mathutil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace flucast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_shape(const PosteriorDraws& draws)
{
    if (draws.num_chains < 2) {
        throw InvalidArgumentError("diagnostics require at least 2 chains");
    }
    if (draws.num_draws < 4) {
        throw InvalidArgumentError("diagnostics require at least 4 draws per chain");
    }
}

/// Half-chain sequences for one parameter: 2*chains rows of length n.
std::vector<std::vector<double>> split_sequences(const PosteriorDraws& draws, std::size_t p)
{
    const int n = draws.num_draws / 2;
    std::vector<std::vector<double>> seqs;
    seqs.reserve(static_cast<std::size_t>(2 * draws.num_chains));
    for (int c = 0; c < draws.num_chains; ++c) {
        std::vector<double> first(static_cast<std::size_t>(n));
        std::vector<double> second(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d) {
            first[static_cast<std::size_t>(d)] = draws.at(c, d, p);
            second[static_cast<std::size_t>(d)] =
                draws.at(c, draws.num_draws - n + d, p);
        }
        seqs.push_back(std::move(first));
        seqs.push_back(std::move(second));
    }
    return seqs;
}

/// Average ranks (ties averaged) of all values pooled across sequences,
/// mapped through the normal quantile with the continuity-corrected offset.
void rank_normalize(std::vector<std::vector<double>>& seqs)
{
    struct Entry {
        double value;
        std::size_t seq;
        std::size_t idx;
    };
    std::vector<Entry> pool;
    for (std::size_t s = 0; s < seqs.size(); ++s) {
        for (std::size_t i = 0; i < seqs[s].size(); ++i) {
            pool.push_back({seqs[s][i], s, i});
        }
    }
    std::sort(pool.begin(), pool.end(),
              [](const Entry& a, const Entry& b) { return a.value < b.value; });

    const double total = static_cast<double>(pool.size());
    std::size_t i      = 0;
    while (i < pool.size()) {
        std::size_t j = i;
        while (j + 1 < pool.size() && pool[j + 1].value == pool[i].value) {
            ++j;
        }
        // Ranks are 1-based; tied values share the average rank.
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        const double z        = norm_quantile((avg_rank - 0.375) / (total + 0.25));
        for (std::size_t k = i; k <= j; ++k) {
            seqs[pool[k].seq][pool[k].idx] = z;
        }
        i = j + 1;
    }
}

/// Classic split statistic over already-prepared sequences.
double psr_from_sequences(const std::vector<std::vector<double>>& seqs)
{
    const double m = static_cast<double>(seqs.size());
    const double n = static_cast<double>(seqs.front().size());

    double grand = 0.0;
    std::vector<double> means(seqs.size());
    std::vector<double> vars(seqs.size());
    for (std::size_t s = 0; s < seqs.size(); ++s) {
        RunningMoments rm;
        for (double v : seqs[s]) rm.add(v);
        means[s] = rm.mean();
        vars[s]  = rm.variance();
        grand += means[s];
    }
    grand /= m;

    double b = 0.0;
    for (double mu : means) {
        b += (mu - grand) * (mu - grand);
    }
    b *= n / (m - 1.0);

    double w = 0.0;
    for (double v : vars) w += v;
    w /= m;

    if (!(w > 0.0) || !std::isfinite(w)) {
        // No within-sequence variation: either nothing moved (no signal) or
        // stuck sequences disagree (unconverged beyond measure).
        return b > 0.0 ? std::numeric_limits<double>::infinity() : kNaN;
    }
    const double var_plus = (n - 1.0) / n * w + b / n;
    return std::sqrt(var_plus / w);
}

/// Effective sample size for one parameter across full chains.
double ess_one(const PosteriorDraws& draws, std::size_t p)
{
    const int c = draws.num_chains;
    const int n = draws.num_draws;

    std::vector<std::vector<double>> centered(static_cast<std::size_t>(c));
    std::vector<double> chain_means(static_cast<std::size_t>(c));
    std::vector<double> chain_vars(static_cast<std::size_t>(c));
    for (int ci = 0; ci < c; ++ci) {
        auto& x = centered[static_cast<std::size_t>(ci)];
        x.resize(static_cast<std::size_t>(n));
        RunningMoments rm;
        for (int d = 0; d < n; ++d) {
            x[static_cast<std::size_t>(d)] = draws.at(ci, d, p);
            rm.add(x[static_cast<std::size_t>(d)]);
        }
        chain_means[static_cast<std::size_t>(ci)] = rm.mean();
        chain_vars[static_cast<std::size_t>(ci)]  = rm.variance();
        for (auto& v : x) v -= rm.mean();
    }

    const double mean_var =
        std::accumulate(chain_vars.begin(), chain_vars.end(), 0.0) / c;
    double between = 0.0;
    if (c > 1) {
        RunningMoments rm;
        for (double mu : chain_means) rm.add(mu);
        between = rm.variance();
    }
    const double var_plus = mean_var * (n - 1.0) / n + between;
    if (!(var_plus > 0.0) || !std::isfinite(var_plus)) {
        return kNaN;
    }

    auto acov = [&](int lag) {
        double total = 0.0;
        for (const auto& x : centered) {
            double s = 0.0;
            for (int i = 0; i + lag < n; ++i) {
                s += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i + lag)];
            }
            total += s / n;
        }
        return total / c;
    };

    // Geyer pair sums: keep adding while positive, enforcing monotone decay.
    auto rho = [&](int lag) { return 1.0 - (mean_var - acov(lag)) / var_plus; };

    double tau       = -1.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (int k = 0; 2 * k + 1 < n - 2; ++k) {
        double pair = rho(2 * k) + rho(2 * k + 1);
        if (!(pair > 0.0)) {
            break;
        }
        pair = std::min(pair, prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
    }
    tau = std::max(tau, 1.0 / std::log10(static_cast<double>(c) * n + 10.0));

    const double total = static_cast<double>(c) * static_cast<double>(n);
    return std::min(total, total / tau);
}

} // namespace

std::vector<double> rhat(const PosteriorDraws& draws)
{
    require_shape(draws);
    std::vector<double> out(draws.dim, kNaN);
    for (std::size_t p = 0; p < draws.dim; ++p) {
        auto seqs = split_sequences(draws, p);
        // A parameter constant across all chains has no rank information.
        bool constant = true;
        for (const auto& s : seqs) {
            for (double v : s) {
                if (v != seqs[0][0]) {
                    constant = false;
                    break;
                }
            }
            if (!constant) break;
        }
        if (constant) {
            continue;
        }
        rank_normalize(seqs);
        out[p] = psr_from_sequences(seqs);
    }
    return out;
}

std::vector<double> ess(const PosteriorDraws& draws)
{
    require_shape(draws);
    std::vector<double> out(draws.dim, kNaN);
    for (std::size_t p = 0; p < draws.dim; ++p) {
        out[p] = ess_one(draws, p);
    }
    return out;
}

double Diagnostics::max_rhat() const
{
    double best = kNaN;
    for (double r : rhat) {
        if (!std::isnan(r)) {
            best = std::isnan(best) ? r : std::max(best, r);
        }
    }
    return best;
}

double Diagnostics::min_ess() const
{
    double best = kNaN;
    for (double e : ess) {
        if (!std::isnan(e)) {
            best = std::isnan(best) ? e : std::min(best, e);
        }
    }
    return best;
}

bool Diagnostics::has_undefined() const
{
    for (double r : rhat) {
        if (std::isnan(r)) return true;
    }
    for (double e : ess) {
        if (std::isnan(e)) return true;
    }
    return false;
}

Diagnostics diagnose(const PosteriorDraws& draws)
{
    Diagnostics d;
    d.rhat = rhat(draws);
    d.ess  = ess(draws);
    return d;
}

} // namespace flucast
