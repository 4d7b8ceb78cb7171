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
#ifndef FLUCAST_SAMPLER_HPP
#define FLUCAST_SAMPLER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flucast {

/**
 * Target distribution seen by the sampler: an unnormalized log density with
 * gradient over an unconstrained space. Constraint transforms and their
 * Jacobians belong to the model, not the engine. A return of -infinity
 * signals an off-support point (the proposal is rejected); the call must not
 * throw for that.
 */
class LogDensityModel {
public:
    virtual ~LogDensityModel() = default;

    virtual std::size_t dim() const = 0;

    /// Log density at x; writes the gradient into `grad` (same length as x).
    virtual double log_density_gradient(std::span<const double> x,
                                        std::span<double> grad) const = 0;

    /// One name per coordinate; defaults to x1..xN.
    virtual std::vector<std::string> param_names() const;
};

struct SamplerConfig {
    int num_chains       = 4;
    int warmup           = 10000;
    int draws            = 50000;
    double target_accept = 0.8;
    int max_depth        = 10;
    std::uint64_t seed   = 0;
    int num_threads      = 1; // worker count; never affects the draws

    void validate() const;
};

/// Post-warmup draws, flattened chain-major: [(chain * draws + draw) * dim + p].
struct PosteriorDraws {
    std::vector<std::string> names;
    int num_chains = 0;
    int num_draws  = 0; // per chain
    std::size_t dim = 0;
    std::vector<double> data;
    std::vector<int> divergences; // per chain, post-warmup

    double at(int chain, int draw, std::size_t p) const
    {
        return data[(static_cast<std::size_t>(chain) * static_cast<std::size_t>(num_draws) +
                     static_cast<std::size_t>(draw)) *
                        dim +
                    p];
    }

    std::span<const double> point(int chain, int draw) const
    {
        return {data.data() + (static_cast<std::size_t>(chain) *
                                   static_cast<std::size_t>(num_draws) +
                               static_cast<std::size_t>(draw)) *
                                  dim,
                dim};
    }

    int total_divergences() const
    {
        int total = 0;
        for (int d : divergences) total += d;
        return total;
    }

    std::size_t total_draws() const
    {
        return static_cast<std::size_t>(num_chains) * static_cast<std::size_t>(num_draws);
    }
};

/**
 * Dynamic-trajectory Hamiltonian Monte Carlo (multinomial no-u-turn variant)
 * with dual-averaging step-size adaptation and windowed diagonal mass-matrix
 * estimation during warmup. Chains are deterministic functions of (seed,
 * chain index), so results do not depend on num_threads.
 *
 * Throws NumericalError when a chain cannot find a finite starting point
 * after 100 jittered tries.
 */
PosteriorDraws sample(const LogDensityModel& target, const SamplerConfig& config);

/// Write draws as CSV with header `chain,draw,<param names...>`.
void write_draws_csv(const PosteriorDraws& draws, const std::string& path);

} // namespace flucast

#endif // FLUCAST_SAMPLER_HPP
