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
#ifndef FLUCAST_DIAGNOSTICS_HPP
#define FLUCAST_DIAGNOSTICS_HPP

#include "flucast/sampler.hpp"

#include <vector>

namespace flucast {

/**
 * Rank-normalized split potential-scale-reduction statistic, one value per
 * parameter. Chains are split in half, pooled values are rank-transformed
 * through the normal quantile function, and the classic between/within
 * variance ratio is taken on the transformed draws. Zero-variance parameters
 * yield NaN. Requires >= 2 chains and >= 4 draws per chain.
 */
std::vector<double> rhat(const PosteriorDraws& draws);

/**
 * Autocorrelation-based effective sample size, one value per parameter:
 * combined-chain correlation estimates truncated by Geyer's initial monotone
 * positive-pair-sum rule, capped at the total draw count. Zero-variance
 * parameters yield NaN. Requires >= 2 chains and >= 4 draws per chain.
 */
std::vector<double> ess(const PosteriorDraws& draws);

struct Diagnostics {
    std::vector<double> rhat;
    std::vector<double> ess;

    /// Largest finite R-hat; NaN if every entry is undefined.
    double max_rhat() const;
    /// Smallest finite ESS; NaN if every entry is undefined.
    double min_ess() const;
    /// True when any parameter's statistics are undefined (zero variance).
    bool has_undefined() const;
};

Diagnostics diagnose(const PosteriorDraws& draws);

} // namespace flucast

#endif // FLUCAST_DIAGNOSTICS_HPP
