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
#include "flucast/optim.hpp"

#include "flucast/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace flucast {

namespace {

double guarded(double v)
{
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

} // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             int max_evals, double ftol)
{
    const std::size_t n = x0.size();
    if (n == 0 || step.size() != n) {
        throw InvalidArgumentError("nelder_mead: empty start point or step size mismatch");
    }

    constexpr double kReflect  = 1.0;
    constexpr double kExpand   = 2.0;
    constexpr double kContract = 0.5;
    constexpr double kShrink   = 0.5;

    NelderMeadResult result;
    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> fvals(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += step[i];
    }
    for (std::size_t i = 0; i <= n; ++i) {
        fvals[i] = guarded(f(simplex[i]));
        ++result.evals;
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n);

    while (result.evals < max_evals) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];

        if (std::isfinite(fvals[best]) &&
            (fvals[worst] - fvals[best] < ftol * (std::fabs(fvals[best]) + ftol))) {
            result.converged = true;
            break;
        }

        for (std::size_t j = 0; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                if (i != worst) sum += simplex[i][j];
            }
            centroid[j] = sum / static_cast<double>(n);
        }

        auto propose = [&](double coef) {
            for (std::size_t j = 0; j < n; ++j) {
                trial[j] = centroid[j] + coef * (centroid[j] - simplex[worst][j]);
            }
            ++result.evals;
            return guarded(f(trial));
        };

        const double fr = propose(kReflect);
        if (fr < fvals[order[0]]) {
            const std::vector<double> reflected = trial;
            const double fe                     = propose(kExpand);
            if (fe < fr) {
                simplex[worst] = trial;
                fvals[worst]   = fe;
            } else {
                simplex[worst] = reflected;
                fvals[worst]   = fr;
            }
        } else if (fr < fvals[second]) {
            simplex[worst] = trial;
            fvals[worst]   = fr;
        } else {
            const bool outside = fr < fvals[worst];
            if (outside) {
                simplex[worst] = trial;
                fvals[worst]   = fr;
            }
            const double fc = propose(-kContract);
            if (fc < fvals[worst]) {
                simplex[worst] = trial;
                fvals[worst]   = fc;
            } else {
                // Shrink everything toward the best vertex.
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j) {
                        simplex[i][j] =
                            simplex[best][j] + kShrink * (simplex[i][j] - simplex[best][j]);
                    }
                    fvals[i] = guarded(f(simplex[i]));
                    ++result.evals;
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (fvals[i] < fvals[best]) best = i;
    }
    result.x    = simplex[best];
    result.fval = fvals[best];
    return result;
}

} // namespace flucast
