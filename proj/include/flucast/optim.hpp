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
#ifndef FLUCAST_OPTIM_HPP
#define FLUCAST_OPTIM_HPP

#include <functional>
#include <span>
#include <vector>

namespace flucast {

struct NelderMeadResult {
    std::vector<double> x;
    double fval = 0.0;
    int evals   = 0;
    bool converged = false;
};

/**
 * Derivative-free simplex minimization (Nelder-Mead with standard
 * reflection/expansion/contraction/shrink coefficients). `step` gives the
 * initial simplex spread per coordinate. Points where f is non-finite are
 * treated as infinitely bad, so the simplex retreats from them.
 */
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             int max_evals = 4000, double ftol = 1e-10);

} // namespace flucast

#endif // FLUCAST_OPTIM_HPP
