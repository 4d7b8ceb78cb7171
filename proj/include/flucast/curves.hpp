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
#ifndef FLUCAST_CURVES_HPP
#define FLUCAST_CURVES_HPP

#include <array>
#include <vector>

namespace flucast {

/// Default RK4 resolution for the compartmental integrator.
inline constexpr int kSirSubstepsPerWeek = 50;

/**
 * SIR parameters. The recovery rate is carried as the ratio rho = delta/beta,
 * so delta is recovered as beta * rho. beta = 0 is accepted by the
 * integrator (the no-transmission edge case); positivity is a prior concern.
 */
struct SirParams {
    double s0   = 0.9;
    double i0   = 0.0;
    double beta = 0.0;
    double rho  = 0.0;

    double delta() const { return beta * rho; }
};

/// Outbreak grows initially iff susceptibles exceed the threshold ratio.
inline bool is_epidemic(const SirParams& p) { return p.s0 / p.rho > 1.0; }

struct SirState {
    double s = 0.0;
    double i = 0.0;
    double r = 0.0;
};

/// Weekly compartment values; index 0 holds week 1 (the initial state).
struct SirTrajectory {
    std::vector<SirState> weeks;

    const SirState& at(int week) const { return weeks[static_cast<std::size_t>(week - 1)]; }
    int num_weeks() const { return static_cast<int>(weeks.size()); }
};

/**
 * Integrate dS/dt = -bSI, dI/dt = bSI - dI, dR/dt = dI with fixed-step RK4.
 * Week 1 is the initial state (s0, i0, 1-s0-i0); each later week advances
 * one unit of time using `substeps` RK4 steps.
 *
 * Throws NumericalError if the state goes non-finite.
 */
SirTrajectory integrate_sir(const SirParams& p, int num_weeks,
                            int substeps = kSirSubstepsPerWeek);

/**
 * Weekly infectious fractions plus forward-sensitivity partials of I_w with
 * respect to (i0, beta, rho), from the same RK4 discretization as
 * integrate_sir. Storage is reusable across calls via compute().
 */
struct SirSensitivities {
    std::vector<double> infectious;               // I_w, index 0 = week 1
    std::vector<std::array<double, 3>> d_infectious; // dI_w / d(i0, beta, rho)

    void compute(const SirParams& p, int num_weeks, int substeps = kSirSubstepsPerWeek);

    double logit_infectious(int week) const;

    /// d logit(I_w) / d(i0, beta, rho). Throws NumericalError when I_w is
    /// outside (0, 1).
    std::array<double, 3> logit_grad(int week) const;
};

SirSensitivities sir_sensitivities(const SirParams& p, int num_weeks,
                                   int substeps = kSirSubstepsPerWeek);

/**
 * Asymmetric Gaussian bump on the logit scale: baseline lambda plus a peak of
 * height eta at week mu, with separate left/right squared widths. Accepts
 * real-valued w since the peak location is continuous.
 */
struct AsgParams {
    double lambda    = 0.0;
    double eta       = 0.0;
    double mu        = 0.0;
    double sigma1_sq = 1.0; // width used for w < mu
    double sigma2_sq = 1.0; // width used for w >= mu
};

double asg_eval(const AsgParams& p, double w);

/// Partials of asg_eval with respect to (lambda, eta, mu, sigma1_sq, sigma2_sq).
std::array<double, 5> asg_grad(const AsgParams& p, double w);

} // namespace flucast

#endif // FLUCAST_CURVES_HPP
