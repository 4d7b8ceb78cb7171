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
#include "flucast/curves.hpp"

#include "flucast/errors.hpp"
#include "flucast/mathutil.hpp"

#include <cmath>
#include <string>

namespace flucast {

namespace {

void validate_sir(const SirParams& p, int num_weeks, int substeps)
{
    if (!(p.s0 > 0.0 && p.s0 <= 1.0) || !(p.i0 >= 0.0 && p.i0 < 1.0) ||
        p.s0 + p.i0 > 1.0 + 1e-12 || !(p.beta >= 0.0) || !(p.rho >= 0.0)) {
        throw InvalidArgumentError("integrate_sir: parameters outside the valid region");
    }
    if (num_weeks < 1 || substeps < 1) {
        throw InvalidArgumentError("integrate_sir: need num_weeks >= 1, substeps >= 1");
    }
}

} // namespace

SirTrajectory integrate_sir(const SirParams& p, int num_weeks, int substeps)
{
    validate_sir(p, num_weeks, substeps);
    const double beta  = p.beta;
    const double delta = p.delta();
    const double h     = 1.0 / static_cast<double>(substeps);

    SirTrajectory traj;
    traj.weeks.resize(static_cast<std::size_t>(num_weeks));

    double s = p.s0;
    double i = p.i0;
    double r = 1.0 - p.s0 - p.i0;
    traj.weeks[0] = SirState{s, i, r};

    auto deriv = [beta, delta](double sv, double iv, double& ds, double& di, double& dr) {
        const double flow = beta * sv * iv;
        ds                = -flow;
        di                = flow - delta * iv;
        dr                = delta * iv;
    };

    for (int w = 1; w < num_weeks; ++w) {
        for (int step = 0; step < substeps; ++step) {
            double k1s, k1i, k1r, k2s, k2i, k2r, k3s, k3i, k3r, k4s, k4i, k4r;
            deriv(s, i, k1s, k1i, k1r);
            deriv(s + 0.5 * h * k1s, i + 0.5 * h * k1i, k2s, k2i, k2r);
            deriv(s + 0.5 * h * k2s, i + 0.5 * h * k2i, k3s, k3i, k3r);
            deriv(s + h * k3s, i + h * k3i, k4s, k4i, k4r);
            s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
            i += h / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
            r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        }
        if (!std::isfinite(s) || !std::isfinite(i) || !std::isfinite(r)) {
            throw NumericalError("integrate_sir: non-finite state at week " +
                                 std::to_string(w + 1));
        }
        traj.weeks[static_cast<std::size_t>(w)] = SirState{s, i, r};
    }
    return traj;
}

void SirSensitivities::compute(const SirParams& p, int num_weeks, int substeps)
{
    validate_sir(p, num_weeks, substeps);
    const double beta  = p.beta;
    const double rho   = p.rho;
    const double delta = p.delta();
    const double h     = 1.0 / static_cast<double>(substeps);

    infectious.resize(static_cast<std::size_t>(num_weeks));
    d_infectious.resize(static_cast<std::size_t>(num_weeks));

    // Augmented state: (S, I) plus the 2x3 sensitivity block Z = d(S,I)/d(i0,
    // beta, rho), laid out row-major as y[2..7].
    double y[8] = {p.s0, p.i0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0};

    infectious[0]   = p.i0;
    d_infectious[0] = {1.0, 0.0, 0.0};

    auto deriv = [beta, rho, delta](const double* v, double* d) {
        const double s    = v[0];
        const double i    = v[1];
        const double flow = beta * s * i;
        d[0]              = -flow;
        d[1]              = flow - delta * i;
        // Jacobian of the vector field w.r.t. (S, I).
        const double jss = -beta * i;
        const double jsi = -beta * s;
        const double jis = beta * i;
        const double jii = beta * s - delta;
        // Explicit parameter derivatives of the vector field: columns
        // (i0, beta, rho).
        const double fs[3] = {0.0, -s * i, 0.0};
        const double fi[3] = {0.0, s * i - rho * i, -beta * i};
        for (int c = 0; c < 3; ++c) {
            const double zs = v[2 + c];
            const double zi = v[5 + c];
            d[2 + c]        = jss * zs + jsi * zi + fs[c];
            d[5 + c]        = jis * zs + jii * zi + fi[c];
        }
    };

    double k1[8], k2[8], k3[8], k4[8], tmp[8];
    for (int w = 1; w < num_weeks; ++w) {
        for (int step = 0; step < substeps; ++step) {
            deriv(y, k1);
            for (int j = 0; j < 8; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
            deriv(tmp, k2);
            for (int j = 0; j < 8; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
            deriv(tmp, k3);
            for (int j = 0; j < 8; ++j) tmp[j] = y[j] + h * k3[j];
            deriv(tmp, k4);
            for (int j = 0; j < 8; ++j) {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        for (double v : y) {
            if (!std::isfinite(v)) {
                throw NumericalError("sir_sensitivities: non-finite state at week " +
                                     std::to_string(w + 1));
            }
        }
        infectious[static_cast<std::size_t>(w)]   = y[1];
        d_infectious[static_cast<std::size_t>(w)] = {y[5], y[6], y[7]};
    }
}

double SirSensitivities::logit_infectious(int week) const
{
    const double i = infectious[static_cast<std::size_t>(week - 1)];
    if (!(i > 0.0 && i < 1.0)) {
        throw NumericalError("logit_infectious: I outside (0,1) at week " +
                             std::to_string(week));
    }
    return logit(i);
}

std::array<double, 3> SirSensitivities::logit_grad(int week) const
{
    const double i = infectious[static_cast<std::size_t>(week - 1)];
    if (!(i > 0.0 && i < 1.0)) {
        throw NumericalError("logit_grad: I outside (0,1) at week " + std::to_string(week));
    }
    const double scale = 1.0 / (i * (1.0 - i));
    const auto& di     = d_infectious[static_cast<std::size_t>(week - 1)];
    return {scale * di[0], scale * di[1], scale * di[2]};
}

SirSensitivities sir_sensitivities(const SirParams& p, int num_weeks, int substeps)
{
    SirSensitivities sens;
    sens.compute(p, num_weeks, substeps);
    return sens;
}

double asg_eval(const AsgParams& p, double w)
{
    const double d        = w - p.mu;
    const double width_sq = d < 0.0 ? p.sigma1_sq : p.sigma2_sq;
    return p.lambda + p.eta * std::exp(-d * d / (2.0 * width_sq));
}

std::array<double, 5> asg_grad(const AsgParams& p, double w)
{
    const double d        = w - p.mu;
    const bool left       = d < 0.0;
    const double width_sq = left ? p.sigma1_sq : p.sigma2_sq;
    const double bump     = std::exp(-d * d / (2.0 * width_sq));
    const double scaled   = p.eta * bump;

    std::array<double, 5> grad{};
    grad[0] = 1.0;
    grad[1] = bump;
    grad[2] = scaled * d / width_sq;
    const double d_width = scaled * d * d / (2.0 * width_sq * width_sq);
    grad[3]              = left ? d_width : 0.0;
    grad[4]              = left ? 0.0 : d_width;
    return grad;
}

} // namespace flucast
