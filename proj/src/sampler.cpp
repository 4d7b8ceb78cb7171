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
#include "flucast/sampler.hpp"

#include "flucast/errors.hpp"
#include "flucast/mathutil.hpp"
#include "flucast/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace flucast {

std::vector<std::string> LogDensityModel::param_names() const
{
    std::vector<std::string> names;
    names.reserve(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        names.push_back("x" + std::to_string(i + 1));
    }
    return names;
}

void SamplerConfig::validate() const
{
    if (num_chains < 1 || warmup < 1 || draws < 1 || max_depth < 1 || num_threads < 1) {
        throw InvalidArgumentError("sampler config: counts must be >= 1");
    }
    if (!(target_accept > 0.0 && target_accept < 1.0)) {
        throw InvalidArgumentError("sampler config: target acceptance must lie in (0,1)");
    }
}

namespace {

constexpr double kDivergenceThreshold = 1000.0;
constexpr int kInitRetries            = 100;

double log_sum_exp(double a, double b)
{
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Phase-space point with cached density and gradient.
struct Phase {
    std::vector<double> q;
    std::vector<double> p;
    std::vector<double> grad;
    double logp = 0.0;
};

class Chain {
public:
    Chain(const LogDensityModel& target, const SamplerConfig& cfg, int chain_index)
        : target_(target),
          cfg_(cfg),
          rng_(Rng::stream(cfg.seed, static_cast<std::uint64_t>(chain_index) + 1)),
          dim_(target.dim()),
          inv_mass_(dim_, 1.0)
    {
    }

    /// Runs warmup + sampling; appends post-warmup draws to `out`.
    void run(double* out, int& divergences)
    {
        initialize();
        adapt();
        divergences = 0;
        for (int it = 0; it < cfg_.draws; ++it) {
            const bool divergent = transition();
            if (divergent) ++divergences;
            std::copy(state_.q.begin(), state_.q.end(),
                      out + static_cast<std::size_t>(it) * dim_);
        }
    }

private:
    double eval(Phase& z) const
    {
        z.logp = target_.log_density_gradient(z.q, z.grad);
        if (std::isnan(z.logp)) {
            z.logp = -std::numeric_limits<double>::infinity();
        }
        return z.logp;
    }

    void initialize()
    {
        state_.q.assign(dim_, 0.0);
        state_.p.assign(dim_, 0.0);
        state_.grad.assign(dim_, 0.0);
        for (int attempt = 0; attempt < kInitRetries; ++attempt) {
            for (double& qi : state_.q) {
                qi = 4.0 * rng_.uniform() - 2.0;
            }
            eval(state_);
            if (std::isfinite(state_.logp) && grad_finite(state_)) {
                return;
            }
        }
        throw NumericalError(
            "sampler initialization failed: target not finite at 100 jittered points");
    }

    bool grad_finite(const Phase& z) const
    {
        for (double g : z.grad) {
            if (!std::isfinite(g)) return false;
        }
        return true;
    }

    double kinetic(const std::vector<double>& p) const
    {
        double k = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            k += inv_mass_[i] * p[i] * p[i];
        }
        return 0.5 * k;
    }

    double hamiltonian(const Phase& z) const { return -z.logp + kinetic(z.p); }

    void draw_momentum(Phase& z)
    {
        for (std::size_t i = 0; i < dim_; ++i) {
            z.p[i] = rng_.normal() / std::sqrt(inv_mass_[i]);
        }
    }

    /// One leapfrog step of size eps * direction; returns the new Hamiltonian.
    double leapfrog(Phase& z, double eps)
    {
        for (std::size_t i = 0; i < dim_; ++i) {
            z.p[i] += 0.5 * eps * z.grad[i];
        }
        for (std::size_t i = 0; i < dim_; ++i) {
            z.q[i] += eps * inv_mass_[i] * z.p[i];
        }
        eval(z);
        if (!std::isfinite(z.logp) || !grad_finite(z)) {
            return std::numeric_limits<double>::infinity();
        }
        for (std::size_t i = 0; i < dim_; ++i) {
            z.p[i] += 0.5 * eps * z.grad[i];
        }
        return hamiltonian(z);
    }

    /// U-turn test across a span: compares the displacement against the
    /// velocities at both ends.
    bool uturn(const Phase& minus, const Phase& plus) const
    {
        double dot_minus = 0.0;
        double dot_plus  = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double dq = plus.q[i] - minus.q[i];
            dot_minus += dq * inv_mass_[i] * minus.p[i];
            dot_plus += dq * inv_mass_[i] * plus.p[i];
        }
        return dot_minus < 0.0 || dot_plus < 0.0;
    }

    struct TreeResult {
        bool valid       = true;  // no divergence, no internal u-turn
        bool divergent   = false;
        double log_weight = -std::numeric_limits<double>::infinity();
        double sum_accept = 0.0;
        int leapfrogs     = 0;
    };

    /// Doubling subtree of the given depth grown from `edge` in `direction`.
    /// On return `edge` holds the far endpoint, `near` the first new point
    /// (the subtree end closest to the existing tree), and `proposal` a point
    /// drawn multinomially (weight exp(h0 - H)) from the subtree.
    TreeResult build_tree(int depth, Phase& edge, Phase& near, Phase& proposal,
                          double eps, int direction, double h0)
    {
        TreeResult result;
        if (depth == 0) {
            const double h = leapfrog(edge, eps * direction);
            result.leapfrogs = 1;
            const double delta = h0 - h; // positive when energy improves
            if (!std::isfinite(h) || -delta > kDivergenceThreshold) {
                result.valid     = false;
                result.divergent = true;
                return result;
            }
            result.log_weight = delta;
            result.sum_accept = std::min(1.0, std::exp(delta));
            near              = edge;
            proposal          = edge;
            return result;
        }

        TreeResult first = build_tree(depth - 1, edge, near, proposal, eps, direction, h0);
        if (!first.valid) {
            return first;
        }
        Phase second_near;
        Phase second_proposal;
        TreeResult second =
            build_tree(depth - 1, edge, second_near, second_proposal, eps, direction, h0);

        TreeResult merged;
        merged.divergent  = second.divergent;
        merged.leapfrogs  = first.leapfrogs + second.leapfrogs;
        merged.sum_accept = first.sum_accept + second.sum_accept;
        merged.log_weight = log_sum_exp(first.log_weight, second.log_weight);
        if (!second.valid) {
            merged.valid = false;
            return merged;
        }
        // Within-subtree multinomial choice between the two halves.
        const double p_second = std::exp(second.log_weight - merged.log_weight);
        if (rng_.uniform() < p_second) {
            proposal = second_proposal;
        }
        // Whole-subtree u-turn check over its extreme endpoints, oriented by
        // trajectory time.
        merged.valid = direction > 0 ? !uturn(near, edge) : !uturn(edge, near);
        return merged;
    }

    /// One sampler transition; updates state_ and returns divergence flag.
    bool transition()
    {
        draw_momentum(state_);
        const double h0 = hamiltonian(state_);

        Phase forward  = state_;
        Phase backward = state_;
        Phase proposal = state_;

        double log_weight = 0.0; // the initial point carries weight exp(0)
        bool divergent    = false;
        double sum_accept = 0.0;
        int leapfrogs     = 0;

        Phase scratch_near;
        for (int depth = 0; depth < cfg_.max_depth; ++depth) {
            const int direction = rng_.uniform() < 0.5 ? 1 : -1;
            Phase& edge         = direction > 0 ? forward : backward;
            Phase subtree_proposal = proposal;
            TreeResult subtree = build_tree(depth, edge, scratch_near, subtree_proposal,
                                            step_size_, direction, h0);
            sum_accept += subtree.sum_accept;
            leapfrogs += subtree.leapfrogs;
            if (subtree.divergent) {
                divergent = true;
            }
            if (!subtree.valid) {
                break;
            }
            // Biased progressive sampling: favor the new subtree.
            const double p_new = std::exp(subtree.log_weight - log_weight);
            if (p_new >= 1.0 || rng_.uniform() < p_new) {
                proposal = subtree_proposal;
            }
            log_weight = log_sum_exp(log_weight, subtree.log_weight);
            if (uturn(backward, forward)) {
                break;
            }
        }

        state_ = proposal;
        accept_stat_ = leapfrogs > 0 ? sum_accept / leapfrogs : 0.0;
        return divergent;
    }

    /// Reasonable initial step size: scale until the one-step acceptance
    /// crosses 1/2.
    void find_initial_step_size()
    {
        step_size_ = 1.0;
        Phase z    = state_;
        draw_momentum(z);
        const double h0 = hamiltonian(z);

        Phase probe = z;
        double h    = leapfrog(probe, step_size_);
        double delta = h0 - h;
        if (!std::isfinite(delta)) delta = -std::numeric_limits<double>::infinity();
        const double dir = delta > std::log(0.5) ? 1.0 : -1.0;
        for (int iter = 0; iter < 100; ++iter) {
            probe = z;
            h     = leapfrog(probe, step_size_);
            delta = h0 - h;
            if (!std::isfinite(delta)) delta = -std::numeric_limits<double>::infinity();
            if (dir > 0.0 ? delta <= std::log(0.5) : delta >= std::log(0.5)) {
                break;
            }
            step_size_ *= dir > 0.0 ? 2.0 : 0.5;
            if (step_size_ > 1e7 || step_size_ < 1e-10) {
                break;
            }
        }
    }

    struct DualAverage {
        double mu      = 0.0;
        double log_bar = 0.0;
        double h_bar   = 0.0;
        int count      = 0;

        void restart(double eps)
        {
            mu      = std::log(10.0 * eps);
            log_bar = 0.0;
            h_bar   = 0.0;
            count   = 0;
        }

        double update(double accept, double target)
        {
            constexpr double gamma = 0.05;
            constexpr double t0    = 10.0;
            constexpr double kappa = 0.75;
            ++count;
            const double m = static_cast<double>(count);
            h_bar          = (1.0 - 1.0 / (m + t0)) * h_bar + (target - accept) / (m + t0);
            const double log_eps = mu - std::sqrt(m) / gamma * h_bar;
            const double w       = std::pow(m, -kappa);
            log_bar              = w * log_eps + (1.0 - w) * log_bar;
            return std::exp(log_eps);
        }

        double averaged() const { return std::exp(log_bar); }
    };

    void adapt()
    {
        // Warmup schedule: a step-size-only opening buffer, doubling
        // variance-estimation windows, and a closing buffer.
        int init_buffer = 75;
        int term_buffer = 50;
        int base_window = 25;
        if (cfg_.warmup < init_buffer + term_buffer + base_window) {
            init_buffer = std::max(1, static_cast<int>(0.15 * cfg_.warmup));
            term_buffer = std::max(1, static_cast<int>(0.10 * cfg_.warmup));
            base_window = std::max(1, cfg_.warmup - init_buffer - term_buffer);
        }

        find_initial_step_size();
        DualAverage da;
        da.restart(step_size_);

        std::vector<RunningMoments> moments(dim_);
        const int slow_end = cfg_.warmup - term_buffer;
        int window_size    = base_window;
        int window_end     = init_buffer + window_size;
        // A window that could not be followed by a doubled one swallows the
        // remainder instead of leaving a fragment.
        if (window_end + 2 * window_size > slow_end) {
            window_end = slow_end;
        }

        for (int it = 0; it < cfg_.warmup; ++it) {
            transition();
            step_size_ = da.update(accept_stat_, cfg_.target_accept);

            const bool in_slow = it >= init_buffer && it < cfg_.warmup - term_buffer;
            if (in_slow) {
                for (std::size_t i = 0; i < dim_; ++i) {
                    moments[i].add(state_.q[i]);
                }
            }
            if (in_slow && it + 1 == window_end) {
                const double n = static_cast<double>(moments[0].count());
                if (n >= 2.0) {
                    for (std::size_t i = 0; i < dim_; ++i) {
                        // Shrink the estimate toward unit scale.
                        const double var = moments[i].variance();
                        inv_mass_[i] = var * (n / (n + 5.0)) + 1e-3 * (5.0 / (n + 5.0));
                    }
                }
                for (auto& m : moments) m = RunningMoments();
                // New metric invalidates the old step size scale.
                eval(state_);
                find_initial_step_size();
                da.restart(step_size_);
                window_size *= 2;
                window_end += window_size;
                if (window_end + 2 * window_size > slow_end) {
                    window_end = slow_end;
                }
            }
        }
        step_size_ = da.averaged();
        if (!(step_size_ > 0.0) || !std::isfinite(step_size_)) {
            throw NumericalError("step size adaptation collapsed");
        }
    }

    const LogDensityModel& target_;
    const SamplerConfig& cfg_;
    Rng rng_;
    std::size_t dim_;
    std::vector<double> inv_mass_;
    Phase state_;
    double step_size_  = 1.0;
    double accept_stat_ = 0.0;
};

} // namespace

PosteriorDraws sample(const LogDensityModel& target, const SamplerConfig& config)
{
    config.validate();
    if (target.dim() == 0) {
        throw InvalidArgumentError("sample: target has zero dimensions");
    }

    PosteriorDraws draws;
    draws.names      = target.param_names();
    draws.num_chains = config.num_chains;
    draws.num_draws  = config.draws;
    draws.dim        = target.dim();
    draws.data.assign(draws.total_draws() * draws.dim, 0.0);
    draws.divergences.assign(static_cast<std::size_t>(config.num_chains), 0);

    const std::size_t chain_stride =
        static_cast<std::size_t>(config.draws) * draws.dim;

    std::atomic<int> next_chain{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const int chain = next_chain.fetch_add(1);
            if (chain >= config.num_chains || failed.load()) {
                return;
            }
            try {
                Chain runner(target, config, chain);
                runner.run(draws.data.data() + static_cast<std::size_t>(chain) * chain_stride,
                           draws.divergences[static_cast<std::size_t>(chain)]);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                error_message = e.what();
                failed.store(true);
                return;
            }
        }
    };

    const int workers = std::min(config.num_threads, config.num_chains);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failed.load()) {
        throw NumericalError(error_message);
    }
    return draws;
}

void write_draws_csv(const PosteriorDraws& draws, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataFormatError("cannot write draws to " + path);
    }
    out << "chain,draw";
    for (const auto& name : draws.names) {
        out << ',' << name;
    }
    out << '\n';
    char buf[40];
    for (int c = 0; c < draws.num_chains; ++c) {
        for (int d = 0; d < draws.num_draws; ++d) {
            out << c + 1 << ',' << d + 1;
            const auto point = draws.point(c, d);
            for (double v : point) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out << ',' << buf;
            }
            out << '\n';
        }
    }
}

} // namespace flucast
