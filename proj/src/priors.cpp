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
#include "flucast/priors.hpp"

#include "flucast/csv.hpp"
#include "flucast/errors.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace flucast {

namespace {

struct KeyBinding {
    const char* key;
    double PriorConfig::* field;
};

constexpr std::array<KeyBinding, 20> kBindings{{
    {"kappa.scale", &PriorConfig::kappa_scale},
    {"var_gamma.shape", &PriorConfig::var_gamma_shape},
    {"var_gamma.scale", &PriorConfig::var_gamma_scale},
    {"var_gamma_last.shape", &PriorConfig::var_gamma_last_shape},
    {"var_gamma_last.scale", &PriorConfig::var_gamma_last_scale},
    {"sd_upsilon.scale", &PriorConfig::sd_upsilon_scale},
    {"asg.lambda.center", &PriorConfig::asg_lambda_center},
    {"asg.lambda.scale", &PriorConfig::asg_lambda_scale},
    {"asg.log_scale.sd", &PriorConfig::asg_log_scale_sd},
    {"asg.mu.mean", &PriorConfig::asg_mu_mean},
    {"asg.mu.sd", &PriorConfig::asg_mu_sd},
    {"asg.tau.scale", &PriorConfig::asg_tau_scale},
    {"sir.s0", &PriorConfig::sir_s0},
    {"sir.i0.mean", &PriorConfig::sir_i0_mean},
    {"sir.i0.sd", &PriorConfig::sir_i0_sd},
    {"sir.i0.upper", &PriorConfig::sir_i0_upper},
    {"sir.beta.mean", &PriorConfig::sir_beta_mean},
    {"sir.beta.sd", &PriorConfig::sir_beta_sd},
    {"sir.rho.mean", &PriorConfig::sir_rho_mean},
    {"sir.rho.sd", &PriorConfig::sir_rho_sd},
}};

void require_positive(double v, const char* what)
{
    if (!(v > 0.0)) {
        throw InvalidArgumentError(std::string("prior config: ") + what +
                                   " must be positive");
    }
}

} // namespace

void PriorConfig::validate() const
{
    require_positive(kappa_scale, "kappa.scale");
    require_positive(var_gamma_shape, "var_gamma.shape");
    require_positive(var_gamma_scale, "var_gamma.scale");
    require_positive(var_gamma_last_shape, "var_gamma_last.shape");
    require_positive(var_gamma_last_scale, "var_gamma_last.scale");
    require_positive(sd_upsilon_scale, "sd_upsilon.scale");
    require_positive(asg_lambda_scale, "asg.lambda.scale");
    require_positive(asg_log_scale_sd, "asg.log_scale.sd");
    require_positive(asg_mu_sd, "asg.mu.sd");
    require_positive(asg_tau_scale, "asg.tau.scale");
    require_positive(sir_i0_sd, "sir.i0.sd");
    require_positive(sir_i0_upper, "sir.i0.upper");
    require_positive(sir_beta_sd, "sir.beta.sd");
    require_positive(sir_rho_sd, "sir.rho.sd");
    if (!(sir_s0 > 0.0 && sir_s0 < 1.0)) {
        throw InvalidArgumentError("prior config: sir.s0 must lie in (0, 1)");
    }
    if (sir_s0 + sir_i0_upper > 1.0) {
        throw InvalidArgumentError(
            "prior config: sir.s0 + sir.i0.upper must not exceed 1");
    }
}

PriorConfig PriorConfig::parse(std::string_view text, const std::string& origin)
{
    PriorConfig config;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw DataFormatError(origin + ":" + std::to_string(line_no) +
                                  ": expected `key = value`");
        }
        const std::string key   = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));

        bool found = false;
        for (const auto& binding : kBindings) {
            if (key == binding.key) {
                char* end      = nullptr;
                const double v = std::strtod(value.c_str(), &end);
                if (end == value.c_str() || *end != '\0') {
                    throw DataFormatError(origin + ":" + std::to_string(line_no) +
                                          ": bad number `" + value + "` for " + key);
                }
                config.*(binding.field) = v;
                found                   = true;
                break;
            }
        }
        if (!found) {
            throw DataFormatError(origin + ":" + std::to_string(line_no) +
                                  ": unknown key `" + key + "`");
        }
    }
    config.validate();
    return config;
}

PriorConfig PriorConfig::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataFormatError("cannot open prior config: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path);
}

void PriorConfig::save(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) {
        throw DataFormatError("cannot write prior config: " + path);
    }
    char buf[64];
    for (const auto& binding : kBindings) {
        std::snprintf(buf, sizeof buf, "%.17g", this->*(binding.field));
        out << binding.key << " = " << buf << "\n";
    }
    if (!out) {
        throw DataFormatError("failed writing prior config: " + path);
    }
}

} // namespace flucast
