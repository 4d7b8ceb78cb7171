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
#ifndef FLUCAST_SERIES_HPP
#define FLUCAST_SERIES_HPP

#include "flucast/calendar.hpp"

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace flucast {

/// Whether a stored point came from a data feed or a simulation draw.
enum class Provenance : std::uint8_t { observed = 0, simulated = 1 };

/**
 * One season of weekly values on the season grid. `values[w-1]` holds week w;
 * NaN marks a missing week. The vector always spans the full season, so a
 * partially observed season is a prefix of finite values followed by NaNs.
 */
struct SeasonSeries {
    int season = 0;
    std::vector<double> values;
    std::vector<Provenance> provenance; // empty means every point is observed

    static SeasonSeries empty(int season)
    {
        SeasonSeries s;
        s.season = season;
        s.values.assign(static_cast<std::size_t>(weeks_in_season(season)),
                        std::numeric_limits<double>::quiet_NaN());
        return s;
    }

    int weeks() const { return static_cast<int>(values.size()); }

    bool has(int week) const
    {
        return week >= 1 && week <= weeks() && std::isfinite(values[week - 1]);
    }

    double at(int week) const { return values[week - 1]; }

    /// Largest week with a finite value; 0 when the season is empty.
    int last_observed_week() const
    {
        for (int w = weeks(); w >= 1; --w) {
            if (std::isfinite(values[w - 1])) {
                return w;
            }
        }
        return 0;
    }

    int observed_count() const
    {
        int n = 0;
        for (double v : values) {
            if (std::isfinite(v)) ++n;
        }
        return n;
    }

    Provenance provenance_of(int week) const
    {
        if (provenance.empty()) {
            return Provenance::observed;
        }
        return provenance[static_cast<std::size_t>(week - 1)];
    }

    /// Throws std::out_of_range when `week` leaves the season grid.
    void set(int week, double value, Provenance kind = Provenance::observed)
    {
        values.at(static_cast<std::size_t>(week - 1)) = value;
        if (kind != Provenance::observed && provenance.empty()) {
            provenance.assign(values.size(), Provenance::observed);
        }
        if (!provenance.empty()) {
            provenance[static_cast<std::size_t>(week - 1)] = kind;
        }
    }
};

/// Seasons of one signal for one location, ascending by season.
using SeasonPanel = std::vector<SeasonSeries>;

/// Pointer into `panel` for `season`, or nullptr.
inline const SeasonSeries* find_season(const SeasonPanel& panel, int season)
{
    for (const auto& s : panel) {
        if (s.season == season) {
            return &s;
        }
    }
    return nullptr;
}

inline SeasonSeries* find_season(SeasonPanel& panel, int season)
{
    for (auto& s : panel) {
        if (s.season == season) {
            return &s;
        }
    }
    return nullptr;
}

/// Weekly series for one location (ILI proportions or hospitalization counts).
struct LocationSeries {
    std::string location;
    SeasonPanel seasons;
};

/**
 * One forecast unit: a location, the week the forecast was issued from, and
 * how many weeks ahead it looks (1..4 internally).
 */
struct ForecastTarget {
    std::string location;
    int season         = 0;
    int reference_week = 0; // w*, the last observed week
    int horizon        = 0; // weeks ahead of w*

    /// Season week being predicted.
    int predicted_week() const { return reference_week + horizon; }

    friend auto operator<=>(const ForecastTarget&, const ForecastTarget&) = default;
};

} // namespace flucast

#endif // FLUCAST_SERIES_HPP
