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
#ifndef FLUCAST_CALENDAR_HPP
#define FLUCAST_CALENDAR_HPP

#include <chrono>
#include <vector>
#include <string>

namespace flucast {

/**
 * Position on the influenza-season week grid.
 *
 * A season is labeled by the calendar year in which it begins. Week 1 is the
 * week starting on the first Sunday in August of that year; weeks run
 * Sunday through Saturday, and a season has 52 or 53 weeks depending on how
 * the Sundays fall.
 */
struct SeasonWeek {
    int season = 0;
    int week   = 0; // 1-based

    friend bool operator==(const SeasonWeek&, const SeasonWeek&) = default;
};

/// Sunday that starts week 1 of `season` (first Sunday in August).
std::chrono::sys_days season_start(int season);

/// Number of weeks in `season` (52 or 53).
int weeks_in_season(int season);

/// Sunday that starts the given season week. Throws InvalidArgumentError if out of range.
std::chrono::sys_days sunday_of(SeasonWeek sw);

/// Season week whose Sunday..Saturday window contains `day`.
SeasonWeek season_week_of(std::chrono::sys_days day);

/**
 * Sunday starting MMWR epidemiological week `week` of `year`. MMWR week 1 is
 * the week containing January 4, i.e. it starts on the Sunday on or before
 * January 4.
 */
std::chrono::sys_days mmwr_sunday(int year, int week);

/// Season week corresponding to an MMWR (year, week) label.
SeasonWeek season_week_of_epiweek(int year, int week);

/// Materialized week grid for one season.
struct SeasonWeekGrid {
    int season    = 0;
    int num_weeks = 0;
    std::vector<std::chrono::sys_days> week_start_dates; // Sundays, one per week
};

SeasonWeekGrid build_grid(int season);

/// 1-based week whose Sunday..Saturday window contains `date`.
/// Throws InvalidArgumentError when the date falls outside the season.
int week_of_date(const SeasonWeekGrid& grid, std::chrono::sys_days date);

/// Parse an ISO "YYYY-MM-DD" date. Throws DataFormatError on malformed input.
std::chrono::sys_days parse_date(const std::string& text);

/// Format a date as ISO "YYYY-MM-DD".
std::string format_date(std::chrono::sys_days day);

} // namespace flucast

#endif // FLUCAST_CALENDAR_HPP
