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
#include "flucast/calendar.hpp"

#include "flucast/errors.hpp"

#include <cstdio>

namespace flucast {

namespace {

using std::chrono::days;
using std::chrono::sys_days;
using std::chrono::weekday;
using std::chrono::year_month_day;

sys_days first_sunday_on_or_after(sys_days day)
{
    const weekday wd{day};
    const auto offset = (std::chrono::Sunday - wd).count();
    return day + days{offset};
}

} // namespace

sys_days season_start(int season)
{
    const sys_days aug1 = year_month_day{std::chrono::year{season}, std::chrono::August,
                                         std::chrono::day{1}};
    return first_sunday_on_or_after(aug1);
}

int weeks_in_season(int season)
{
    const auto span = season_start(season + 1) - season_start(season);
    return static_cast<int>(span.count() / 7);
}

sys_days sunday_of(SeasonWeek sw)
{
    if (sw.week < 1 || sw.week > weeks_in_season(sw.season)) {
        throw InvalidArgumentError("sunday_of: week " + std::to_string(sw.week) +
                                   " outside season " + std::to_string(sw.season));
    }
    return season_start(sw.season) + days{7 * (sw.week - 1)};
}

SeasonWeek season_week_of(sys_days day)
{
    const year_month_day ymd{day};
    int season = static_cast<int>(ymd.year());
    if (day < season_start(season)) {
        --season;
    }
    const auto elapsed = (day - season_start(season)).count();
    return SeasonWeek{season, static_cast<int>(elapsed / 7) + 1};
}

sys_days mmwr_sunday(int year, int week)
{
    if (week < 1 || week > 53) {
        throw InvalidArgumentError("mmwr_sunday: week out of range");
    }
    const sys_days jan4 = year_month_day{std::chrono::year{year}, std::chrono::January,
                                         std::chrono::day{4}};
    const weekday wd{jan4};
    const sys_days week1 = jan4 - days{(wd - std::chrono::Sunday).count()};
    return week1 + days{7 * (week - 1)};
}

SeasonWeek season_week_of_epiweek(int year, int week)
{
    return season_week_of(mmwr_sunday(year, week));
}

SeasonWeekGrid build_grid(int season)
{
    SeasonWeekGrid grid;
    grid.season    = season;
    grid.num_weeks = weeks_in_season(season);
    grid.week_start_dates.reserve(static_cast<std::size_t>(grid.num_weeks));
    const sys_days start = season_start(season);
    for (int w = 0; w < grid.num_weeks; ++w) {
        grid.week_start_dates.push_back(start + days{7 * w});
    }
    return grid;
}

int week_of_date(const SeasonWeekGrid& grid, sys_days date)
{
    const sys_days start = grid.week_start_dates.front();
    const auto elapsed   = (date - start).count();
    if (elapsed < 0 || elapsed >= 7LL * grid.num_weeks) {
        throw InvalidArgumentError("week_of_date: " + format_date(date) +
                                   " outside season " + std::to_string(grid.season));
    }
    return static_cast<int>(elapsed / 7) + 1;
}

sys_days parse_date(const std::string& text)
{
    int y = 0, m = 0, d = 0;
    char tail = '\0';
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3) {
        throw DataFormatError("malformed date: '" + text + "'");
    }
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                             std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) {
        throw DataFormatError("invalid calendar date: '" + text + "'");
    }
    return sys_days{ymd};
}

std::string format_date(sys_days day)
{
    const year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

} // namespace flucast
