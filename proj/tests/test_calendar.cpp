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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "flucast/calendar.hpp"
#include "flucast/errors.hpp"

using namespace flucast;
using std::chrono::days;
using std::chrono::sys_days;
using std::chrono::weekday;
using std::chrono::year_month_day;

namespace {

sys_days ymd(int y, unsigned m, unsigned d)
{
    return sys_days{year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                   std::chrono::day{d}}};
}

} // namespace

TEST_CASE("season length matches the known 53-week seasons")
{
    CHECK(weeks_in_season(2010) == 53);
    CHECK(weeks_in_season(2015) == 53);
    CHECK(weeks_in_season(2021) == 53);
    CHECK(weeks_in_season(2013) == 52);
    CHECK(weeks_in_season(2020) == 52);
}

TEST_CASE("week 1 starts on a Sunday within the first seven days of August")
{
    for (int season = 1990; season <= 2035; ++season) {
        const sys_days start = season_start(season);
        CHECK(weekday{start} == std::chrono::Sunday);
        const year_month_day date{start};
        CHECK(static_cast<int>(date.year()) == season);
        CHECK(static_cast<unsigned>(date.month()) == 8u);
        CHECK(static_cast<unsigned>(date.day()) >= 1u);
        CHECK(static_cast<unsigned>(date.day()) <= 7u);
        const int w = weeks_in_season(season);
        CHECK((w == 52 || w == 53));
    }
}

TEST_CASE("seasons tile the calendar with no gap or overlap")
{
    for (int season = 2005; season <= 2030; ++season) {
        const sys_days last = sunday_of({season, weeks_in_season(season)});
        CHECK(last + days{7} == season_start(season + 1));
    }
}

TEST_CASE("season week round-trips through dates")
{
    for (int season : {2013, 2015, 2023}) {
        for (int week = 1; week <= weeks_in_season(season); ++week) {
            const SeasonWeek sw{season, week};
            const sys_days sunday = sunday_of(sw);
            CHECK(season_week_of(sunday) == sw);
            // Any day inside Sunday..Saturday maps back to the same week.
            CHECK(season_week_of(sunday + days{3}) == sw);
            CHECK(season_week_of(sunday + days{6}) == sw);
        }
    }
}

TEST_CASE("known calendar anchors")
{
    // August 1 2010 was itself a Sunday.
    CHECK(season_start(2010) == ymd(2010, 8, 1));
    CHECK(season_start(2015) == ymd(2015, 8, 2));
    CHECK(season_start(2023) == ymd(2023, 8, 6));

    // The last week of a 53-week season reaches into late July.
    CHECK(sunday_of({2015, 53}) == ymd(2016, 7, 31));
    CHECK(season_week_of(ymd(2016, 7, 31)) == SeasonWeek{2015, 53});
    CHECK(season_week_of(ymd(2016, 8, 6)) == SeasonWeek{2015, 53});
    CHECK(season_week_of(ymd(2016, 8, 7)) == SeasonWeek{2016, 1});
}

TEST_CASE("week bounds are enforced")
{
    CHECK_THROWS_AS((void)sunday_of({2015, 0}), InvalidArgumentError);
    CHECK_THROWS_AS((void)sunday_of({2015, 54}), InvalidArgumentError);
    CHECK_THROWS_AS((void)sunday_of({2013, 53}), InvalidArgumentError);
    CHECK_NOTHROW((void)sunday_of({2013, 52}));
}

TEST_CASE("MMWR weeks anchor on the Sunday on or before January 4")
{
    // January 4 2024 fell on a Thursday, so week 1 started December 31 2023.
    CHECK(mmwr_sunday(2024, 1) == ymd(2023, 12, 31));
    // January 1 2023 was a Sunday and January 4 a Wednesday.
    CHECK(mmwr_sunday(2023, 1) == ymd(2023, 1, 1));
    CHECK(mmwr_sunday(2023, 40) == ymd(2023, 10, 1));
    CHECK_THROWS_AS((void)mmwr_sunday(2023, 0), InvalidArgumentError);
    CHECK_THROWS_AS((void)mmwr_sunday(2023, 54), InvalidArgumentError);
}

TEST_CASE("epiweeks map onto the season grid")
{
    CHECK(season_week_of_epiweek(2023, 40) == SeasonWeek{2023, 9});
    // The turn of the year stays inside the season that began the prior August.
    CHECK(season_week_of_epiweek(2024, 1) == SeasonWeek{2023, 22});
}

TEST_CASE("materialized grids list one Sunday per week")
{
    for (int season : {2013, 2015}) {
        const SeasonWeekGrid grid = build_grid(season);
        CHECK(grid.season == season);
        CHECK(grid.num_weeks == weeks_in_season(season));
        CHECK(grid.week_start_dates.size() == static_cast<std::size_t>(grid.num_weeks));
        for (int w = 1; w <= grid.num_weeks; ++w) {
            const auto date = grid.week_start_dates[static_cast<std::size_t>(w - 1)];
            CHECK(weekday{date} == std::chrono::Sunday);
            CHECK(week_of_date(grid, date) == w);
            if (w > 1) {
                CHECK(date - grid.week_start_dates[static_cast<std::size_t>(w - 2)] ==
                      days{7});
            }
        }
    }
    CHECK(build_grid(2013).num_weeks == 52);
    CHECK(build_grid(2015).num_weeks == 53);
    CHECK(build_grid(2021).num_weeks == 53);
}

TEST_CASE("grid lookup handles boundaries and rejects outside dates")
{
    const SeasonWeekGrid grid = build_grid(2013);
    const auto first          = grid.week_start_dates.front();
    CHECK(week_of_date(grid, first) == 1);
    CHECK(week_of_date(grid, first + days{6}) == 1);
    CHECK(week_of_date(grid, first + days{7}) == 2);
    CHECK_THROWS_AS((void)week_of_date(grid, first - days{1}), InvalidArgumentError);
    CHECK_THROWS_AS((void)week_of_date(grid, first + days{7 * 52}), InvalidArgumentError);
}

TEST_CASE("ISO dates parse and format")
{
    CHECK(parse_date("2023-10-01") == ymd(2023, 10, 1));
    CHECK(format_date(ymd(2023, 10, 1)) == "2023-10-01");
    CHECK(format_date(parse_date("1999-02-28")) == "1999-02-28");
    CHECK_THROWS_AS((void)parse_date("2023/10/01"), DataFormatError);
    CHECK_THROWS_AS((void)parse_date("2023-02-30"), DataFormatError);
    CHECK_THROWS_AS((void)parse_date("not a date"), DataFormatError);
}
