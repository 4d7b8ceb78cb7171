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
#include "flucast/locations.hpp"

#include "flucast/csv.hpp"
#include "flucast/errors.hpp"

#include <array>
#include <utility>

namespace flucast {

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 53> kPostal{{
    {"AL", "Alabama"},        {"AK", "Alaska"},         {"AZ", "Arizona"},
    {"AR", "Arkansas"},       {"CA", "California"},     {"CO", "Colorado"},
    {"CT", "Connecticut"},    {"DE", "Delaware"},       {"DC", "District of Columbia"},
    {"FL", "Florida"},        {"GA", "Georgia"},        {"HI", "Hawaii"},
    {"ID", "Idaho"},          {"IL", "Illinois"},       {"IN", "Indiana"},
    {"IA", "Iowa"},           {"KS", "Kansas"},         {"KY", "Kentucky"},
    {"LA", "Louisiana"},      {"ME", "Maine"},          {"MD", "Maryland"},
    {"MA", "Massachusetts"},  {"MI", "Michigan"},       {"MN", "Minnesota"},
    {"MS", "Mississippi"},    {"MO", "Missouri"},       {"MT", "Montana"},
    {"NE", "Nebraska"},       {"NV", "Nevada"},         {"NH", "New Hampshire"},
    {"NJ", "New Jersey"},     {"NM", "New Mexico"},     {"NY", "New York"},
    {"NC", "North Carolina"}, {"ND", "North Dakota"},   {"OH", "Ohio"},
    {"OK", "Oklahoma"},       {"OR", "Oregon"},         {"PA", "Pennsylvania"},
    {"RI", "Rhode Island"},   {"SC", "South Carolina"}, {"SD", "South Dakota"},
    {"TN", "Tennessee"},      {"TX", "Texas"},          {"UT", "Utah"},
    {"VT", "Vermont"},        {"VA", "Virginia"},       {"WA", "Washington"},
    {"WV", "West Virginia"},  {"WI", "Wisconsin"},      {"WY", "Wyoming"},
    {"PR", "Puerto Rico"},    {"US", "United States"},
}};

} // namespace

std::string_view postal_to_name(std::string_view abbr)
{
    const std::string upper = to_upper(trim(abbr));
    for (const auto& [code, name] : kPostal) {
        if (code == upper) {
            return name;
        }
    }
    return {};
}

LocationRegistry LocationRegistry::from_csv(const std::string& path)
{
    const CsvTable table = CsvTable::read_file(path);
    const auto code_col  = table.require_column("code");
    const auto name_col  = table.require_column("name");
    const auto pop_col   = table.require_column("population");

    LocationRegistry registry;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        Location loc;
        loc.code = trim(table.cell(i, code_col));
        loc.name = trim(table.cell(i, name_col));
        try {
            loc.population = std::stod(table.cell(i, pop_col));
        } catch (const std::exception&) {
            throw DataFormatError(path + ": bad population for location '" + loc.code + "'");
        }
        if (loc.code.empty() || loc.population <= 0.0) {
            throw DataFormatError(path + ": row " + std::to_string(i + 2) +
                                  " has an empty code or non-positive population");
        }
        registry.add(std::move(loc));
    }
    return registry;
}

void LocationRegistry::add(Location loc)
{
    locations_.push_back(std::move(loc));
}

const Location* LocationRegistry::find(std::string_view key) const
{
    const std::string trimmed = trim(key);
    const std::string upper   = to_upper(trimmed);
    const std::string lower   = to_lower(trimmed);

    for (const auto& loc : locations_) {
        if (to_upper(loc.code) == upper) {
            return &loc;
        }
    }
    // Postal abbreviations and full names as fallbacks: data feeds disagree
    // on how they label jurisdictions.
    std::string_view postal_name = postal_to_name(upper);
    for (const auto& loc : locations_) {
        const std::string loc_name = to_lower(loc.name);
        if (loc_name == lower) {
            return &loc;
        }
        if (!postal_name.empty() && loc_name == to_lower(postal_name)) {
            return &loc;
        }
    }
    return nullptr;
}

const Location& LocationRegistry::require(std::string_view key) const
{
    if (const Location* loc = find(key)) {
        return *loc;
    }
    throw DataFormatError("unknown location: '" + std::string(key) + "'");
}

} // namespace flucast
