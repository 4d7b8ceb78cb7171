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
#ifndef FLUCAST_LOCATIONS_HPP
#define FLUCAST_LOCATIONS_HPP

#include <string>
#include <string_view>
#include <vector>

namespace flucast {

/// Reporting jurisdiction with its census population.
struct Location {
    std::string code; // two-digit FIPS code, or "US" for national
    std::string name;
    double population = 0.0;

    /// Population divisor used to put locations on a per-50k scale.
    double pop_scale() const { return population / 50000.0; }
};

/**
 * Lookup table of locations keyed by code, postal abbreviation, or name
 * (all case-insensitive).
 */
class LocationRegistry {
public:
    /// Load from a CSV with header `code,name,population`.
    static LocationRegistry from_csv(const std::string& path);

    void add(Location loc);

    /// nullptr when the key is unknown.
    const Location* find(std::string_view key) const;

    /// Throws DataFormatError when the key is unknown.
    const Location& require(std::string_view key) const;

    const std::vector<Location>& all() const { return locations_; }

private:
    std::vector<Location> locations_;
};

/// Full jurisdiction name for a USPS abbreviation, or empty when unknown.
std::string_view postal_to_name(std::string_view abbr);

} // namespace flucast

#endif // FLUCAST_LOCATIONS_HPP
