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
#ifndef FLUCAST_CSV_HPP
#define FLUCAST_CSV_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flucast {

/// Split one CSV record; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

std::string trim(std::string_view text);

std::string to_lower(std::string_view text);

std::string to_upper(std::string_view text);

/// Lowercase with everything except [a-z0-9] removed; used to match headers.
std::string normalize_header(std::string_view name);

/// Parsed CSV file: a header row plus data rows.
class CsvTable {
public:
    /// Throws DataFormatError when the file is missing or has no header.
    static CsvTable read_file(const std::string& path);

    /// Parse from an in-memory string (same format as a file).
    static CsvTable parse(std::string_view text, std::string origin = "<string>");

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }
    const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }

    /// Column index whose normalized header equals `normalize_header(name)`.
    std::optional<std::size_t> column(std::string_view name) const;

    /// Like column(), but throws DataFormatError naming the file when absent.
    std::size_t require_column(std::string_view name) const;

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace flucast

#endif // FLUCAST_CSV_HPP
