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
#include "flucast/csv.hpp"

#include "flucast/errors.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace flucast {

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string trim(std::string_view text)
{
    std::size_t begin = 0;
    std::size_t end   = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return std::string(text.substr(begin, end - begin));
}

std::string to_lower(std::string_view text)
{
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string to_upper(std::string_view text)
{
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string normalize_header(std::string_view name)
{
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            out.push_back(static_cast<char>(std::tolower(u)));
        }
    }
    return out;
}

CsvTable CsvTable::read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataFormatError("cannot open file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path);
}

CsvTable CsvTable::parse(std::string_view text, std::string origin)
{
    CsvTable table;
    table.origin_ = std::move(origin);

    std::size_t pos  = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos                   = nl + 1;
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_csv_line(line);
        if (!have_header) {
            table.header_ = std::move(fields);
            have_header   = true;
        } else {
            table.rows_.push_back(std::move(fields));
        }
        if (pos > text.size()) break;
    }
    if (!have_header) {
        throw DataFormatError(table.origin_ + ": empty file, expected a CSV header");
    }
    return table;
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const
{
    const std::string wanted = normalize_header(name);
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (normalize_header(header_[i]) == wanted) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t CsvTable::require_column(std::string_view name) const
{
    if (auto idx = column(name)) {
        return *idx;
    }
    throw DataFormatError(origin_ + ": missing required column '" + std::string(name) + "'");
}

} // namespace flucast
