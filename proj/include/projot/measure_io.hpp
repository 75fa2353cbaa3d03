#pragma once

// Point-cloud files.
//   CSV : one point per row, columns are coordinates; an optional header row
//         whose last column is named `weight` marks a weight column.
//   JSON: {"dim": d, "points": [[...], ...], "weights": [...]}
// Missing weights mean uniform weights.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "measures.hpp"

namespace projot {

namespace detail {

inline std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

inline bool parse_double(const std::string& field, double& out)
{
    if (field.empty())
        return false;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (*first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ','))
        out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

inline std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace detail

inline DiscreteMeasure read_measure_csv(std::istream& in)
{
    std::string line;
    std::size_t columns = 0;
    bool header_seen = false;
    bool has_weight = false;
    std::size_t line_no = 0;
    std::vector<double> coords, weights;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        const auto fields = detail::split_csv(t);
        std::vector<double> values(fields.size());
        bool numeric = true;
        for (std::size_t k = 0; k < fields.size(); ++k)
            numeric = numeric && detail::parse_double(fields[k], values[k]);
        if (!numeric) {
            if (header_seen || rows > 0)
                throw Error(ErrorCode::ParseError, "non-numeric field on line " + std::to_string(line_no));
            header_seen = true;
            columns = fields.size();
            has_weight = detail::lower(fields.back()) == "weight";
            continue;
        }
        if (columns == 0)
            columns = fields.size();
        if (fields.size() != columns)
            throw Error(ErrorCode::ParseError, "inconsistent column count on line " + std::to_string(line_no));
        const std::size_t dim = has_weight ? columns - 1 : columns;
        if (dim == 0)
            throw Error(ErrorCode::ParseError, "no coordinate columns");
        coords.insert(coords.end(), values.begin(), values.begin() + static_cast<std::ptrdiff_t>(dim));
        if (has_weight)
            weights.push_back(values.back());
        ++rows;
    }
    if (rows == 0)
        throw Error(ErrorCode::EmptySupport, "no points in CSV input");
    const std::size_t dim = has_weight ? columns - 1 : columns;
    if (!has_weight)
        weights.assign(rows, 1.0 / static_cast<double>(rows));
    return DiscreteMeasure(dim, std::move(coords), std::move(weights));
}

inline DiscreteMeasure measure_from_json(const nlohmann::json& j)
{
    try {
        const auto& pts = j.at("points");
        if (!pts.is_array() || pts.empty())
            throw Error(ErrorCode::EmptySupport, "no points in JSON input");
        const std::size_t dim = j.contains("dim") ? j.at("dim").get<std::size_t>() : pts.front().size();
        std::vector<double> coords;
        coords.reserve(dim * pts.size());
        for (const auto& p : pts) {
            if (!p.is_array() || p.size() != dim)
                throw Error(ErrorCode::DimensionMismatch, "point does not have dim coordinates");
            for (const auto& c : p)
                coords.push_back(c.get<double>());
        }
        std::vector<double> weights;
        if (j.contains("weights") && !j.at("weights").is_null())
            weights = j.at("weights").get<std::vector<double>>();
        else
            weights.assign(pts.size(), 1.0 / static_cast<double>(pts.size()));
        if (weights.size() != pts.size())
            throw Error(ErrorCode::DimensionMismatch, "weights and points differ in length");
        return DiscreteMeasure(dim, std::move(coords), std::move(weights));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

inline DiscreteMeasure read_measure_json(std::istream& in)
{
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    return measure_from_json(j);
}

/// Dispatches on extension: `.json` is JSON, anything else CSV.
inline DiscreteMeasure load_measure(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot open " + path);
    const bool is_json = path.size() >= 5 && detail::lower(path.substr(path.size() - 5)) == ".json";
    return is_json ? read_measure_json(in) : read_measure_csv(in);
}

inline nlohmann::json measure_to_json(const DiscreteMeasure& mu)
{
    nlohmann::json pts = nlohmann::json::array();
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const auto p = mu.point(i);
        pts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    return {{"dim", mu.dim()},
            {"points", std::move(pts)},
            {"weights", std::vector<double>(mu.weights().begin(), mu.weights().end())}};
}

/// Writes a header row and a weight column, 17 significant digits.
inline void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu)
{
    const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t k = 0; k < mu.dim(); ++k)
        out << 'x' << k << ',';
    out << "weight\n";
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (double c : mu.point(i))
            out << c << ',';
        out << mu.weight(i) << '\n';
    }
    out.precision(old_prec);
}

} // namespace projot
