#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "lago/types.hpp"

namespace lago {

/// Symmetric language dissimilarity matrix with per-language labels.
struct DistanceMatrix {
    std::vector<std::string> labels;
    Matrix values;

    std::size_t size() const { return labels.size(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw DataError(context + ": trailing characters in '" + s + "'");
        return v;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        throw DataError(context + ": cannot parse '" + s + "' as a number");
    }
}

} // namespace detail

/// Validate invariants and symmetrize within tolerance.
///
/// Asymmetries up to 1e-9 (absolute) are averaged away as (M + M^T)/2;
/// anything larger is rejected.
inline DistanceMatrix validate_distance_matrix(DistanceMatrix d) {
    constexpr double kSymTol = 1e-9;
    const auto n = static_cast<Eigen::Index>(d.labels.size());
    if (d.values.rows() != n || d.values.cols() != n)
        throw DataError("distance matrix is not square against its labels");

    std::unordered_set<std::string> seen;
    for (const auto& l : d.labels) {
        if (l.empty()) throw DataError("empty language label");
        if (!seen.insert(l).second) throw DataError("duplicate language label '" + l + "'");
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = d.values(i, j);
            if (!std::isfinite(v))
                throw DataError("non-finite distance at (" + d.labels[i] + ", " + d.labels[j] + ")");
            if (v < 0.0)
                throw DataError("negative distance at (" + d.labels[i] + ", " + d.labels[j] + ")");
        }
        if (d.values(i, i) != 0.0)
            throw DataError("nonzero self-distance for '" + d.labels[i] + "'");
    }

    const double asym = (d.values - d.values.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymTol) {
        std::ostringstream msg;
        msg << "distance matrix asymmetry " << asym << " exceeds tolerance " << kSymTol;
        throw DataError(msg.str());
    }
    d.values = ((d.values + d.values.transpose()) / 2.0).eval();
    return d;
}

/// Parse a distance matrix in CSV form.
///
/// First row: language codes (an optional empty corner cell is ignored).
/// Each following row: `code, v1, ..., vN`, with row codes in header order.
inline DistanceMatrix load_distance_matrix(std::istream& in) {
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!detail::trim(line).empty()) lines.push_back(line);
    }
    if (lines.empty()) throw DataError("empty distance matrix input");

    auto header = detail::split_csv_line(lines.front());
    if (!header.empty() && header.front().empty()) header.erase(header.begin());
    if (header.empty()) throw DataError("distance matrix header has no labels");
    const std::size_t n = header.size();

    if (lines.size() - 1 != n)
        throw DataError("distance matrix is not square: " + std::to_string(n) +
                        " labels but " + std::to_string(lines.size() - 1) + " rows");

    DistanceMatrix d;
    d.labels = header;
    d.values = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto fields = detail::split_csv_line(lines[i + 1]);
        if (fields.size() != n + 1)
            throw DataError("row " + std::to_string(i + 1) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(n + 1));
        if (fields.front() != header[i])
            throw DataError("row label '" + fields.front() + "' does not match header '" +
                            header[i] + "'");
        for (std::size_t j = 0; j < n; ++j)
            d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                detail::parse_double(fields[j + 1], "row '" + header[i] + "'");
    }
    return validate_distance_matrix(std::move(d));
}

inline DistanceMatrix load_distance_matrix(const std::string& csv_text) {
    std::istringstream in(csv_text);
    return load_distance_matrix(in);
}

inline DistanceMatrix load_distance_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open distance matrix file '" + path + "'");
    return load_distance_matrix(in);
}

} // namespace lago
