#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "brainstorm/consensus.hpp"
#include "brainstorm/core.hpp"
#include "brainstorm/pipeline.hpp"
#include "brainstorm/simulator.hpp"

namespace brainstorm {

namespace detail {

inline std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

inline bool parse_number(const std::string& cell, double& out) {
    std::string_view text = cell;
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end && !text.empty();
}

}  // namespace detail

// Prints with 17 significant digits, enough to reparse the exact double.
inline std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

struct CsvReadOptions {
    std::optional<std::string> label_column;
    // When false (query files) a file without an explicit or "label"-named
    // column is read as features only.
    bool require_labels = true;
};

// Header row is mandatory. The label column is the one named by the caller,
// otherwise the last column when labels are required, otherwise a column
// literally named "label" if present. Rows and columns in error messages are
// 1-based over the data rows.
inline Dataset parse_dataset_csv(const std::filesystem::path& path,
                                 const CsvReadOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open data file '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<std::string> lines;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw DataError("'" + path.string() + "' is empty; header row required");

    const std::vector<std::string> header = detail::split_csv_line(lines.front());
    for (const std::string& name : header) {
        if (name.empty()) throw DataError("header row contains an empty column name");
    }

    std::optional<std::size_t> label_index;
    if (options.label_column) {
        const auto it = std::find(header.begin(), header.end(), *options.label_column);
        if (it == header.end()) {
            std::string available;
            for (const std::string& name : header) {
                if (!available.empty()) available += ", ";
                available += name;
            }
            throw DataError("label column '" + *options.label_column +
                            "' not found; available columns: " + available);
        }
        label_index = std::size_t(it - header.begin());
    } else if (options.require_labels) {
        label_index = header.size() - 1;
    } else {
        const auto it = std::find_if(header.begin(), header.end(), [](const std::string& name) {
            std::string lower = name;
            std::transform(lower.begin(), lower.end(), lower.begin(),
                           [](unsigned char c) { return char(std::tolower(c)); });
            return lower == "label";
        });
        if (it != header.end()) label_index = std::size_t(it - header.begin());
    }

    Dataset dataset;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!label_index || c != *label_index) dataset.feature_names.push_back(header[c]);
    }
    dataset.dimensionality = dataset.feature_names.size();
    if (dataset.dimensionality == 0) throw DataError("no feature columns in '" + path.string() + "'");

    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        const std::size_t row = i;  // 1-based data row
        const auto cells = detail::split_csv_line(lines[i]);
        if (cells.size() != header.size()) {
            throw DataError("row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        }
        Sample sample;
        sample.features.reserve(dataset.dimensionality);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (label_index && c == *label_index) {
                try {
                    sample.label = parse_label_token(cells[c]);
                } catch (const DataError& e) {
                    throw DataError("row " + std::to_string(row) + ": " + e.what());
                }
                continue;
            }
            double value = 0.0;
            if (!detail::parse_number(cells[c], value)) {
                throw DataError("row " + std::to_string(row) + ", column " +
                                std::to_string(c + 1) + ": '" + cells[c] + "' is not numeric");
            }
            if (!std::isfinite(value)) {
                throw DataError("row " + std::to_string(row) + ", column " +
                                std::to_string(c + 1) + ": non-finite value");
            }
            sample.features.push_back(value);
        }
        dataset.samples.push_back(std::move(sample));
    }
    if (dataset.samples.empty()) throw DataError("'" + path.string() + "' holds no data rows");
    return dataset;
}

inline std::string predictions_to_csv(std::span<const ConsensusResult> results) {
    std::string out = "row,decision,margin,reliability,tie\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const ConsensusResult& r = results[i];
        out += std::to_string(i) + "," + (r.decision.value > 0 ? "1" : "-1") + "," +
               format_double(r.margin) + "," + format_double(r.reliability) + "," +
               (r.tie ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string evaluation_to_csv(const EvaluationReport& report) {
    std::string out = "name,accuracy,precision,recall\n";
    for (const MetricRow& row : report.rows()) {
        out += row.name + "," + format_double(row.accuracy) + "," +
               format_double(row.precision) + "," + format_double(row.recall) + "\n";
    }
    return out;
}

inline std::string sweep_to_csv(const SweepGrid& grid) {
    std::string out = "N,temperature,population,param_a,param_b,accuracy,stderr,trials\n";
    const std::string population(population_kind_name(grid.population.kind));
    for (const SweepCell& cell : grid.cells) {
        out += std::to_string(cell.agent_count) + "," + format_double(cell.temperature) + "," +
               population + "," + format_double(grid.population.a) + "," +
               format_double(grid.population.b) + "," + format_double(cell.accuracy) + "," +
               format_double(cell.standard_error) + "," + std::to_string(cell.trials) + "\n";
    }
    return out;
}

}  // namespace brainstorm
