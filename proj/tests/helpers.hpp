#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "brainstorm/core.hpp"
#include "brainstorm/rng.hpp"

namespace test_support {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("brainstorm_" + tag + "_" + std::to_string(++counter));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Two spherical Gaussian classes in `dim` dimensions whose means are
// `separation` apart, balanced, labels -1/+1.
inline brainstorm::Dataset gaussian_task(std::size_t count, std::size_t dim, double separation,
                                         std::uint64_t seed) {
    brainstorm::rng::Stream stream(seed);
    const double offset = separation / (2.0 * std::sqrt(double(dim)));
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    rows.reserve(count);
    labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        std::vector<double> row(dim);
        for (std::size_t f = 0; f < dim; ++f) {
            row[f] = stream.next_gaussian() + label * offset;
        }
        rows.push_back(std::move(row));
        labels.push_back(label);
    }
    return brainstorm::make_dataset(std::move(rows), labels);
}

// Random labeled dataset with continuous features; labels alternate.
inline brainstorm::Dataset random_dataset(std::size_t count, std::size_t dim,
                                          std::uint64_t seed) {
    brainstorm::rng::Stream stream(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> row(dim);
        for (double& v : row) v = stream.next_uniform(-3.0, 3.0);
        rows.push_back(std::move(row));
        labels.push_back(i % 2 == 0 ? 1 : -1);
    }
    return brainstorm::make_dataset(std::move(rows), labels);
}

}  // namespace test_support
