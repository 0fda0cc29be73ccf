#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "fp8ann/dataset.hpp"

namespace fp8ann::testing {

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("fp8ann_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void append_bytes(std::ofstream& out, const std::vector<std::uint8_t>& bytes) {
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}
template <typename T>
void append_bytes(std::ofstream& out, const std::vector<T>& values) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(T)));
}

/// Concatenates raw byte/float/int vectors into a file.
template <typename... Parts>
void write_raw(const std::filesystem::path& path, const Parts&... parts) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    (append_bytes(out, parts), ...);
}
inline void write_raw(const std::filesystem::path& path, std::initializer_list<std::uint8_t> header) {
    write_raw(path, std::vector<std::uint8_t>(header));
}
template <typename T>
void write_raw(const std::filesystem::path& path, std::initializer_list<std::uint8_t> h1, const std::vector<T>& p1) {
    write_raw(path, std::vector<std::uint8_t>(h1), p1);
}
template <typename T, typename U>
void write_raw(const std::filesystem::path& path, std::initializer_list<std::uint8_t> h1, const std::vector<T>& p1,
               std::initializer_list<std::uint8_t> h2, const std::vector<U>& p2) {
    write_raw(path, std::vector<std::uint8_t>(h1), p1, std::vector<std::uint8_t>(h2), p2);
}

/// Greedy matching of estimated to true centres: repeatedly pair the closest
/// unmatched (estimate, truth) couple; counts pairs within `radius` (L2).
inline std::size_t count_matched_means(const VectorSet& estimated, const VectorSet& truth, double radius) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < estimated.n; ++a) {
        for (std::size_t b = 0; b < truth.n; ++b) {
            double dist = 0.0;
            for (std::size_t j = 0; j < truth.d; ++j) {
                const double diff = static_cast<double>(estimated.row(a)[j]) - truth.row(b)[j];
                dist += diff * diff;
            }
            pairs.emplace_back(std::sqrt(dist), a, b);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> used_a(estimated.n), used_b(truth.n);
    std::size_t matched = 0;
    for (const auto& [dist, a, b] : pairs) {
        if (used_a[a] || used_b[b]) {
            continue;
        }
        used_a[a] = used_b[b] = true;
        if (dist <= radius) {
            ++matched;
        }
    }
    return matched;
}

}  // namespace fp8ann::testing
