#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fp8ann {

/// Dense row-major n x d float vectors. Used for base data, queries and
/// centroids alike.
struct VectorSet {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<float> data;

    VectorSet() = default;
    VectorSet(std::size_t rows, std::size_t dim) : n(rows), d(dim), data(rows * dim, 0.0f) {}

    std::span<const float> row(std::size_t i) const { return {data.data() + i * d, d}; }
    std::span<float> row(std::size_t i) { return {data.data() + i * d, d}; }

    friend bool operator==(const VectorSet&, const VectorSet&) = default;
};

/// q rows of k neighbor ids. Missing slots (short result rows) hold -1 and an
/// infinite distance. `distances` is either empty or q * k long.
struct NeighborLists {
    std::size_t q = 0;
    std::size_t k = 0;
    std::vector<std::int64_t> ids;
    std::vector<float> distances;

    NeighborLists() = default;
    NeighborLists(std::size_t rows, std::size_t per_row, bool with_distances = true);

    std::span<const std::int64_t> ids_row(std::size_t i) const { return {ids.data() + i * k, k}; }
    std::span<std::int64_t> ids_row(std::size_t i) { return {ids.data() + i * k, k}; }
    std::span<const float> distances_row(std::size_t i) const { return {distances.data() + i * k, k}; }
    std::span<float> distances_row(std::size_t i) { return {distances.data() + i * k, k}; }
};

/// Squared L2 distance, accumulated sequentially over dimensions in float.
inline float l2_sqr(std::span<const float> a, std::span<const float> b) {
    float sum = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const float diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

// Container formats: every record is an int32 dimension followed by that many
// float32 / uint8 / int32 values, little-endian. An empty file yields n = 0 and
// d = 0 with a warning on stderr.
VectorSet read_fvecs(const std::filesystem::path& path);
VectorSet read_bvecs(const std::filesystem::path& path);
NeighborLists read_ivecs(const std::filesystem::path& path);

void write_fvecs(const std::filesystem::path& path, const VectorSet& vs);
/// Writes ids only; ids must fit in int32.
void write_ivecs(const std::filesystem::path& path, const NeighborLists& nl);

/// Reads fvecs or bvecs depending on the file extension.
VectorSet read_vectors(const std::filesystem::path& path);

struct GaussianMixture {
    VectorSet points;
    VectorSet means;
    std::vector<std::uint32_t> component;  // generating component per point
};

/// Means uniform in [0,1)^d, isotropic noise with standard deviation `spread`.
/// Deterministic in `seed`.
GaussianMixture synth_gaussian_mixture_with_truth(std::size_t n, std::size_t d, std::size_t n_components,
                                                  float spread, std::uint64_t seed);
VectorSet synth_gaussian_mixture(std::size_t n, std::size_t d, std::size_t n_components, float spread,
                                 std::uint64_t seed);

/// Exact k nearest neighbors by squared L2; ties go to the smaller id.
NeighborLists brute_force_knn(const VectorSet& base, const VectorSet& queries, std::size_t k);

}  // namespace fp8ann
