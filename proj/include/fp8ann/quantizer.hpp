#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fp8ann/dataset.hpp"

namespace fp8ann {

struct KMeansParams {
    std::size_t k = 1;
    std::size_t max_iters = 25;
    std::uint64_t seed = 0;
    float tol = 1e-4f;  // stop when max centroid shift / centroid norm < tol
};

struct KMeansResult {
    VectorSet centroids;
    std::vector<std::uint32_t> assignments;
    /// Within-cluster sum of squares after each assignment pass.
    std::vector<double> objective;
    std::size_t iterations = 0;
};

/// Lloyd iterations from k-means++ seeding. Every returned centroid owns at
/// least one point: an emptied cluster takes over the point farthest from its
/// current centroid.
KMeansResult kmeans(const VectorSet& data, const KMeansParams& params);

/// Index of the nearest centroid (squared L2, lower index on ties).
std::uint32_t nearest_centroid(std::span<const float> x, const VectorSet& centroids);

/// Coarse quantizer: kmeans with max_iters = 25, tol = 1e-4.
VectorSet train_coarse(const VectorSet& data, std::size_t nlist, std::uint64_t seed);

VectorSet compute_residuals(const VectorSet& data, const VectorSet& centroids,
                            std::span<const std::uint32_t> assignments);

/// s subspaces of sub_d contiguous dimensions, each with 2^p sub-centroids.
/// centers layout is [subspace][code][dim].
struct PQCodebook {
    std::size_t s = 0;
    std::size_t p = 0;
    std::size_t sub_d = 0;
    std::vector<float> centers;

    std::size_t ksub() const { return std::size_t{1} << p; }
    std::size_t d() const { return s * sub_d; }

    std::span<const float> center(std::size_t subspace, std::size_t code) const {
        return {centers.data() + (subspace * ksub() + code) * sub_d, sub_d};
    }
    std::span<float> center(std::size_t subspace, std::size_t code) {
        return {centers.data() + (subspace * ksub() + code) * sub_d, sub_d};
    }

    friend bool operator==(const PQCodebook&, const PQCodebook&) = default;
};

/// Seed used for the k-means run of subspace `j` inside train_pq.
std::uint64_t subspace_seed(std::uint64_t seed, std::size_t j);

/// Rows [.., j*sub_d, (j+1)*sub_d) of `data` as their own VectorSet.
VectorSet subspace_slice(const VectorSet& data, std::size_t j, std::size_t sub_d);

PQCodebook train_pq(const VectorSet& residuals, std::size_t s, std::size_t p, std::uint64_t seed);

/// Writes s code bytes into `code`.
void pq_encode(std::span<const float> residual, const PQCodebook& cb, std::span<std::uint8_t> code);
std::vector<std::uint8_t> pq_encode(std::span<const float> residual, const PQCodebook& cb);

/// Concatenated sub-centroids selected by `code`.
std::vector<float> pq_decode(std::span<const std::uint8_t> code, const PQCodebook& cb);

}  // namespace fp8ann
