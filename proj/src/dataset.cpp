#include "fp8ann/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace fp8ann {

static_assert(std::endian::native == std::endian::little, "vecs I/O assumes a little-endian host");

NeighborLists::NeighborLists(std::size_t rows, std::size_t per_row, bool with_distances)
    : q(rows), k(per_row), ids(rows * per_row, -1) {
    if (with_distances) {
        distances.assign(rows * per_row, std::numeric_limits<float>::infinity());
    }
}

namespace {

std::vector<char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Splits a vecs file into records of `elem_size`-byte values. Returns the
// common dimension and the record count.
template <typename Elem, typename Sink>
std::pair<std::size_t, std::size_t> parse_vecs(const std::vector<char>& bytes, const std::filesystem::path& path,
                                               Sink&& sink) {
    if (bytes.empty()) {
        std::cerr << "warning: " << path.string() << " is empty\n";
        return {0, 0};
    }
    std::size_t offset = 0;
    std::int32_t dim = 0;
    std::size_t count = 0;
    while (offset < bytes.size()) {
        if (bytes.size() - offset < sizeof(std::int32_t)) {
            throw std::runtime_error(path.string() + ": truncated record header");
        }
        std::int32_t record_dim = 0;
        std::memcpy(&record_dim, bytes.data() + offset, sizeof record_dim);
        offset += sizeof record_dim;
        if (record_dim <= 0) {
            throw std::runtime_error(path.string() + ": non-positive dimension " + std::to_string(record_dim));
        }
        if (count == 0) {
            dim = record_dim;
        } else if (record_dim != dim) {
            throw std::runtime_error(path.string() + ": dimension mismatch at record " + std::to_string(count) +
                                     " (" + std::to_string(record_dim) + " vs " + std::to_string(dim) + ")");
        }
        const std::size_t payload = static_cast<std::size_t>(record_dim) * sizeof(Elem);
        if (bytes.size() - offset < payload) {
            throw std::runtime_error(path.string() + ": truncated record " + std::to_string(count));
        }
        for (std::int32_t i = 0; i < record_dim; ++i) {
            Elem value;
            std::memcpy(&value, bytes.data() + offset + i * sizeof(Elem), sizeof(Elem));
            sink(value);
        }
        offset += payload;
        ++count;
    }
    return {static_cast<std::size_t>(dim), count};
}

template <typename Elem>
VectorSet read_float_vecs(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    VectorSet vs;
    vs.data.reserve(bytes.size() / sizeof(Elem));
    const auto [dim, count] = parse_vecs<Elem>(bytes, path, [&](Elem v) {
        const auto f = static_cast<float>(v);
        if (!std::isfinite(f)) {
            throw std::runtime_error(path.string() + ": non-finite value");
        }
        vs.data.push_back(f);
    });
    vs.d = dim;
    vs.n = count;
    return vs;
}

void write_or_throw(std::ofstream& out, const void* src, std::size_t size, const std::filesystem::path& path) {
    out.write(static_cast<const char*>(src), static_cast<std::streamsize>(size));
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

}  // namespace

VectorSet read_fvecs(const std::filesystem::path& path) { return read_float_vecs<float>(path); }

VectorSet read_bvecs(const std::filesystem::path& path) { return read_float_vecs<std::uint8_t>(path); }

NeighborLists read_ivecs(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    NeighborLists nl;
    nl.ids.reserve(bytes.size() / sizeof(std::int32_t));
    const auto [k, count] = parse_vecs<std::int32_t>(bytes, path, [&](std::int32_t v) { nl.ids.push_back(v); });
    nl.k = k;
    nl.q = count;
    return nl;
}

void write_fvecs(const std::filesystem::path& path, const VectorSet& vs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot create " + path.string());
    }
    const auto dim = static_cast<std::int32_t>(vs.d);
    for (std::size_t i = 0; i < vs.n; ++i) {
        write_or_throw(out, &dim, sizeof dim, path);
        write_or_throw(out, vs.row(i).data(), vs.d * sizeof(float), path);
    }
}

void write_ivecs(const std::filesystem::path& path, const NeighborLists& nl) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot create " + path.string());
    }
    const auto k = static_cast<std::int32_t>(nl.k);
    std::vector<std::int32_t> row(nl.k);
    for (std::size_t i = 0; i < nl.q; ++i) {
        const auto ids = nl.ids_row(i);
        for (std::size_t j = 0; j < nl.k; ++j) {
            if (ids[j] < std::numeric_limits<std::int32_t>::min() || ids[j] > std::numeric_limits<std::int32_t>::max()) {
                throw std::out_of_range("id does not fit in ivecs int32");
            }
            row[j] = static_cast<std::int32_t>(ids[j]);
        }
        write_or_throw(out, &k, sizeof k, path);
        write_or_throw(out, row.data(), row.size() * sizeof(std::int32_t), path);
    }
}

VectorSet read_vectors(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".fvecs") {
        return read_fvecs(path);
    }
    if (ext == ".bvecs") {
        return read_bvecs(path);
    }
    throw std::invalid_argument("unsupported vector file extension '" + ext + "' (expected .fvecs or .bvecs)");
}

GaussianMixture synth_gaussian_mixture_with_truth(std::size_t n, std::size_t d, std::size_t n_components,
                                                  float spread, std::uint64_t seed) {
    if (n == 0 || d == 0 || n_components == 0) {
        throw std::invalid_argument("synth_gaussian_mixture: n, d and n_components must be positive");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> unit(0.0f, 1.0f);
    std::uniform_int_distribution<std::size_t> pick(0, n_components - 1);
    std::normal_distribution<float> noise(0.0f, 1.0f);

    GaussianMixture mix{VectorSet(n, d), VectorSet(n_components, d), std::vector<std::uint32_t>(n)};
    for (auto& v : mix.means.data) {
        v = unit(rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = pick(rng);
        mix.component[i] = static_cast<std::uint32_t>(c);
        const auto mean = mix.means.row(c);
        auto out = mix.points.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            out[j] = mean[j] + spread * noise(rng);
        }
    }
    return mix;
}

VectorSet synth_gaussian_mixture(std::size_t n, std::size_t d, std::size_t n_components, float spread,
                                 std::uint64_t seed) {
    return synth_gaussian_mixture_with_truth(n, d, n_components, spread, seed).points;
}

NeighborLists brute_force_knn(const VectorSet& base, const VectorSet& queries, std::size_t k) {
    if (base.d != queries.d) {
        throw std::invalid_argument("brute_force_knn: dimension mismatch");
    }
    if (k > base.n) {
        throw std::invalid_argument("brute_force_knn: k exceeds base size");
    }
    NeighborLists out(queries.n, k);
    std::vector<std::pair<float, std::int64_t>> scored(base.n);
    for (std::size_t qi = 0; qi < queries.n; ++qi) {
        const auto query = queries.row(qi);
        for (std::size_t i = 0; i < base.n; ++i) {
            scored[i] = {l2_sqr(query, base.row(i)), static_cast<std::int64_t>(i)};
        }
        // pair ordering = distance, then id
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end());
        auto ids = out.ids_row(qi);
        auto dists = out.distances_row(qi);
        for (std::size_t j = 0; j < k; ++j) {
            dists[j] = scored[j].first;
            ids[j] = scored[j].second;
        }
    }
    return out;
}

}  // namespace fp8ann
