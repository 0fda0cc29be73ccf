#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fp8ann/dataset.hpp"
#include "fp8ann/quantizer.hpp"

namespace fp8ann {

/// One inverted list: ids ascending, codes stored back to back (s bytes each).
struct InvertedList {
    std::vector<std::uint64_t> ids;
    std::vector<std::uint8_t> codes;

    std::size_t size() const { return ids.size(); }

    friend bool operator==(const InvertedList&, const InvertedList&) = default;
};

struct IvfPqIndex {
    std::size_t d = 0;
    std::size_t nlist = 0;
    std::uint64_t ntotal = 0;
    VectorSet coarse;
    PQCodebook cb;
    std::vector<InvertedList> lists;

    std::span<const std::uint8_t> code(std::size_t list, std::size_t pos) const {
        return {lists[list].codes.data() + pos * cb.s, cb.s};
    }

    friend bool operator==(const IvfPqIndex&, const IvfPqIndex&) = default;
};

/// Coarse k-means, residuals, PQ training (one global codebook over all
/// residuals) and encoding of every row.
IvfPqIndex build_index(const VectorSet& data, std::size_t nlist, std::size_t s, std::size_t p, std::uint64_t seed);

/// Throws std::invalid_argument describing the first broken invariant.
void validate(const IvfPqIndex& idx);

// Binary layout, little-endian:
//   "IVFPQ001" | u32 d, nlist, s, p, sub_d | u64 N
//   | f32 coarse[nlist][d] | f32 codebook[s][2^p][sub_d]
//   | per list: u64 length, u64 ids[length], u8 codes[length][s]
std::vector<std::uint8_t> serialize_index(const IvfPqIndex& idx);
IvfPqIndex deserialize_index(std::span<const std::uint8_t> bytes);

void save_index(const IvfPqIndex& idx, const std::filesystem::path& path);
IvfPqIndex load_index(const std::filesystem::path& path);

}  // namespace fp8ann
