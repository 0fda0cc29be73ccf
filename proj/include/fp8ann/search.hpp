#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fp8ann/dataset.hpp"
#include "fp8ann/index.hpp"
#include "fp8ann/quantizer.hpp"

namespace fp8ann {

/// Storage type of the distance lookup table.
enum class LutPrecision { f32, f16, e5m3, e4m4 };

std::size_t element_bytes(LutPrecision precision);
std::string_view to_string(LutPrecision precision);
std::optional<LutPrecision> parse_precision(std::string_view name);

/// Per-query table of squared sub-distances, s rows of 2^p entries, held in
/// the chosen storage precision. Values are decoded to float on read.
class Lut {
public:
    Lut(std::size_t s, std::size_t ksub, LutPrecision precision);

    std::size_t s() const { return s_; }
    std::size_t ksub() const { return ksub_; }
    LutPrecision precision() const { return precision_; }

    /// Stores `value` (finite, >= 0) after conversion to the storage type.
    void store(std::size_t subspace, std::size_t code, float value);
    float value(std::size_t subspace, std::size_t code) const;

    std::span<const std::uint8_t> raw() const { return bytes_; }

private:
    std::size_t s_;
    std::size_t ksub_;
    LutPrecision precision_;
    std::vector<std::uint8_t> bytes_;
};

struct SearchParams {
    std::size_t k = 10;
    std::size_t nprobe = 1;
    LutPrecision precision = LutPrecision::f32;
};

struct Candidate {
    std::int64_t id;
    float distance;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Total order used for every ranking: distance, then id.
inline bool candidate_less(const Candidate& a, const Candidate& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

struct TopK {
    std::vector<Candidate> items;
    bool short_count = false;  // fewer than k candidates were available
};

/// The nprobe nearest coarse centroids, nearest first, lower id on ties.
std::vector<std::uint32_t> select_clusters(const IvfPqIndex& idx, std::span<const float> q, std::size_t nprobe);

/// entry[j][c] = |sub_j(residual_query) - center(j, c)|^2 computed in float,
/// then stored in `precision`.
Lut build_lut(const PQCodebook& cb, std::span<const float> residual_query, LutPrecision precision);

/// R = sum over subspaces of the decoded table entries selected by each code,
/// accumulated in float in subspace order. Appends to `out`.
void scan_list(const InvertedList& list, const Lut& lut, std::vector<Candidate>& out);
std::vector<Candidate> scan_list(const InvertedList& list, const Lut& lut);

TopK top_k(std::vector<Candidate> candidates, std::size_t k);

TopK search(const IvfPqIndex& idx, std::span<const float> q, const SearchParams& params);

struct BatchResult {
    NeighborLists results;  // short rows padded with id -1
    std::size_t short_rows = 0;
};

BatchResult search_batch(const IvfPqIndex& idx, const VectorSet& queries, const SearchParams& params);

struct RecallReport {
    std::vector<double> per_query;
    double mean = 0.0;
};

/// |ids(result row) ∩ ids(gt row)| / |gt row|. When gt has more columns than
/// results, only its first results.k columns count (recall@k). Missing result
/// slots (-1) count as misses.
RecallReport recall(const NeighborLists& results, const NeighborLists& gt);

}  // namespace fp8ann
