#include "fp8ann/search.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "fp8ann/minifloat.hpp"

namespace fp8ann {

std::size_t element_bytes(LutPrecision precision) {
    switch (precision) {
        case LutPrecision::f32:
            return 4;
        case LutPrecision::f16:
            return 2;
        case LutPrecision::e5m3:
        case LutPrecision::e4m4:
            return 1;
    }
    return 0;
}

std::string_view to_string(LutPrecision precision) {
    switch (precision) {
        case LutPrecision::f32:
            return "f32";
        case LutPrecision::f16:
            return "f16";
        case LutPrecision::e5m3:
            return "e5m3";
        case LutPrecision::e4m4:
            return "e4m4";
    }
    return "?";
}

std::optional<LutPrecision> parse_precision(std::string_view name) {
    for (const auto p : {LutPrecision::f32, LutPrecision::f16, LutPrecision::e5m3, LutPrecision::e4m4}) {
        if (to_string(p) == name) {
            return p;
        }
    }
    return std::nullopt;
}

Lut::Lut(std::size_t s, std::size_t ksub, LutPrecision precision)
    : s_(s), ksub_(ksub), precision_(precision), bytes_(s * ksub * element_bytes(precision), 0) {}

void Lut::store(std::size_t subspace, std::size_t code, float value) {
    const std::size_t slot = subspace * ksub_ + code;
    switch (precision_) {
        case LutPrecision::f32:
            std::memcpy(bytes_.data() + slot * 4, &value, 4);
            break;
        case LutPrecision::f16: {
            const auto h = encode_storage16(value);
            std::memcpy(bytes_.data() + slot * 2, &h, 2);
            break;
        }
        case LutPrecision::e5m3:
            bytes_[slot] = encode(value, kE5M3);
            break;
        case LutPrecision::e4m4:
            bytes_[slot] = encode(value, kE4M4);
            break;
    }
}

float Lut::value(std::size_t subspace, std::size_t code) const {
    const std::size_t slot = subspace * ksub_ + code;
    switch (precision_) {
        case LutPrecision::f32: {
            float v;
            std::memcpy(&v, bytes_.data() + slot * 4, 4);
            return v;
        }
        case LutPrecision::f16: {
            std::uint16_t h;
            std::memcpy(&h, bytes_.data() + slot * 2, 2);
            return decode_storage16(h);
        }
        case LutPrecision::e5m3:
            return decode(bytes_[slot], kE5M3);
        case LutPrecision::e4m4:
            return decode(bytes_[slot], kE4M4);
    }
    return 0.0f;
}

std::vector<std::uint32_t> select_clusters(const IvfPqIndex& idx, std::span<const float> q, std::size_t nprobe) {
    if (nprobe < 1 || nprobe > idx.nlist) {
        throw std::invalid_argument("nprobe must be in [1, " + std::to_string(idx.nlist) + "], got " +
                                    std::to_string(nprobe));
    }
    if (q.size() != idx.d) {
        throw std::invalid_argument("query dimension mismatch");
    }
    std::vector<std::pair<float, std::uint32_t>> scored(idx.nlist);
    for (std::size_t c = 0; c < idx.nlist; ++c) {
        scored[c] = {l2_sqr(q, idx.coarse.row(c)), static_cast<std::uint32_t>(c)};
    }
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(nprobe), scored.end());
    std::vector<std::uint32_t> out(nprobe);
    for (std::size_t i = 0; i < nprobe; ++i) {
        out[i] = scored[i].second;
    }
    return out;
}

Lut build_lut(const PQCodebook& cb, std::span<const float> residual_query, LutPrecision precision) {
    if (residual_query.size() != cb.d()) {
        throw std::invalid_argument("build_lut: residual length mismatch");
    }
    Lut lut(cb.s, cb.ksub(), precision);
    for (std::size_t j = 0; j < cb.s; ++j) {
        const auto sub = residual_query.subspan(j * cb.sub_d, cb.sub_d);
        for (std::size_t c = 0; c < cb.ksub(); ++c) {
            lut.store(j, c, l2_sqr(sub, cb.center(j, c)));
        }
    }
    return lut;
}

namespace {

// Decoders for the packed table, one per storage type.
struct F32Table {
    const std::uint8_t* bytes;
    float operator()(std::size_t slot) const {
        float v;
        std::memcpy(&v, bytes + slot * 4, 4);
        return v;
    }
};
struct F16Table {
    const std::uint8_t* bytes;
    float operator()(std::size_t slot) const {
        std::uint16_t h;
        std::memcpy(&h, bytes + slot * 2, 2);
        return decode_storage16(h);
    }
};
template <const MiniFloatSpec& Spec>
struct MiniTable {
    const std::uint8_t* bytes;
    float operator()(std::size_t slot) const { return decode(bytes[slot], Spec); }
};

template <typename Table>
void accumulate(const InvertedList& list, std::size_t s, std::size_t ksub, Table table, std::vector<Candidate>& out) {
    const std::uint8_t* code = list.codes.data();
    for (std::size_t i = 0; i < list.size(); ++i, code += s) {
        float r = 0.0f;
        for (std::size_t j = 0; j < s; ++j) {
            if (code[j] >= ksub) {
                throw std::out_of_range("scan_list: code byte exceeds table width");
            }
            r += table(j * ksub + code[j]);
        }
        out.push_back({static_cast<std::int64_t>(list.ids[i]), r});
    }
}

}  // namespace

void scan_list(const InvertedList& list, const Lut& lut, std::vector<Candidate>& out) {
    if (list.codes.size() != list.size() * lut.s()) {
        throw std::invalid_argument("scan_list: code length does not match table");
    }
    const auto* bytes = lut.raw().data();
    switch (lut.precision()) {
        case LutPrecision::f32:
            accumulate(list, lut.s(), lut.ksub(), F32Table{bytes}, out);
            break;
        case LutPrecision::f16:
            accumulate(list, lut.s(), lut.ksub(), F16Table{bytes}, out);
            break;
        case LutPrecision::e5m3:
            accumulate(list, lut.s(), lut.ksub(), MiniTable<kE5M3>{bytes}, out);
            break;
        case LutPrecision::e4m4:
            accumulate(list, lut.s(), lut.ksub(), MiniTable<kE4M4>{bytes}, out);
            break;
    }
}

std::vector<Candidate> scan_list(const InvertedList& list, const Lut& lut) {
    std::vector<Candidate> out;
    out.reserve(list.size());
    scan_list(list, lut, out);
    return out;
}

TopK top_k(std::vector<Candidate> candidates, std::size_t k) {
    TopK result;
    if (candidates.size() <= k) {
        std::sort(candidates.begin(), candidates.end(), candidate_less);
        result.short_count = candidates.size() < k;
        result.items = std::move(candidates);
        return result;
    }
    const auto middle = candidates.begin() + static_cast<std::ptrdiff_t>(k);
    std::partial_sort(candidates.begin(), middle, candidates.end(), candidate_less);
    candidates.erase(middle, candidates.end());
    result.items = std::move(candidates);
    return result;
}

TopK search(const IvfPqIndex& idx, std::span<const float> q, const SearchParams& params) {
    if (params.k < 1) {
        throw std::invalid_argument("k must be at least 1");
    }
    const auto clusters = select_clusters(idx, q, params.nprobe);
    std::vector<Candidate> candidates;
    std::vector<float> residual(idx.d);
    for (const auto c : clusters) {
        const auto centroid = idx.coarse.row(c);
        for (std::size_t j = 0; j < idx.d; ++j) {
            residual[j] = q[j] - centroid[j];
        }
        // Residuals are centroid-relative, so every probed cluster needs its own table.
        const auto lut = build_lut(idx.cb, residual, params.precision);
        scan_list(idx.lists[c], lut, candidates);
    }
    return top_k(std::move(candidates), params.k);
}

BatchResult search_batch(const IvfPqIndex& idx, const VectorSet& queries, const SearchParams& params) {
    if (queries.d != idx.d) {
        throw std::invalid_argument("query dimension " + std::to_string(queries.d) + " does not match index d " +
                                    std::to_string(idx.d));
    }
    BatchResult out{NeighborLists(queries.n, params.k), 0};
    for (std::size_t qi = 0; qi < queries.n; ++qi) {
        const auto top = search(idx, queries.row(qi), params);
        auto ids = out.results.ids_row(qi);
        auto dists = out.results.distances_row(qi);
        for (std::size_t j = 0; j < top.items.size(); ++j) {
            ids[j] = top.items[j].id;
            dists[j] = top.items[j].distance;
        }
        out.short_rows += top.short_count ? 1 : 0;
    }
    return out;
}

RecallReport recall(const NeighborLists& results, const NeighborLists& gt) {
    if (results.q != gt.q) {
        throw std::invalid_argument("recall: query count mismatch (" + std::to_string(results.q) + " vs " +
                                    std::to_string(gt.q) + ")");
    }
    if (gt.k < results.k || results.k == 0) {
        throw std::invalid_argument("recall: ground truth has " + std::to_string(gt.k) + " columns, results have " +
                                    std::to_string(results.k));
    }
    RecallReport report;
    report.per_query.resize(results.q);
    double total = 0.0;
    std::unordered_set<std::int64_t> truth;
    for (std::size_t i = 0; i < results.q; ++i) {
        const auto gt_row = gt.ids_row(i).first(results.k);
        truth.clear();
        truth.insert(gt_row.begin(), gt_row.end());
        std::size_t hits = 0;
        for (const auto id : results.ids_row(i)) {
            if (id >= 0 && truth.erase(id) > 0) {
                ++hits;
            }
        }
        report.per_query[i] = static_cast<double>(hits) / static_cast<double>(gt_row.size());
        total += report.per_query[i];
    }
    report.mean = results.q == 0 ? 0.0 : total / static_cast<double>(results.q);
    return report;
}

}  // namespace fp8ann
